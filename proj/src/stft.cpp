#include "higrid/stft.hpp"

#include <fftw3.h>

#include <cstring>
#include <map>
#include <mutex>
#include <stdexcept>

namespace higrid {
namespace {

bool is_pow2(int n) { return n > 0 && (n & (n - 1)) == 0; }

// FFTW plans per size, created once under a lock (plan creation is not
// thread-safe; execution on private buffers is).
struct Plans {
  fftw_plan fwd = nullptr;
  fftw_plan inv = nullptr;
};

std::mutex plan_mutex;
std::map<int, Plans>& plan_table() {
  static std::map<int, Plans> table;
  return table;
}

Plans get_plans(int n) {
  std::lock_guard<std::mutex> lock(plan_mutex);
  auto& table = plan_table();
  auto it = table.find(n);
  if (it != table.end()) return it->second;
  Plans p;
  double* in = fftw_alloc_real(n);
  fftw_complex* out = fftw_alloc_complex(n / 2 + 1);
  p.fwd = fftw_plan_dft_r2c_1d(n, in, out, FFTW_ESTIMATE);
  p.inv = fftw_plan_dft_c2r_1d(n, out, in, FFTW_ESTIMATE);
  fftw_free(in);
  fftw_free(out);
  table[n] = p;
  return p;
}

}  // namespace

void rfft(const double* in, std::complex<double>* out, int n) {
  if (!is_pow2(n)) throw std::invalid_argument("stft: fft size must be a power of two");
  Plans p = get_plans(n);
  std::vector<double> buf(in, in + n);
  fftw_execute_dft_r2c(p.fwd, buf.data(), reinterpret_cast<fftw_complex*>(out));
}

void irfft(const std::complex<double>* in, double* out, int n) {
  if (!is_pow2(n)) throw std::invalid_argument("stft: fft size must be a power of two");
  Plans p = get_plans(n);
  std::vector<std::complex<double>> buf(in, in + n / 2 + 1);
  fftw_execute_dft_c2r(p.inv, reinterpret_cast<fftw_complex*>(buf.data()), out);
  const double scale = 1.0 / n;
  for (int i = 0; i < n; ++i) out[i] *= scale;
}

std::vector<double> hann_window(int n) {
  std::vector<double> w(n);
  for (int i = 0; i < n; ++i) w[i] = 0.5 - 0.5 * std::cos(kTwoPi * i / n);
  return w;
}

Spectrogram stft(const std::vector<double>& signal, int win, int hop) {
  if (!is_pow2(win)) throw std::invalid_argument("stft: window must be a power of two");
  if (hop <= 0 || hop > win) throw std::invalid_argument("stft: hop must be in 1..win");
  if (static_cast<int>(signal.size()) < win)
    throw std::invalid_argument("stft: signal shorter than one window");

  const int frames = 1 + (static_cast<int>(signal.size()) - win) / hop;
  const int bins = win / 2 + 1;
  const std::vector<double> w = hann_window(win);

  Spectrogram spec;
  spec.frames = frames;
  spec.bins = bins;
  spec.data.resize(static_cast<std::size_t>(frames) * bins);

  std::vector<double> buf(win);
  for (int f = 0; f < frames; ++f) {
    const double* src = signal.data() + static_cast<std::size_t>(f) * hop;
    for (int i = 0; i < win; ++i) buf[i] = src[i] * w[i];
    rfft(buf.data(), &spec.at(f, 0), win);
  }
  return spec;
}

std::vector<Spectrogram> stft(const std::vector<std::vector<double>>& signals, int win, int hop) {
  std::vector<Spectrogram> out;
  out.reserve(signals.size());
  for (const auto& ch : signals) out.push_back(stft(ch, win, hop));
  return out;
}

Spectrogram omni_component(const std::vector<Spectrogram>& spectra) {
  if (spectra.empty()) throw std::invalid_argument("stft: no channels");
  Spectrogram omni = spectra.front();
  for (std::size_t q = 1; q < spectra.size(); ++q) {
    if (spectra[q].frames != omni.frames || spectra[q].bins != omni.bins)
      throw std::invalid_argument("stft: channel spectrogram shapes differ");
    for (std::size_t i = 0; i < omni.data.size(); ++i) omni.data[i] += spectra[q].data[i];
  }
  const double inv_q = 1.0 / static_cast<double>(spectra.size());
  for (auto& v : omni.data) v *= inv_q;
  return omni;
}

std::vector<std::vector<std::complex<double>>> stft_frame(
    const std::vector<std::vector<double>>& signals, int win, int frame_start) {
  if (!is_pow2(win)) throw std::invalid_argument("stft: window must be a power of two");
  const std::vector<double> w = hann_window(win);
  std::vector<std::vector<std::complex<double>>> out(signals.size());
  std::vector<double> buf(win);
  for (std::size_t q = 0; q < signals.size(); ++q) {
    if (frame_start < 0 || frame_start + win > static_cast<int>(signals[q].size()))
      throw std::out_of_range("stft: frame outside signal");
    for (int i = 0; i < win; ++i) buf[i] = signals[q][frame_start + i] * w[i];
    out[q].resize(win / 2 + 1);
    rfft(buf.data(), out[q].data(), win);
  }
  return out;
}

}  // namespace higrid
