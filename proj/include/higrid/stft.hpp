#pragma once

#include <complex>
#include <vector>

#include "higrid/util.hpp"

namespace higrid {

/// One channel's short-time spectra: frames x bins (one-sided), row-major.
struct Spectrogram {
  int frames = 0;
  int bins = 0;  // win/2 + 1
  std::vector<std::complex<double>> data;

  std::complex<double>& at(int frame, int bin) { return data[static_cast<std::size_t>(frame) * bins + bin]; }
  const std::complex<double>& at(int frame, int bin) const {
    return data[static_cast<std::size_t>(frame) * bins + bin];
  }
};

/// Periodic Hann window of length n.
std::vector<double> hann_window(int n);

/// Windowed one-sided FFT frames; frame f covers samples [f*hop, f*hop+win).
/// Requires power-of-two win, hop <= win, and at least one full window of
/// samples.
Spectrogram stft(const std::vector<double>& signal, int win, int hop);

/// Per-channel STFT of a multichannel signal.
std::vector<Spectrogram> stft(const std::vector<std::vector<double>>& signals, int win, int hop);

/// Omnidirectional component: the per-bin mean over channels.
Spectrogram omni_component(const std::vector<Spectrogram>& spectra);

/// One windowed frame of a multichannel signal transformed at once; used to
/// fetch per-mic pressures of selected bins without materializing all
/// channel spectrograms.
std::vector<std::vector<std::complex<double>>> stft_frame(
    const std::vector<std::vector<double>>& signals, int win, int frame_start);

/// Forward real FFT (one-sided) and its inverse; n must be a power of two.
void rfft(const double* in, std::complex<double>* out, int n);
void irfft(const std::complex<double>* in, double* out, int n);

}  // namespace higrid
