#include "higrid/onsets.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace higrid {

std::vector<double> spectral_flux(const Spectrogram& spec, const OnsetParams& params) {
  const int frames = spec.frames;
  const int bins = spec.bins;
  std::vector<double> mag(static_cast<std::size_t>(frames) * bins);
  for (int f = 0; f < frames; ++f)
    for (int b = 0; b < bins; ++b)
      mag[static_cast<std::size_t>(f) * bins + b] = std::abs(spec.at(f, b));

  std::vector<double> flux(frames, 0.0);
  const int r = params.max_filter_radius;
  for (int f = 0; f < frames; ++f) {
    int ref = f - params.lag_frames;
    if (ref < 0) continue;
    double acc = 0.0;
    for (int b = 0; b < bins; ++b) {
      double refmax = 0.0;
      for (int bb = std::max(0, b - r); bb <= std::min(bins - 1, b + r); ++bb)
        refmax = std::max(refmax, mag[static_cast<std::size_t>(ref) * bins + bb]);
      double d = mag[static_cast<std::size_t>(f) * bins + b] - refmax;
      if (d > 0.0) acc += d;
    }
    flux[f] = acc;
  }
  return flux;
}

double magnitude_scale(const Spectrogram& spec) {
  double scale = 0.0;
  for (int f = 0; f < spec.frames; ++f) {
    double sum = 0.0;
    for (int b = 0; b < spec.bins; ++b) sum += std::abs(spec.at(f, b));
    scale = std::max(scale, sum);
  }
  return scale;
}

std::vector<int> pick_onsets(const std::vector<double>& flux, const OnsetParams& params,
                             double scale) {
  const int n = static_cast<int>(flux.size());
  double global_max = 0.0;
  for (double v : flux) global_max = std::max(global_max, v);
  const double floor = scale > 0.0 ? params.rel_floor * scale : 0.0;
  if (!(global_max > floor) || !(global_max > 0.0)) return {};
  const double delta = params.delta_rel * global_max;

  std::vector<int> onsets;
  int last = -params.min_separation - 1;
  for (int f = 0; f < n; ++f) {
    bool local_max = flux[f] > 0.0;
    for (int g = std::max(0, f - params.peak_radius);
         g <= std::min(n - 1, f + params.peak_radius) && local_max; ++g) {
      if (flux[g] > flux[f]) local_max = false;
      if (flux[g] == flux[f] && g < f) local_max = false;  // leftmost of a plateau
    }
    if (!local_max) continue;
    double avg = 0.0;
    int cnt = 0;
    for (int g = std::max(0, f - params.avg_radius); g <= std::min(n - 1, f + params.avg_radius);
         ++g) {
      avg += flux[g];
      ++cnt;
    }
    avg /= cnt;
    if (flux[f] < avg + delta) continue;
    if (flux[f] <= floor) continue;
    if (f - last < params.min_separation) continue;
    onsets.push_back(f);
    last = f;
  }
  return onsets;
}

TfSelection select_bins(const Spectrogram& omni, const BinSelectParams& params, double fs,
                        int win) {
  if (!(params.f_lo >= 0.0) || !(params.f_hi > params.f_lo))
    throw std::invalid_argument("onsets: invalid band limits");

  TfSelection sel;
  sel.f_lo = params.f_lo;
  sel.f_hi = params.f_hi;

  const double bin_hz = fs / win;
  int b_lo = static_cast<int>(std::ceil(params.f_lo / bin_hz));
  int b_hi = static_cast<int>(std::floor(params.f_hi / bin_hz));
  b_lo = std::max(b_lo, 0);
  b_hi = std::min(b_hi, omni.bins - 1);
  if (b_lo > b_hi) return sel;

  std::vector<double> flux = spectral_flux(omni, params.onset);
  sel.onset_frames = pick_onsets(flux, params.onset, magnitude_scale(omni));

  for (int f : sel.onset_frames) {
    std::vector<double> e(b_hi - b_lo + 1);
    double sum = 0.0;
    for (int b = b_lo; b <= b_hi; ++b) {
      e[b - b_lo] = std::norm(omni.at(f, b));
      sum += e[b - b_lo];
    }
    if (!(sum > 0.0)) continue;
    double cutoff;
    if (params.energy_quantile > 0.0) {
      std::vector<double> sorted = e;
      std::sort(sorted.begin(), sorted.end());
      std::size_t idx = static_cast<std::size_t>(params.energy_quantile * (sorted.size() - 1));
      cutoff = sorted[idx];
    } else {
      cutoff = sum / static_cast<double>(e.size());  // frame mean
    }
    for (int b = b_lo; b <= b_hi; ++b)
      if (e[b - b_lo] > cutoff) sel.bins.push_back({f, b});
  }
  std::sort(sel.bins.begin(), sel.bins.end(),
            [](const TfBin& a, const TfBin& b) { return std::pair(a.frame, a.bin) < std::pair(b.frame, b.bin); });
  return sel;
}

}  // namespace higrid
