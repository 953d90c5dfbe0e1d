#pragma once

#include <cstdint>
#include <vector>

#include "higrid/stft.hpp"

namespace higrid {

/// Spectral-flux onset detector with a maximum-filtered reference spectrum:
/// flux(t) = sum_b max(0, |X(t,b)| - maxfilter_b(|X(t-lag, b)|)). Peaks are
/// local maxima over +-peak_radius frames that exceed the local average by
/// delta_rel of the global flux maximum, separated by min_separation frames.
struct OnsetParams {
  int lag_frames = 3;
  int max_filter_radius = 1;
  int peak_radius = 8;
  int avg_radius = 32;
  double delta_rel = 0.05;
  int min_separation = 8;
  /// Flux below rel_floor times the reference magnitude scale is treated as
  /// numerical silence (keeps steady tones from registering noise peaks
  /// while staying invariant to global gain).
  double rel_floor = 1e-9;
};

std::vector<double> spectral_flux(const Spectrogram& spec, const OnsetParams& params);

/// Magnitude scale of a spectrogram: the largest per-frame magnitude sum.
double magnitude_scale(const Spectrogram& spec);

/// Peak picking over the flux curve; `scale` (if positive) sets the absolute
/// silence floor rel_floor * scale.
std::vector<int> pick_onsets(const std::vector<double>& flux, const OnsetParams& params,
                             double scale = 0.0);

struct TfBin {
  int frame = 0;
  int bin = 0;
};

/// Onset frames plus the in-band bins selected within them.
struct TfSelection {
  std::vector<int> onset_frames;
  std::vector<TfBin> bins;   // sorted by (frame, bin)
  double f_lo = 0.0, f_hi = 0.0;
};

struct BinSelectParams {
  double f_lo = 2608.0;
  double f_hi = 5216.0;
  OnsetParams onset;
  /// Bins whose in-band normalized energy exceeds this quantile of the frame
  /// are kept; 0 keeps everything above the frame mean (the default rule).
  double energy_quantile = 0.0;
};

/// Selects the analysis bins of the omnidirectional spectrogram: onset frames
/// from the flux detector, then in-band bins whose energy is above the frame
/// mean (or the configured quantile). An empty selection is a valid result.
TfSelection select_bins(const Spectrogram& omni, const BinSelectParams& params, double fs, int win);

}  // namespace higrid
