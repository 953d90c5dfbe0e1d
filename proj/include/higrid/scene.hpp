#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "higrid/geometry.hpp"

namespace higrid {

/// Source excitation models for the simulator.
struct BurstSpec {
  double t = 0.0;    // burst start, seconds
  double dur = 0.2;  // seconds
};

struct SignalSpec {
  std::string type = "noise_burst";  // "noise_burst" | "tone" | "wav"
  /// Mixes into the excitation RNG seed; sources sharing a tag (and band)
  /// replay literally the same noise, which is how coherent scenes are built.
  int seed_tag = 0;
  // noise_burst
  double band_lo = 2608.0;
  double band_hi = 5216.0;
  std::vector<BurstSpec> bursts;
  // tone
  double freq = 3000.0;
  double t0 = 0.0;
  double dur = 0.0;  // 0 = full scene
  // wav
  std::string path;
  int channel = 0;
};

struct SceneSource {
  double theta = 0.0;
  double phi = 0.0;
  double gain = 1.0;
  SignalSpec signal;
};

/// Additional coherent plane waves replaying a source's signal with a complex
/// gain (a specular-reflection stand-in).
struct ExtraComponent {
  int source = 0;
  double theta = 0.0;
  double phi = 0.0;
  cplx gain{0.5, 0.0};
};

struct SceneSpec {
  std::vector<SceneSource> sources;
  std::vector<ExtraComponent> extra_components;
  std::optional<double> snr_db;  // absent = noiseless
  std::uint64_t seed = 0;
  double duration_s = 1.2;
  double fs = 48000.0;
  double c = 343.0;

  static SceneSpec from_json_file(const std::string& path);
  static SceneSpec from_json_text(const std::string& text);
  std::string to_json_text() const;
};

/// Rigid-sphere surface pressures at the mics of `geom` for plane waves with
/// amplitudes `sources[i].amplitude` at wavenumber k, synthesized up to order
/// n_synth (0 = ceil(k r_a) + 8).
std::vector<cplx> synth_pressures(std::span<const PlaneWaveSource> sources,
                                  const ArrayGeometry& geom, double k, int n_synth = 0);

/// Time-domain mic signals: per source, the per-bin rigid-sphere transfer is
/// applied to the source STFT and overlap-added; sources and extra components
/// sum. Returns channels x samples.
std::vector<std::vector<double>> synth_time_signals(const SceneSpec& scene,
                                                    const ArrayGeometry& geom);

/// Renders a source's excitation signal (deterministic given scene.seed).
std::vector<double> render_source_signal(const SceneSpec& scene, int source_index);

/// Adds per-channel independent white Gaussian noise scaled so that
/// 10 log10(E_omni / E_noise_per_channel) = snr_db, with E_omni the energy of
/// the channel-average signal. Infinite snr leaves the input unchanged.
void add_noise(std::vector<std::vector<double>>& signals, double snr_db, std::uint64_t seed);

/// S directions uniform on the sphere with pairwise separation > min_sep
/// (rejection sampling; throws after bounded retries when infeasible).
std::vector<std::pair<double, double>> random_directions(int count, double min_sep,
                                                         std::uint64_t seed);

/// A scene of `count` noise-burst sources at random directions with staggered
/// onsets; ground truth for the evaluation harness.
SceneSpec random_scenario(int count, double min_sep, std::uint64_t seed);

}  // namespace higrid
