#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "higrid/pipeline.hpp"
#include "higrid/scene.hpp"

namespace higrid {

/// Minimum-total-angular-error one-to-one assignment between estimates and
/// ground truth over the min(|est|,|truth|) cardinality; cost is the
/// great-circle angle. Returns (est index, truth index) pairs.
std::vector<std::pair<int, int>> hungarian_assign(const std::vector<Vec3>& est,
                                                  const std::vector<Vec3>& truth);

/// Minimum-cost assignment of a dense cost matrix (rows <= cols); returns
/// row -> column. Exposed for the oracle tests.
std::vector<int> hungarian_min_cost(const std::vector<std::vector<double>>& cost);

struct DoaErrors {
  std::vector<double> per_pair_deg;  // all assigned pairs, in pair order
  double mean_deg = 0.0;             // over the non-extreme pairs
  int extreme_count = 0;             // pairs with error > 45 degrees, excluded
};

/// Per-pair great-circle errors with the extreme-value rule applied.
DoaErrors doa_error(const std::vector<std::pair<Vec3, Vec3>>& assigned);

struct TrialResult {
  int s_act = 0;
  int s_est = 0;
  double snr_db = 0.0;  // +inf for noiseless
  std::uint64_t seed = 0;
  std::vector<double> errors_deg;
  double mean_error_deg = 0.0;
  int extreme_count = 0;
  int delta_s = 0;
  bool failed = false;
  std::string note;
};

struct EvalCase {
  int s_act = 0;
  double snr_db = 0.0;
  int trials = 0;
  double s_avg = 0.0;
  double mean_error_deg = 0.0;
  int negative_disparity = 0;
  int extreme_total = 0;
};

struct EvalReport {
  std::vector<TrialResult> trials;
  std::vector<EvalCase> cases;

  std::string to_json_text() const;
  std::string to_csv_text() const;
};

struct ExperimentConfig {
  std::vector<int> s_values = {1, 2, 3, 4};
  std::vector<double> snr_values = {};  // empty = noiseless only
  int trials = 10;
  double min_sep = kPi / 4.0;
  std::uint64_t seed = 0;
  PipelineConfig pipeline;
};

/// Drives scene synthesis, localization and metrics for every (S, SNR,
/// trial); per-trial failures are recorded, not fatal.
EvalReport run_experiment(const ExperimentConfig& cfg, const ArrayGeometry& geom,
                          const CdCache* cache = nullptr);

struct BenchRow {
  int level = 0;
  int s = 0;
  int reps = 0;
  double mean_higrid_evals = 0.0;
  std::int64_t full_grid_evals = 0;
  double count_ratio = 0.0;
  // wall-clock measurements; informational, not part of deterministic output
  double mean_higrid_ms = 0.0;
  double mean_srp_ms = 0.0;
  double time_ratio = 0.0;
};

struct BenchReport {
  std::vector<BenchRow> rows;
  double freq_hz = 3000.0;

  /// Deterministic fields only (counts and count ratios).
  std::string to_json_text() const;
  /// Including the wall-clock columns.
  std::string timings_json_text() const;
};

struct BenchConfig {
  std::vector<int> levels = {1, 2, 3, 4};
  std::vector<int> s_values = {1};
  int reps = 50;
  std::uint64_t seed = 0;
  double freq_hz = 3000.0;
  double min_sep = kPi / 4.0;
  int order = 4;
  double r_a = 0.042;
  int sub_depth = 4;
  double energy_threshold = 0.99;
  int jobs = 1;
  bool measure_time = true;
};

/// Coherent monochromatic plane-wave scenes: grid refinement vs. the full
/// uniform-grid steered scan on identical frames, counting srpd evaluations
/// and (optionally) wall-clock time.
BenchReport bench_cost(const BenchConfig& cfg);

/// Steered response power over every pixel center of a uniform level; the
/// brute-force baseline and the dense-scan oracle.
std::vector<double> srp_scan(const SteeringVector& sv, int level, int order);

/// Mollweide projection; (theta, phi) = (pi/2, pi) maps to the origin.
std::pair<double, double> mollweide(double theta, double phi);

/// CSV rows of (level, index, theta, phi, value, moll_x, moll_y).
std::string map_plot_csv(const SrpdMap& map);

/// CSV rows of DOA estimates (theta_deg, phi_deg, support, moll_x, moll_y).
std::string doa_plot_csv(const std::vector<DoaEstimate>& doas);

}  // namespace higrid
