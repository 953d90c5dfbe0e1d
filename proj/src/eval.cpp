#include "higrid/eval.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>
#include <random>
#include <stdexcept>

#include <json.hpp>

namespace higrid {

std::vector<int> hungarian_min_cost(const std::vector<std::vector<double>>& cost) {
  const int n = static_cast<int>(cost.size());
  if (n == 0) return {};
  const int m = static_cast<int>(cost.front().size());
  if (m < n) throw std::invalid_argument("hungarian: needs rows <= cols");
  const double inf = std::numeric_limits<double>::infinity();

  // shortest augmenting paths with potentials, 1-based
  std::vector<double> u(n + 1, 0.0), v(m + 1, 0.0);
  std::vector<int> p(m + 1, 0), way(m + 1, 0);
  for (int i = 1; i <= n; ++i) {
    p[0] = i;
    int j0 = 0;
    std::vector<double> minv(m + 1, inf);
    std::vector<char> used(m + 1, 0);
    do {
      used[j0] = 1;
      int i0 = p[j0], j1 = -1;
      double delta = inf;
      for (int j = 1; j <= m; ++j) {
        if (used[j]) continue;
        double cur = cost[i0 - 1][j - 1] - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (int j = 0; j <= m; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      int j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0);
  }
  std::vector<int> row_to_col(n, -1);
  for (int j = 1; j <= m; ++j)
    if (p[j] > 0) row_to_col[p[j] - 1] = j - 1;
  return row_to_col;
}

std::vector<std::pair<int, int>> hungarian_assign(const std::vector<Vec3>& est,
                                                  const std::vector<Vec3>& truth) {
  if (est.empty() || truth.empty())
    throw std::invalid_argument("hungarian: both direction lists must be nonempty");
  const bool est_rows = est.size() <= truth.size();
  const auto& rows = est_rows ? est : truth;
  const auto& cols = est_rows ? truth : est;
  std::vector<std::vector<double>> cost(rows.size(), std::vector<double>(cols.size()));
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < cols.size(); ++j) cost[i][j] = angle_between(rows[i], cols[j]);
  std::vector<int> match = hungarian_min_cost(cost);
  std::vector<std::pair<int, int>> pairs;
  for (std::size_t i = 0; i < match.size(); ++i) {
    if (est_rows)
      pairs.emplace_back(static_cast<int>(i), match[i]);
    else
      pairs.emplace_back(match[i], static_cast<int>(i));
  }
  std::sort(pairs.begin(), pairs.end());
  return pairs;
}

DoaErrors doa_error(const std::vector<std::pair<Vec3, Vec3>>& assigned) {
  DoaErrors out;
  double sum = 0.0;
  int kept = 0;
  for (const auto& [a, b] : assigned) {
    double deg = rad2deg(angle_between(a, b));
    out.per_pair_deg.push_back(deg);
    if (deg > 45.0) {
      ++out.extreme_count;
    } else {
      sum += deg;
      ++kept;
    }
  }
  out.mean_deg = kept > 0 ? sum / kept : 0.0;
  return out;
}

namespace {

using nlohmann::json;

json trial_json(const TrialResult& t) {
  json j;
  j["s_act"] = t.s_act;
  j["s_est"] = t.s_est;
  j["snr_db"] = std::isinf(t.snr_db) ? json("inf") : json(t.snr_db);
  j["seed"] = t.seed;
  j["errors_deg"] = t.errors_deg;
  j["mean_error_deg"] = t.mean_error_deg;
  j["extreme_count"] = t.extreme_count;
  j["delta_s"] = t.delta_s;
  j["failed"] = t.failed;
  if (!t.note.empty()) j["note"] = t.note;
  return j;
}

}  // namespace

std::string EvalReport::to_json_text() const {
  json j;
  j["trials"] = json::array();
  for (const TrialResult& t : trials) j["trials"].push_back(trial_json(t));
  j["cases"] = json::array();
  for (const EvalCase& c : cases) {
    json jc;
    jc["s_act"] = c.s_act;
    jc["snr_db"] = std::isinf(c.snr_db) ? json("inf") : json(c.snr_db);
    jc["trials"] = c.trials;
    jc["s_avg"] = c.s_avg;
    jc["mean_error_deg"] = c.mean_error_deg;
    jc["negative_disparity"] = c.negative_disparity;
    jc["extreme_total"] = c.extreme_total;
    j["cases"].push_back(jc);
  }
  return j.dump(2) + "\n";
}

std::string EvalReport::to_csv_text() const {
  std::string out = "s_act,snr_db,trials,s_avg,mean_error_deg,negative_disparity,extreme_total\n";
  char buf[256];
  for (const EvalCase& c : cases) {
    std::snprintf(buf, sizeof(buf), "%d,%.17g,%d,%.17g,%.17g,%d,%d\n", c.s_act, c.snr_db, c.trials,
                  c.s_avg, c.mean_error_deg, c.negative_disparity, c.extreme_total);
    out += buf;
  }
  return out;
}

EvalReport run_experiment(const ExperimentConfig& cfg, const ArrayGeometry& geom,
                          const CdCache* cache) {
  EvalReport report;
  CdCache local_cache;
  if (!cache) {
    local_cache = CdCache::build(cfg.pipeline.l_max, geom.max_order, cfg.pipeline.sub_depth,
                                 cfg.pipeline.energy_threshold, cfg.pipeline.jobs);
    cache = &local_cache;
  }
  std::vector<double> snrs = cfg.snr_values;
  if (snrs.empty()) snrs.push_back(std::numeric_limits<double>::infinity());

  for (int s : cfg.s_values) {
    for (std::size_t si = 0; si < snrs.size(); ++si) {
      EvalCase agg;
      agg.s_act = s;
      agg.snr_db = snrs[si];
      double err_sum = 0.0;
      int err_cases = 0;
      long s_est_sum = 0;
      for (int t = 0; t < cfg.trials; ++t) {
        TrialResult trial;
        trial.s_act = s;
        trial.snr_db = snrs[si];
        trial.seed = derive_seed(cfg.seed, static_cast<std::uint64_t>(s) * 1000 + t,
                                 static_cast<std::uint64_t>(si));
        try {
          SceneSpec scene = random_scenario(s, cfg.min_sep, trial.seed);
          if (!std::isinf(snrs[si])) scene.snr_db = snrs[si];
          auto signals = synth_time_signals(scene, geom);
          if (scene.snr_db) add_noise(signals, *scene.snr_db, scene.seed);

          PipelineConfig pc = cfg.pipeline;
          pc.seed = trial.seed;
          LocalizeResult res = localize(signals, geom, pc, cache);
          trial.s_est = static_cast<int>(res.doas.size());
          trial.delta_s = trial.s_est - s;
          if (res.empty) {
            trial.failed = true;
            trial.note = "no bins selected";
          } else if (!res.doas.empty()) {
            std::vector<Vec3> est, truth;
            for (const DoaEstimate& d : res.doas) est.push_back(d.dir);
            for (const SceneSource& src : scene.sources)
              truth.push_back(unit_vector(src.theta, src.phi));
            std::vector<std::pair<Vec3, Vec3>> pairs;
            for (auto [ei, ti] : hungarian_assign(est, truth))
              pairs.emplace_back(est[ei], truth[ti]);
            DoaErrors errs = doa_error(pairs);
            trial.errors_deg = errs.per_pair_deg;
            trial.mean_error_deg = errs.mean_deg;
            trial.extreme_count = errs.extreme_count;
          }
        } catch (const std::exception& e) {
          trial.failed = true;
          trial.note = e.what();
        }
        if (!trial.failed) {
          s_est_sum += trial.s_est;
          if (trial.delta_s < 0) ++agg.negative_disparity;
          if (!trial.errors_deg.empty()) {
            err_sum += trial.mean_error_deg;
            ++err_cases;
          }
          agg.extreme_total += trial.extreme_count;
          ++agg.trials;
        }
        report.trials.push_back(std::move(trial));
      }
      agg.s_avg = agg.trials > 0 ? static_cast<double>(s_est_sum) / agg.trials : 0.0;
      agg.mean_error_deg = err_cases > 0 ? err_sum / err_cases : 0.0;
      report.cases.push_back(agg);
    }
  }
  return report;
}

std::vector<double> srp_scan(const SteeringVector& sv, int level, int order) {
  const std::int64_t n = pixel_count(level);
  std::vector<double> out(n);
  std::vector<cplx> y(sh_count(order));
  for (std::int64_t p = 0; p < n; ++p) {
    auto [theta, phi] = pix_center({level, p});
    sph_harmonics_all(order, theta, phi, y.data());
    cplx acc{0.0, 0.0};
    for (std::size_t i = 0; i < y.size(); ++i) acc += sv.p[static_cast<Eigen::Index>(i)] * y[i];
    out[p] = std::norm(acc);
  }
  return out;
}

BenchReport bench_cost(const BenchConfig& cfg) {
  using clock = std::chrono::steady_clock;
  BenchReport report;
  report.freq_hz = cfg.freq_hz;
  const double k = kTwoPi * cfg.freq_hz / 343.0;

  const int cache_l_max = *std::max_element(cfg.levels.begin(), cfg.levels.end());
  CdCache cache = CdCache::build(cache_l_max, cfg.order, cfg.sub_depth, cfg.energy_threshold,
                                 cfg.jobs);

  for (int level : cfg.levels) {
    for (int s : cfg.s_values) {
      BenchRow row;
      row.level = level;
      row.s = s;
      row.reps = cfg.reps;
      row.full_grid_evals = pixel_count(level);
      double eval_sum = 0.0;
      double t_higrid = 0.0, t_srp = 0.0;
      for (int rep = 0; rep < cfg.reps; ++rep) {
        const std::uint64_t rep_seed =
            derive_seed(cfg.seed, static_cast<std::uint64_t>(level) * 100 + s, rep);
        auto dirs = random_directions(s, cfg.min_sep, rep_seed);
        std::vector<PlaneWaveSource> waves;
        for (auto [theta, phi] : dirs) waves.push_back({cplx{1.0, 0.0}, theta, phi});
        ShdFrame frame = plane_wave_shd(waves, k, cfg.order, cfg.r_a);
        SteeringVector sv = steering_vector(frame, cfg.r_a);

        RefinementPolicy policy;
        policy.l_max = level;
        policy.rng_seed = rep_seed;
        auto t0 = clock::now();
        SrpdMap map = higrid_run(sv, cache, policy);
        auto t1 = clock::now();
        eval_sum += static_cast<double>(map.evaluation_count);
        if (cfg.measure_time) {
          auto t2 = clock::now();
          volatile double sink = 0.0;
          auto scan = srp_scan(sv, level, cfg.order);
          for (double v : scan) sink += v;
          (void)sink;
          auto t3 = clock::now();
          t_higrid += std::chrono::duration<double, std::milli>(t1 - t0).count();
          t_srp += std::chrono::duration<double, std::milli>(t3 - t2).count();
        }
      }
      row.mean_higrid_evals = eval_sum / cfg.reps;
      row.count_ratio = row.mean_higrid_evals / static_cast<double>(row.full_grid_evals);
      if (cfg.measure_time && t_srp > 0.0) {
        row.mean_higrid_ms = t_higrid / cfg.reps;
        row.mean_srp_ms = t_srp / cfg.reps;
        row.time_ratio = t_higrid / t_srp;
      }
      report.rows.push_back(row);
    }
  }
  return report;
}

namespace {

json bench_row_json(const BenchRow& r, bool with_time) {
  json j;
  j["level"] = r.level;
  j["s"] = r.s;
  j["reps"] = r.reps;
  j["mean_higrid_evals"] = r.mean_higrid_evals;
  j["full_grid_evals"] = r.full_grid_evals;
  j["count_ratio"] = r.count_ratio;
  if (with_time) {
    j["mean_higrid_ms"] = r.mean_higrid_ms;
    j["mean_srp_ms"] = r.mean_srp_ms;
    j["time_ratio"] = r.time_ratio;
  }
  return j;
}

}  // namespace

std::string BenchReport::to_json_text() const {
  json j;
  j["freq_hz"] = freq_hz;
  j["rows"] = json::array();
  for (const BenchRow& r : rows) j["rows"].push_back(bench_row_json(r, false));
  return j.dump(2) + "\n";
}

std::string BenchReport::timings_json_text() const {
  json j;
  j["freq_hz"] = freq_hz;
  j["rows"] = json::array();
  for (const BenchRow& r : rows) j["rows"].push_back(bench_row_json(r, true));
  return j.dump(2) + "\n";
}

std::pair<double, double> mollweide(double theta, double phi) {
  const double lat = kPi / 2.0 - theta;
  double lon = std::fmod(phi - kPi, kTwoPi);
  if (lon < -kPi) lon += kTwoPi;
  if (lon >= kPi) lon -= kTwoPi;
  // solve 2a + sin(2a) = pi sin(lat)
  double a = lat;
  const double target = kPi * std::sin(lat);
  for (int it = 0; it < 50; ++it) {
    double f = 2.0 * a + std::sin(2.0 * a) - target;
    double fp = 2.0 + 2.0 * std::cos(2.0 * a);
    if (std::fabs(fp) < 1e-14) break;
    double step = f / fp;
    a -= step;
    if (std::fabs(step) < 1e-14) break;
  }
  return {2.0 * std::sqrt(2.0) / kPi * lon * std::cos(a), std::sqrt(2.0) * std::sin(a)};
}

std::string map_plot_csv(const SrpdMap& map) {
  std::string out = "level,index,theta,phi,value,moll_x,moll_y\n";
  char buf[320];
  for (const LeafValue& lf : map.leaves) {
    auto [theta, phi] = pix_center(lf.node);
    auto [x, y] = mollweide(theta, phi);
    std::snprintf(buf, sizeof(buf), "%d,%lld,%.17g,%.17g,%.17g,%.17g,%.17g\n", lf.node.level,
                  static_cast<long long>(lf.node.index), theta, phi, lf.value, x, y);
    out += buf;
  }
  return out;
}

std::string doa_plot_csv(const std::vector<DoaEstimate>& doas) {
  std::string out = "theta_deg,phi_deg,support,moll_x,moll_y\n";
  char buf[256];
  for (const DoaEstimate& d : doas) {
    auto [x, y] = mollweide(d.theta, d.phi);
    std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%ld,%.17g,%.17g\n", rad2deg(d.theta),
                  rad2deg(d.phi), d.support, x, y);
    out += buf;
  }
  return out;
}

}  // namespace higrid
