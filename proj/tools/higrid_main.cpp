// Command-line front end: scene simulation, localization, per-bin maps,
// cost benchmarks and batch evaluation.
//
// Exit codes: 0 ok, 2 usage/config error, 3 empty result, 4 numerical failure.

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "higrid/eval.hpp"
#include "higrid/wav.hpp"

using namespace higrid;
using nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 2;
constexpr int kExitEmpty = 3;
constexpr int kExitNumerical = 4;

void write_file_atomic(const std::string& path, const std::string& content) {
  namespace fs = std::filesystem;
  fs::path target(path);
  fs::path tmp = target;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw std::runtime_error("short write to " + tmp.string());
  }
  fs::rename(tmp, target);
}

PipelineConfig load_config(const std::string& path, std::uint64_t seed_flag, bool seed_set,
                           int jobs_flag, bool jobs_set) {
  PipelineConfig cfg = path.empty() ? PipelineConfig{} : PipelineConfig::from_json_file(path);
  if (seed_set) cfg.seed = seed_flag;
  if (jobs_set) cfg.jobs = jobs_flag;
  return cfg;
}

json doa_json(const LocalizeResult& res, std::uint64_t seed) {
  json j;
  j["seed"] = seed;
  j["n_sources"] = res.doas.size();
  j["doas"] = json::array();
  for (const DoaEstimate& d : res.doas)
    j["doas"].push_back({{"theta_deg", rad2deg(d.theta)},
                         {"phi_deg", rad2deg(d.phi)},
                         {"support", d.support}});
  j["bins_selected"] = res.bins_selected;
  j["bins_processed"] = res.bins_processed;
  j["evaluations"] = res.evaluations;
  j["onset_frames"] = res.onset_frames;
  j["empty"] = res.empty;
  return j;
}

int cmd_simulate(const std::string& scene_path, const std::string& geom_path,
                 const std::string& out_path, const std::string& sidecar,
                 std::uint64_t seed_flag, bool seed_set) {
  SceneSpec scene = SceneSpec::from_json_file(scene_path);
  if (seed_set) scene.seed = seed_flag;
  ArrayGeometry geom = ArrayGeometry::from_json_file(geom_path);
  auto signals = synth_time_signals(scene, geom);
  if (scene.snr_db) add_noise(signals, *scene.snr_db, scene.seed);

  WavData wav;
  wav.fs = scene.fs;
  wav.channels = std::move(signals);
  write_wav(out_path, wav);

  json truth;
  truth["seed"] = scene.seed;
  truth["fs"] = scene.fs;
  truth["duration_s"] = scene.duration_s;
  truth["sources"] = json::array();
  for (const SceneSource& s : scene.sources)
    truth["sources"].push_back({{"theta", s.theta}, {"phi", s.phi}});
  std::string side = sidecar.empty() ? out_path + ".truth.json" : sidecar;
  write_file_atomic(side, truth.dump(2) + "\n");
  std::cout << "wrote " << out_path << " (" << wav.channels.size() << " channels) and " << side
            << "\n";
  return kExitOk;
}

int cmd_localize(const std::string& in_path, const std::string& geom_path,
                 const std::string& cfg_path, const std::string& out_path,
                 const std::string& cache_path, std::uint64_t seed_flag, bool seed_set,
                 int jobs_flag, bool jobs_set) {
  ArrayGeometry geom = ArrayGeometry::from_json_file(geom_path);
  PipelineConfig cfg = load_config(cfg_path, seed_flag, seed_set, jobs_flag, jobs_set);
  WavData wav = read_wav(in_path);
  if (wav.channels.size() != geom.mic_count()) {
    std::cerr << "error: wav has " << wav.channels.size() << " channels, geometry expects "
              << geom.mic_count() << "\n";
    return kExitUsage;
  }
  cfg.fs = wav.fs;

  CdCache cache;
  const CdCache* cache_ptr = nullptr;
  if (!cache_path.empty() && std::filesystem::exists(cache_path)) {
    cache = CdCache::load(cache_path);
    cache_ptr = &cache;
  }
  LocalizeResult res = localize(wav.channels, geom, cfg, cache_ptr);
  write_file_atomic(out_path, doa_json(res, cfg.seed).dump(2) + "\n");
  std::cout << "n_sources=" << res.doas.size() << " bins=" << res.bins_selected
            << " evaluations=" << res.evaluations << " -> " << out_path << "\n";
  return res.empty ? kExitEmpty : kExitOk;
}

int cmd_map(const std::string& in_path, const std::string& geom_path, const std::string& cfg_path,
            int frame, int bin, const std::string& out_path, const std::string& plot_path,
            std::uint64_t seed_flag, bool seed_set) {
  ArrayGeometry geom = ArrayGeometry::from_json_file(geom_path);
  PipelineConfig cfg = load_config(cfg_path, seed_flag, seed_set, 0, false);
  WavData wav = read_wav(in_path);
  if (wav.channels.size() != geom.mic_count()) {
    std::cerr << "error: wav channel count does not match geometry\n";
    return kExitUsage;
  }
  cfg.fs = wav.fs;
  SrpdMap map = map_of_bin(wav.channels, geom, cfg, frame, bin);

  json j;
  j["seed"] = cfg.seed;
  j["frame"] = frame;
  j["bin"] = bin;
  j["l_max"] = map.l_max;
  j["silent"] = map.silent;
  j["evaluations"] = map.evaluation_count;
  j["directions_per_level"] = map.directions_per_level;
  j["leaves"] = json::array();
  for (const LeafValue& lf : map.leaves)
    j["leaves"].push_back({{"level", lf.node.level}, {"index", lf.node.index}, {"value", lf.value}});
  write_file_atomic(out_path, j.dump(2) + "\n");
  if (!plot_path.empty()) write_file_atomic(plot_path, map_plot_csv(map));
  std::cout << "map with " << map.leaves.size() << " leaves -> " << out_path << "\n";
  return map.silent ? kExitEmpty : kExitOk;
}

int cmd_bench(const std::string& out_path, const std::string& timings_path,
              std::vector<int> levels, std::vector<int> s_values, int reps, double freq,
              const std::string& geom_path, std::uint64_t seed_flag, bool seed_set, int jobs_flag,
              bool jobs_set) {
  BenchConfig cfg;
  if (!levels.empty()) cfg.levels = levels;
  if (!s_values.empty()) cfg.s_values = s_values;
  cfg.reps = reps;
  cfg.freq_hz = freq;
  if (seed_set) cfg.seed = seed_flag;
  if (jobs_set) cfg.jobs = jobs_flag;
  if (!geom_path.empty()) {
    ArrayGeometry geom = ArrayGeometry::from_json_file(geom_path);
    cfg.order = geom.max_order;
    cfg.r_a = geom.radius_m;
  }
  BenchReport report = bench_cost(cfg);
  write_file_atomic(out_path, report.to_json_text());
  if (!timings_path.empty()) write_file_atomic(timings_path, report.timings_json_text());
  for (const BenchRow& r : report.rows)
    std::fprintf(stderr, "level=%d S=%d count_ratio=%.4f time_ratio=%.4f\n", r.level, r.s,
                 r.count_ratio, r.time_ratio);
  std::cout << "bench report -> " << out_path << "\n";
  return kExitOk;
}

int cmd_eval(const std::string& out_path, const std::string& csv_path,
             const std::string& geom_path, const std::string& cfg_path, std::vector<int> s_values,
             std::vector<double> snr_values, int trials, std::uint64_t seed_flag, bool seed_set,
             int jobs_flag, bool jobs_set) {
  ArrayGeometry geom = ArrayGeometry::from_json_file(geom_path);
  ExperimentConfig cfg;
  cfg.pipeline = load_config(cfg_path, seed_flag, seed_set, jobs_flag, jobs_set);
  if (seed_set) cfg.seed = seed_flag;
  if (!s_values.empty()) cfg.s_values = s_values;
  cfg.snr_values = snr_values;
  cfg.trials = trials;
  EvalReport report = run_experiment(cfg, geom);
  write_file_atomic(out_path, report.to_json_text());
  if (!csv_path.empty()) write_file_atomic(csv_path, report.to_csv_text());
  std::cout << "eval report (" << report.trials.size() << " trials) -> " << out_path << "\n";
  return kExitOk;
}

int cmd_cache_build(const std::string& out_path, int l_max, int order, int sub_depth,
                    double threshold, int jobs) {
  CdCache cache = CdCache::build(l_max, order, sub_depth, threshold, jobs);
  cache.save(out_path);
  std::cout << "cache with " << cache.size() << " entries -> " << out_path << "\n";
  return kExitOk;
}

int cmd_geometry(const std::string& out_path) {
  write_file_atomic(out_path, ArrayGeometry::em32_like().to_json_text());
  std::cout << "geometry -> " << out_path << "\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sound source localization on rigid spherical microphone arrays"};
  app.require_subcommand(1);

  std::uint64_t seed = 0;
  int jobs = 1;
  bool seed_set = false, jobs_set = false;
  app.add_flag_callback("--version", [] { std::cout << "higrid 1.0.0\n"; std::exit(0); },
                        "Print version");

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--seed", seed, "Run seed; echoed into outputs")->each([&](const std::string&) {
      seed_set = true;
    });
    sub->add_option("--jobs", jobs, "Worker threads")->each([&](const std::string&) {
      jobs_set = true;
    });
  };

  // simulate
  std::string scene_path, geom_path, out_path, sidecar, cfg_path, cache_path, plot_path,
      timings_path, csv_path;
  auto* sim = app.add_subcommand("simulate", "Render a plane-wave scene to a multichannel WAV");
  sim->add_option("--scene", scene_path, "Scene JSON")->required();
  sim->add_option("--geometry", geom_path, "Array geometry JSON")->required();
  sim->add_option("--out", out_path, "Output WAV")->required();
  sim->add_option("--sidecar", sidecar, "Ground-truth JSON (default <out>.truth.json)");
  add_common(sim);

  // localize
  auto* loc = app.add_subcommand("localize", "Estimate source DOAs from a multichannel WAV");
  loc->add_option("--in", scene_path, "Input WAV")->required();
  loc->add_option("--geometry", geom_path, "Array geometry JSON")->required();
  loc->add_option("--config", cfg_path, "Run config JSON");
  loc->add_option("--out", out_path, "Output DOA JSON")->required();
  loc->add_option("--cache", cache_path, "Cross-density cache file (optional)");
  add_common(loc);

  // map
  int frame = 0, bin = 64;
  auto* mp = app.add_subcommand("map", "Emit the refined SRPD map of one TF bin");
  mp->add_option("--in", scene_path, "Input WAV")->required();
  mp->add_option("--geometry", geom_path, "Array geometry JSON")->required();
  mp->add_option("--config", cfg_path, "Run config JSON");
  mp->add_option("--frame", frame, "STFT frame index")->required();
  mp->add_option("--bin", bin, "Frequency bin index")->required();
  mp->add_option("--out", out_path, "Output map JSON")->required();
  mp->add_option("--plot", plot_path, "Plot-data CSV (theta,phi,value + Mollweide x,y)");
  add_common(mp);

  // bench
  std::vector<int> levels, s_values;
  std::vector<double> snr_values;
  int reps = 50, trials = 10;
  double freq = 3000.0;
  auto* bn = app.add_subcommand("bench", "Grid-refinement vs full-scan cost benchmark");
  bn->add_option("--out", out_path, "Report JSON (deterministic fields)")->required();
  bn->add_option("--timings-out", timings_path, "Report JSON including wall-clock columns");
  bn->add_option("--levels", levels, "Resolution levels");
  bn->add_option("--sources", s_values, "Coherent plane-wave counts");
  bn->add_option("--reps", reps, "Repetitions per configuration");
  bn->add_option("--freq", freq, "Wave frequency, Hz");
  bn->add_option("--geometry", geom_path, "Array geometry JSON (order and radius)");
  add_common(bn);

  // eval
  auto* ev = app.add_subcommand("eval", "Batch localization experiment with metrics");
  ev->add_option("--out", out_path, "Report JSON")->required();
  ev->add_option("--csv", csv_path, "Summary CSV");
  ev->add_option("--geometry", geom_path, "Array geometry JSON")->required();
  ev->add_option("--config", cfg_path, "Run config JSON");
  ev->add_option("--sources", s_values, "Source counts");
  ev->add_option("--snr", snr_values, "SNR values in dB (omit for noiseless)");
  ev->add_option("--trials", trials, "Trials per case");
  add_common(ev);

  // cache-build
  int l_max = 3, order = 4, sub_depth = 4;
  double threshold = 0.99;
  auto* cb = app.add_subcommand("cache-build", "Precompute the cross-density cache");
  cb->add_option("--out", out_path, "Cache file")->required();
  cb->add_option("--l-max", l_max, "Deepest level");
  cb->add_option("--order", order, "Decomposition order");
  cb->add_option("--sub-depth", sub_depth, "Quadrature sub-depth");
  cb->add_option("--threshold", threshold, "Eigenvalue energy-ratio threshold");
  add_common(cb);

  // geometry
  auto* ge = app.add_subcommand("geometry", "Write the bundled 32-mic geometry");
  ge->add_option("--out", out_path, "Geometry JSON")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (sim->parsed()) return cmd_simulate(scene_path, geom_path, out_path, sidecar, seed, seed_set);
    if (loc->parsed())
      return cmd_localize(scene_path, geom_path, cfg_path, out_path, cache_path, seed, seed_set,
                          jobs, jobs_set);
    if (mp->parsed())
      return cmd_map(scene_path, geom_path, cfg_path, frame, bin, out_path, plot_path, seed,
                     seed_set);
    if (bn->parsed())
      return cmd_bench(out_path, timings_path, levels, s_values, reps, freq, geom_path, seed,
                       seed_set, jobs, jobs_set);
    if (ev->parsed())
      return cmd_eval(out_path, csv_path, geom_path, cfg_path, s_values, snr_values, trials, seed,
                      seed_set, jobs, jobs_set);
    if (cb->parsed()) return cmd_cache_build(out_path, l_max, order, sub_depth, threshold, jobs);
    if (ge->parsed()) return cmd_geometry(out_path);
  } catch (const IllConditionedError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  return kExitUsage;
}
