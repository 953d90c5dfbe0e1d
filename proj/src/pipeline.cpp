#include "higrid/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace higrid {

namespace {

using nlohmann::json;

const std::set<std::string> kKnownKeys = {
    "win",        "hop",         "fs",          "c",          "l_max",
    "sub_depth",  "energy_threshold", "seed",   "jobs",       "f_lo",
    "f_hi",       "energy_quantile",  "onset",  "weighted_centroid",
    "min_cluster_px", "gauss_sigma",  "hist_cast_level"};
const std::set<std::string> kKnownOnsetKeys = {
    "lag_frames", "max_filter_radius", "peak_radius", "avg_radius", "delta_rel",
    "min_separation"};

}  // namespace

PipelineConfig PipelineConfig::from_json_text(const std::string& text) {
  json j = json::parse(text);
  for (auto it = j.begin(); it != j.end(); ++it)
    if (!kKnownKeys.count(it.key()))
      throw std::invalid_argument("config: unknown key \"" + it.key() + "\"");
  PipelineConfig c;
  c.win = j.value("win", c.win);
  c.hop = j.value("hop", c.hop);
  c.fs = j.value("fs", c.fs);
  c.c = j.value("c", c.c);
  c.l_max = j.value("l_max", c.l_max);
  c.sub_depth = j.value("sub_depth", c.sub_depth);
  c.energy_threshold = j.value("energy_threshold", c.energy_threshold);
  c.seed = j.value("seed", c.seed);
  c.jobs = j.value("jobs", c.jobs);
  c.select.f_lo = j.value("f_lo", c.select.f_lo);
  c.select.f_hi = j.value("f_hi", c.select.f_hi);
  c.select.energy_quantile = j.value("energy_quantile", c.select.energy_quantile);
  if (j.contains("onset")) {
    const json& jo = j["onset"];
    for (auto it = jo.begin(); it != jo.end(); ++it)
      if (!kKnownOnsetKeys.count(it.key()))
        throw std::invalid_argument("config: unknown onset key \"" + it.key() + "\"");
    OnsetParams& o = c.select.onset;
    o.lag_frames = jo.value("lag_frames", o.lag_frames);
    o.max_filter_radius = jo.value("max_filter_radius", o.max_filter_radius);
    o.peak_radius = jo.value("peak_radius", o.peak_radius);
    o.avg_radius = jo.value("avg_radius", o.avg_radius);
    o.delta_rel = jo.value("delta_rel", o.delta_rel);
    o.min_separation = jo.value("min_separation", o.min_separation);
  }
  c.weighted_centroid = j.value("weighted_centroid", c.weighted_centroid);
  c.min_cluster_px = j.value("min_cluster_px", c.min_cluster_px);
  c.gauss_sigma = j.value("gauss_sigma", c.gauss_sigma);
  c.hist_cast_level = j.value("hist_cast_level", c.hist_cast_level);
  if (c.win <= 0 || (c.win & (c.win - 1)) != 0)
    throw std::invalid_argument("config: win must be a power of two");
  if (c.hop <= 0 || c.hop > c.win) throw std::invalid_argument("config: hop must be in 1..win");
  if (!(c.select.f_hi > c.select.f_lo)) throw std::invalid_argument("config: empty band");
  if (c.l_max < 1 || c.l_max > 6) throw std::invalid_argument("config: l_max must be in 1..6");
  return c;
}

PipelineConfig PipelineConfig::from_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("config: cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return from_json_text(ss.str());
}

std::string PipelineConfig::to_json_text() const {
  json j;
  j["win"] = win;
  j["hop"] = hop;
  j["fs"] = fs;
  j["c"] = c;
  j["l_max"] = l_max;
  j["sub_depth"] = sub_depth;
  j["energy_threshold"] = energy_threshold;
  j["seed"] = seed;
  j["jobs"] = jobs;
  j["f_lo"] = select.f_lo;
  j["f_hi"] = select.f_hi;
  j["energy_quantile"] = select.energy_quantile;
  j["onset"] = {{"lag_frames", select.onset.lag_frames},
                {"max_filter_radius", select.onset.max_filter_radius},
                {"peak_radius", select.onset.peak_radius},
                {"avg_radius", select.onset.avg_radius},
                {"delta_rel", select.onset.delta_rel},
                {"min_separation", select.onset.min_separation}};
  j["weighted_centroid"] = weighted_centroid;
  j["min_cluster_px"] = min_cluster_px;
  j["gauss_sigma"] = gauss_sigma;
  j["hist_cast_level"] = hist_cast_level;
  return j.dump(2) + "\n";
}

namespace {

std::vector<double> omni_time(const std::vector<std::vector<double>>& signals) {
  const std::size_t t_len = signals.front().size();
  std::vector<double> omni(t_len, 0.0);
  for (const auto& ch : signals) {
    if (ch.size() != t_len) throw std::invalid_argument("pipeline: channel lengths differ");
    for (std::size_t t = 0; t < t_len; ++t) omni[t] += ch[t];
  }
  for (double& v : omni) v /= static_cast<double>(signals.size());
  return omni;
}

struct FrameWork {
  int frame = 0;
  std::vector<int> bins;
};

}  // namespace

LocalizeResult localize(const std::vector<std::vector<double>>& signals,
                        const ArrayGeometry& geom, const PipelineConfig& cfg,
                        const CdCache* cache) {
  if (signals.size() != geom.mic_count())
    throw std::invalid_argument("pipeline: channel count does not match geometry");
  LocalizeResult result;

  // pre-processing: omni spectrogram equals the per-bin channel mean by
  // linearity, computed here from the time-domain mean
  Spectrogram omni = stft(omni_time(signals), cfg.win, cfg.hop);
  TfSelection sel = select_bins(omni, cfg.select, cfg.fs, cfg.win);
  result.onset_frames = sel.onset_frames;
  result.bins_selected = sel.bins.size();
  if (sel.bins.empty()) {
    result.empty = true;
    return result;
  }

  CdCache local_cache;
  if (!cache) {
    local_cache = CdCache::build(cfg.l_max, geom.max_order, cfg.sub_depth, cfg.energy_threshold,
                                 cfg.jobs);
    cache = &local_cache;
  }

  // group the selected bins by frame so each channel window is transformed once
  std::vector<FrameWork> work;
  for (const TfBin& b : sel.bins) {
    if (work.empty() || work.back().frame != b.frame) work.push_back({b.frame, {}});
    work.back().bins.push_back(b.bin);
  }

  struct BinOut {
    std::vector<Vec3> centroids;
    std::size_t evals = 0;
    bool silent = false;
  };
  std::vector<std::vector<BinOut>> outputs(work.size());
  for (std::size_t i = 0; i < work.size(); ++i) outputs[i].resize(work[i].bins.size());

  parallel_for(work.size(), cfg.jobs, [&](std::size_t wi) {
    const FrameWork& fw = work[wi];
    auto frame_spectra = stft_frame(signals, cfg.win, fw.frame * cfg.hop);
    std::vector<cplx> pressures(signals.size());
    for (std::size_t bi = 0; bi < fw.bins.size(); ++bi) {
      const int bin = fw.bins[bi];
      for (std::size_t q = 0; q < signals.size(); ++q) pressures[q] = frame_spectra[q][bin];
      const double freq = bin * cfg.fs / cfg.win;
      const double k = kTwoPi * freq / cfg.c;
      ShdFrame frame = shd_from_mics(pressures, geom, k);
      RefinementPolicy policy;
      policy.l_max = cfg.l_max;
      policy.rng_seed = derive_seed(cfg.seed, static_cast<std::uint64_t>(fw.frame),
                                    static_cast<std::uint64_t>(bin));
      SrpdMap map = higrid_run(frame, *cache, policy, geom.radius_m);
      map.bin_frame = static_cast<std::uint64_t>(fw.frame);
      map.bin_freq = static_cast<std::uint64_t>(bin);
      BinOut& out = outputs[wi][bi];
      out.evals = map.evaluation_count;
      out.silent = map.silent;
      if (!map.silent) {
        for (const Cluster& c : nnl_label(map, cfg.weighted_centroid, cfg.min_cluster_px))
          out.centroids.push_back(c.centroid);
      }
    }
  });

  std::vector<Vec3> centroids;
  for (std::size_t wi = 0; wi < work.size(); ++wi)
    for (const BinOut& out : outputs[wi]) {
      result.evaluations += out.evals;
      if (!out.silent) ++result.bins_processed;
      centroids.insert(centroids.end(), out.centroids.begin(), out.centroids.end());
    }

  result.doas = post_process(centroids, cfg);
  return result;
}

SrpdMap map_of_bin(const std::vector<std::vector<double>>& signals, const ArrayGeometry& geom,
                   const PipelineConfig& cfg, int frame, int bin, const CdCache* cache) {
  if (signals.size() != geom.mic_count())
    throw std::invalid_argument("pipeline: channel count does not match geometry");
  const int frames = 1 + (static_cast<int>(signals.front().size()) - cfg.win) / cfg.hop;
  if (frame < 0 || frame >= frames) throw std::out_of_range("pipeline: frame outside signal");
  if (bin < 0 || bin > cfg.win / 2) throw std::out_of_range("pipeline: bin outside spectrum");

  CdCache local_cache;
  if (!cache) {
    local_cache = CdCache::build(cfg.l_max, geom.max_order, cfg.sub_depth, cfg.energy_threshold,
                                 cfg.jobs);
    cache = &local_cache;
  }
  auto frame_spectra = stft_frame(signals, cfg.win, frame * cfg.hop);
  std::vector<cplx> pressures(signals.size());
  for (std::size_t q = 0; q < signals.size(); ++q) pressures[q] = frame_spectra[q][bin];
  const double k = kTwoPi * (bin * cfg.fs / cfg.win) / cfg.c;
  ShdFrame shd = shd_from_mics(pressures, geom, k);
  RefinementPolicy policy;
  policy.l_max = cfg.l_max;
  policy.rng_seed = derive_seed(cfg.seed, static_cast<std::uint64_t>(frame),
                                static_cast<std::uint64_t>(bin));
  SrpdMap map = higrid_run(shd, *cache, policy, geom.radius_m);
  map.bin_frame = static_cast<std::uint64_t>(frame);
  map.bin_freq = static_cast<std::uint64_t>(bin);
  return map;
}

namespace {

constexpr int kThetaBins = 180;
constexpr int kPhiBins = 360;

inline int wrap_phi_bin(int j) { return ((j % kPhiBins) + kPhiBins) % kPhiBins; }
inline int clamp_theta_bin(int i) { return std::clamp(i, 0, kThetaBins - 1); }

}  // namespace

std::vector<DoaEstimate> post_process(const std::vector<Vec3>& centroids,
                                      const PipelineConfig& cfg) {
  if (centroids.empty()) return {};

  std::vector<double> hist(static_cast<std::size_t>(kThetaBins) * kPhiBins, 0.0);
  auto at = [&](std::vector<double>& h, int i, int j) -> double& {
    return h[static_cast<std::size_t>(i) * kPhiBins + j];
  };
  for (const Vec3& v : centroids) {
    double theta = std::acos(std::clamp(v.z, -1.0, 1.0));
    double phi = std::atan2(v.y, v.x);
    if (phi < 0) phi += kTwoPi;
    int i = clamp_theta_bin(static_cast<int>(rad2deg(theta)));
    int j = wrap_phi_bin(static_cast<int>(rad2deg(phi)));
    at(hist, i, j) += 1.0;
  }

  // spurious single-occurrence bins
  for (double& v : hist)
    if (v == 1.0) v = 0.0;

  // 3x3 median, wrapping phi and clamping theta. Cells that are their
  // neighborhood maximum with at least two occurrences keep their value:
  // concentrated evidence (many bins voting for the same cell) must survive
  // the despeckling, which otherwise erases any blob narrower than the
  // neighborhood.
  std::vector<double> med(hist.size());
  for (int i = 0; i < kThetaBins; ++i)
    for (int j = 0; j < kPhiBins; ++j) {
      std::array<double, 9> window;
      int w = 0;
      double nb_max = 0.0;
      for (int di = -1; di <= 1; ++di)
        for (int dj = -1; dj <= 1; ++dj) {
          double v = at(hist, clamp_theta_bin(i + di), wrap_phi_bin(j + dj));
          window[w++] = v;
          nb_max = std::max(nb_max, v);
        }
      const double center = at(hist, i, j);
      if (center >= 2.0 && center >= nb_max) {
        med[static_cast<std::size_t>(i) * kPhiBins + j] = center;
      } else {
        std::nth_element(window.begin(), window.begin() + 4, window.end());
        med[static_cast<std::size_t>(i) * kPhiBins + j] = window[4];
      }
    }

  // 3x3 Gaussian
  const double s2 = 2.0 * cfg.gauss_sigma * cfg.gauss_sigma;
  double kern[3][3];
  double ksum = 0.0;
  for (int di = -1; di <= 1; ++di)
    for (int dj = -1; dj <= 1; ++dj) {
      kern[di + 1][dj + 1] = std::exp(-(di * di + dj * dj) / s2);
      ksum += kern[di + 1][dj + 1];
    }
  for (auto& row : kern)
    for (double& v : row) v /= ksum;

  std::vector<double> smooth(hist.size(), 0.0);
  for (int i = 0; i < kThetaBins; ++i)
    for (int j = 0; j < kPhiBins; ++j) {
      double acc = 0.0;
      for (int di = -1; di <= 1; ++di)
        for (int dj = -1; dj <= 1; ++dj)
          acc += kern[di + 1][dj + 1] * med[static_cast<std::size_t>(clamp_theta_bin(i + di)) * kPhiBins +
                                            wrap_phi_bin(j + dj)];
      smooth[static_cast<std::size_t>(i) * kPhiBins + j] = acc;
    }

  // cast onto a uniform pixel map and label it
  const int level = cfg.hist_cast_level;
  SrpdMap map;
  map.l_max = level;
  std::map<HealpixNode, double> acc;
  for (std::int64_t p = 0; p < pixel_count(level); ++p) acc[{level, p}] = 0.0;
  for (int i = 0; i < kThetaBins; ++i)
    for (int j = 0; j < kPhiBins; ++j) {
      double v = smooth[static_cast<std::size_t>(i) * kPhiBins + j];
      if (v <= 0.0) continue;
      HealpixNode n = pix_containing(level, deg2rad(i + 0.5), deg2rad(j + 0.5));
      acc[n] += v;
    }
  for (const auto& [n, v] : acc) map.leaves.push_back({n, v});

  std::vector<DoaEstimate> out;
  bool any = false;
  for (const LeafValue& lf : map.leaves) any = any || lf.value > 0.0;
  if (!any) return out;
  for (const Cluster& c : nnl_label(map, cfg.weighted_centroid, cfg.min_cluster_px)) {
    DoaEstimate d;
    d.dir = c.centroid;
    d.theta = std::acos(std::clamp(c.centroid.z, -1.0, 1.0));
    d.phi = std::atan2(c.centroid.y, c.centroid.x);
    if (d.phi < 0) d.phi += kTwoPi;
    d.support = std::lround(c.mass);
    out.push_back(d);
  }
  std::sort(out.begin(), out.end(), [](const DoaEstimate& a, const DoaEstimate& b) {
    if (a.support != b.support) return a.support > b.support;
    return std::pair(a.theta, a.phi) < std::pair(b.theta, b.phi);
  });
  return out;
}

}  // namespace higrid
