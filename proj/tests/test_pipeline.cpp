#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "higrid/eval.hpp"
#include "higrid/pipeline.hpp"
#include "higrid/scene.hpp"

using namespace higrid;

namespace {

const ArrayGeometry& geom() {
  static ArrayGeometry g = ArrayGeometry::em32_like();
  return g;
}

const CdCache& cache3() {
  static CdCache c = CdCache::build(3, 4, 4, 0.99, 4);
  return c;
}

PipelineConfig fast_config() {
  PipelineConfig cfg;
  cfg.jobs = 4;
  return cfg;
}

double err_to(const std::vector<DoaEstimate>& doas, double theta, double phi) {
  double best = 1e9;
  for (const auto& d : doas) best = std::min(best, rad2deg(angle_between(d.dir, unit_vector(theta, phi))));
  return best;
}

}  // namespace

TEST_CASE("post-processing: identical centroids collapse to one estimate") {
  PipelineConfig cfg = fast_config();
  std::vector<Vec3> centroids(50, unit_vector(1.1, 2.2));
  auto doas = post_process(centroids, cfg);
  REQUIRE(doas.size() == 1);
  CHECK(rad2deg(angle_between(doas[0].dir, unit_vector(1.1, 2.2))) < 1.5);
  CHECK(doas[0].support > 0);
}

TEST_CASE("post-processing: two tight clusters give exactly two estimates") {
  PipelineConfig cfg = fast_config();
  std::mt19937_64 rng(7);
  std::normal_distribution<double> jitter(0.0, deg2rad(0.8));
  std::vector<Vec3> centroids;
  for (int i = 0; i < 50; ++i) centroids.push_back(unit_vector(kPi / 2 + jitter(rng), 1.0 + jitter(rng)));
  for (int i = 0; i < 50; ++i) centroids.push_back(unit_vector(kPi / 2 + jitter(rng), 1.0 + kPi / 2 + jitter(rng)));
  auto doas = post_process(centroids, cfg);
  REQUIRE(doas.size() == 2);
  CHECK(err_to(doas, kPi / 2, 1.0) < 2.5);
  CHECK(err_to(doas, kPi / 2, 1.0 + kPi / 2) < 2.5);
}

TEST_CASE("post-processing: scattered singletons are eliminated") {
  PipelineConfig cfg = fast_config();
  std::vector<Vec3> centroids;
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> uz(-0.99, 0.99), uphi(0.0, kTwoPi);
  for (int i = 0; i < 100; ++i) centroids.push_back(unit_vector(std::acos(uz(rng)), uphi(rng)));
  // each centroid lands in its own 1-degree cell with count 1
  auto doas = post_process(centroids, cfg);
  CHECK(doas.empty());
  CHECK(post_process({}, cfg).empty());
}

TEST_CASE("localize: single source within the grid resolution") {
  SceneSpec scene = random_scenario(1, kPi / 4, 41);
  auto signals = synth_time_signals(scene, geom());
  PipelineConfig cfg = fast_config();
  cfg.seed = 41;
  LocalizeResult res = localize(signals, geom(), cfg, &cache3());
  REQUIRE(res.doas.size() == 1);
  CHECK(err_to(res.doas, scene.sources[0].theta, scene.sources[0].phi) < 7.33);
  CHECK(res.bins_selected > 0);
  CHECK(res.evaluations > 0);
}

TEST_CASE("localize: four bursty sources all recovered") {
  SceneSpec scene = random_scenario(4, kPi / 4, 17);
  auto signals = synth_time_signals(scene, geom());
  PipelineConfig cfg = fast_config();
  cfg.seed = 17;
  LocalizeResult res = localize(signals, geom(), cfg, &cache3());
  CHECK(res.doas.size() == 4);
  for (const auto& src : scene.sources) CHECK(err_to(res.doas, src.theta, src.phi) < 7.33);
}

TEST_CASE("localize: coherent pair ninety degrees apart") {
  SceneSpec scene;
  scene.seed = 5;
  scene.duration_s = 1.2;
  SignalSpec sig{.type = "noise_burst", .seed_tag = 0, .band_lo = 2608.0, .band_hi = 5216.0,
                 .bursts = {{0.1, 0.12}, {0.4, 0.12}, {0.7, 0.12}}};
  scene.sources.push_back({kPi / 2, 0.7, 1.0, sig});
  scene.sources.push_back({kPi / 2, 0.7 + kPi / 2, 1.0, sig});  // the very same signal
  auto signals = synth_time_signals(scene, geom());
  PipelineConfig cfg = fast_config();
  cfg.seed = 5;
  LocalizeResult res = localize(signals, geom(), cfg, &cache3());
  REQUIRE(res.doas.size() >= 2);
  CHECK(err_to(res.doas, kPi / 2, 0.7) < 7.33);
  CHECK(err_to(res.doas, kPi / 2, 0.7 + kPi / 2) < 7.33);
}

TEST_CASE("estimates are invariant to global gain") {
  SceneSpec scene = random_scenario(2, kPi / 4, 23);
  auto signals = synth_time_signals(scene, geom());
  PipelineConfig cfg = fast_config();
  cfg.seed = 23;
  LocalizeResult base = localize(signals, geom(), cfg, &cache3());

  auto scaled = signals;
  for (auto& ch : scaled)
    for (double& v : ch) v *= 7.3;
  LocalizeResult big = localize(scaled, geom(), cfg, &cache3());

  CHECK(base.bins_selected == big.bins_selected);
  REQUIRE(base.doas.size() == big.doas.size());
  for (std::size_t i = 0; i < base.doas.size(); ++i) {
    CHECK(angle_between(base.doas[i].dir, big.doas[i].dir) < 1e-6);
    CHECK(base.doas[i].support == big.doas[i].support);
  }
}

TEST_CASE("rotating the scene by a quarter turn rotates the estimates") {
  SceneSpec scene = random_scenario(2, kPi / 3, 29);
  PipelineConfig cfg = fast_config();
  cfg.seed = 29;
  auto base_sig = synth_time_signals(scene, geom());
  LocalizeResult base = localize(base_sig, geom(), cfg, &cache3());

  SceneSpec rotated = scene;
  for (auto& s : rotated.sources) s.phi = std::fmod(s.phi + kPi / 2, kTwoPi);
  auto rot_sig = synth_time_signals(rotated, geom());
  LocalizeResult rot = localize(rot_sig, geom(), cfg, &cache3());

  REQUIRE(base.doas.size() == rot.doas.size());
  const double tol = 2.0 * rad2deg(angular_resolution(cfg.l_max));
  for (const auto& d : base.doas) {
    Vec3 expect = unit_vector(d.theta, std::fmod(d.phi + kPi / 2, kTwoPi));
    double best = 1e9;
    for (const auto& r : rot.doas) best = std::min(best, rad2deg(angle_between(expect, r.dir)));
    CHECK(best < tol);
  }
}

TEST_CASE("silence is a flagged empty result") {
  std::vector<std::vector<double>> silent(32, std::vector<double>(48000, 0.0));
  PipelineConfig cfg = fast_config();
  LocalizeResult res = localize(silent, geom(), cfg, &cache3());
  CHECK(res.empty);
  CHECK(res.doas.empty());
}

TEST_CASE("channel mismatch is rejected") {
  std::vector<std::vector<double>> five(5, std::vector<double>(48000, 0.0));
  CHECK_THROWS_AS(localize(five, geom(), fast_config(), &cache3()), std::invalid_argument);
}

TEST_CASE("map of one bin refines around the active source") {
  SceneSpec scene;
  scene.duration_s = 0.5;
  scene.sources.push_back({1.2, 2.0, 1.0, SignalSpec{.type = "tone", .freq = 3000.0}});
  auto signals = synth_time_signals(scene, geom());
  PipelineConfig cfg = fast_config();
  SrpdMap map = map_of_bin(signals, geom(), cfg, 100, 64, &cache3());
  CHECK_FALSE(map.silent);
  auto clusters = nnl_label(map);
  REQUIRE(!clusters.empty());
  double best = 1e9;
  for (const auto& c : clusters)
    best = std::min(best, rad2deg(angle_between(c.centroid, unit_vector(1.2, 2.0))));
  CHECK(best < 7.33);
  CHECK_THROWS_AS(map_of_bin(signals, geom(), cfg, 100000, 64, &cache3()), std::out_of_range);
}

TEST_CASE("config parsing rejects unknown keys and bad values") {
  CHECK_THROWS_AS(PipelineConfig::from_json_text(R"({"l_max": 3, "bogus": 1})"),
                  std::invalid_argument);
  CHECK_THROWS_AS(PipelineConfig::from_json_text(R"({"win": 1000})"), std::invalid_argument);
  CHECK_THROWS_AS(PipelineConfig::from_json_text(R"({"f_lo": 5000, "f_hi": 100})"),
                  std::invalid_argument);
  PipelineConfig cfg = PipelineConfig::from_json_text(R"({"l_max": 2, "seed": 7})");
  CHECK(cfg.l_max == 2);
  CHECK(cfg.seed == 7);
  PipelineConfig back = PipelineConfig::from_json_text(cfg.to_json_text());
  CHECK(back.l_max == cfg.l_max);
  CHECK(back.select.f_hi == cfg.select.f_hi);
}
