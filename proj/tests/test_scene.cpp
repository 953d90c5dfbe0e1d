#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "higrid/scene.hpp"
#include "higrid/stft.hpp"

using namespace higrid;

namespace {
const double kK3k = kTwoPi * 3000.0 / 343.0;
}

TEST_CASE("pressure synthesis converges in the expansion order") {
  ArrayGeometry geom = ArrayGeometry::em32_like();
  PlaneWaveSource src{cplx{1.0, 0.0}, 1.0, 2.0};
  const int base = static_cast<int>(std::ceil(kK3k * geom.radius_m)) + 8;
  auto a = synth_pressures(std::span(&src, 1), geom, kK3k, base);
  auto b = synth_pressures(std::span(&src, 1), geom, kK3k, base + 4);
  double diff = 0.0;
  for (std::size_t q = 0; q < a.size(); ++q) diff = std::max(diff, std::abs(a[q] - b[q]));
  CHECK(diff < 1e-6);
}

TEST_CASE("zero amplitude synthesizes silence") {
  ArrayGeometry geom = ArrayGeometry::em32_like();
  PlaneWaveSource src{cplx{0.0, 0.0}, 1.0, 2.0};
  for (const cplx& p : synth_pressures(std::span(&src, 1), geom, kK3k))
    CHECK(std::abs(p) == 0.0);
}

TEST_CASE("superposition of plane-wave pressures") {
  ArrayGeometry geom = ArrayGeometry::em32_like();
  std::vector<PlaneWaveSource> both = {{cplx{1.0, 0.2}, 0.7, 1.0}, {cplx{-0.5, 0.8}, 2.0, 4.0}};
  auto sum = synth_pressures(both, geom, kK3k);
  auto a = synth_pressures(std::span(&both[0], 1), geom, kK3k);
  auto b = synth_pressures(std::span(&both[1], 1), geom, kK3k);
  for (std::size_t q = 0; q < sum.size(); ++q)
    CHECK(std::abs(sum[q] - (a[q] + b[q])) < 1e-12);
}

TEST_CASE("round trip: decomposed synthesized pressures match the direct coefficients") {
  ArrayGeometry geom = ArrayGeometry::em32_like();
  PlaneWaveSource src{cplx{1.0, 0.0}, 2.2, 5.3};
  auto p = synth_pressures(std::span(&src, 1), geom, kK3k);
  ShdFrame rec = shd_from_mics(p, geom, kK3k);
  ShdFrame direct = plane_wave_shd(std::span(&src, 1), kK3k, geom.max_order, geom.radius_m);
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < rec.coeffs.size(); ++i) {
    num += std::norm(rec.coeffs[i] - direct.coeffs[i]);
    den += std::norm(direct.coeffs[i]);
  }
  CHECK(std::sqrt(num / den) < 1e-2);  // aliasing-limited, measured ~4e-3
}

TEST_CASE("monochromatic scene: STFT bin amplitudes track the frequency-domain transfer") {
  ArrayGeometry geom = ArrayGeometry::em32_like();
  SceneSpec scene;
  scene.duration_s = 0.5;
  scene.sources.push_back({1.1, 2.0, 1.0, SignalSpec{.type = "tone", .freq = 3000.0}});
  auto signals = synth_time_signals(scene, geom);
  REQUIRE(signals.size() == 32);

  auto p_ref = synth_pressures(std::span<const PlaneWaveSource>(
                                   std::vector<PlaneWaveSource>{{cplx{1, 0}, 1.1, 2.0}}),
                               geom, kK3k);

  // per-mic ratios of the 3000 Hz bin against mic 0 match the reference
  const int win = 1024, bin = 64;
  auto frame = stft_frame(signals, win, 8000);
  for (std::size_t q = 1; q < signals.size(); ++q) {
    cplx got = frame[q][bin] / frame[0][bin];
    cplx want = p_ref[q] / p_ref[0];
    CHECK(std::abs(got - want) < 1e-3);
  }
}

TEST_CASE("silent scene synthesizes silence") {
  ArrayGeometry geom = ArrayGeometry::em32_like();
  SceneSpec scene;
  scene.duration_s = 0.2;
  scene.sources.push_back({1.0, 1.0, 0.0, SignalSpec{.type = "tone", .freq = 3000.0}});  // zero gain
  auto signals = synth_time_signals(scene, geom);
  double peak = 0.0;
  for (const auto& ch : signals)
    for (double v : ch) peak = std::max(peak, std::fabs(v));
  CHECK(peak == 0.0);
}

TEST_CASE("coherent extra components superpose linearly") {
  // scene = direct wave + a real-gain coherent copy from another direction;
  // its signals must equal direct-alone plus the scaled echo-alone synthesis
  ArrayGeometry geom = ArrayGeometry::em32_like();
  SceneSpec two;
  two.duration_s = 0.3;
  two.seed = 9;
  two.sources.push_back({1.0, 1.0, 1.0, SignalSpec{.type = "noise_burst",
                                                    .seed_tag = 0,
                                                    .band_lo = 2700.0,
                                                    .band_hi = 5000.0,
                                                    .bursts = {{0.05, 0.15}}}});
  two.extra_components.push_back({0, 2.0, 4.0, cplx{0.4, 0.0}});

  SceneSpec direct_only = two;
  direct_only.extra_components.clear();

  SceneSpec echo_only = direct_only;  // same excitation, echo direction
  echo_only.sources[0].theta = 2.0;
  echo_only.sources[0].phi = 4.0;

  auto full = synth_time_signals(two, geom);
  auto a = synth_time_signals(direct_only, geom);
  auto b = synth_time_signals(echo_only, geom);
  double scale = 0.0;
  for (const auto& ch : a)
    for (double v : ch) scale = std::max(scale, std::fabs(v));
  for (std::size_t q = 0; q < full.size(); ++q)
    for (std::size_t t = 0; t < full[q].size(); t += 7)
      CHECK(std::fabs(full[q][t] - (a[q][t] + 0.4 * b[q][t])) < 1e-9 * scale);
}

TEST_CASE("identical signal specs replay identical excitation") {
  SceneSpec scene;
  scene.duration_s = 0.3;
  scene.seed = 4;
  SignalSpec sig{.type = "noise_burst", .seed_tag = 2, .band_lo = 2608.0, .band_hi = 5216.0,
                 .bursts = {{0.05, 0.1}}};
  scene.sources.push_back({0.5, 0.5, 1.0, sig});
  scene.sources.push_back({2.0, 2.0, 1.0, sig});
  auto s0 = render_source_signal(scene, 0);
  auto s1 = render_source_signal(scene, 1);
  CHECK(s0 == s1);
}

TEST_CASE("noise injection hits the requested level and is deterministic") {
  ArrayGeometry geom = ArrayGeometry::em32_like();
  SceneSpec scene = random_scenario(2, kPi / 4, 11);
  scene.duration_s = 0.8;
  auto clean = synth_time_signals(scene, geom);

  // +inf leaves the signal untouched
  auto untouched = clean;
  add_noise(untouched, std::numeric_limits<double>::infinity(), 1);
  CHECK(untouched == clean);

  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    auto noisy = clean;
    add_noise(noisy, 20.0, seed);
    // measured post-hoc SNR within +-0.1 dB
    double e_omni = 0.0, e_noise = 0.0;
    for (std::size_t t = 0; t < clean[0].size(); ++t) {
      double m = 0.0;
      for (const auto& ch : clean) m += ch[t];
      m /= clean.size();
      e_omni += m * m;
    }
    for (std::size_t q = 0; q < clean.size(); ++q)
      for (std::size_t t = 0; t < clean[q].size(); ++t) {
        double d = noisy[q][t] - clean[q][t];
        e_noise += d * d;
      }
    e_noise /= clean.size();
    double snr = 10.0 * std::log10(e_omni / e_noise);
    CHECK(snr == doctest::Approx(20.0).epsilon(0.005));

    auto again = clean;
    add_noise(again, 20.0, seed);
    CHECK(again == noisy);
  }
}

TEST_CASE("random directions: separation, uniformity, infeasibility") {
  auto dirs = random_directions(4, kPi / 4, 3);
  REQUIRE(dirs.size() == 4);
  for (std::size_t i = 0; i < dirs.size(); ++i)
    for (std::size_t j = i + 1; j < dirs.size(); ++j)
      CHECK(angle_between(unit_vector(dirs[i].first, dirs[i].second),
                          unit_vector(dirs[j].first, dirs[j].second)) > kPi / 4);

  Vec3 mean{0, 0, 0};
  const int n = 10000;
  for (int i = 0; i < n; ++i) {
    auto d = random_directions(1, 0.0, 1000 + i);
    mean = mean + unit_vector(d[0].first, d[0].second) * (1.0 / n);
  }
  CHECK(mean.norm() < 0.05);

  CHECK_THROWS_AS(random_directions(40, kPi / 3, 5), std::runtime_error);
}

TEST_CASE("scene JSON round trip") {
  SceneSpec scene = random_scenario(3, kPi / 4, 21);
  scene.snr_db = 15.0;
  scene.extra_components.push_back({1, 0.3, 0.4, cplx{0.2, -0.1}});
  SceneSpec back = SceneSpec::from_json_text(scene.to_json_text());
  CHECK(back.sources.size() == 3);
  CHECK(back.snr_db.has_value());
  CHECK(*back.snr_db == 15.0);
  CHECK(back.sources[1].theta == scene.sources[1].theta);
  CHECK(back.sources[1].signal.bursts.size() == scene.sources[1].signal.bursts.size());
  CHECK(back.extra_components.size() == 1);
  CHECK(back.extra_components[0].gain == scene.extra_components[0].gain);
}
