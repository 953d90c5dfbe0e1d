#include "higrid/geometry.hpp"

#include <array>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace higrid {

void ArrayGeometry::validate() const {
  if (!(radius_m > 0.0)) throw std::invalid_argument("geometry: radius must be positive");
  if (max_order < 0) throw std::invalid_argument("geometry: max_order must be >= 0");
  if (mics.size() < sh_count(max_order))
    throw std::invalid_argument("geometry: need at least (N+1)^2 mics for order N");
  for (const Mic& m : mics) {
    if (!(m.weight > 0.0)) throw std::invalid_argument("geometry: weights must be positive");
    if (!(m.theta >= 0.0 && m.theta <= kPi))
      throw std::invalid_argument("geometry: inclination outside [0,pi]");
    if (!(m.phi >= 0.0 && m.phi < kTwoPi))
      throw std::invalid_argument("geometry: azimuth outside [0,2pi)");
  }
}

ArrayGeometry ArrayGeometry::from_json_text(const std::string& text) {
  nlohmann::json j = nlohmann::json::parse(text);
  ArrayGeometry g;
  g.radius_m = j.at("radius_m").get<double>();
  g.max_order = j.at("max_order").get<int>();
  for (const auto& jm : j.at("mics")) {
    g.mics.push_back({jm.at("theta").get<double>(), jm.at("phi").get<double>(),
                      jm.at("weight").get<double>()});
  }
  g.validate();
  return g;
}

ArrayGeometry ArrayGeometry::from_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("geometry: cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return from_json_text(ss.str());
}

std::string ArrayGeometry::to_json_text() const {
  nlohmann::json j;
  j["radius_m"] = radius_m;
  j["max_order"] = max_order;
  j["mics"] = nlohmann::json::array();
  for (const Mic& m : mics)
    j["mics"].push_back({{"theta", m.theta}, {"phi", m.phi}, {"weight", m.weight}});
  return j.dump(2) + "\n";
}

namespace {

struct V3 {
  double x, y, z;
};

V3 norm3(V3 v) {
  double n = std::sqrt(v.x * v.x + v.y * v.y + v.z * v.z);
  return {v.x / n, v.y / n, v.z / n};
}

}  // namespace

ArrayGeometry ArrayGeometry::em32_like(double radius_m, int max_order) {
  const double g = (1.0 + std::sqrt(5.0)) / 2.0;

  // icosahedron vertices: cyclic permutations of (0, +-1, +-g)
  std::vector<V3> ico;
  for (double a : {1.0, -1.0})
    for (double b : {g, -g}) {
      ico.push_back(norm3({0, a, b}));
      ico.push_back(norm3({a, b, 0}));
      ico.push_back(norm3({b, 0, a}));
    }

  // face centers: normalized sums of mutually adjacent vertex triples
  std::vector<V3> hex;
  const double adj = 1.0 / std::sqrt(5.0);  // dot of adjacent icosahedron vertices
  for (std::size_t i = 0; i < ico.size(); ++i)
    for (std::size_t j = i + 1; j < ico.size(); ++j)
      for (std::size_t k = j + 1; k < ico.size(); ++k) {
        auto dot = [](V3 a, V3 b) { return a.x * b.x + a.y * b.y + a.z * b.z; };
        if (dot(ico[i], ico[j]) > adj - 1e-9 && dot(ico[i], ico[k]) > adj - 1e-9 &&
            dot(ico[j], ico[k]) > adj - 1e-9 && dot(ico[i], ico[j]) < 0.9) {
          hex.push_back(norm3({ico[i].x + ico[j].x + ico[k].x, ico[i].y + ico[j].y + ico[k].y,
                               ico[i].z + ico[j].z + ico[k].z}));
        }
      }

  const double w12 = 5.0 * kPi / 42.0;
  const double w20 = 9.0 * kPi / 70.0;

  ArrayGeometry geom;
  geom.radius_m = radius_m;
  geom.max_order = max_order;
  auto push = [&](const V3& v, double w) {
    double theta = std::acos(std::clamp(v.z, -1.0, 1.0));
    double phi = std::atan2(v.y, v.x);
    if (phi < 0) phi += kTwoPi;
    if (phi >= kTwoPi) phi = 0.0;
    geom.mics.push_back({theta, phi, w});
  };
  for (const V3& v : ico) push(v, w12);
  for (const V3& v : hex) push(v, w20);
  geom.validate();
  return geom;
}

}  // namespace higrid
