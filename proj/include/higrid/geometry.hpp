#pragma once

#include <string>
#include <vector>

#include "higrid/sph.hpp"

namespace higrid {

/// Rigid spherical microphone array: sphere radius, decomposition order and
/// the quadrature nodes (mic directions with weights).
struct ArrayGeometry {
  double radius_m = 0.0;
  int max_order = 0;
  std::vector<Mic> mics;

  std::size_t mic_count() const { return mics.size(); }

  /// Enforces Q >= (N+1)^2, positive weights, angle ranges.
  void validate() const;

  static ArrayGeometry from_json_file(const std::string& path);
  static ArrayGeometry from_json_text(const std::string& text);
  std::string to_json_text() const;

  /// 32-element layout on a rigid sphere of radius 4.2 cm: the face centers
  /// of a truncated icosahedron (12 pentagon + 20 hexagon centers), with the
  /// two-orbit quadrature weights 5*pi/42 and 9*pi/70 that integrate degree-9
  /// polynomials exactly. Order 4.
  static ArrayGeometry em32_like(double radius_m = 0.042, int max_order = 4);
};

}  // namespace higrid
