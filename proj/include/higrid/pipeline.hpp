#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "higrid/geometry.hpp"
#include "higrid/nnl.hpp"
#include "higrid/onsets.hpp"

namespace higrid {

struct PipelineConfig {
  int win = 1024;
  int hop = 64;
  double fs = 48000.0;
  double c = 343.0;
  int l_max = 3;
  int sub_depth = 4;
  double energy_threshold = 0.99;
  std::uint64_t seed = 0;
  int jobs = 1;
  BinSelectParams select;  // band limits and onset parameters
  bool weighted_centroid = true;
  int min_cluster_px = 1;
  // post-processing histogram
  double gauss_sigma = 1.0;  // in 1-degree bins; kernel size stays 3
  int hist_cast_level = 3;

  /// Parses the run-config JSON; unknown keys are rejected.
  static PipelineConfig from_json_text(const std::string& text);
  static PipelineConfig from_json_file(const std::string& path);
  std::string to_json_text() const;
};

struct DoaEstimate {
  Vec3 dir;
  double theta = 0.0;  // radians
  double phi = 0.0;
  long support = 0;  // histogram mass behind the estimate
};

struct LocalizeResult {
  std::vector<DoaEstimate> doas;
  std::size_t bins_selected = 0;
  std::size_t bins_processed = 0;
  std::size_t evaluations = 0;  // total srpd_eval calls over all bins
  std::vector<int> onset_frames;
  bool empty = false;  // no bins selected
};

/// Full chain: STFT, onset-based bin selection, per-bin SHD + grid refinement
/// + labelling, then the global histogram post-processing. `cache` may be
/// shared across calls; when null one is built for the call.
LocalizeResult localize(const std::vector<std::vector<double>>& signals,
                        const ArrayGeometry& geom, const PipelineConfig& cfg,
                        const CdCache* cache = nullptr);

/// Map of a single TF bin (the `map` CLI command). Runs the same
/// pre-processing; the bin must be within the spectrogram.
SrpdMap map_of_bin(const std::vector<std::vector<double>>& signals, const ArrayGeometry& geom,
                   const PipelineConfig& cfg, int frame, int bin, const CdCache* cache = nullptr);

/// Histogram pipeline over local DOA estimates: 1-degree 2D histogram,
/// single-occurrence elimination, 3x3 median, 3x3 Gaussian, cast to a
/// uniform HEALPix map, then labelling. Azimuth wraps, inclination clamps.
std::vector<DoaEstimate> post_process(const std::vector<Vec3>& centroids,
                                      const PipelineConfig& cfg);

}  // namespace higrid
