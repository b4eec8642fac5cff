// Copyright (c) 2026 The Amped Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <vector>

#include "amped/mat.hpp"

// Boundary evaluation: orientation-aware thinning of probability maps,
// tolerance-based correspondence between prediction and annotation pixels,
// and the dataset/image-level F-measures plus average precision.

namespace amped {

/// Suppresses pixels that are not local maxima across their edge direction.
/// Orientation comes from a smoothed structure tensor of the map; surviving
/// pixels keep their original value, everything else drops to exactly 0.
MatF nms_thin(const MatF& prob);

struct BinaryMap {
  int h = 0, w = 0;
  std::vector<uint8_t> on;  // row-major 0/1

  static BinaryMap from_map(const MatF& m, float threshold);
  uint8_t& at(int y, int x) { return on[static_cast<size_t>(y) * w + x]; }
  uint8_t at(int y, int x) const { return on[static_cast<size_t>(y) * w + x]; }
  int count() const;
};

/// Independent annotations of the same image.
struct GroundTruthSet {
  std::vector<BinaryMap> maps;
};

struct MatchCounts {
  uint64_t sum_pred = 0;
  uint64_t matched_pred = 0;  // prediction pixels matched in at least one annotation
  uint64_t sum_gt = 0;        // annotation pixels summed over maps
  uint64_t matched_gt = 0;

  MatchCounts& operator+=(const MatchCounts& o) {
    sum_pred += o.sum_pred;
    matched_pred += o.matched_pred;
    sum_gt += o.sum_gt;
    matched_gt += o.matched_gt;
    return *this;
  }
};

/// Maximum-cardinality matching between prediction pixels and each
/// annotation's pixels, within radius tolerance * image diagonal.
MatchCounts match_edges(const BinaryMap& pred, const GroundTruthSet& gt, double tolerance);

struct PrPoint {
  double threshold = 0;
  double precision = 0;
  double recall = 0;
  double f1 = 0;
};

struct EvalResult {
  double ods = 0;            // best fixed-threshold F over the dataset
  double ods_threshold = 0;  // the threshold that attains it
  double ois = 0;            // F at per-image best thresholds
  double ap = 0;             // interpolated average precision
  std::vector<PrPoint> curve;
};

/// 0.01, 0.02, ..., 0.99.
std::vector<double> default_thresholds();

/// counts[i][t] are image i's counts at thresholds[t].
EvalResult compute_metrics(const std::vector<std::vector<MatchCounts>>& counts,
                           const std::vector<double>& thresholds);

/// Thins each probability map once, then accumulates counts across all
/// thresholds. Convenience wrapper over the pieces above.
EvalResult evaluate_maps(const std::vector<MatF>& prob_maps,
                         const std::vector<GroundTruthSet>& gts, double tolerance,
                         const std::vector<double>& thresholds = default_thresholds(),
                         int jobs = 1);

}  // namespace amped
