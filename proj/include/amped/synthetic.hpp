// Copyright (c) 2026 The Amped Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "amped/edge_eval.hpp"
#include "amped/mat.hpp"

// Synthetic edge datasets: flat-shaded shapes and strokes on a plain
// background, with exact one-pixel boundary annotations derived from the
// underlying label map. Gray levels come from a spread-out palette so every
// boundary has usable contrast.

namespace amped {

struct SynthSpec {
  int width = 64;
  int height = 64;
  int min_shapes = 1;
  int max_shapes = 3;          // capped by the palette size
  double noise_sigma = 0.02;   // additive Gaussian, clamped to [0,1]
  int annotators = 1;          // second annotator is a jittered copy
  double min_contrast = 0.25;  // guaranteed separation between gray levels

  void validate() const;
};

struct SynthSample {
  MatF image;                 // [0,1]
  std::vector<BinaryMap> gts; // one per annotator, 1 = edge
};

/// Deterministic in (spec, seed).
SynthSample generate(const SynthSpec& spec, uint64_t seed);

/// 1 where the label differs from a 4-neighbor with a smaller label, so a
/// shape owns its own boundary and a plain rectangle yields 2w + 2h - 4
/// edge pixels.
BinaryMap boundary_from_labels(const std::vector<int>& labels, int h, int w);

/// 8-connected raster line from (y0,x0) to (y1,x1), both endpoints included.
std::vector<std::pair<int, int>> bresenham(int y0, int x0, int y1, int x1);

struct DatasetEntry {
  std::string id;                 // e.g. "000003"
  std::string image_path;         // absolute or root-relative path
  std::vector<std::string> gt_paths;
};

struct DatasetSplit {
  std::vector<DatasetEntry> entries;
};

/// Writes root/{train,test}/NNNNNN.pgm (+ .gtA.pbm) and root/manifest.json.
void write_dataset(const std::string& root, const SynthSpec& spec, int train_count,
                   int test_count, uint64_t seed);

DatasetSplit read_dataset(const std::string& root, const std::string& split);

struct LoadedSample {
  MatF image;
  GroundTruthSet gt;
};

LoadedSample load_sample(const DatasetEntry& entry);

}  // namespace amped
