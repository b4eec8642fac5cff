// Copyright (c) 2026 The Amped Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "amped/mat.hpp"

// Netpbm images: P2/P5 graymaps, P3/P6 pixmaps, P4 bitmaps. Samples wider
// than 8 bits are big-endian on disk. Header comments are accepted on read;
// the writer emits none so output bytes are reproducible.

namespace amped {

struct PnmImage {
  int width = 0;
  int height = 0;
  int channels = 1;  // 1 or 3
  int maxval = 255;  // 1 for bitmaps
  bool bitmap = false;
  std::vector<uint16_t> data;  // row-major, interleaved; bitmaps store 0/1 (1 = set)

  uint16_t& at(int y, int x, int c = 0) { return data[(static_cast<size_t>(y) * width + x) * channels + c]; }
  uint16_t at(int y, int x, int c = 0) const { return data[(static_cast<size_t>(y) * width + x) * channels + c]; }
};

PnmImage read_pnm(const std::string& path);

/// binary=true writes P5/P6 (P4 for bitmaps); false writes the ASCII forms
/// (bitmaps are always written as P4).
void write_pnm(const PnmImage& img, const std::string& path, bool binary = true);

/// Grayscale in [0,1]; color collapses via Rec.601 luma, bitmaps map set
/// bits to 1.0.
MatF to_gray_unit(const PnmImage& img);

PnmImage from_gray_unit(const MatF& m, int maxval = 255);

/// 1 = set pixel; values are thresholded at 0.5.
PnmImage bitmap_from_map(const MatF& m);

}  // namespace amped
