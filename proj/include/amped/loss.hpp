// Copyright (c) 2026 The Amped Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <stdexcept>

#include "amped/edge_eval.hpp"
#include "amped/mat.hpp"
#include "amped/tape.hpp"

// Class-balanced binary cross-entropy over probability maps. Edges are rare,
// so positive terms are weighted by the negative-pixel fraction and vice
// versa. The loss is a sum (not a mean); the balance factor comes from the
// target alone.

namespace amped {

inline constexpr double kBceClampLo = 1e-6;
inline constexpr double kBceClampHi = 1.0 - 1e-6;
inline constexpr double kBetaClampLo = 0.05;
inline constexpr double kBetaClampHi = 0.95;

template <typename T>
void check_binary_target(const Mat<T>& target) {
  for (T v : target.data)
    if (v != T(0) && v != T(1))
      throw std::invalid_argument("bce: targets must be exactly 0 or 1");
}

/// Fraction of negative pixels, clamped away from the degenerate ends.
template <typename T>
T balance_factor(const Mat<T>& target) {
  check_binary_target(target);
  if (target.data.empty()) throw std::invalid_argument("bce: empty target");
  size_t neg = 0;
  for (T v : target.data) neg += v == T(0);
  const double beta = static_cast<double>(neg) / static_cast<double>(target.data.size());
  return static_cast<T>(std::clamp(beta, kBetaClampLo, kBetaClampHi));
}

/// -beta * sum_{y=1} log p - (1-beta) * sum_{y=0} log(1-p), with p clamped
/// to [1e-6, 1-1e-6].
template <typename T>
T class_balanced_bce_value(const Mat<T>& pred, const Mat<T>& target, T* beta_out = nullptr) {
  if (!pred.same_shape(target)) throw std::invalid_argument("bce: shape mismatch");
  const T beta = balance_factor(target);
  if (beta_out) *beta_out = beta;
  double loss = 0;
  for (size_t i = 0; i < pred.data.size(); ++i) {
    const double p = std::clamp(static_cast<double>(pred.data[i]), kBceClampLo, kBceClampHi);
    if (target.data[i] == T(1))
      loss -= static_cast<double>(beta) * std::log(p);
    else
      loss -= (1.0 - static_cast<double>(beta)) * std::log(1.0 - p);
  }
  return static_cast<T>(loss);
}

/// Tape form; gradient is zero where the prediction sits outside the clamp
/// range, mirroring the flat clamped forward.
template <typename T>
typename Tape<T>::Var class_balanced_bce(Tape<T>& tape, typename Tape<T>::Var pred,
                                         Mat<T> target) {
  const Mat<T>& pv = tape.value(pred);
  T beta = T(0);
  const T loss = class_balanced_bce_value(pv, target, &beta);
  return tape.custom(
      Mat<T>(1, 1, {loss}), {pred},
      [pred, target = std::move(target), beta](Tape<T>& t, typename Tape<T>::Var r) {
        const T up = t.out_grad(r).data[0];
        const Mat<T>& p = t.value(pred);
        Mat<T> dp(p.rows, p.cols);
        for (size_t i = 0; i < p.data.size(); ++i) {
          const double v = static_cast<double>(p.data[i]);
          if (v < kBceClampLo || v > kBceClampHi) continue;
          if (target.data[i] == T(1))
            dp.data[i] = static_cast<T>(-static_cast<double>(beta) / v) * up;
          else
            dp.data[i] = static_cast<T>((1.0 - static_cast<double>(beta)) / (1.0 - v)) * up;
        }
        t.accum_grad(pred, dp);
      });
}

/// Token-level labels for score-head supervision: a token is positive when
/// any annotator marks any pixel inside its patch. Returns tokens x 1 in
/// row-major grid order.
template <typename T>
Mat<T> token_targets(const GroundTruthSet& gt, int patch, int grid_h, int grid_w) {
  if (gt.maps.empty()) throw std::invalid_argument("token_targets: no annotations");
  Mat<T> out(grid_h * grid_w, 1);
  for (const BinaryMap& m : gt.maps) {
    if (m.h < grid_h * patch || m.w < grid_w * patch)
      throw std::invalid_argument("token_targets: annotation smaller than token grid");
    for (int gy = 0; gy < grid_h; ++gy)
      for (int gx = 0; gx < grid_w; ++gx) {
        if (out.at(gy * grid_w + gx, 0) == T(1)) continue;
        for (int py = 0; py < patch && out.at(gy * grid_w + gx, 0) == T(0); ++py)
          for (int px = 0; px < patch; ++px)
            if (m.at(gy * patch + py, gx * patch + px)) {
              out.at(gy * grid_w + gx, 0) = T(1);
              break;
            }
      }
  }
  return out;
}

}  // namespace amped
