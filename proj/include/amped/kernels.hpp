// Copyright (c) 2026 The Amped Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cmath>

#include "amped/mat.hpp"

// Dense kernels. All of them are pure, single-threaded, and accumulate in a
// fixed sequential order (per output element, contributions are added in
// increasing index order), so results are reproducible run to run within a
// build. No SIMD intrinsics; the loops are written so the compiler can
// vectorize the inner dimension.

namespace amped {

/// C = A * B. Accumulation over k runs in increasing order for every output
/// element (the i-k-j loop adds the same terms in the same order as the
/// naive i-j-k loop).
template <typename T>
Mat<T> matmul(const Mat<T>& a, const Mat<T>& b) {
  if (a.cols != b.rows)
    throw std::invalid_argument("matmul: shape mismatch " + shape_str(a.rows, a.cols) + " * " +
                                shape_str(b.rows, b.cols));
  Mat<T> c(a.rows, b.cols);
  for (int i = 0; i < a.rows; ++i) {
    T* ci = c.row(i);
    const T* ai = a.row(i);
    for (int k = 0; k < a.cols; ++k) {
      const T aik = ai[k];
      const T* bk = b.row(k);
      for (int j = 0; j < b.cols; ++j) ci[j] += aik * bk[j];
    }
  }
  check_finite(c, "matmul");
  return c;
}

/// C = A * B^T without materializing the transpose.
template <typename T>
Mat<T> matmul_nt(const Mat<T>& a, const Mat<T>& b) {
  if (a.cols != b.cols)
    throw std::invalid_argument("matmul_nt: shape mismatch " + shape_str(a.rows, a.cols) +
                                " * " + shape_str(b.rows, b.cols) + "^T");
  Mat<T> c(a.rows, b.rows);
  for (int i = 0; i < a.rows; ++i) {
    const T* ai = a.row(i);
    T* ci = c.row(i);
    for (int j = 0; j < b.rows; ++j) {
      const T* bj = b.row(j);
      T acc = T(0);
      for (int k = 0; k < a.cols; ++k) acc += ai[k] * bj[k];
      ci[j] = acc;
    }
  }
  check_finite(c, "matmul_nt");
  return c;
}

/// C = A^T * B.
template <typename T>
Mat<T> matmul_tn(const Mat<T>& a, const Mat<T>& b) {
  if (a.rows != b.rows)
    throw std::invalid_argument("matmul_tn: shape mismatch " + shape_str(a.rows, a.cols) +
                                "^T * " + shape_str(b.rows, b.cols));
  Mat<T> c(a.cols, b.cols);
  for (int k = 0; k < a.rows; ++k) {
    const T* ak = a.row(k);
    const T* bk = b.row(k);
    for (int i = 0; i < a.cols; ++i) {
      const T aki = ak[i];
      T* ci = c.row(i);
      for (int j = 0; j < b.cols; ++j) ci[j] += aki * bk[j];
    }
  }
  check_finite(c, "matmul_tn");
  return c;
}

template <typename T>
Mat<T> transpose(const Mat<T>& a) {
  Mat<T> t(a.cols, a.rows);
  for (int i = 0; i < a.rows; ++i)
    for (int j = 0; j < a.cols; ++j) t.at(j, i) = a.at(i, j);
  return t;
}

template <typename T>
Mat<T> add(const Mat<T>& a, const Mat<T>& b) {
  if (!a.same_shape(b))
    throw std::invalid_argument("add: shape mismatch " + shape_str(a.rows, a.cols) + " vs " +
                                shape_str(b.rows, b.cols));
  Mat<T> c = a;
  for (size_t i = 0; i < c.data.size(); ++i) c.data[i] += b.data[i];
  check_finite(c, "add");
  return c;
}

/// Adds a 1xC row vector to every row of A.
template <typename T>
Mat<T> add_rowvec(const Mat<T>& a, const Mat<T>& v) {
  if (v.rows != 1 || v.cols != a.cols)
    throw std::invalid_argument("add_rowvec: vector must be 1x" + std::to_string(a.cols));
  Mat<T> c = a;
  for (int i = 0; i < c.rows; ++i) {
    T* ci = c.row(i);
    for (int j = 0; j < c.cols; ++j) ci[j] += v.data[j];
  }
  check_finite(c, "add_rowvec");
  return c;
}

template <typename T>
Mat<T> scale(const Mat<T>& a, T s) {
  Mat<T> c = a;
  for (T& v : c.data) v *= s;
  check_finite(c, "scale");
  return c;
}

template <typename T>
Mat<T> hadamard(const Mat<T>& a, const Mat<T>& b) {
  if (!a.same_shape(b)) throw std::invalid_argument("hadamard: shape mismatch");
  Mat<T> c = a;
  for (size_t i = 0; i < c.data.size(); ++i) c.data[i] *= b.data[i];
  check_finite(c, "hadamard");
  return c;
}

/// Column sums as a 1xC vector.
template <typename T>
Mat<T> col_sum(const Mat<T>& a) {
  Mat<T> s(1, a.cols);
  for (int i = 0; i < a.rows; ++i) {
    const T* ai = a.row(i);
    for (int j = 0; j < a.cols; ++j) s.data[j] += ai[j];
  }
  return s;
}

/// Row-wise softmax with max subtraction. Rows sum to 1.
template <typename T>
Mat<T> row_softmax(const Mat<T>& a) {
  Mat<T> c(a.rows, a.cols);
  for (int i = 0; i < a.rows; ++i) {
    const T* ai = a.row(i);
    T* ci = c.row(i);
    T mx = ai[0];
    for (int j = 1; j < a.cols; ++j) mx = std::max(mx, ai[j]);
    T sum = T(0);
    for (int j = 0; j < a.cols; ++j) {
      ci[j] = std::exp(ai[j] - mx);
      sum += ci[j];
    }
    const T inv = T(1) / sum;
    for (int j = 0; j < a.cols; ++j) ci[j] *= inv;
  }
  check_finite(c, "row_softmax");
  return c;
}

/// Per-row standardization followed by a per-column affine (gain, bias both
/// 1xC). Population variance; eps keeps the constant-row case finite.
template <typename T>
Mat<T> layer_norm(const Mat<T>& a, const Mat<T>& gain, const Mat<T>& bias, T eps = T(1e-6)) {
  if (gain.rows != 1 || gain.cols != a.cols || bias.rows != 1 || bias.cols != a.cols)
    throw std::invalid_argument("layer_norm: gain/bias must be 1x" + std::to_string(a.cols));
  if (!(eps > T(0))) throw std::invalid_argument("layer_norm: eps must be positive");
  Mat<T> c(a.rows, a.cols);
  const T n = static_cast<T>(a.cols);
  for (int i = 0; i < a.rows; ++i) {
    const T* ai = a.row(i);
    T* ci = c.row(i);
    T mean = T(0);
    for (int j = 0; j < a.cols; ++j) mean += ai[j];
    mean /= n;
    T var = T(0);
    for (int j = 0; j < a.cols; ++j) {
      const T d = ai[j] - mean;
      var += d * d;
    }
    var /= n;
    const T inv = T(1) / std::sqrt(var + eps);
    for (int j = 0; j < a.cols; ++j)
      ci[j] = (ai[j] - mean) * inv * gain.data[j] + bias.data[j];
  }
  check_finite(c, "layer_norm");
  return c;
}

/// Exact (erf-based) GELU.
template <typename T>
Mat<T> gelu(const Mat<T>& a) {
  Mat<T> c = a;
  const T inv_sqrt2 = T(0.70710678118654752440);
  for (T& v : c.data) v = T(0.5) * v * (T(1) + std::erf(v * inv_sqrt2));
  check_finite(c, "gelu");
  return c;
}

template <typename T>
T sigmoid_scalar(T x) {
  if (x >= T(0)) {
    const T e = std::exp(-x);
    return T(1) / (T(1) + e);
  }
  const T e = std::exp(x);
  return e / (T(1) + e);
}

template <typename T>
Mat<T> sigmoid(const Mat<T>& a) {
  Mat<T> c = a;
  for (T& v : c.data) v = sigmoid_scalar(v);
  check_finite(c, "sigmoid");
  return c;
}

/// Bilinear resample of `map` (interpreted as an h x w image) to out_h x
/// out_w, align-corners-false convention with clamped source coordinates.
template <typename T>
Mat<T> bilinear_resize(const Mat<T>& map, int out_h, int out_w) {
  if (map.rows < 1 || map.cols < 1 || out_h < 1 || out_w < 1)
    throw std::invalid_argument("bilinear_resize: dimensions must be >= 1");
  const int h = map.rows, w = map.cols;
  Mat<T> out(out_h, out_w);
  const T sy = static_cast<T>(h) / static_cast<T>(out_h);
  const T sx = static_cast<T>(w) / static_cast<T>(out_w);
  for (int oy = 0; oy < out_h; ++oy) {
    T fy = (static_cast<T>(oy) + T(0.5)) * sy - T(0.5);
    fy = std::clamp(fy, T(0), static_cast<T>(h - 1));
    const int y0 = static_cast<int>(std::floor(fy));
    const int y1 = std::min(y0 + 1, h - 1);
    const T wy = fy - static_cast<T>(y0);
    for (int ox = 0; ox < out_w; ++ox) {
      T fx = (static_cast<T>(ox) + T(0.5)) * sx - T(0.5);
      fx = std::clamp(fx, T(0), static_cast<T>(w - 1));
      const int x0 = static_cast<int>(std::floor(fx));
      const int x1 = std::min(x0 + 1, w - 1);
      const T wx = fx - static_cast<T>(x0);
      const T top = map.at(y0, x0) * (T(1) - wx) + map.at(y0, x1) * wx;
      const T bot = map.at(y1, x0) * (T(1) - wx) + map.at(y1, x1) * wx;
      out.at(oy, ox) = top * (T(1) - wy) + bot * wy;
    }
  }
  check_finite(out, "bilinear_resize");
  return out;
}

/// Source pixels and weights used by bilinear_resize for one output pixel;
/// shared with the backward pass so both sides agree exactly.
template <typename T>
struct BilinearTap {
  int y0, y1, x0, x1;
  T wy, wx;
};

template <typename T>
BilinearTap<T> bilinear_tap(int h, int w, int out_h, int out_w, int oy, int ox) {
  const T sy = static_cast<T>(h) / static_cast<T>(out_h);
  const T sx = static_cast<T>(w) / static_cast<T>(out_w);
  T fy = (static_cast<T>(oy) + T(0.5)) * sy - T(0.5);
  fy = std::clamp(fy, T(0), static_cast<T>(h - 1));
  T fx = (static_cast<T>(ox) + T(0.5)) * sx - T(0.5);
  fx = std::clamp(fx, T(0), static_cast<T>(w - 1));
  BilinearTap<T> t;
  t.y0 = static_cast<int>(std::floor(fy));
  t.y1 = std::min(t.y0 + 1, h - 1);
  t.x0 = static_cast<int>(std::floor(fx));
  t.x1 = std::min(t.x0 + 1, w - 1);
  t.wy = fy - static_cast<T>(t.y0);
  t.wx = fx - static_cast<T>(t.x0);
  return t;
}

}  // namespace amped
