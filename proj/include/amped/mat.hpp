// Copyright (c) 2026 The Amped Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace amped {

/// Dense row-major matrix. The single storage type behind token features,
/// weights, and images. Instantiated with float for regular forwards and
/// double for gradient checking.
template <typename T>
struct Mat {
  int rows = 0;
  int cols = 0;
  std::vector<T> data;

  Mat() = default;
  Mat(int r, int c, T fill = T(0)) : rows(r), cols(c), data(static_cast<size_t>(r) * c, fill) {
    if (r < 0 || c < 0) throw std::invalid_argument("Mat: negative dimension");
  }
  Mat(int r, int c, std::vector<T> values) : rows(r), cols(c), data(std::move(values)) {
    if (data.size() != static_cast<size_t>(r) * c)
      throw std::invalid_argument("Mat: data length does not match rows*cols");
  }

  size_t size() const { return data.size(); }
  bool same_shape(const Mat& o) const { return rows == o.rows && cols == o.cols; }

  T& at(int r, int c) { return data[static_cast<size_t>(r) * cols + c]; }
  const T& at(int r, int c) const { return data[static_cast<size_t>(r) * cols + c]; }

  T* row(int r) { return data.data() + static_cast<size_t>(r) * cols; }
  const T* row(int r) const { return data.data() + static_cast<size_t>(r) * cols; }

  void fill(T v) { std::fill(data.begin(), data.end(), v); }

  template <typename U>
  Mat<U> cast() const {
    Mat<U> out(rows, cols);
    for (size_t i = 0; i < data.size(); ++i) out.data[i] = static_cast<U>(data[i]);
    return out;
  }
};

using MatF = Mat<float>;
using MatD = Mat<double>;

inline std::string shape_str(int r, int c) {
  return std::to_string(r) + "x" + std::to_string(c);
}

/// Every kernel output must be finite; NaN/Inf anywhere is a hard error.
template <typename T>
void check_finite(const Mat<T>& m, const char* context) {
  for (const T& v : m.data) {
    if (!std::isfinite(static_cast<double>(v)))
      throw std::runtime_error(std::string("non-finite value produced by ") + context);
  }
}

template <typename T>
void require_shape(const Mat<T>& m, int r, int c, const char* context) {
  if (m.rows != r || m.cols != c)
    throw std::invalid_argument(std::string(context) + ": expected " + shape_str(r, c) +
                                ", got " + shape_str(m.rows, m.cols));
}

}  // namespace amped
