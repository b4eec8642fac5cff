// Copyright (c) 2026 The Amped Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "amped/kernels.hpp"
#include "amped/mat.hpp"

namespace amped {

// Reverse-mode tape over Mat<T>. Every op records a closure that adds its
// contribution to the operands' gradients; backward() replays the closures
// in reverse. Construction with recording=false skips closure capture (used
// for inference) while still tracking values and multiply-accumulate counts.
//
// Multiply-accumulate counting: only matmul and matmul_nt count, one MAC per
// scalar multiply-add. Norms, softmax, activations, bias adds and resampling
// are excluded, which matches the cost model used for reporting.
template <typename T>
class Tape {
 public:
  using Var = int;

  explicit Tape(bool recording = true) : recording_(recording) {}

  bool recording() const { return recording_; }
  uint64_t macs() const { return macs_; }
  void reset_macs() { macs_ = 0; }

  int size() const { return static_cast<int>(entries_.size()); }

  const Mat<T>& value(Var v) const { return entry(v).value; }

  /// Gradient of the last backward() pass. Zero matrix for leaves that do
  /// not require gradients.
  const Mat<T>& grad(Var v) const {
    const Entry& e = entry(v);
    if (e.grad.rows == 0) throw std::logic_error("tape: grad read before backward()");
    return e.grad;
  }

  /// Leaf with no gradient.
  Var input(Mat<T> v) { return push(std::move(v), false); }

  /// Leaf that accumulates a gradient.
  Var param(Mat<T> v) { return push(std::move(v), true); }

  /// Custom op escape hatch: caller supplies the value, the dependency list,
  /// and a closure that reads out_grad(result) and calls accum_grad on deps.
  Var custom(Mat<T> value, const std::vector<Var>& deps,
             std::function<void(Tape&, Var)> back) {
    bool needs = false;
    for (Var d : deps) needs = needs || entry(d).requires_grad;
    Var r = push(std::move(value), needs);
    if (recording_ && needs)
      back_.push_back([r, back = std::move(back)](Tape& t) { back(t, r); });
    return r;
  }

  /// Adds g into the gradient of v (no-op when v does not require grad).
  void accum_grad(Var v, const Mat<T>& g) {
    Entry& e = entries_.at(v);
    if (!e.requires_grad) return;
    if (!e.grad.same_shape(g)) throw std::logic_error("tape: gradient shape mismatch");
    for (size_t i = 0; i < g.data.size(); ++i) e.grad.data[i] += g.data[i];
  }

  const Mat<T>& out_grad(Var v) const { return entry(v).grad; }

  Var matmul(Var a, Var b) {
    const Mat<T>&A = value(a), &B = value(b);
    macs_ += static_cast<uint64_t>(A.rows) * A.cols * B.cols;
    Var r = push(amped::matmul(A, B), needs(a, b));
    record(r, [a, b, r](Tape& t) {
      const Mat<T>& g = t.out_grad(r);
      t.accum_grad(a, amped::matmul_nt(g, t.value(b)));
      t.accum_grad(b, amped::matmul_tn(t.value(a), g));
    });
    return r;
  }

  Var matmul_nt(Var a, Var b) {
    const Mat<T>&A = value(a), &B = value(b);
    macs_ += static_cast<uint64_t>(A.rows) * A.cols * B.rows;
    Var r = push(amped::matmul_nt(A, B), needs(a, b));
    record(r, [a, b, r](Tape& t) {
      const Mat<T>& g = t.out_grad(r);
      t.accum_grad(a, amped::matmul(g, t.value(b)));
      t.accum_grad(b, amped::matmul_tn(g, t.value(a)));
    });
    return r;
  }

  Var add(Var a, Var b) {
    Var r = push(amped::add(value(a), value(b)), needs(a, b));
    record(r, [a, b, r](Tape& t) {
      t.accum_grad(a, t.out_grad(r));
      t.accum_grad(b, t.out_grad(r));
    });
    return r;
  }

  Var add_rowvec(Var a, Var v) {
    Var r = push(amped::add_rowvec(value(a), value(v)), needs(a, v));
    record(r, [a, v, r](Tape& t) {
      const Mat<T>& g = t.out_grad(r);
      t.accum_grad(a, g);
      t.accum_grad(v, amped::col_sum(g));
    });
    return r;
  }

  Var scale(Var a, T s) {
    Var r = push(amped::scale(value(a), s), entry(a).requires_grad);
    record(r, [a, s, r](Tape& t) { t.accum_grad(a, amped::scale(t.out_grad(r), s)); });
    return r;
  }

  Var row_softmax(Var a) {
    Var r = push(amped::row_softmax(value(a)), entry(a).requires_grad);
    record(r, [a, r](Tape& t) {
      const Mat<T>& y = t.value(r);
      const Mat<T>& g = t.out_grad(r);
      Mat<T> dx(y.rows, y.cols);
      for (int i = 0; i < y.rows; ++i) {
        T dot = T(0);
        for (int j = 0; j < y.cols; ++j) dot += g.at(i, j) * y.at(i, j);
        for (int j = 0; j < y.cols; ++j) dx.at(i, j) = y.at(i, j) * (g.at(i, j) - dot);
      }
      t.accum_grad(a, dx);
    });
    return r;
  }

  Var layer_norm(Var a, Var gain, Var bias, T eps = T(1e-6)) {
    Var r = push(amped::layer_norm(value(a), value(gain), value(bias), eps),
                 needs(a, gain) || entry(bias).requires_grad);
    record(r, [a, gain, bias, eps, r](Tape& t) {
      const Mat<T>& x = t.value(a);
      const Mat<T>& g = t.value(gain);
      const Mat<T>& dy = t.out_grad(r);
      const int n = x.cols;
      Mat<T> dx(x.rows, x.cols), dg(1, n), db(1, n);
      for (int i = 0; i < x.rows; ++i) {
        T mean = T(0), var = T(0);
        for (int j = 0; j < n; ++j) mean += x.at(i, j);
        mean /= static_cast<T>(n);
        for (int j = 0; j < n; ++j) {
          const T d = x.at(i, j) - mean;
          var += d * d;
        }
        var /= static_cast<T>(n);
        const T inv = T(1) / std::sqrt(var + eps);
        T mh = T(0), mhx = T(0);
        for (int j = 0; j < n; ++j) {
          const T xhat = (x.at(i, j) - mean) * inv;
          const T h = dy.at(i, j) * g.data[j];
          dg.data[j] += dy.at(i, j) * xhat;
          db.data[j] += dy.at(i, j);
          mh += h;
          mhx += h * xhat;
        }
        mh /= static_cast<T>(n);
        mhx /= static_cast<T>(n);
        for (int j = 0; j < n; ++j) {
          const T xhat = (x.at(i, j) - mean) * inv;
          dx.at(i, j) = (dy.at(i, j) * g.data[j] - mh - xhat * mhx) * inv;
        }
      }
      t.accum_grad(a, dx);
      t.accum_grad(gain, dg);
      t.accum_grad(bias, db);
    });
    return r;
  }

  /// Normalizes the whole matrix as one flattened vector, then applies a
  /// scalar gain and bias (both 1x1). Used for single-channel maps where a
  /// per-channel norm would be degenerate.
  Var norm_flat(Var a, Var gain, Var bias, T eps = T(1e-6)) {
    const Mat<T>& x = value(a);
    require_shape(value(gain), 1, 1, "norm_flat gain");
    require_shape(value(bias), 1, 1, "norm_flat bias");
    const size_t n = x.data.size();
    T mean = T(0), var = T(0);
    for (T v : x.data) mean += v;
    mean /= static_cast<T>(n);
    for (T v : x.data) var += (v - mean) * (v - mean);
    var /= static_cast<T>(n);
    const T inv = T(1) / std::sqrt(var + eps);
    const T g0 = value(gain).data[0], b0 = value(bias).data[0];
    Mat<T> y(x.rows, x.cols);
    for (size_t i = 0; i < n; ++i) y.data[i] = (x.data[i] - mean) * inv * g0 + b0;
    check_finite(y, "norm_flat");
    Var r = push(std::move(y), needs(a, gain) || entry(bias).requires_grad);
    record(r, [a, gain, bias, mean, inv, g0, r](Tape& t) {
      const Mat<T>& x2 = t.value(a);
      const Mat<T>& dy = t.out_grad(r);
      const size_t m = x2.data.size();
      T dg = T(0), db = T(0), mh = T(0), mhx = T(0);
      for (size_t i = 0; i < m; ++i) {
        const T xhat = (x2.data[i] - mean) * inv;
        dg += dy.data[i] * xhat;
        db += dy.data[i];
        mh += dy.data[i] * g0;
        mhx += dy.data[i] * g0 * xhat;
      }
      mh /= static_cast<T>(m);
      mhx /= static_cast<T>(m);
      Mat<T> dx(x2.rows, x2.cols);
      for (size_t i = 0; i < m; ++i) {
        const T xhat = (x2.data[i] - mean) * inv;
        dx.data[i] = (dy.data[i] * g0 - mh - xhat * mhx) * inv;
      }
      t.accum_grad(a, dx);
      t.accum_grad(gain, Mat<T>(1, 1, {dg}));
      t.accum_grad(bias, Mat<T>(1, 1, {db}));
    });
    return r;
  }

  Var gelu(Var a) {
    Var r = push(amped::gelu(value(a)), entry(a).requires_grad);
    record(r, [a, r](Tape& t) {
      const Mat<T>& x = t.value(a);
      const Mat<T>& dy = t.out_grad(r);
      Mat<T> dx(x.rows, x.cols);
      const T inv_sqrt2 = T(0.70710678118654752440);
      const T inv_sqrt2pi = T(0.39894228040143267794);
      for (size_t i = 0; i < x.data.size(); ++i) {
        const T v = x.data[i];
        const T cdf = T(0.5) * (T(1) + std::erf(v * inv_sqrt2));
        const T pdf = inv_sqrt2pi * std::exp(T(-0.5) * v * v);
        dx.data[i] = dy.data[i] * (cdf + v * pdf);
      }
      t.accum_grad(a, dx);
    });
    return r;
  }

  Var sigmoid(Var a) {
    Var r = push(amped::sigmoid(value(a)), entry(a).requires_grad);
    record(r, [a, r](Tape& t) {
      const Mat<T>& y = t.value(r);
      const Mat<T>& dy = t.out_grad(r);
      Mat<T> dx(y.rows, y.cols);
      for (size_t i = 0; i < y.data.size(); ++i)
        dx.data[i] = dy.data[i] * y.data[i] * (T(1) - y.data[i]);
      t.accum_grad(a, dx);
    });
    return r;
  }

  /// Selects rows by index (duplicates allowed).
  Var gather_rows(Var a, std::vector<int> idx) {
    const Mat<T>& x = value(a);
    Mat<T> y(static_cast<int>(idx.size()), x.cols);
    for (size_t k = 0; k < idx.size(); ++k) {
      if (idx[k] < 0 || idx[k] >= x.rows)
        throw std::out_of_range("gather_rows: index " + std::to_string(idx[k]));
      std::copy(x.row(idx[k]), x.row(idx[k]) + x.cols, y.row(static_cast<int>(k)));
    }
    Var r = push(std::move(y), entry(a).requires_grad);
    record(r, [a, idx = std::move(idx), r](Tape& t) {
      const Mat<T>& g = t.out_grad(r);
      const Mat<T>& x2 = t.value(a);
      Mat<T> dx(x2.rows, x2.cols);
      for (size_t k = 0; k < idx.size(); ++k)
        for (int j = 0; j < g.cols; ++j) dx.at(idx[k], j) += g.at(static_cast<int>(k), j);
      t.accum_grad(a, dx);
    });
    return r;
  }

  /// Copy of base with base[idx[k]] replaced by rows[k]. Overwritten base
  /// rows receive no gradient.
  Var scatter_rows(Var base, std::vector<int> idx, Var rows) {
    const Mat<T>& b = value(base);
    const Mat<T>& z = value(rows);
    if (static_cast<int>(idx.size()) != z.rows)
      throw std::invalid_argument("scatter_rows: index count != row count");
    if (z.cols != b.cols) throw std::invalid_argument("scatter_rows: column mismatch");
    Mat<T> y = b;
    std::vector<char> hit(b.rows, 0);
    for (size_t k = 0; k < idx.size(); ++k) {
      if (idx[k] < 0 || idx[k] >= b.rows)
        throw std::out_of_range("scatter_rows: index " + std::to_string(idx[k]));
      if (hit[idx[k]]) throw std::invalid_argument("scatter_rows: duplicate index");
      hit[idx[k]] = 1;
      std::copy(z.row(static_cast<int>(k)), z.row(static_cast<int>(k)) + z.cols, y.row(idx[k]));
    }
    Var r = push(std::move(y), needs(base, rows));
    record(r, [base, rows, idx = std::move(idx), r](Tape& t) {
      const Mat<T>& g = t.out_grad(r);
      Mat<T> dbase = g;
      Mat<T> drows(static_cast<int>(idx.size()), g.cols);
      for (size_t k = 0; k < idx.size(); ++k) {
        for (int j = 0; j < g.cols; ++j) {
          drows.at(static_cast<int>(k), j) = g.at(idx[k], j);
          dbase.at(idx[k], j) = T(0);
        }
      }
      t.accum_grad(base, dbase);
      t.accum_grad(rows, drows);
    });
    return r;
  }

  /// Columns [c0, c1).
  Var slice_cols(Var a, int c0, int c1) {
    const Mat<T>& x = value(a);
    if (c0 < 0 || c1 > x.cols || c0 >= c1)
      throw std::invalid_argument("slice_cols: bad range [" + std::to_string(c0) + "," +
                                  std::to_string(c1) + ")");
    Mat<T> y(x.rows, c1 - c0);
    for (int i = 0; i < x.rows; ++i)
      std::copy(x.row(i) + c0, x.row(i) + c1, y.row(i));
    Var r = push(std::move(y), entry(a).requires_grad);
    record(r, [a, c0, r](Tape& t) {
      const Mat<T>& g = t.out_grad(r);
      const Mat<T>& x2 = t.value(a);
      Mat<T> dx(x2.rows, x2.cols);
      for (int i = 0; i < g.rows; ++i)
        for (int j = 0; j < g.cols; ++j) dx.at(i, c0 + j) = g.at(i, j);
      t.accum_grad(a, dx);
    });
    return r;
  }

  Var concat_cols(const std::vector<Var>& parts) {
    if (parts.empty()) throw std::invalid_argument("concat_cols: empty");
    int rows = value(parts[0]).rows, cols = 0;
    bool req = false;
    for (Var p : parts) {
      if (value(p).rows != rows) throw std::invalid_argument("concat_cols: row mismatch");
      cols += value(p).cols;
      req = req || entry(p).requires_grad;
    }
    Mat<T> y(rows, cols);
    int off = 0;
    for (Var p : parts) {
      const Mat<T>& x = value(p);
      for (int i = 0; i < rows; ++i)
        std::copy(x.row(i), x.row(i) + x.cols, y.row(i) + off);
      off += x.cols;
    }
    Var r = push(std::move(y), req);
    record(r, [parts, r](Tape& t) {
      const Mat<T>& g = t.out_grad(r);
      int o = 0;
      for (Var p : parts) {
        const Mat<T>& x = t.value(p);
        Mat<T> dp(x.rows, x.cols);
        for (int i = 0; i < x.rows; ++i)
          for (int j = 0; j < x.cols; ++j) dp.at(i, j) = g.at(i, o + j);
        t.accum_grad(p, dp);
        o += x.cols;
      }
    });
    return r;
  }

  Var reshape(Var a, int rows, int cols) {
    const Mat<T>& x = value(a);
    if (static_cast<size_t>(rows) * cols != x.data.size())
      throw std::invalid_argument("reshape: element count mismatch");
    Mat<T> y(rows, cols, x.data);
    Var r = push(std::move(y), entry(a).requires_grad);
    record(r, [a, r](Tape& t) {
      const Mat<T>& g = t.out_grad(r);
      const Mat<T>& x2 = t.value(a);
      t.accum_grad(a, Mat<T>(x2.rows, x2.cols, g.data));
    });
    return r;
  }

  /// Bilinear resample treating the matrix as an image.
  Var bilinear(Var a, int out_h, int out_w) {
    const Mat<T>& x = value(a);
    Var r = push(amped::bilinear_resize(x, out_h, out_w), entry(a).requires_grad);
    record(r, [a, out_h, out_w, r](Tape& t) {
      const Mat<T>& g = t.out_grad(r);
      const Mat<T>& x2 = t.value(a);
      Mat<T> dx(x2.rows, x2.cols);
      for (int oy = 0; oy < out_h; ++oy)
        for (int ox = 0; ox < out_w; ++ox) {
          const auto tp = bilinear_tap<T>(x2.rows, x2.cols, out_h, out_w, oy, ox);
          const T gv = g.at(oy, ox);
          dx.at(tp.y0, tp.x0) += gv * (T(1) - tp.wy) * (T(1) - tp.wx);
          dx.at(tp.y0, tp.x1) += gv * (T(1) - tp.wy) * tp.wx;
          dx.at(tp.y1, tp.x0) += gv * tp.wy * (T(1) - tp.wx);
          dx.at(tp.y1, tp.x1) += gv * tp.wy * tp.wx;
        }
      t.accum_grad(a, dx);
    });
    return r;
  }

  /// Runs reverse accumulation from a 1x1 loss.
  void backward(Var loss) {
    require_shape(value(loss), 1, 1, "backward loss");
    if (!recording_) throw std::logic_error("backward on a non-recording tape");
    for (Entry& e : entries_) {
      e.grad = Mat<T>(e.value.rows, e.value.cols);
    }
    entries_.at(loss).grad.data[0] = T(1);
    for (auto it = back_.rbegin(); it != back_.rend(); ++it) (*it)(*this);
  }

 private:
  struct Entry {
    Mat<T> value;
    Mat<T> grad;
    bool requires_grad = false;
  };

  const Entry& entry(Var v) const { return entries_.at(v); }

  bool needs(Var a, Var b) const { return entry(a).requires_grad || entry(b).requires_grad; }

  Var push(Mat<T> v, bool requires_grad) {
    entries_.push_back(Entry{std::move(v), Mat<T>(), requires_grad && recording_});
    return static_cast<Var>(entries_.size() - 1);
  }

  void record(Var r, std::function<void(Tape&)> fn) {
    if (recording_ && entries_.at(r).requires_grad) back_.push_back(std::move(fn));
  }

  std::vector<Entry> entries_;
  std::vector<std::function<void(Tape&)>> back_;
  bool recording_ = true;
  uint64_t macs_ = 0;
};

using TapeF = Tape<float>;
using TapeD = Tape<double>;

}  // namespace amped
