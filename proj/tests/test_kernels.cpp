// Copyright (c) 2026 The Amped Authors
// SPDX-License-Identifier: Apache-2.0
#include <cmath>

#include "amped/kernels.hpp"
#include "amped/rng.hpp"
#include "doctest.h"

using namespace amped;

namespace {

// Reference triple loop, j innermost swapped: same sums, independent code path.
template <typename T>
Mat<T> naive_matmul(const Mat<T>& a, const Mat<T>& b) {
  Mat<T> c(a.rows, b.cols);
  for (int i = 0; i < a.rows; ++i)
    for (int j = 0; j < b.cols; ++j) {
      T acc = T(0);
      for (int k = 0; k < a.cols; ++k) acc += a.at(i, k) * b.at(k, j);
      c.at(i, j) = acc;
    }
  return c;
}

}  // namespace

TEST_CASE("matmul identity") {
  MatF a(3, 3);
  for (int i = 0; i < 3; ++i) a.at(i, i) = 1.0f;
  MatF x = Rng(1).normal_mat<float>(3, 3);
  MatF y = matmul(a, x);
  for (size_t i = 0; i < x.data.size(); ++i) CHECK(y.data[i] == doctest::Approx(x.data[i]));
}

TEST_CASE("matmul small exact") {
  MatF a(2, 2, {1, 2, 3, 4});
  MatF b(2, 1, {0, 1});
  MatF c = matmul(a, b);
  CHECK(c.rows == 2);
  CHECK(c.cols == 1);
  CHECK(c.at(0, 0) == 2.0f);
  CHECK(c.at(1, 0) == 4.0f);
}

TEST_CASE("matmul matches naive oracle") {
  Rng rng(42);
  MatD a = rng.normal_mat<double>(8, 8);
  MatD b = rng.normal_mat<double>(8, 8);
  MatD c = matmul(a, b);
  MatD ref = naive_matmul(a, b);
  for (size_t i = 0; i < c.data.size(); ++i)
    CHECK(std::abs(c.data[i] - ref.data[i]) <= 1e-6);
}

TEST_CASE("matmul rejects shape mismatch") {
  MatF a(2, 3), b(2, 3);
  CHECK_THROWS_AS(matmul(a, b), std::invalid_argument);
}

TEST_CASE("matmul_nt and matmul_tn agree with explicit transpose") {
  Rng rng(7);
  MatD a = rng.normal_mat<double>(5, 3);
  MatD b = rng.normal_mat<double>(4, 3);
  MatD nt = matmul_nt(a, b);
  MatD ref = matmul(a, transpose(b));
  REQUIRE(nt.same_shape(ref));
  for (size_t i = 0; i < nt.data.size(); ++i)
    CHECK(std::abs(nt.data[i] - ref.data[i]) <= 1e-12);

  MatD c = rng.normal_mat<double>(5, 4);
  MatD tn = matmul_tn(a, c);
  MatD ref2 = matmul(transpose(a), c);
  REQUIRE(tn.same_shape(ref2));
  for (size_t i = 0; i < tn.data.size(); ++i)
    CHECK(std::abs(tn.data[i] - ref2.data[i]) <= 1e-12);
}

TEST_CASE("add_rowvec broadcasts") {
  MatF a(2, 3, {0, 0, 0, 1, 1, 1});
  MatF v(1, 3, {1, 2, 3});
  MatF c = add_rowvec(a, v);
  CHECK(c.at(0, 0) == 1.0f);
  CHECK(c.at(0, 2) == 3.0f);
  CHECK(c.at(1, 0) == 2.0f);
  CHECK(c.at(1, 2) == 4.0f);
}

TEST_CASE("row_softmax uniform row") {
  MatF a(1, 3, {0, 0, 0});
  MatF s = row_softmax(a);
  for (int j = 0; j < 3; ++j) CHECK(s.at(0, j) == doctest::Approx(1.0f / 3.0f));
}

TEST_CASE("row_softmax extreme logits stay finite") {
  MatF a(1, 2, {1000.0f, 0.0f});
  MatF s = row_softmax(a);
  CHECK(s.at(0, 0) == doctest::Approx(1.0f));
  CHECK(s.at(0, 1) == doctest::Approx(0.0f));
}

TEST_CASE("row_softmax matches direct 64-bit computation") {
  MatF a(1, 3, {1, 2, 3});
  MatF s = row_softmax(a);
  double z = std::exp(1.0) + std::exp(2.0) + std::exp(3.0);
  for (int j = 0; j < 3; ++j)
    CHECK(std::abs(static_cast<double>(s.at(0, j)) - std::exp(1.0 + j) / z) <= 1e-6);
  float sum = s.at(0, 0) + s.at(0, 1) + s.at(0, 2);
  CHECK(sum == doctest::Approx(1.0f));
}

TEST_CASE("layer_norm constant row maps to bias") {
  MatF a(1, 4, {5, 5, 5, 5});
  MatF gain(1, 4, {1, 1, 1, 1});
  MatF bias(1, 4);
  MatF c = layer_norm(a, gain, bias);
  for (int j = 0; j < 4; ++j) CHECK(std::abs(c.at(0, j)) <= 1e-3f);
}

TEST_CASE("layer_norm two-point row") {
  MatF a(1, 2, {1, 3});
  MatF gain(1, 2, {1, 1});
  MatF bias(1, 2);
  MatF c = layer_norm(a, gain, bias);
  CHECK(c.at(0, 0) == doctest::Approx(-1.0f).epsilon(1e-3));
  CHECK(c.at(0, 1) == doctest::Approx(1.0f).epsilon(1e-3));
}

TEST_CASE("layer_norm output moments") {
  MatD a = Rng(3).normal_mat<double>(4, 64, 2.0, 3.0);
  MatD gain(1, 64, 1.0);
  MatD bias(1, 64);
  MatD c = layer_norm(a, gain, bias);
  for (int i = 0; i < c.rows; ++i) {
    double mean = 0, var = 0;
    for (int j = 0; j < c.cols; ++j) mean += c.at(i, j);
    mean /= c.cols;
    for (int j = 0; j < c.cols; ++j) var += (c.at(i, j) - mean) * (c.at(i, j) - mean);
    var /= c.cols;
    CHECK(std::abs(mean) <= 1e-9);
    CHECK(std::abs(var - 1.0) <= 1e-4);
  }
}

TEST_CASE("gelu reference points") {
  MatD a(1, 3, {0.0, 1.0, -1.0});
  MatD c = gelu(a);
  CHECK(c.at(0, 0) == doctest::Approx(0.0));
  CHECK(c.at(0, 1) == doctest::Approx(0.8413447461));
  CHECK(c.at(0, 2) == doctest::Approx(-0.1586552539));
}

TEST_CASE("sigmoid stable at large magnitudes") {
  MatD a(1, 4, {0.0, 1.0, 500.0, -500.0});
  MatD c = sigmoid(a);
  CHECK(c.at(0, 0) == doctest::Approx(0.5));
  CHECK(c.at(0, 1) == doctest::Approx(1.0 / (1.0 + std::exp(-1.0))));
  CHECK(c.at(0, 2) == doctest::Approx(1.0));
  CHECK(c.at(0, 3) == doctest::Approx(0.0));
}

TEST_CASE("bilinear_resize identity") {
  MatF m = Rng(9).uniform_mat<float>(5, 7);
  MatF out = bilinear_resize(m, 5, 7);
  for (size_t i = 0; i < m.data.size(); ++i) CHECK(out.data[i] == doctest::Approx(m.data[i]));
}

TEST_CASE("bilinear_resize constant map") {
  MatF m(3, 3, 0.25f);
  MatF out = bilinear_resize(m, 10, 17);
  for (float v : out.data) CHECK(v == doctest::Approx(0.25f));
}

TEST_CASE("bilinear_resize preserves horizontal monotonicity") {
  MatF m(2, 4, {0, 1, 2, 3, 0, 1, 2, 3});
  MatF out = bilinear_resize(m, 4, 16);
  for (int i = 0; i < out.rows; ++i)
    for (int j = 1; j < out.cols; ++j) CHECK(out.at(i, j) >= out.at(i, j - 1));
  CHECK(out.at(0, 0) == doctest::Approx(0.0f));
  CHECK(out.at(0, 15) == doctest::Approx(3.0f));
}

TEST_CASE("bilinear_resize upsample then average preserves mass roughly") {
  MatF m = Rng(11).uniform_mat<float>(4, 4);
  MatF out = bilinear_resize(m, 8, 8);
  double in_mean = 0, out_mean = 0;
  for (float v : m.data) in_mean += v;
  for (float v : out.data) out_mean += v;
  in_mean /= m.data.size();
  out_mean /= out.data.size();
  CHECK(std::abs(in_mean - out_mean) <= 0.05);
}

TEST_CASE("check_finite rejects NaN") {
  MatF a(1, 2, {1.0f, std::numeric_limits<float>::quiet_NaN()});
  CHECK_THROWS_AS(check_finite(a, "test"), std::runtime_error);
}

TEST_CASE("rng derive is stable and stream-separated") {
  Rng a = Rng::derive(123, 0);
  Rng b = Rng::derive(123, 0);
  Rng c = Rng::derive(123, 1);
  CHECK(a.raw() == b.raw());
  CHECK(a.raw() != c.raw());
}
