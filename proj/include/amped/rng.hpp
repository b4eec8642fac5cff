// Copyright (c) 2026 The Amped Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <random>

#include "amped/mat.hpp"

namespace amped {

// Seeded mt19937_64 wrapper. All randomness in the project flows through
// this type so a run is fully determined by its seeds.
class Rng {
 public:
  explicit Rng(uint64_t seed) : gen_(seed) {}

  uint64_t raw() { return gen_(); }

  /// Uniform in [lo, hi).
  double uniform(double lo = 0.0, double hi = 1.0) {
    return std::uniform_real_distribution<double>(lo, hi)(gen_);
  }

  /// Uniform integer in [lo, hi] inclusive.
  int uniform_int(int lo, int hi) {
    return std::uniform_int_distribution<int>(lo, hi)(gen_);
  }

  double normal(double mean = 0.0, double stddev = 1.0) {
    return std::normal_distribution<double>(mean, stddev)(gen_);
  }

  bool bernoulli(double p) { return std::bernoulli_distribution(p)(gen_); }

  /// Derives an independent stream; stable given (seed, stream_id).
  static Rng derive(uint64_t seed, uint64_t stream_id) {
    std::seed_seq seq{static_cast<uint32_t>(seed), static_cast<uint32_t>(seed >> 32),
                      static_cast<uint32_t>(stream_id), static_cast<uint32_t>(stream_id >> 32)};
    std::mt19937_64 g(seq);
    Rng r(0);
    r.gen_ = g;
    return r;
  }

  template <typename T>
  Mat<T> normal_mat(int rows, int cols, double mean = 0.0, double stddev = 1.0) {
    Mat<T> m(rows, cols);
    for (T& v : m.data) v = static_cast<T>(normal(mean, stddev));
    return m;
  }

  template <typename T>
  Mat<T> uniform_mat(int rows, int cols, double lo = 0.0, double hi = 1.0) {
    Mat<T> m(rows, cols);
    for (T& v : m.data) v = static_cast<T>(uniform(lo, hi));
    return m;
  }

  std::mt19937_64& engine() { return gen_; }

 private:
  std::mt19937_64 gen_;
};

}  // namespace amped
