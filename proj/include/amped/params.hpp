// Copyright (c) 2026 The Amped Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "amped/mat.hpp"
#include "amped/tape.hpp"

namespace amped {

// Named parameter set. Insertion order is preserved so serialization and
// optimizer sweeps are deterministic.
template <typename T>
class ParamStore {
 public:
  Mat<T>& add(const std::string& name, Mat<T> init) {
    if (index_.count(name)) throw std::invalid_argument("param exists: " + name);
    index_[name] = names_.size();
    names_.push_back(name);
    values_.push_back(std::move(init));
    grads_.emplace_back();
    return values_.back();
  }

  bool has(const std::string& name) const { return index_.count(name) != 0; }

  Mat<T>& get(const std::string& name) { return values_.at(at(name)); }
  const Mat<T>& get(const std::string& name) const { return values_.at(at(name)); }

  Mat<T>& grad(const std::string& name) {
    Mat<T>& g = grads_.at(at(name));
    if (g.rows == 0) {
      const Mat<T>& v = values_.at(at(name));
      g = Mat<T>(v.rows, v.cols);
    }
    return g;
  }

  void zero_grads() {
    for (Mat<T>& g : grads_) g.fill(T(0));
  }

  const std::vector<std::string>& names() const { return names_; }

  size_t scalar_count() const {
    size_t n = 0;
    for (const Mat<T>& v : values_) n += v.data.size();
    return n;
  }

  template <typename U>
  ParamStore<U> cast() const {
    ParamStore<U> out;
    for (size_t i = 0; i < names_.size(); ++i) out.add(names_[i], values_[i].template cast<U>());
    return out;
  }

 private:
  size_t at(const std::string& name) const {
    auto it = index_.find(name);
    if (it == index_.end()) throw std::out_of_range("no such param: " + name);
    return it->second;
  }

  std::vector<std::string> names_;
  std::vector<Mat<T>> values_;
  std::vector<Mat<T>> grads_;
  std::map<std::string, size_t> index_;
};

// Tape bindings for one forward pass: which Var each named parameter became.
template <typename T>
struct BoundParams {
  std::vector<std::pair<std::string, typename Tape<T>::Var>> vars;

  typename Tape<T>::Var bind(Tape<T>& tape, const ParamStore<T>& store, const std::string& name) {
    typename Tape<T>::Var v = tape.param(store.get(name));
    vars.emplace_back(name, v);
    return v;
  }

  /// Adds this pass's gradients into the store (call after tape.backward).
  void collect(const Tape<T>& tape, ParamStore<T>& store) const {
    for (const auto& [name, var] : vars) {
      const Mat<T>& g = tape.grad(var);
      Mat<T>& acc = store.grad(name);
      for (size_t i = 0; i < g.data.size(); ++i) acc.data[i] += g.data[i];
    }
  }
};

}  // namespace amped
