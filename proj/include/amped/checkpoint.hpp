// Copyright (c) 2026 The Amped Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>

#include "amped/params.hpp"
#include "amped/sed.hpp"

// Model weights on disk. Layout:
//   bytes 0..7   magic "AMPEDCP1"
//   bytes 8..15  header length, unsigned 64-bit little-endian
//   header       UTF-8 JSON: format version, model config, tensor table
//                (name, rows, cols, byte offset into the data section)
//   data         all tensors as float32 little-endian, concatenated in
//                parameter insertion order
// Weights are stored as float32 regardless of the compute type.

namespace amped {

struct Checkpoint {
  SedConfig config;         // as saved; stage thresholds included for reference
  ParamStore<float> params;
};

void save_checkpoint(const std::string& path, const SedConfig& config,
                     const ParamStore<float>& params);

Checkpoint load_checkpoint(const std::string& path);

/// Throws when `stored` and `expect` differ structurally. Stage thresholds
/// and the pruning on/off switch are runtime choices and may differ; stage
/// count and placement change the parameter set, so they may not.
void require_structure_match(const SedConfig& stored, const SedConfig& expect);

/// Copies saved weights into a live store. Both must hold exactly the same
/// parameter names and shapes.
template <typename T>
void assign_params(ParamStore<T>& dst, const ParamStore<float>& src) {
  if (dst.names() != src.names())
    throw std::runtime_error("checkpoint: parameter names do not match this model");
  for (const std::string& name : src.names()) {
    const MatF& s = src.get(name);
    Mat<T>& d = dst.get(name);
    if (s.rows != d.rows || s.cols != d.cols)
      throw std::runtime_error("checkpoint: shape mismatch for " + name);
    for (size_t i = 0; i < s.data.size(); ++i) d.data[i] = static_cast<T>(s.data[i]);
  }
}

}  // namespace amped
