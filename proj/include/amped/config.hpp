// Copyright (c) 2026 The Amped Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "amped/sed.hpp"
#include "amped/synthetic.hpp"

namespace amped {

// Optimization settings for the training loop.
struct TrainConfig {
  int iters = 1000;
  int batch = 2;
  double lr = 1e-3;
  std::string optimizer = "adam";  // "adam" or "sgd" (with momentum)
  double momentum = 0.9;
  double weight_decay = 0.0;
  double lambda_final = 1.0;   // weight of the dense edge-map loss
  double lambda_heads = 0.3;   // weight of the per-stage score-head loss
  bool prune_during_training = false;
  int checkpoint_every = 0;  // 0 disables periodic checkpoints
  int log_every = 10;
  bool flip_augment = true;
};

struct EvalConfig {
  double tolerance = 0.0075;  // match radius as a fraction of the image diagonal
};

struct DataConfig {
  std::string root = "data";
  SynthSpec synth;
  int train_count = 200;
  int test_count = 50;
};

// One config file drives data generation, training, and evaluation.
struct RunConfig {
  SedConfig model;
  TrainConfig train;
  DataConfig data;
  EvalConfig eval;
};

// Exact contents of share/config.schema.json, compiled in so the binary
// can validate configs without locating the file at runtime.
const std::string& embedded_schema();

// Validates `doc` against a schema supporting the subset of JSON Schema
// used by embedded_schema(): type, properties, required,
// additionalProperties, items, enum, minimum, maximum.
// Returns one message per violation; empty means valid.
std::vector<std::string> schema_errors(const nlohmann::json& doc,
                                       const nlohmann::json& schema);

// Schema-validates, applies defaults, then runs structural checks
// (divisibility, schedule monotonicity). Throws std::runtime_error with
// all schema messages joined on failure.
RunConfig run_config_from_json(const nlohmann::json& j);
RunConfig load_run_config(const std::string& path);

// Full round-trip including defaulted fields; used for run manifests.
nlohmann::json run_config_to_json(const RunConfig& c);

// Model section only; checkpoints embed this to validate shapes on load.
nlohmann::json model_config_to_json(const SedConfig& c);
SedConfig model_config_from_json(const nlohmann::json& j);

// FNV-1a, used to fingerprint configs in run manifests.
std::uint64_t fnv1a64(std::string_view s);

}  // namespace amped
