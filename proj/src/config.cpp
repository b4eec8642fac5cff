// Copyright (c) 2026 The Amped Authors
// SPDX-License-Identifier: Apache-2.0

#include "amped/config.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

namespace amped {

using nlohmann::json;

namespace {

// Keep byte-identical to share/config.schema.json; test_config checks.
const char kSchemaText[] = R"json({
  "$schema": "http://json-schema.org/draft-07/schema#",
  "title": "amped run configuration",
  "type": "object",
  "additionalProperties": false,
  "properties": {
    "model": {
      "type": "object",
      "additionalProperties": false,
      "properties": {
        "image_h": { "type": "integer", "minimum": 16, "maximum": 4096 },
        "image_w": { "type": "integer", "minimum": 16, "maximum": 4096 },
        "patch": { "type": "integer", "minimum": 1, "maximum": 64 },
        "channels": { "type": "integer", "minimum": 1, "maximum": 4096 },
        "depth": { "type": "integer", "minimum": 1, "maximum": 64 },
        "heads": { "type": "integer", "minimum": 1, "maximum": 64 },
        "mlp_ratio": { "type": "integer", "minimum": 1, "maximum": 16 },
        "dec_channels": { "type": "integer", "minimum": 1, "maximum": 4096 },
        "score_head_bias": { "type": "boolean" },
        "scale_full_dim": { "type": "boolean" },
        "pruning_enabled": { "type": "boolean" },
        "stages": {
          "type": "array",
          "items": {
            "type": "object",
            "additionalProperties": false,
            "required": ["layer", "alpha"],
            "properties": {
              "layer": { "type": "integer", "minimum": 1, "maximum": 64 },
              "alpha": { "type": "number", "minimum": 0, "maximum": 1 }
            }
          }
        }
      }
    },
    "train": {
      "type": "object",
      "additionalProperties": false,
      "properties": {
        "iters": { "type": "integer", "minimum": 1, "maximum": 1000000 },
        "batch": { "type": "integer", "minimum": 1, "maximum": 1024 },
        "lr": { "type": "number", "minimum": 1e-12, "maximum": 10 },
        "optimizer": { "type": "string", "enum": ["adam", "sgd"] },
        "momentum": { "type": "number", "minimum": 0, "maximum": 1 },
        "weight_decay": { "type": "number", "minimum": 0, "maximum": 1 },
        "lambda_final": { "type": "number", "minimum": 0, "maximum": 1000 },
        "lambda_heads": { "type": "number", "minimum": 0, "maximum": 1000 },
        "prune_during_training": { "type": "boolean" },
        "checkpoint_every": { "type": "integer", "minimum": 0, "maximum": 1000000 },
        "log_every": { "type": "integer", "minimum": 1, "maximum": 1000000 },
        "flip_augment": { "type": "boolean" }
      }
    },
    "data": {
      "type": "object",
      "additionalProperties": false,
      "properties": {
        "root": { "type": "string" },
        "width": { "type": "integer", "minimum": 16, "maximum": 4096 },
        "height": { "type": "integer", "minimum": 16, "maximum": 4096 },
        "train_count": { "type": "integer", "minimum": 0, "maximum": 100000 },
        "test_count": { "type": "integer", "minimum": 0, "maximum": 100000 },
        "annotators": { "type": "integer", "minimum": 1, "maximum": 2 },
        "noise_sigma": { "type": "number", "minimum": 0, "maximum": 0.2 },
        "min_shapes": { "type": "integer", "minimum": 1, "maximum": 3 },
        "max_shapes": { "type": "integer", "minimum": 1, "maximum": 3 },
        "min_contrast": { "type": "number", "minimum": 0.05, "maximum": 0.26 }
      }
    },
    "eval": {
      "type": "object",
      "additionalProperties": false,
      "properties": {
        "tolerance": { "type": "number", "minimum": 0.001, "maximum": 0.5 }
      }
    }
  }
}
)json";

std::string type_name(const json& v) {
  if (v.is_object()) return "object";
  if (v.is_array()) return "array";
  if (v.is_string()) return "string";
  if (v.is_boolean()) return "boolean";
  if (v.is_number_integer() || v.is_number_unsigned()) return "integer";
  if (v.is_number()) return "number";
  return "null";
}

bool type_matches(const std::string& want, const json& v) {
  if (want == "object") return v.is_object();
  if (want == "array") return v.is_array();
  if (want == "string") return v.is_string();
  if (want == "boolean") return v.is_boolean();
  if (want == "integer") return v.is_number_integer() || v.is_number_unsigned();
  if (want == "number") return v.is_number();
  return false;
}

void check_node(const json& doc, const json& schema, const std::string& path,
                std::vector<std::string>& errs) {
  if (schema.contains("type")) {
    std::string want = schema["type"].get<std::string>();
    if (!type_matches(want, doc)) {
      errs.push_back(path + ": expected " + want + ", got " + type_name(doc));
      return;  // deeper checks assume the right shape
    }
  }
  if (schema.contains("enum")) {
    bool hit = false;
    for (const auto& v : schema["enum"])
      if (doc == v) hit = true;
    if (!hit) errs.push_back(path + ": value not in allowed set");
  }
  if (doc.is_number()) {
    double x = doc.get<double>();
    if (schema.contains("minimum") && x < schema["minimum"].get<double>())
      errs.push_back(path + ": below minimum " + schema["minimum"].dump());
    if (schema.contains("maximum") && x > schema["maximum"].get<double>())
      errs.push_back(path + ": above maximum " + schema["maximum"].dump());
  }
  if (doc.is_object()) {
    const json props = schema.value("properties", json::object());
    if (schema.contains("required"))
      for (const auto& k : schema["required"])
        if (!doc.contains(k.get<std::string>()))
          errs.push_back(path + ": missing required key \"" + k.get<std::string>() + "\"");
    bool allow_extra = schema.value("additionalProperties", true);
    for (const auto& [key, val] : doc.items()) {
      if (props.contains(key)) {
        check_node(val, props[key], path + "/" + key, errs);
      } else if (!allow_extra) {
        errs.push_back(path + ": unknown key \"" + key + "\"");
      }
    }
  }
  if (doc.is_array() && schema.contains("items")) {
    for (size_t i = 0; i < doc.size(); ++i)
      check_node(doc[i], schema["items"], path + "/" + std::to_string(i), errs);
  }
}

}  // namespace

const std::string& embedded_schema() {
  static const std::string s = kSchemaText;
  return s;
}

std::vector<std::string> schema_errors(const json& doc, const json& schema) {
  std::vector<std::string> errs;
  check_node(doc, schema, "", errs);
  return errs;
}

json model_config_to_json(const SedConfig& c) {
  json stages = json::array();
  for (const auto& s : c.schedule.stages)
    stages.push_back({{"layer", s.layer}, {"alpha", s.alpha}});
  return json{{"image_h", c.image_h},
              {"image_w", c.image_w},
              {"patch", c.patch},
              {"channels", c.channels},
              {"depth", c.depth},
              {"heads", c.heads},
              {"mlp_ratio", c.mlp_ratio},
              {"dec_channels", c.dec_channels},
              {"score_head_bias", c.score_head_bias},
              {"scale_full_dim", c.scale_full_dim},
              {"pruning_enabled", c.pruning_enabled},
              {"stages", stages}};
}

SedConfig model_config_from_json(const json& j) {
  SedConfig c;
  c.image_h = j.value("image_h", c.image_h);
  c.image_w = j.value("image_w", c.image_w);
  c.patch = j.value("patch", c.patch);
  c.channels = j.value("channels", c.channels);
  c.depth = j.value("depth", c.depth);
  c.heads = j.value("heads", c.heads);
  c.mlp_ratio = j.value("mlp_ratio", c.mlp_ratio);
  c.dec_channels = j.value("dec_channels", c.dec_channels);
  c.score_head_bias = j.value("score_head_bias", c.score_head_bias);
  c.scale_full_dim = j.value("scale_full_dim", c.scale_full_dim);
  c.pruning_enabled = j.value("pruning_enabled", c.pruning_enabled);
  if (j.contains("stages")) {
    c.schedule.stages.clear();
    for (const auto& s : j["stages"])
      c.schedule.stages.push_back({s["layer"].get<int>(), s["alpha"].get<double>()});
  }
  return c;
}

RunConfig run_config_from_json(const json& j) {
  const json schema = json::parse(embedded_schema());
  std::vector<std::string> errs = schema_errors(j, schema);
  if (!errs.empty()) {
    std::string msg = "config rejected by schema:";
    for (const auto& e : errs) msg += "\n  " + e;
    throw std::runtime_error(msg);
  }

  RunConfig c;
  if (j.contains("model")) c.model = model_config_from_json(j["model"]);
  if (j.contains("train")) {
    const json& t = j["train"];
    c.train.iters = t.value("iters", c.train.iters);
    c.train.batch = t.value("batch", c.train.batch);
    c.train.lr = t.value("lr", c.train.lr);
    c.train.optimizer = t.value("optimizer", c.train.optimizer);
    c.train.momentum = t.value("momentum", c.train.momentum);
    c.train.weight_decay = t.value("weight_decay", c.train.weight_decay);
    c.train.lambda_final = t.value("lambda_final", c.train.lambda_final);
    c.train.lambda_heads = t.value("lambda_heads", c.train.lambda_heads);
    c.train.prune_during_training = t.value("prune_during_training", c.train.prune_during_training);
    c.train.checkpoint_every = t.value("checkpoint_every", c.train.checkpoint_every);
    c.train.log_every = t.value("log_every", c.train.log_every);
    c.train.flip_augment = t.value("flip_augment", c.train.flip_augment);
  }
  if (j.contains("data")) {
    const json& d = j["data"];
    c.data.root = d.value("root", c.data.root);
    c.data.synth.width = d.value("width", c.data.synth.width);
    c.data.synth.height = d.value("height", c.data.synth.height);
    c.data.synth.annotators = d.value("annotators", c.data.synth.annotators);
    c.data.synth.noise_sigma = d.value("noise_sigma", c.data.synth.noise_sigma);
    c.data.synth.min_shapes = d.value("min_shapes", c.data.synth.min_shapes);
    c.data.synth.max_shapes = d.value("max_shapes", c.data.synth.max_shapes);
    c.data.synth.min_contrast = d.value("min_contrast", c.data.synth.min_contrast);
    c.data.train_count = d.value("train_count", c.data.train_count);
    c.data.test_count = d.value("test_count", c.data.test_count);
  }
  if (j.contains("eval")) c.eval.tolerance = j["eval"].value("tolerance", c.eval.tolerance);

  c.model.validate();
  c.data.synth.validate();
  return c;
}

RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("config: cannot open " + path);
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw std::runtime_error("config: " + path + ": " + e.what());
  }
  return run_config_from_json(j);
}

json run_config_to_json(const RunConfig& c) {
  return json{{"model", model_config_to_json(c.model)},
              {"train",
               {{"iters", c.train.iters},
                {"batch", c.train.batch},
                {"lr", c.train.lr},
                {"optimizer", c.train.optimizer},
                {"momentum", c.train.momentum},
                {"weight_decay", c.train.weight_decay},
                {"lambda_final", c.train.lambda_final},
                {"lambda_heads", c.train.lambda_heads},
                {"prune_during_training", c.train.prune_during_training},
                {"checkpoint_every", c.train.checkpoint_every},
                {"log_every", c.train.log_every},
                {"flip_augment", c.train.flip_augment}}},
              {"data",
               {{"root", c.data.root},
                {"width", c.data.synth.width},
                {"height", c.data.synth.height},
                {"train_count", c.data.train_count},
                {"test_count", c.data.test_count},
                {"annotators", c.data.synth.annotators},
                {"noise_sigma", c.data.synth.noise_sigma},
                {"min_shapes", c.data.synth.min_shapes},
                {"max_shapes", c.data.synth.max_shapes},
                {"min_contrast", c.data.synth.min_contrast}}},
              {"eval", {{"tolerance", c.eval.tolerance}}}};
}

std::uint64_t fnv1a64(std::string_view s) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char ch : s) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  return h;
}

}  // namespace amped
