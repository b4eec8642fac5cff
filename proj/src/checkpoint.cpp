// Copyright (c) 2026 The Amped Authors
// SPDX-License-Identifier: Apache-2.0

#include "amped/checkpoint.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <stdexcept>

#include "json.hpp"

#include "amped/config.hpp"

namespace amped {

using nlohmann::json;

namespace {

constexpr char kMagic[8] = {'A', 'M', 'P', 'E', 'D', 'C', 'P', '1'};
constexpr int kFormat = 1;

void put_u64le(std::string& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

std::uint64_t get_u64le(const unsigned char* p) {
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(p[i]) << (8 * i);
  return v;
}

void put_f32le(std::string& out, float x) {
  std::uint32_t b = std::bit_cast<std::uint32_t>(x);
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((b >> (8 * i)) & 0xff));
}

float get_f32le(const unsigned char* p) {
  std::uint32_t b = 0;
  for (int i = 0; i < 4; ++i) b |= static_cast<std::uint32_t>(p[i]) << (8 * i);
  return std::bit_cast<float>(b);
}

}  // namespace

void save_checkpoint(const std::string& path, const SedConfig& config,
                     const ParamStore<float>& params) {
  json tensors = json::array();
  std::string data;
  for (const std::string& name : params.names()) {
    const MatF& m = params.get(name);
    tensors.push_back({{"name", name},
                       {"rows", m.rows},
                       {"cols", m.cols},
                       {"offset", data.size()}});
    for (float x : m.data) put_f32le(data, x);
  }
  json header = {{"format", kFormat},
                 {"model", model_config_to_json(config)},
                 {"tensors", tensors}};
  std::string htext = header.dump();

  std::string blob;
  blob.append(kMagic, sizeof(kMagic));
  put_u64le(blob, htext.size());
  blob += htext;
  blob += data;

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("checkpoint: cannot open " + path + " for writing");
  out.write(blob.data(), static_cast<std::streamsize>(blob.size()));
  if (!out) throw std::runtime_error("checkpoint: write failed: " + path);
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("checkpoint: cannot open " + path);
  std::string blob((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  const auto* p = reinterpret_cast<const unsigned char*>(blob.data());

  if (blob.size() < 16 || std::memcmp(blob.data(), kMagic, sizeof(kMagic)) != 0)
    throw std::runtime_error("checkpoint: " + path + ": bad magic");
  std::uint64_t hlen = get_u64le(p + 8);
  if (16 + hlen > blob.size())
    throw std::runtime_error("checkpoint: " + path + ": truncated header");

  json header;
  try {
    header = json::parse(blob.begin() + 16, blob.begin() + 16 + static_cast<size_t>(hlen));
  } catch (const json::parse_error& e) {
    throw std::runtime_error("checkpoint: " + path + ": " + e.what());
  }
  if (header.value("format", 0) != kFormat)
    throw std::runtime_error("checkpoint: " + path + ": unsupported format");

  Checkpoint ck;
  ck.config = model_config_from_json(header.at("model"));

  size_t data_off = 16 + static_cast<size_t>(hlen);
  for (const json& t : header.at("tensors")) {
    std::string name = t.at("name").get<std::string>();
    int rows = t.at("rows").get<int>();
    int cols = t.at("cols").get<int>();
    std::uint64_t off = t.at("offset").get<std::uint64_t>();
    if (rows < 0 || cols < 0)
      throw std::runtime_error("checkpoint: " + path + ": bad shape for " + name);
    size_t count = static_cast<size_t>(rows) * static_cast<size_t>(cols);
    if (data_off + off + count * 4 > blob.size())
      throw std::runtime_error("checkpoint: " + path + ": data out of range for " + name);
    MatF m(rows, cols);
    for (size_t i = 0; i < count; ++i) m.data[i] = get_f32le(p + data_off + off + 4 * i);
    ck.params.add(name, std::move(m));
  }
  return ck;
}

void require_structure_match(const SedConfig& stored, const SedConfig& expect) {
  std::string diff;
  auto cmp = [&](const char* what, auto a, auto b) {
    if (a != b)
      diff += std::string(diff.empty() ? "" : ", ") + what + " " + std::to_string(b) +
              " != stored " + std::to_string(a);
  };
  cmp("image_h", stored.image_h, expect.image_h);
  cmp("image_w", stored.image_w, expect.image_w);
  cmp("patch", stored.patch, expect.patch);
  cmp("channels", stored.channels, expect.channels);
  cmp("depth", stored.depth, expect.depth);
  cmp("heads", stored.heads, expect.heads);
  cmp("mlp_ratio", stored.mlp_ratio, expect.mlp_ratio);
  cmp("in_channels", stored.in_channels, expect.in_channels);
  cmp("dec_channels", stored.dec_channels, expect.dec_channels);
  cmp("score_head_bias", (int)stored.score_head_bias, (int)expect.score_head_bias);
  cmp("stage count", stored.schedule.stages.size(), expect.schedule.stages.size());
  if (stored.schedule.stages.size() == expect.schedule.stages.size())
    for (size_t i = 0; i < expect.schedule.stages.size(); ++i)
      cmp(("stage " + std::to_string(i) + " layer").c_str(), stored.schedule.stages[i].layer,
          expect.schedule.stages[i].layer);
  if (!diff.empty()) throw std::runtime_error("checkpoint does not fit this model: " + diff);
}

}  // namespace amped
