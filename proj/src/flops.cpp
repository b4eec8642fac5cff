// Copyright (c) 2026 The Amped Authors
// SPDX-License-Identifier: Apache-2.0
#include "amped/flops.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace amped {

ArchSpec ArchSpec::vit_b() {
  ArchSpec a;
  a.name = "sed-vit-b";
  a.image_h = a.image_w = 1024;
  a.patch = 16;
  a.channels = 768;
  a.depth = 12;
  a.mlp_ratio = 4;
  a.in_channels = 3;
  a.stage_layers = {3, 6, 9};
  a.decoder = {4, 768};
  return a;
}

ArchSpec ArchSpec::vit_l() {
  ArchSpec a;
  a.name = "sed-vit-l";
  a.image_h = a.image_w = 1024;
  a.patch = 16;
  a.channels = 1024;
  a.depth = 24;
  a.mlp_ratio = 4;
  a.in_channels = 3;
  a.stage_layers = {6, 12, 18};
  a.decoder = {4, 1024};
  return a;
}

ArchSpec ArchSpec::from_config(const SedConfig& cfg) {
  ArchSpec a;
  a.name = "model";
  a.image_h = cfg.image_h;
  a.image_w = cfg.image_w;
  a.patch = cfg.patch;
  a.channels = cfg.channels;
  a.depth = cfg.depth;
  a.mlp_ratio = cfg.mlp_ratio;
  a.in_channels = cfg.in_channels;
  for (const PruneStage& s : cfg.schedule.stages) a.stage_layers.push_back(s.layer);
  a.decoder = {cfg.fusion_inputs(), cfg.dec_channels};
  return a;
}

RetentionProfile RetentionProfile::full(const ArchSpec& a) {
  RetentionProfile p;
  p.layer_tokens.assign(a.depth, a.tokens());
  p.stage_enter_tokens.assign(a.stage_layers.size(), a.tokens());
  return p;
}

RetentionProfile RetentionProfile::from_fractions(const ArchSpec& a,
                                                 const std::vector<double>& keep) {
  if (keep.size() != a.stage_layers.size())
    throw std::invalid_argument("from_fractions: one keep fraction per stage required");
  RetentionProfile p;
  int n = a.tokens();
  size_t s = 0;
  for (int layer = 1; layer <= a.depth; ++layer) {
    if (s < a.stage_layers.size() && a.stage_layers[s] == layer) {
      if (keep[s] < 0.0 || keep[s] > 1.0)
        throw std::invalid_argument("from_fractions: keep fraction outside [0,1]");
      p.stage_enter_tokens.push_back(n);
      n = std::max(1, static_cast<int>(std::llround(keep[s] * n)));
      ++s;
    }
    p.layer_tokens.push_back(n);
  }
  return p;
}

FlopReport analytic_macs(const ArchSpec& a, const RetentionProfile& p) {
  if (a.image_h % a.patch != 0 || a.image_w % a.patch != 0)
    throw std::invalid_argument("analytic_macs: image size must be a multiple of patch");
  if (static_cast<int>(p.layer_tokens.size()) != a.depth)
    throw std::invalid_argument("analytic_macs: layer_tokens size != depth");
  if (p.stage_enter_tokens.size() != a.stage_layers.size())
    throw std::invalid_argument("analytic_macs: stage token count mismatch");

  const uint64_t N = a.tokens();
  const uint64_t C = a.channels;
  FlopReport r;
  r.embed = N * C * static_cast<uint64_t>(a.patch) * a.patch * a.in_channels;
  r.total = r.embed;

  size_t s = 0;
  for (int layer = 1; layer <= a.depth; ++layer) {
    LayerMacs lm;
    lm.layer = layer;
    const uint64_t n = p.layer_tokens[layer - 1];
    lm.tokens = static_cast<int>(n);
    if (s < a.stage_layers.size() && a.stage_layers[s] == layer) {
      lm.score = static_cast<uint64_t>(p.stage_enter_tokens[s]) * C;
      ++s;
    }
    lm.proj = (4 + 2 * static_cast<uint64_t>(a.mlp_ratio)) * n * C * C;
    const bool global = a.window_tokens == 0 ||
                        std::find(a.global_layers.begin(), a.global_layers.end(), layer) !=
                            a.global_layers.end();
    const uint64_t span = global ? n : std::min<uint64_t>(n, a.window_tokens);
    lm.attn = 2 * n * span * C;
    r.total += lm.proj + lm.attn + lm.score;
    r.layers.push_back(lm);
  }

  const uint64_t S = a.decoder.fusion_inputs;
  const uint64_t dh = a.decoder.proj_channels;
  r.decoder = S * N * C * dh + N * S * dh;
  r.total += r.decoder;
  return r;
}

ReductionReport reduction_report(const ArchSpec& a, const RetentionProfile& baseline,
                                 const RetentionProfile& pruned) {
  ReductionReport r;
  r.baseline = analytic_macs(a, baseline);
  r.pruned = analytic_macs(a, pruned);
  r.reduction_pct =
      100.0 * (1.0 - static_cast<double>(r.pruned.total) / static_cast<double>(r.baseline.total));
  return r;
}

std::vector<ReductionReport> sweep_schedules(const ArchSpec& a,
                                            const std::vector<std::vector<double>>& keeps) {
  std::vector<ReductionReport> out;
  const RetentionProfile base = RetentionProfile::full(a);
  for (const auto& k : keeps) out.push_back(reduction_report(a, base, RetentionProfile::from_fractions(a, k)));
  return out;
}

namespace {

struct Row {
  int layer;
  const char* kind;
  uint64_t macs;
  uint64_t base_macs;
};

std::vector<Row> flatten(const ReductionReport& r) {
  std::vector<Row> rows;
  rows.push_back({0, "embed", r.pruned.embed, r.baseline.embed});
  for (size_t i = 0; i < r.pruned.layers.size(); ++i) {
    const LayerMacs& p = r.pruned.layers[i];
    const LayerMacs& b = r.baseline.layers[i];
    if (p.score || b.score) rows.push_back({p.layer, "score", p.score, b.score});
    rows.push_back({p.layer, "proj", p.proj, b.proj});
    rows.push_back({p.layer, "attn", p.attn, b.attn});
  }
  rows.push_back({0, "decoder", r.pruned.decoder, r.baseline.decoder});
  rows.push_back({0, "total", r.pruned.total, r.baseline.total});
  return rows;
}

double pct(uint64_t pruned, uint64_t base) {
  if (base == 0) return 0.0;
  return 100.0 * (1.0 - static_cast<double>(pruned) / static_cast<double>(base));
}

}  // namespace

std::string report_csv(const ReductionReport& r) {
  std::ostringstream os;
  os << "layer,kind,macs,cumulative,reduction_pct\n";
  uint64_t cum = 0;
  for (const Row& row : flatten(r)) {
    if (std::string(row.kind) != "total") cum += row.macs;
    const uint64_t shown_cum = std::string(row.kind) == "total" ? row.macs : cum;
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.4f", pct(row.macs, row.base_macs));
    os << row.layer << ',' << row.kind << ',' << row.macs << ',' << shown_cum << ',' << buf
       << '\n';
  }
  return os.str();
}

std::string report_json(const ReductionReport& r) {
  nlohmann::json j;
  j["baseline_macs"] = r.baseline.total;
  j["pruned_macs"] = r.pruned.total;
  j["baseline_gmacs"] = r.baseline.gmacs();
  j["pruned_gmacs"] = r.pruned.gmacs();
  j["reduction_pct"] = r.reduction_pct;
  j["rows"] = nlohmann::json::array();
  uint64_t cum = 0;
  for (const Row& row : flatten(r)) {
    if (std::string(row.kind) != "total") cum += row.macs;
    j["rows"].push_back({{"layer", row.layer},
                         {"kind", row.kind},
                         {"macs", row.macs},
                         {"cumulative", std::string(row.kind) == "total" ? row.macs : cum},
                         {"reduction_pct", pct(row.macs, row.base_macs)}});
  }
  return j.dump(2) + "\n";
}

}  // namespace amped
