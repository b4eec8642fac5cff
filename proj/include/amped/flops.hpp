// Copyright (c) 2026 The Amped Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "amped/pruning.hpp"
#include "amped/sed.hpp"

// Closed-form multiply-accumulate model of the detector. Counts exactly the
// matrix products the instrumented forward pass executes (projections,
// attention, score heads, patch embedding, decoder); element-wise work and
// normalizations are excluded on both sides, so the analytic total equals
// the instrumented counter for matching token counts.

namespace amped {

struct DecoderSpec {
  int fusion_inputs = 1;
  int proj_channels = 0;
};

struct ArchSpec {
  std::string name = "custom";
  int image_h = 0, image_w = 0;
  int patch = 0;
  int channels = 0;
  int depth = 0;
  int mlp_ratio = 4;
  int in_channels = 1;
  std::vector<int> stage_layers;  // 1-based, strictly increasing
  DecoderSpec decoder;
  // 0 = full attention everywhere; otherwise layers outside global_layers
  // attend within windows of this many tokens.
  int window_tokens = 0;
  std::vector<int> global_layers;

  int grid_h() const { return image_h / patch; }
  int grid_w() const { return image_w / patch; }
  int tokens() const { return grid_h() * grid_w(); }

  /// 1024x1024 base-size encoder.
  static ArchSpec vit_b();
  /// 1024x1024 large encoder.
  static ArchSpec vit_l();
  /// Mirror of a live model configuration (for exact parity checks).
  static ArchSpec from_config(const SedConfig& cfg);
};

/// Token counts the encoder actually sees: per block and per score head.
struct RetentionProfile {
  std::vector<int> layer_tokens;
  std::vector<int> stage_enter_tokens;

  static RetentionProfile full(const ArchSpec& a);
  /// keep[i] is the fraction of entering tokens stage i retains (rounded,
  /// at least one token).
  static RetentionProfile from_fractions(const ArchSpec& a, const std::vector<double>& keep);
  template <typename T>
  static RetentionProfile from_trace(const ForwardTrace<T>& tr) {
    RetentionProfile p;
    p.layer_tokens = tr.layer_tokens;
    p.stage_enter_tokens = tr.stage_enter_tokens;
    return p;
  }
};

struct LayerMacs {
  int layer = 0;  // 1-based
  int tokens = 0;
  uint64_t proj = 0;
  uint64_t attn = 0;
  uint64_t score = 0;  // zero unless a stage runs before this layer
};

struct FlopReport {
  std::vector<LayerMacs> layers;
  uint64_t embed = 0;
  uint64_t decoder = 0;
  uint64_t total = 0;

  double gmacs() const { return static_cast<double>(total) / 1e9; }
};

FlopReport analytic_macs(const ArchSpec& a, const RetentionProfile& p);

struct ReductionReport {
  FlopReport baseline;
  FlopReport pruned;
  double reduction_pct = 0.0;  // 100 * (1 - pruned/baseline)
};

ReductionReport reduction_report(const ArchSpec& a, const RetentionProfile& baseline,
                                 const RetentionProfile& pruned);

/// One analytic reduction report per keep-fraction vector.
std::vector<ReductionReport> sweep_schedules(const ArchSpec& a,
                                             const std::vector<std::vector<double>>& keeps);

/// CSV with columns layer,kind,macs,cumulative,reduction_pct. Row order:
/// embed, per-layer score/proj/attn, decoder, total.
std::string report_csv(const ReductionReport& r);
std::string report_json(const ReductionReport& r);

}  // namespace amped
