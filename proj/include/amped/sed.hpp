// Copyright (c) 2026 The Amped Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "amped/log.hpp"
#include "amped/params.hpp"
#include "amped/pruning.hpp"
#include "amped/rng.hpp"
#include "amped/tape.hpp"

// Streamlined edge detector: a small ViT encoder with optional multi-stage
// token pruning, plus a decoder that fuses recovered per-stage sequences
// into a dense edge probability map.

namespace amped {

struct SedConfig {
  int image_h = 64;
  int image_w = 64;
  int patch = 8;
  int channels = 32;  // token width C
  int depth = 4;
  int heads = 4;
  int mlp_ratio = 4;
  int in_channels = 1;    // grayscale input
  int dec_channels = 16;  // per-fusion-input decoder width
  PruneSchedule schedule;
  bool pruning_enabled = true;   // false: stages still score, masks forced to all-ones
  bool score_head_bias = false;  // add a bias to the per-stage score head
  bool scale_full_dim = false;   // attention scale 1/sqrt(C) instead of 1/sqrt(C/heads)

  int grid_h() const { return image_h / patch; }
  int grid_w() const { return image_w / patch; }
  int tokens() const { return grid_h() * grid_w(); }
  int fusion_inputs() const { return static_cast<int>(schedule.stages.size()) + 1; }

  void validate() const {
    if (image_h < patch || image_w < patch || image_h % patch != 0 || image_w % patch != 0)
      throw std::invalid_argument("config: image size must be a positive multiple of patch");
    if (in_channels != 1) throw std::invalid_argument("config: only single-channel input supported");
    if (channels < 1 || heads < 1 || channels % heads != 0)
      throw std::invalid_argument("config: heads must divide channels");
    if (depth < 1 || mlp_ratio < 1 || dec_channels < 1)
      throw std::invalid_argument("config: depth, mlp_ratio, dec_channels must be positive");
    ScheduleCheck c = validate_schedule(schedule, depth);
    if (!c.ok)
      throw std::invalid_argument("config: schedule stage " + std::to_string(c.violation_index) +
                                  ": " + c.reason);
  }
};

/// Dense edge probabilities at input resolution.
template <typename T>
struct EdgeMap {
  Mat<T> prob;  // H x W in [0, 1]
};

/// What one pruning stage did during a forward pass.
template <typename T>
struct StageTrace {
  int layer = 0;  // 1-based layer the stage ran before
  double alpha = 0.0;
  std::vector<T> scores;     // per entering token
  std::vector<int> origins;  // original token id per entering token
  DecisionMask mask;         // decisions actually applied (after any fallback)
  bool fallback = false;     // empty retention was rescued
  int enter_tokens = 0;
  int kept_tokens = 0;
};

template <typename T>
struct ForwardTrace {
  std::vector<StageTrace<T>> stages;
  std::vector<int> layer_tokens;        // tokens each encoder block processed
  std::vector<int> stage_enter_tokens;  // tokens scored at each stage
  AccumulatedMask accumulated;          // keep state over original positions
  uint64_t macs = 0;
};

/// Masks to apply instead of thresholding, one per stage. Used to hold the
/// discrete decisions fixed while differentiating or probing the model.
using ForcedMasks = std::vector<DecisionMask>;

template <typename T>
class SedModel {
 public:
  using Var = typename Tape<T>::Var;

  explicit SedModel(SedConfig cfg) : cfg_(std::move(cfg)) {
    cfg_.validate();
    build_params();
  }

  const SedConfig& config() const { return cfg_; }
  ParamStore<T>& params() { return params_; }
  const ParamStore<T>& params() const { return params_; }

  void init_weights(uint64_t seed) {
    Rng rng = Rng::derive(seed, 0x5eed);
    for (const std::string& name : params_.names()) {
      Mat<T>& m = params_.get(name);
      const bool is_gain = name.ends_with(".g");
      const bool is_bias = name.ends_with(".b");
      if (is_gain) {
        m.fill(T(1));
      } else if (is_bias) {
        m.fill(T(0));
      } else {
        for (T& v : m.data) v = static_cast<T>(rng.normal(0.0, 0.02));
      }
    }
  }

  /// Cuts the image into patch rows and projects to token width; adds the
  /// learned position table.
  Var patch_embed(Tape<T>& tape, BoundParams<T>& bound, const Mat<T>& image) const {
    require_shape(image, cfg_.image_h, cfg_.image_w, "patch_embed image");
    const int p = cfg_.patch, gh = cfg_.grid_h(), gw = cfg_.grid_w();
    Mat<T> patches(gh * gw, p * p);
    for (int gy = 0; gy < gh; ++gy)
      for (int gx = 0; gx < gw; ++gx) {
        T* row = patches.row(gy * gw + gx);
        for (int py = 0; py < p; ++py)
          for (int px = 0; px < p; ++px)
            row[py * p + px] = image.at(gy * p + py, gx * p + px);
      }
    Var x = tape.matmul(tape.input(std::move(patches)), bound.bind(tape, params_, "embed.w"));
    x = tape.add_rowvec(x, bound.bind(tape, params_, "embed.b"));
    return tape.add(x, bound.bind(tape, params_, "pos"));
  }

  struct EncodeOut {
    Var final_seq = -1;                // surviving tokens after the last block
    std::vector<Var> stage_outputs;    // block output at each stage's layer
    std::vector<Var> stage_snapshots;  // sequence entering each stage
    std::vector<Var> stage_scores;     // n_enter x 1 probabilities per stage
    ForwardTrace<T> trace;
  };

  /// Runs the encoder blocks with pruning hooks. forced, when given, fixes
  /// each stage's decisions (sizes must match the entering sequences).
  EncodeOut encode(Tape<T>& tape, BoundParams<T>& bound, Var x,
                   const ForcedMasks* forced = nullptr) const {
    EncodeOut out;
    out.trace.accumulated = AccumulatedMask(cfg_.tokens());
    std::vector<int> origin(cfg_.tokens());
    for (size_t i = 0; i < origin.size(); ++i) origin[i] = static_cast<int>(i);

    if (forced && forced->size() != cfg_.schedule.stages.size())
      throw std::invalid_argument("encode: forced mask count != stage count");

    size_t next_stage = 0;
    for (int layer = 1; layer <= cfg_.depth; ++layer) {
      if (next_stage < cfg_.schedule.stages.size() &&
          cfg_.schedule.stages[next_stage].layer == layer) {
        x = run_stage(tape, bound, x, next_stage, forced, origin, out);
        ++next_stage;
      }
      out.trace.layer_tokens.push_back(tape.value(x).rows);
      x = run_block(tape, bound, x, layer - 1);
      if (next_stage > 0 && !out.stage_outputs.empty() &&
          cfg_.schedule.stages[next_stage - 1].layer == layer)
        out.stage_outputs[next_stage - 1] = x;
    }
    out.final_seq = x;
    out.trace.macs = tape.macs();
    return out;
  }

  /// Scatters z back to full token count through the stage snapshots taken
  /// up to and including stage `upto` (exclusive count; pass stage count for
  /// the final sequence).
  Var recover(Tape<T>& tape, const EncodeOut& enc, Var z, size_t upto) const {
    for (size_t s = upto; s-- > 0;) {
      const StageTrace<T>& st = enc.trace.stages[s];
      z = tape.scatter_rows(enc.stage_snapshots[s], st.mask.retained_indices(), z);
    }
    return z;
  }

  /// Fuses the recovered per-stage sequences into the edge probability map.
  /// Returns the H x W probability Var; logits_out, when non-null, receives
  /// the pre-sigmoid map.
  Var decode(Tape<T>& tape, BoundParams<T>& bound, const EncodeOut& enc,
             Var* logits_out = nullptr) const {
    std::vector<Var> fused;
    for (size_t s = 0; s < cfg_.schedule.stages.size(); ++s) {
      Var rec = recover(tape, enc, enc.stage_outputs[s], s + 1);
      fused.push_back(dec_input(tape, bound, rec, s));
    }
    Var rec_final = recover(tape, enc, enc.final_seq, cfg_.schedule.stages.size());
    fused.push_back(dec_input(tape, bound, rec_final, cfg_.schedule.stages.size()));

    Var u = fused.size() == 1 ? fused[0] : tape.concat_cols(fused);
    Var logits = tape.matmul(u, bound.bind(tape, params_, "dec.proj.w"));
    logits = tape.norm_flat(logits, bound.bind(tape, params_, "dec.norm.g"),
                            bound.bind(tape, params_, "dec.norm.b"));
    Var grid = tape.reshape(logits, cfg_.grid_h(), cfg_.grid_w());
    Var up = tape.bilinear(grid, cfg_.image_h, cfg_.image_w);
    if (logits_out) *logits_out = up;
    return tape.sigmoid(up);
  }

  struct Forward {
    Var edge = -1;         // H x W probabilities
    Var edge_logits = -1;  // H x W pre-sigmoid
    EncodeOut enc;
  };

  Forward forward(Tape<T>& tape, BoundParams<T>& bound, const Mat<T>& image,
                  const ForcedMasks* forced = nullptr) const {
    Forward f;
    Var x = patch_embed(tape, bound, image);
    f.enc = encode(tape, bound, x, forced);
    f.edge = decode(tape, bound, f.enc, &f.edge_logits);
    f.enc.trace.macs = tape.macs();
    return f;
  }

  /// Inference without gradient bookkeeping.
  EdgeMap<T> infer(const Mat<T>& image, ForwardTrace<T>* trace_out = nullptr,
                   uint64_t* macs_out = nullptr) const {
    Tape<T> tape(false);
    BoundParams<T> bound;
    Forward f = forward(tape, bound, image);
    if (trace_out) *trace_out = f.enc.trace;
    if (macs_out) *macs_out = tape.macs();
    return EdgeMap<T>{tape.value(f.edge)};
  }

 private:
  void build_params() {
    const int C = cfg_.channels, p = cfg_.patch, m = cfg_.mlp_ratio;
    params_.add("embed.w", Mat<T>(p * p * cfg_.in_channels, C));
    params_.add("embed.b", Mat<T>(1, C));
    params_.add("pos", Mat<T>(cfg_.tokens(), C));
    for (int i = 0; i < cfg_.depth; ++i) {
      const std::string pre = "layer" + std::to_string(i) + ".";
      params_.add(pre + "ln1.g", Mat<T>(1, C));
      params_.add(pre + "ln1.b", Mat<T>(1, C));
      params_.add(pre + "qkv.w", Mat<T>(C, 3 * C));
      params_.add(pre + "qkv.b", Mat<T>(1, 3 * C));
      params_.add(pre + "attn_out.w", Mat<T>(C, C));
      params_.add(pre + "attn_out.b", Mat<T>(1, C));
      params_.add(pre + "ln2.g", Mat<T>(1, C));
      params_.add(pre + "ln2.b", Mat<T>(1, C));
      params_.add(pre + "fc1.w", Mat<T>(C, m * C));
      params_.add(pre + "fc1.b", Mat<T>(1, m * C));
      params_.add(pre + "fc2.w", Mat<T>(m * C, C));
      params_.add(pre + "fc2.b", Mat<T>(1, C));
    }
    for (size_t s = 0; s < cfg_.schedule.stages.size(); ++s) {
      params_.add("stage" + std::to_string(s) + ".score.w", Mat<T>(C, 1));
      if (cfg_.score_head_bias)
        params_.add("stage" + std::to_string(s) + ".score.b", Mat<T>(1, 1));
    }
    for (int j = 0; j < cfg_.fusion_inputs(); ++j) {
      params_.add("dec.f" + std::to_string(j) + ".w", Mat<T>(C, cfg_.dec_channels));
      params_.add("dec.f" + std::to_string(j) + ".b", Mat<T>(1, cfg_.dec_channels));
    }
    params_.add("dec.proj.w", Mat<T>(cfg_.fusion_inputs() * cfg_.dec_channels, 1));
    params_.add("dec.norm.g", Mat<T>(1, 1));
    params_.add("dec.norm.b", Mat<T>(1, 1));
  }

  Var dec_input(Tape<T>& tape, BoundParams<T>& bound, Var recovered, size_t j) const {
    const std::string pre = "dec.f" + std::to_string(j) + ".";
    Var d = tape.matmul(recovered, bound.bind(tape, params_, pre + "w"));
    return tape.add_rowvec(d, bound.bind(tape, params_, pre + "b"));
  }

  Var run_stage(Tape<T>& tape, BoundParams<T>& bound, Var x, size_t s, const ForcedMasks* forced,
                std::vector<int>& origin, EncodeOut& out) const {
    const PruneStage& stage = cfg_.schedule.stages[s];
    const std::string pre = "stage" + std::to_string(s) + ".";
    Var logits = tape.matmul(x, bound.bind(tape, params_, pre + "score.w"));
    if (cfg_.score_head_bias)
      logits = tape.add_rowvec(logits, bound.bind(tape, params_, pre + "score.b"));
    Var probs = tape.sigmoid(logits);
    out.stage_scores.push_back(probs);

    StageTrace<T> tr;
    tr.layer = stage.layer;
    tr.alpha = stage.alpha;
    tr.origins = origin;
    tr.enter_tokens = tape.value(x).rows;
    const Mat<T>& pv = tape.value(probs);
    tr.scores.resize(pv.rows);
    for (int i = 0; i < pv.rows; ++i) tr.scores[i] = pv.at(i, 0);

    if (forced) {
      tr.mask = (*forced)[s];
      if (tr.mask.bits.size() != tr.scores.size())
        throw std::invalid_argument("encode: forced mask size != entering tokens");
      if (tr.mask.retained() == 0) throw std::invalid_argument("encode: forced mask empty");
    } else if (!cfg_.pruning_enabled) {
      tr.mask.bits.assign(tr.scores.size(), 1);
    } else {
      EdgeScores<T> es;
      es.p = tr.scores;
      tr.mask = threshold_mask(es, stage.alpha);
      if (tr.mask.retained() == 0) {
        int best = 0;
        for (size_t i = 1; i < tr.scores.size(); ++i)
          if (tr.scores[i] > tr.scores[best]) best = static_cast<int>(i);
        tr.mask.bits[best] = 1;
        tr.fallback = true;
        log_warn("stage " + std::to_string(s) + " retained nothing at alpha " +
                 std::to_string(stage.alpha) + "; keeping top-scoring token");
      }
    }
    tr.kept_tokens = tr.mask.retained();

    out.stage_snapshots.push_back(x);
    out.stage_outputs.push_back(-1);  // filled after the block runs
    out.trace.stage_enter_tokens.push_back(tr.enter_tokens);
    accumulate_mask(out.trace.accumulated, tr.mask);

    const std::vector<int> idx = tr.mask.retained_indices();
    std::vector<int> new_origin(idx.size());
    for (size_t k = 0; k < idx.size(); ++k) new_origin[k] = origin[idx[k]];
    origin = std::move(new_origin);

    out.trace.stages.push_back(std::move(tr));
    return tape.gather_rows(x, idx);
  }

  Var run_block(Tape<T>& tape, BoundParams<T>& bound, Var x, int i) const {
    const std::string pre = "layer" + std::to_string(i) + ".";
    const int C = cfg_.channels, hc = C / cfg_.heads;
    const T scl = T(1) / std::sqrt(static_cast<T>(cfg_.scale_full_dim ? C : hc));

    Var h = tape.layer_norm(x, bound.bind(tape, params_, pre + "ln1.g"),
                            bound.bind(tape, params_, pre + "ln1.b"));
    Var qkv = tape.add_rowvec(tape.matmul(h, bound.bind(tape, params_, pre + "qkv.w")),
                              bound.bind(tape, params_, pre + "qkv.b"));
    std::vector<Var> heads_out;
    for (int hd = 0; hd < cfg_.heads; ++hd) {
      Var q = tape.slice_cols(qkv, hd * hc, (hd + 1) * hc);
      Var k = tape.slice_cols(qkv, C + hd * hc, C + (hd + 1) * hc);
      Var v = tape.slice_cols(qkv, 2 * C + hd * hc, 2 * C + (hd + 1) * hc);
      Var att = tape.row_softmax(tape.scale(tape.matmul_nt(q, k), scl));
      heads_out.push_back(tape.matmul(att, v));
    }
    Var ctx = cfg_.heads == 1 ? heads_out[0] : tape.concat_cols(heads_out);
    Var attn = tape.add_rowvec(tape.matmul(ctx, bound.bind(tape, params_, pre + "attn_out.w")),
                               bound.bind(tape, params_, pre + "attn_out.b"));
    x = tape.add(x, attn);

    Var h2 = tape.layer_norm(x, bound.bind(tape, params_, pre + "ln2.g"),
                             bound.bind(tape, params_, pre + "ln2.b"));
    Var mid = tape.gelu(tape.add_rowvec(tape.matmul(h2, bound.bind(tape, params_, pre + "fc1.w")),
                                        bound.bind(tape, params_, pre + "fc1.b")));
    Var mlp = tape.add_rowvec(tape.matmul(mid, bound.bind(tape, params_, pre + "fc2.w")),
                              bound.bind(tape, params_, pre + "fc2.b"));
    return tape.add(x, mlp);
  }

  SedConfig cfg_;
  ParamStore<T> params_;
};

}  // namespace amped
