// Copyright (c) 2026 The Amped Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <map>
#include <ostream>
#include <string>
#include <vector>

#include "amped/config.hpp"
#include "amped/loss.hpp"
#include "amped/rng.hpp"
#include "amped/sed.hpp"

namespace amped {

// One supervised example, ready for the loss: the dense target is the union
// of all annotators, the token target marks patches containing any edge.
template <typename T>
struct TrainSample {
  Mat<T> image;         // H x W in [0,1]
  Mat<T> pixel_target;  // H x W in {0,1}
  Mat<T> token_target;  // N x 1 in {0,1}, original token order
};

template <typename T>
TrainSample<T> make_train_sample(const Mat<T>& image, const GroundTruthSet& gt,
                                 const SedConfig& cfg) {
  TrainSample<T> s;
  s.image = image;
  s.pixel_target = Mat<T>(cfg.image_h, cfg.image_w);
  for (const BinaryMap& m : gt.maps) {
    require_shape(s.pixel_target, m.h, m.w, "train sample annotation");
    for (int y = 0; y < m.h; ++y)
      for (int x = 0; x < m.w; ++x)
        if (m.at(y, x)) s.pixel_target.at(y, x) = T(1);
  }
  s.token_target = token_targets<T>(gt, cfg.patch, cfg.grid_h(), cfg.grid_w());
  return s;
}

/// Mirror image, dense target and token target left-right.
template <typename T>
TrainSample<T> flipped_sample(const TrainSample<T>& s, const SedConfig& cfg) {
  TrainSample<T> f = s;
  const int w = cfg.image_w;
  for (int y = 0; y < cfg.image_h; ++y)
    for (int x = 0; x < w; ++x) {
      f.image.at(y, x) = s.image.at(y, w - 1 - x);
      f.pixel_target.at(y, x) = s.pixel_target.at(y, w - 1 - x);
    }
  const int gw = cfg.grid_w();
  for (int gy = 0; gy < cfg.grid_h(); ++gy)
    for (int gx = 0; gx < gw; ++gx)
      f.token_target.at(gy * gw + gx, 0) = s.token_target.at(gy * gw + (gw - 1 - gx), 0);
  return f;
}

/// All-ones decisions for every stage: scores are still computed and
/// supervised, but nothing is dropped.
inline ForcedMasks full_masks(const SedConfig& cfg) {
  ForcedMasks f(cfg.schedule.stages.size());
  for (DecisionMask& m : f) m.bits.assign(static_cast<size_t>(cfg.tokens()), 1);
  return f;
}

struct LossParts {
  double total = 0;
  double final_part = 0;  // dense edge-map term, before its weight
  double heads_part = 0;  // summed stage terms, before their weight
  std::vector<double> kept;  // fraction of entering tokens each stage retained
};

/// Weighted sum of the dense edge loss and the per-stage score-head losses.
/// Each head is supervised with the token targets of the tokens that
/// actually reached it. Returns a 1x1 Var on the tape.
template <typename T>
typename Tape<T>::Var build_loss(Tape<T>& tape, const SedModel<T>& model, BoundParams<T>& bound,
                                 const TrainSample<T>& sample, double lambda_final,
                                 double lambda_heads, const ForcedMasks* forced = nullptr,
                                 LossParts* parts = nullptr) {
  using Var = typename Tape<T>::Var;
  auto fwd = model.forward(tape, bound, sample.image, forced);

  Var dense = class_balanced_bce(tape, fwd.edge, sample.pixel_target);
  Var total = tape.scale(dense, static_cast<T>(lambda_final));

  Var heads = -1;
  for (size_t s = 0; s < fwd.enc.stage_scores.size(); ++s) {
    const StageTrace<T>& st = fwd.enc.trace.stages[s];
    Mat<T> tgt(st.enter_tokens, 1);
    for (int i = 0; i < st.enter_tokens; ++i)
      tgt.at(i, 0) = sample.token_target.at(st.origins[i], 0);
    Var h = class_balanced_bce(tape, fwd.enc.stage_scores[s], tgt);
    heads = heads < 0 ? h : tape.add(heads, h);
  }
  if (heads >= 0) total = tape.add(total, tape.scale(heads, static_cast<T>(lambda_heads)));

  if (parts) {
    parts->total = static_cast<double>(tape.value(total).at(0, 0));
    parts->final_part = static_cast<double>(tape.value(dense).at(0, 0));
    parts->heads_part = heads >= 0 ? static_cast<double>(tape.value(heads).at(0, 0)) : 0.0;
    parts->kept.clear();
    for (const StageTrace<T>& st : fwd.enc.trace.stages)
      parts->kept.push_back(st.enter_tokens > 0
                                ? static_cast<double>(st.kept_tokens) / st.enter_tokens
                                : 0.0);
  }
  return total;
}

/// Adam or SGD with momentum over a named parameter store. State is keyed
/// by parameter name and created on first use.
class Optimizer {
 public:
  Optimizer(const TrainConfig& cfg, ParamStore<float>& params);

  /// Consumes the gradients currently in the store (assumed batch-averaged).
  void apply();

  std::int64_t steps() const { return t_; }

 private:
  TrainConfig cfg_;
  ParamStore<float>& params_;
  std::map<std::string, MatF> m_, v_;  // adam moments, or v_ only for sgd
  std::int64_t t_ = 0;
};

struct TrainStats {
  int iteration = 0;
  double loss = 0;
  double final_part = 0;
  double heads_part = 0;
  double grad_norm = 0;          // global L2 after batch averaging
  std::vector<double> kept;      // per stage, from the last sample of the batch
};

struct TrainResult {
  int iterations = 0;
  double first_loss = 0;
  double last_loss = 0;
  std::vector<TrainStats> logged;  // every log_every iterations
};

/// Single-threaded, deterministic in (weights, data, config, seed). Batches
/// walk a reshuffled epoch order; optional horizontal flips come from a
/// separate stream so toggling augmentation does not change the order.
class Trainer {
 public:
  Trainer(SedModel<float>& model, const TrainConfig& cfg, std::uint64_t seed);

  /// One optimizer update from one batch.
  TrainStats step(const std::vector<TrainSample<float>>& batch);

  /// cfg.iters updates over `data`. Logs JSONL if `jsonl` is given; writes
  /// `<checkpoint_prefix>-NNNNNN.ckpt` snapshots when configured.
  TrainResult run(const std::vector<TrainSample<float>>& data, std::ostream* jsonl = nullptr,
                  const std::string& checkpoint_prefix = "");

  int iteration() const { return iter_; }

 private:
  SedModel<float>& model_;
  TrainConfig cfg_;
  Optimizer opt_;
  Rng order_rng_;
  Rng aug_rng_;
  std::vector<size_t> order_;
  size_t cursor_ = 0;
  int iter_ = 0;

  size_t next_index(size_t n);
};

}  // namespace amped
