// Copyright (c) 2026 The Amped Authors
// SPDX-License-Identifier: Apache-2.0

#include "amped/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <stdexcept>

#include "json.hpp"

#include "amped/checkpoint.hpp"
#include "amped/log.hpp"

namespace amped {

Optimizer::Optimizer(const TrainConfig& cfg, ParamStore<float>& params)
    : cfg_(cfg), params_(params) {
  if (cfg_.optimizer != "adam" && cfg_.optimizer != "sgd")
    throw std::invalid_argument("optimizer: expected adam or sgd, got " + cfg_.optimizer);
}

void Optimizer::apply() {
  ++t_;
  const bool adam = cfg_.optimizer == "adam";
  const float lr = static_cast<float>(cfg_.lr);
  const float wd = static_cast<float>(cfg_.weight_decay);
  const float mom = static_cast<float>(cfg_.momentum);
  const float b1 = 0.9f, b2 = 0.999f, eps = 1e-8f;
  const float bc1 = 1.0f - std::pow(b1, static_cast<float>(t_));
  const float bc2 = 1.0f - std::pow(b2, static_cast<float>(t_));

  for (const std::string& name : params_.names()) {
    MatF& w = params_.get(name);
    MatF& g = params_.grad(name);
    // Norm gains and biases are conventionally left out of weight decay.
    if (wd > 0 && !name.ends_with(".g") && !name.ends_with(".b"))
      for (size_t i = 0; i < w.data.size(); ++i) g.data[i] += wd * w.data[i];

    if (adam) {
      MatF& m = m_[name];
      MatF& v = v_[name];
      if (m.rows == 0) {
        m = MatF(w.rows, w.cols);
        v = MatF(w.rows, w.cols);
      }
      for (size_t i = 0; i < w.data.size(); ++i) {
        m.data[i] = b1 * m.data[i] + (1.0f - b1) * g.data[i];
        v.data[i] = b2 * v.data[i] + (1.0f - b2) * g.data[i] * g.data[i];
        w.data[i] -= lr * (m.data[i] / bc1) / (std::sqrt(v.data[i] / bc2) + eps);
      }
    } else {
      MatF& vel = v_[name];
      if (vel.rows == 0) vel = MatF(w.rows, w.cols);
      for (size_t i = 0; i < w.data.size(); ++i) {
        vel.data[i] = mom * vel.data[i] + g.data[i];
        w.data[i] -= lr * vel.data[i];
      }
    }
  }
}

Trainer::Trainer(SedModel<float>& model, const TrainConfig& cfg, std::uint64_t seed)
    : model_(model),
      cfg_(cfg),
      opt_(cfg, model.params()),
      order_rng_(Rng::derive(seed, 0xbacc)),
      aug_rng_(Rng::derive(seed, 0xf11b)) {
  if (cfg_.iters < 1 || cfg_.batch < 1)
    throw std::invalid_argument("trainer: iters and batch must be positive");
}

size_t Trainer::next_index(size_t n) {
  if (order_.size() != n) {
    order_.resize(n);
    std::iota(order_.begin(), order_.end(), size_t{0});
    cursor_ = n;  // forces a shuffle below
  }
  if (cursor_ >= n) {
    std::shuffle(order_.begin(), order_.end(), order_rng_.engine());
    cursor_ = 0;
  }
  return order_[cursor_++];
}

TrainStats Trainer::step(const std::vector<TrainSample<float>>& batch) {
  if (batch.empty()) throw std::invalid_argument("trainer: empty batch");
  ParamStore<float>& params = model_.params();
  params.zero_grads();

  ForcedMasks keep_all;
  const ForcedMasks* forced = nullptr;
  if (!cfg_.prune_during_training && !model_.config().schedule.stages.empty()) {
    keep_all = full_masks(model_.config());
    forced = &keep_all;
  }

  TrainStats st;
  double total = 0, dense = 0, heads = 0;
  for (const TrainSample<float>& s : batch) {
    TapeF tape;
    BoundParams<float> bound;
    LossParts parts;
    auto loss = build_loss(tape, model_, bound, s, cfg_.lambda_final, cfg_.lambda_heads,
                           forced, &parts);
    tape.backward(loss);
    bound.collect(tape, params);
    total += parts.total;
    dense += parts.final_part;
    heads += parts.heads_part;
    st.kept = parts.kept;
  }

  const float inv = 1.0f / static_cast<float>(batch.size());
  double norm2 = 0;
  for (const std::string& name : params.names()) {
    MatF& g = params.grad(name);
    for (float& x : g.data) {
      x *= inv;
      norm2 += static_cast<double>(x) * x;
    }
  }
  st.loss = total / static_cast<double>(batch.size());
  st.final_part = dense / static_cast<double>(batch.size());
  st.heads_part = heads / static_cast<double>(batch.size());
  st.grad_norm = std::sqrt(norm2);
  if (!std::isfinite(st.loss))
    throw std::runtime_error("trainer: loss diverged at iteration " + std::to_string(iter_ + 1));

  opt_.apply();
  st.iteration = ++iter_;
  return st;
}

TrainResult Trainer::run(const std::vector<TrainSample<float>>& data, std::ostream* jsonl,
                         const std::string& checkpoint_prefix) {
  if (data.empty()) throw std::invalid_argument("trainer: no training data");
  TrainResult res;
  std::vector<TrainSample<float>> batch;
  for (int it = 0; it < cfg_.iters; ++it) {
    batch.clear();
    for (int b = 0; b < cfg_.batch; ++b) {
      const TrainSample<float>& s = data[next_index(data.size())];
      const bool flip = cfg_.flip_augment && aug_rng_.bernoulli(0.5);
      batch.push_back(flip ? flipped_sample(s, model_.config()) : s);
    }
    TrainStats st = step(batch);
    if (it == 0) res.first_loss = st.loss;
    res.last_loss = st.loss;

    if (st.iteration % cfg_.log_every == 0 || st.iteration == cfg_.iters) {
      res.logged.push_back(st);
      if (jsonl) {
        nlohmann::json line = {{"iter", st.iteration},
                               {"loss", st.loss},
                               {"final", st.final_part},
                               {"heads", st.heads_part},
                               {"grad_norm", st.grad_norm},
                               {"kept", st.kept}};
        *jsonl << line.dump() << "\n";
      }
      log_debug("iter " + std::to_string(st.iteration) + " loss " + std::to_string(st.loss));
    }
    if (cfg_.checkpoint_every > 0 && !checkpoint_prefix.empty() &&
        st.iteration % cfg_.checkpoint_every == 0) {
      char tag[16];
      std::snprintf(tag, sizeof(tag), "%06d", st.iteration);
      save_checkpoint(checkpoint_prefix + "-" + tag + ".ckpt", model_.config(), model_.params());
    }
  }
  res.iterations = iter_;
  return res;
}

}  // namespace amped
