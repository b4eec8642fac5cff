// Copyright (c) 2026 The Amped Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "amped/kernels.hpp"
#include "amped/mat.hpp"

// Token pruning bookkeeping: score thresholding, hard projection onto the
// retained set, running masks over original token positions, and the
// recovery chain that scatters surviving features back to full length.
// Everything here is pure and tape-free; the model builds the same logic
// out of tape ops and the tests cross-check the two.

namespace amped {

/// A (possibly pruned) token sequence. origin[i] is the original position
/// of row i, so origin tracks the composition of all projections so far.
template <typename T>
struct TokenSequence {
  Mat<T> features;          // n x C
  std::vector<int> origin;  // size n, strictly increasing

  static TokenSequence full(Mat<T> f) {
    TokenSequence s;
    s.origin.resize(f.rows);
    for (int i = 0; i < f.rows; ++i) s.origin[i] = i;
    s.features = std::move(f);
    return s;
  }
};

/// Per-token edge probabilities in [0, 1].
template <typename T>
struct EdgeScores {
  std::vector<T> p;
};

/// Stage-local keep/drop decisions over the current sequence.
struct DecisionMask {
  std::vector<uint8_t> bits;

  int retained() const {
    int n = 0;
    for (uint8_t b : bits) n += b;
    return n;
  }

  std::vector<int> retained_indices() const {
    std::vector<int> idx;
    for (size_t i = 0; i < bits.size(); ++i)
      if (bits[i]) idx.push_back(static_cast<int>(i));
    return idx;
  }
};

/// Keep/drop state over the original token positions, updated stage by
/// stage. Starts as all ones; each stage overwrites the currently-set bits.
struct AccumulatedMask {
  std::vector<uint8_t> bits;

  explicit AccumulatedMask(int n = 0) : bits(n, 1) {}

  int retained() const {
    int k = 0;
    for (uint8_t b : bits) k += b;
    return k;
  }

  std::vector<int> retained_indices() const {
    std::vector<int> idx;
    for (size_t i = 0; i < bits.size(); ++i)
      if (bits[i]) idx.push_back(static_cast<int>(i));
    return idx;
  }
};

struct PruneStage {
  int layer = 0;       // 1-based encoder layer the stage runs before
  double alpha = 0.0;  // keep threshold
};

struct PruneSchedule {
  std::vector<PruneStage> stages;
};

struct ScheduleCheck {
  bool ok = true;
  int violation_index = -1;  // first offending stage
  std::string reason;
};

/// Validates stage ordering and the non-decreasing threshold requirement.
inline ScheduleCheck validate_schedule(const PruneSchedule& s, int depth) {
  ScheduleCheck c;
  for (size_t i = 0; i < s.stages.size(); ++i) {
    const PruneStage& st = s.stages[i];
    if (st.layer < 1 || st.layer > depth) {
      c = {false, static_cast<int>(i),
           "stage layer " + std::to_string(st.layer) + " outside [1," + std::to_string(depth) + "]"};
      return c;
    }
    if (i > 0 && st.layer <= s.stages[i - 1].layer) {
      c = {false, static_cast<int>(i), "stage layers must be strictly increasing"};
      return c;
    }
    if (st.alpha < 0.0 || st.alpha > 1.0) {
      c = {false, static_cast<int>(i), "alpha " + std::to_string(st.alpha) + " outside [0,1]"};
      return c;
    }
    if (i > 0 && st.alpha < s.stages[i - 1].alpha) {
      c = {false, static_cast<int>(i),
           "alpha must be non-decreasing across stages (" + std::to_string(s.stages[i - 1].alpha) +
               " -> " + std::to_string(st.alpha) + ")"};
      return c;
    }
  }
  return c;
}

/// Snapshot taken on entry to a pruning stage: the sequence before
/// projection plus the local indices that survived.
template <typename T>
struct StageSnapshot {
  Mat<T> features;            // n_enter x C
  std::vector<int> retained;  // local indices into features
};

/// p = sigmoid(X w), w is C x 1.
template <typename T>
EdgeScores<T> compute_edge_scores(const Mat<T>& features, const Mat<T>& w) {
  if (w.cols != 1 || w.rows != features.cols)
    throw std::invalid_argument("compute_edge_scores: w must be " +
                                std::to_string(features.cols) + "x1");
  Mat<T> logits = matmul(features, w);
  EdgeScores<T> s;
  s.p.resize(logits.rows);
  for (int i = 0; i < logits.rows; ++i) s.p[i] = sigmoid_scalar(logits.at(i, 0));
  return s;
}

/// bit i = 1 iff p_i >= alpha. May legitimately retain nothing.
template <typename T>
DecisionMask threshold_mask(const EdgeScores<T>& scores, double alpha) {
  DecisionMask m;
  m.bits.resize(scores.p.size());
  for (size_t i = 0; i < scores.p.size(); ++i)
    m.bits[i] = static_cast<double>(scores.p[i]) >= alpha ? 1 : 0;
  return m;
}

/// Hard projection onto the retained set. Order-preserving; throws if the
/// mask keeps nothing (callers decide their own fallback before this).
template <typename T>
TokenSequence<T> project_tokens(const TokenSequence<T>& seq, const DecisionMask& mask) {
  if (mask.bits.size() != static_cast<size_t>(seq.features.rows))
    throw std::invalid_argument("project_tokens: mask size != sequence length");
  const std::vector<int> idx = mask.retained_indices();
  if (idx.empty()) throw std::invalid_argument("project_tokens: empty retention");
  TokenSequence<T> out;
  out.features = Mat<T>(static_cast<int>(idx.size()), seq.features.cols);
  out.origin.reserve(idx.size());
  for (size_t k = 0; k < idx.size(); ++k) {
    std::copy(seq.features.row(idx[k]), seq.features.row(idx[k]) + seq.features.cols,
              out.features.row(static_cast<int>(k)));
    out.origin.push_back(seq.origin[idx[k]]);
  }
  return out;
}

/// Overwrites the currently-set bits of acc with the stage decisions: the
/// j-th set bit takes stage bit j. Stage mask length must equal the number
/// of set bits.
inline void accumulate_mask(AccumulatedMask& acc, const DecisionMask& stage) {
  size_t j = 0;
  for (size_t i = 0; i < acc.bits.size(); ++i) {
    if (!acc.bits[i]) continue;
    if (j >= stage.bits.size())
      throw std::invalid_argument("accumulate_mask: stage mask shorter than retained set");
    acc.bits[i] = stage.bits[j++];
  }
  if (j != stage.bits.size())
    throw std::invalid_argument("accumulate_mask: stage mask longer than retained set");
}

/// Walks the snapshot chain from the innermost stage outward: at each step
/// the surviving rows of the snapshot are replaced by the current z, and the
/// result becomes the new z. Returns a full-length sequence.
template <typename T>
Mat<T> recover_sequence(const std::vector<StageSnapshot<T>>& snapshots, Mat<T> z) {
  for (auto it = snapshots.rbegin(); it != snapshots.rend(); ++it) {
    const StageSnapshot<T>& s = *it;
    if (static_cast<int>(s.retained.size()) != z.rows)
      throw std::invalid_argument("recover_sequence: z rows != retained count");
    if (z.cols != s.features.cols)
      throw std::invalid_argument("recover_sequence: column mismatch");
    Mat<T> f = s.features;
    for (size_t k = 0; k < s.retained.size(); ++k)
      std::copy(z.row(static_cast<int>(k)), z.row(static_cast<int>(k)) + z.cols,
                f.row(s.retained[k]));
    z = std::move(f);
  }
  return z;
}

/// Multi-head attention restricted to the rows the mask keeps. Q, K, V are
/// full N x C; the output has one row per retained token. Head h uses
/// columns [h*C/heads, (h+1)*C/heads) and scale 1/sqrt(C/heads).
template <typename T>
Mat<T> pruned_attention(const Mat<T>& q, const Mat<T>& k, const Mat<T>& v,
                        const DecisionMask& mask, int heads = 1) {
  if (!q.same_shape(k) || !q.same_shape(v))
    throw std::invalid_argument("pruned_attention: Q/K/V shape mismatch");
  if (heads < 1 || q.cols % heads != 0)
    throw std::invalid_argument("pruned_attention: heads must divide channels");
  if (mask.bits.size() != static_cast<size_t>(q.rows))
    throw std::invalid_argument("pruned_attention: mask size != rows");
  const std::vector<int> idx = mask.retained_indices();
  if (idx.empty()) throw std::invalid_argument("pruned_attention: empty retention");
  const int n = static_cast<int>(idx.size());
  const int hc = q.cols / heads;
  const T scl = T(1) / std::sqrt(static_cast<T>(hc));
  Mat<T> out(n, q.cols);
  Mat<T> qh(n, hc), kh(n, hc), vh(n, hc);
  for (int h = 0; h < heads; ++h) {
    const int c0 = h * hc;
    for (int i = 0; i < n; ++i) {
      std::copy(q.row(idx[i]) + c0, q.row(idx[i]) + c0 + hc, qh.row(i));
      std::copy(k.row(idx[i]) + c0, k.row(idx[i]) + c0 + hc, kh.row(i));
      std::copy(v.row(idx[i]) + c0, v.row(idx[i]) + c0 + hc, vh.row(i));
    }
    Mat<T> att = row_softmax(scale(matmul_nt(qh, kh), scl));
    Mat<T> ctx = matmul(att, vh);
    for (int i = 0; i < n; ++i)
      std::copy(ctx.row(i), ctx.row(i) + hc, out.row(i) + c0);
  }
  return out;
}

}  // namespace amped
