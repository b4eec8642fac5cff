// Copyright (c) 2026 The Amped Authors
// SPDX-License-Identifier: Apache-2.0
#include "amped/edge_eval.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <functional>
#include <stdexcept>
#include <thread>

namespace amped {

namespace {

// 7-tap unit-sigma Gaussian, borders clamped.
MatF gauss_smooth(const MatF& m) {
  static const std::vector<float> kKernel = [] {
    std::vector<float> k(7);
    float sum = 0;
    for (int i = -3; i <= 3; ++i) sum += k[i + 3] = std::exp(-0.5f * i * i);
    for (float& v : k) v /= sum;
    return k;
  }();
  MatF tmp(m.rows, m.cols), out(m.rows, m.cols);
  for (int y = 0; y < m.rows; ++y)
    for (int x = 0; x < m.cols; ++x) {
      float acc = 0;
      for (int i = -3; i <= 3; ++i)
        acc += kKernel[i + 3] * m.at(y, std::clamp(x + i, 0, m.cols - 1));
      tmp.at(y, x) = acc;
    }
  for (int y = 0; y < m.rows; ++y)
    for (int x = 0; x < m.cols; ++x) {
      float acc = 0;
      for (int i = -3; i <= 3; ++i)
        acc += kKernel[i + 3] * tmp.at(std::clamp(y + i, 0, m.rows - 1), x);
      out.at(y, x) = acc;
    }
  return out;
}

float sample_clamped(const MatF& m, float y, float x) {
  y = std::clamp(y, 0.0f, static_cast<float>(m.rows - 1));
  x = std::clamp(x, 0.0f, static_cast<float>(m.cols - 1));
  const int y0 = static_cast<int>(y), x0 = static_cast<int>(x);
  const int y1 = std::min(y0 + 1, m.rows - 1), x1 = std::min(x0 + 1, m.cols - 1);
  const float wy = y - y0, wx = x - x0;
  return m.at(y0, x0) * (1 - wy) * (1 - wx) + m.at(y0, x1) * (1 - wy) * wx +
         m.at(y1, x0) * wy * (1 - wx) + m.at(y1, x1) * wy * wx;
}

}  // namespace

MatF nms_thin(const MatF& prob) {
  const int h = prob.rows, w = prob.cols;
  const MatF s = gauss_smooth(prob);

  MatF jxx(h, w), jyy(h, w), jxy(h, w);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      const float gx = 0.5f * (s.at(y, std::min(x + 1, w - 1)) - s.at(y, std::max(x - 1, 0)));
      const float gy = 0.5f * (s.at(std::min(y + 1, h - 1), x) - s.at(std::max(y - 1, 0), x));
      jxx.at(y, x) = gx * gx;
      jyy.at(y, x) = gy * gy;
      jxy.at(y, x) = gx * gy;
    }
  jxx = gauss_smooth(jxx);
  jyy = gauss_smooth(jyy);
  jxy = gauss_smooth(jxy);

  MatF out(h, w);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      const float v = prob.at(y, x);
      if (v <= 0.0f) continue;
      float dx = 1.0f, dy = 0.0f;
      const float trace = jxx.at(y, x) + jyy.at(y, x);
      if (trace > 1e-12f) {
        const float theta =
            0.5f * std::atan2(2.0f * jxy.at(y, x), jxx.at(y, x) - jyy.at(y, x));
        dx = std::cos(theta);
        dy = std::sin(theta);
      }
      const float fwd = sample_clamped(prob, y + dy, x + dx);
      const float bwd = sample_clamped(prob, y - dy, x - dx);
      // Slack factor keeps plateau ridges instead of deleting them outright.
      if (v * 1.01f >= fwd && v * 1.01f >= bwd) out.at(y, x) = v;
    }
  return out;
}

BinaryMap BinaryMap::from_map(const MatF& m, float threshold) {
  BinaryMap b;
  b.h = m.rows;
  b.w = m.cols;
  b.on.resize(static_cast<size_t>(m.rows) * m.cols);
  for (int y = 0; y < m.rows; ++y)
    for (int x = 0; x < m.cols; ++x) b.at(y, x) = m.at(y, x) >= threshold ? 1 : 0;
  return b;
}

int BinaryMap::count() const {
  int n = 0;
  for (uint8_t v : on) n += v;
  return n;
}

namespace {

struct Pixel {
  int y, x;
};

std::vector<Pixel> pixels_of(const BinaryMap& m) {
  std::vector<Pixel> px;
  for (int y = 0; y < m.h; ++y)
    for (int x = 0; x < m.w; ++x)
      if (m.at(y, x)) px.push_back({y, x});
  return px;
}

// Kuhn's augmenting-path maximum matching, deterministic order. Returns
// match_gt: for each gt pixel the matched pred index or -1.
std::vector<int> max_matching(const std::vector<Pixel>& pred, const std::vector<Pixel>& gt,
                              double radius, std::vector<int>* match_pred_out) {
  // Bucket gt pixels so candidate sets stay small.
  const int cell = std::max(1, static_cast<int>(std::ceil(radius)));
  std::vector<std::vector<int>> adj(pred.size());
  const double r2 = radius * radius;
  // Grid over gt.
  int max_y = 0, max_x = 0;
  for (const Pixel& p : gt) {
    max_y = std::max(max_y, p.y);
    max_x = std::max(max_x, p.x);
  }
  const int gh = max_y / cell + 1, gw = max_x / cell + 1;
  std::vector<std::vector<int>> grid(static_cast<size_t>(gh) * gw);
  for (size_t j = 0; j < gt.size(); ++j)
    grid[static_cast<size_t>(gt[j].y / cell) * gw + gt[j].x / cell].push_back(static_cast<int>(j));

  for (size_t i = 0; i < pred.size(); ++i) {
    const Pixel& p = pred[i];
    std::vector<std::pair<double, int>> cand;
    const int cy = p.y / cell, cx = p.x / cell;
    for (int by = cy - 1; by <= cy + 1; ++by)
      for (int bx = cx - 1; bx <= cx + 1; ++bx) {
        if (by < 0 || by >= gh || bx < 0 || bx >= gw) continue;
        for (int j : grid[static_cast<size_t>(by) * gw + bx]) {
          const double dy = p.y - gt[j].y, dx = p.x - gt[j].x;
          const double d2 = dy * dy + dx * dx;
          if (d2 <= r2) cand.emplace_back(d2, j);
        }
      }
    std::sort(cand.begin(), cand.end());
    for (const auto& [d2, j] : cand) adj[i].push_back(j);
  }

  std::vector<int> match_gt(gt.size(), -1), match_pred(pred.size(), -1);
  std::vector<char> visited(gt.size());
  std::function<bool(int)> augment = [&](int u) -> bool {
    for (int v : adj[u]) {
      if (visited[v]) continue;
      visited[v] = 1;
      if (match_gt[v] == -1 || augment(match_gt[v])) {
        match_gt[v] = u;
        match_pred[u] = v;
        return true;
      }
    }
    return false;
  };
  for (size_t i = 0; i < pred.size(); ++i) {
    std::fill(visited.begin(), visited.end(), 0);
    augment(static_cast<int>(i));
  }
  if (match_pred_out) *match_pred_out = match_pred;
  return match_gt;
}

}  // namespace

MatchCounts match_edges(const BinaryMap& pred, const GroundTruthSet& gt, double tolerance) {
  if (tolerance < 0) throw std::invalid_argument("match_edges: negative tolerance");
  for (const BinaryMap& g : gt.maps)
    if (g.h != pred.h || g.w != pred.w)
      throw std::invalid_argument("match_edges: annotation size mismatch");

  const double radius =
      tolerance * std::sqrt(static_cast<double>(pred.h) * pred.h +
                            static_cast<double>(pred.w) * pred.w);
  const std::vector<Pixel> ppx = pixels_of(pred);

  MatchCounts c;
  c.sum_pred = ppx.size();
  std::vector<char> pred_hit(ppx.size());
  for (const BinaryMap& g : gt.maps) {
    const std::vector<Pixel> gpx = pixels_of(g);
    c.sum_gt += gpx.size();
    std::vector<int> match_pred;
    const std::vector<int> match_gt = max_matching(ppx, gpx, radius, &match_pred);
    for (int m : match_gt) c.matched_gt += m != -1;
    for (size_t i = 0; i < match_pred.size(); ++i)
      if (match_pred[i] != -1) pred_hit[i] = 1;
  }
  for (char hbit : pred_hit) c.matched_pred += hbit;
  return c;
}

std::vector<double> default_thresholds() {
  std::vector<double> t;
  for (int i = 1; i <= 99; ++i) t.push_back(i / 100.0);
  return t;
}

namespace {

double precision_of(const MatchCounts& c) {
  return c.sum_pred ? static_cast<double>(c.matched_pred) / static_cast<double>(c.sum_pred) : 0.0;
}

double recall_of(const MatchCounts& c) {
  return c.sum_gt ? static_cast<double>(c.matched_gt) / static_cast<double>(c.sum_gt) : 0.0;
}

double f_of(double p, double r) { return p + r > 0 ? 2 * p * r / (p + r) : 0.0; }

double f_of(const MatchCounts& c) { return f_of(precision_of(c), recall_of(c)); }

}  // namespace

EvalResult compute_metrics(const std::vector<std::vector<MatchCounts>>& counts,
                           const std::vector<double>& thresholds) {
  const size_t nt = thresholds.size();
  if (nt == 0) throw std::invalid_argument("compute_metrics: no thresholds");
  for (const auto& per_image : counts)
    if (per_image.size() != nt)
      throw std::invalid_argument("compute_metrics: counts/threshold size mismatch");

  EvalResult res;
  std::vector<MatchCounts> totals(nt);
  for (const auto& per_image : counts)
    for (size_t t = 0; t < nt; ++t) totals[t] += per_image[t];

  for (size_t t = 0; t < nt; ++t) {
    PrPoint pt;
    pt.threshold = thresholds[t];
    pt.precision = precision_of(totals[t]);
    pt.recall = recall_of(totals[t]);
    pt.f1 = f_of(pt.precision, pt.recall);
    res.curve.push_back(pt);
    if (pt.f1 > res.ods) {
      res.ods = pt.f1;
      res.ods_threshold = pt.threshold;
    }
  }
  if (res.curve.empty()) return res;
  if (res.ods == 0) res.ods_threshold = thresholds[0];

  // Per-image best threshold, then one F over the summed best counts.
  MatchCounts ois_total;
  for (const auto& per_image : counts) {
    size_t best = 0;
    double best_f = -1;
    for (size_t t = 0; t < nt; ++t) {
      const double f = f_of(per_image[t]);
      if (f > best_f) {
        best_f = f;
        best = t;
      }
    }
    ois_total += per_image[best];
  }
  res.ois = f_of(ois_total);

  // Interpolated average precision over the recall axis.
  std::vector<std::pair<double, double>> rp;  // (recall, precision)
  for (const PrPoint& pt : res.curve) rp.emplace_back(pt.recall, pt.precision);
  std::sort(rp.begin(), rp.end());
  double running = 0;
  for (auto it = rp.rbegin(); it != rp.rend(); ++it) {
    running = std::max(running, it->second);
    it->second = running;
  }
  double ap = 0, prev_r = 0;
  for (const auto& [r, p] : rp) {
    if (r > prev_r) ap += (r - prev_r) * p;
    prev_r = std::max(prev_r, r);
  }
  res.ap = ap;
  return res;
}

EvalResult evaluate_maps(const std::vector<MatF>& prob_maps,
                         const std::vector<GroundTruthSet>& gts, double tolerance,
                         const std::vector<double>& thresholds, int jobs) {
  if (prob_maps.size() != gts.size())
    throw std::invalid_argument("evaluate_maps: one annotation set per map required");
  std::vector<std::vector<MatchCounts>> counts(prob_maps.size());

  auto run_image = [&](size_t i) {
    const MatF thin = nms_thin(prob_maps[i]);
    std::vector<MatchCounts> per(thresholds.size());
    for (size_t t = 0; t < thresholds.size(); ++t)
      per[t] = match_edges(BinaryMap::from_map(thin, static_cast<float>(thresholds[t])), gts[i],
                           tolerance);
    counts[i] = std::move(per);
  };

  jobs = std::max(1, jobs);
  if (jobs == 1) {
    for (size_t i = 0; i < prob_maps.size(); ++i) run_image(i);
  } else {
    std::vector<std::thread> pool;
    std::atomic<size_t> next{0};
    for (int j = 0; j < jobs; ++j)
      pool.emplace_back([&] {
        for (size_t i = next.fetch_add(1); i < prob_maps.size(); i = next.fetch_add(1))
          run_image(i);
      });
    for (std::thread& th : pool) th.join();
  }
  return compute_metrics(counts, thresholds);
}

}  // namespace amped
