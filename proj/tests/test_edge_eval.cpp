// Copyright (c) 2026 The Amped Authors
// SPDX-License-Identifier: Apache-2.0
#include <algorithm>
#include <cmath>
#include <queue>
#include <vector>

#include "amped/edge_eval.hpp"
#include "amped/rng.hpp"
#include "doctest.h"

using namespace amped;

namespace {

struct Px {
  int y, x;
};

double radius_for(int h, int w, double tol) {
  return tol * std::sqrt(static_cast<double>(h) * h + static_cast<double>(w) * w);
}

BinaryMap map_from(int h, int w, const std::vector<Px>& px) {
  BinaryMap m;
  m.h = h;
  m.w = w;
  m.on.assign(static_cast<size_t>(h) * w, 0);
  for (const Px& p : px) m.at(p.y, p.x) = 1;
  return m;
}

bool compatible(const Px& a, const Px& b, double r) {
  const double dy = a.y - b.y, dx = a.x - b.x;
  return dy * dy + dx * dx <= r * r;
}

// Breadth-first augmenting max-flow on the unit bipartite network. A second,
// structurally different implementation used as the matching oracle.
int maxflow_matching(const std::vector<Px>& pred, const std::vector<Px>& gt, double r) {
  const int np = static_cast<int>(pred.size()), ng = static_cast<int>(gt.size());
  const int S = np + ng, T = np + ng + 1, V = np + ng + 2;
  // cap[a][b] via adjacency list with residuals.
  struct E {
    int to, cap, rev;
  };
  std::vector<std::vector<E>> g(V);
  auto add_edge = [&](int a, int b) {
    g[a].push_back({b, 1, static_cast<int>(g[b].size())});
    g[b].push_back({a, 0, static_cast<int>(g[a].size()) - 1});
  };
  for (int i = 0; i < np; ++i) add_edge(S, i);
  for (int j = 0; j < ng; ++j) add_edge(np + j, T);
  for (int i = 0; i < np; ++i)
    for (int j = 0; j < ng; ++j)
      if (compatible(pred[i], gt[j], r)) add_edge(i, np + j);

  int flow = 0;
  for (;;) {
    std::vector<int> prev_v(V, -1), prev_e(V, -1);
    std::queue<int> q;
    q.push(S);
    prev_v[S] = S;
    while (!q.empty() && prev_v[T] == -1) {
      const int u = q.front();
      q.pop();
      for (size_t e = 0; e < g[u].size(); ++e) {
        if (g[u][e].cap > 0 && prev_v[g[u][e].to] == -1) {
          prev_v[g[u][e].to] = u;
          prev_e[g[u][e].to] = static_cast<int>(e);
          q.push(g[u][e].to);
        }
      }
    }
    if (prev_v[T] == -1) break;
    for (int v = T; v != S; v = prev_v[v]) {
      E& e = g[prev_v[v]][prev_e[v]];
      e.cap -= 1;
      g[v][e.rev].cap += 1;
    }
    ++flow;
  }
  return flow;
}

// True exhaustive maximum matching for tiny instances.
int exhaustive_matching(const std::vector<Px>& pred, const std::vector<Px>& gt, double r,
                        size_t i = 0, std::vector<char>* used = nullptr) {
  std::vector<char> local;
  if (!used) {
    local.assign(gt.size(), 0);
    used = &local;
  }
  if (i == pred.size()) return 0;
  int best = exhaustive_matching(pred, gt, r, i + 1, used);  // leave pred i unmatched
  for (size_t j = 0; j < gt.size(); ++j) {
    if ((*used)[j] || !compatible(pred[i], gt[j], r)) continue;
    (*used)[j] = 1;
    best = std::max(best, 1 + exhaustive_matching(pred, gt, r, i + 1, used));
    (*used)[j] = 0;
  }
  return best;
}

std::vector<Px> random_pixels(Rng& rng, int h, int w, int n) {
  std::vector<Px> px;
  std::vector<char> taken(static_cast<size_t>(h) * w, 0);
  while (static_cast<int>(px.size()) < n) {
    const int y = rng.uniform_int(0, h - 1), x = rng.uniform_int(0, w - 1);
    if (taken[static_cast<size_t>(y) * w + x]) continue;
    taken[static_cast<size_t>(y) * w + x] = 1;
    px.push_back({y, x});
  }
  return px;
}

}  // namespace

TEST_CASE("nms keeps one-pixel ridges") {
  MatF m(9, 9);
  for (int x = 0; x < 9; ++x) m.at(4, x) = 1.0f;
  MatF thin = nms_thin(m);
  for (int x = 0; x < 9; ++x) CHECK(thin.at(4, x) == 1.0f);
  for (int y = 0; y < 9; ++y)
    for (int x = 0; x < 9; ++x)
      if (y != 4) CHECK(thin.at(y, x) == 0.0f);

  MatF v(9, 9);
  for (int y = 0; y < 9; ++y) v.at(y, 3) = 0.8f;
  MatF vt = nms_thin(v);
  for (int y = 0; y < 9; ++y) CHECK(vt.at(y, 3) == 0.8f);
  CHECK(vt.at(4, 2) == 0.0f);
  CHECK(vt.at(4, 4) == 0.0f);
}

TEST_CASE("nms suppresses the shoulders of a blurred ridge") {
  MatF m(11, 11);
  for (int x = 0; x < 11; ++x) {
    m.at(5, x) = 1.0f;
    m.at(4, x) = 0.4f;
    m.at(6, x) = 0.4f;
  }
  MatF thin = nms_thin(m);
  for (int x = 0; x < 11; ++x) {
    CHECK(thin.at(5, x) == 1.0f);
    CHECK(thin.at(4, x) == 0.0f);
    CHECK(thin.at(6, x) == 0.0f);
  }
}

TEST_CASE("nms keeps diagonals and isolated peaks") {
  MatF d(9, 9);
  for (int i = 1; i < 8; ++i) d.at(i, i) = 0.9f;
  MatF dt = nms_thin(d);
  for (int i = 2; i < 7; ++i) CHECK(dt.at(i, i) == 0.9f);

  MatF p(7, 7);
  p.at(3, 3) = 0.5f;
  MatF pt = nms_thin(p);
  CHECK(pt.at(3, 3) == 0.5f);
  CHECK(pt.at(3, 2) == 0.0f);

  MatF z(5, 5);
  MatF zt = nms_thin(z);
  for (float x : zt.data) CHECK(x == 0.0f);
}

TEST_CASE("match_edges respects the tolerance radius") {
  // 5x5 diag = 7.0711; tol 0.2121 -> radius ~1.5 px.
  const BinaryMap pred = map_from(5, 5, {{0, 0}, {0, 3}});
  GroundTruthSet gt;
  gt.maps.push_back(map_from(5, 5, {{0, 1}}));
  MatchCounts c = match_edges(pred, gt, 0.2121);
  CHECK(c.sum_pred == 2);
  CHECK(c.sum_gt == 1);
  CHECK(c.matched_pred == 1);
  CHECK(c.matched_gt == 1);

  // Radius shrinks below 1 px: nothing can match.
  MatchCounts c2 = match_edges(pred, gt, 0.1);
  CHECK(c2.matched_pred == 0);
  CHECK(c2.matched_gt == 0);
}

TEST_CASE("matched_pred counts union over annotations") {
  const BinaryMap pred = map_from(3, 9, {{1, 1}, {1, 7}});
  GroundTruthSet gt;
  gt.maps.push_back(map_from(3, 9, {{1, 1}}));
  gt.maps.push_back(map_from(3, 9, {{1, 7}}));
  MatchCounts c = match_edges(pred, gt, 0.11);  // radius ~1.04
  CHECK(c.matched_pred == 2);
  CHECK(c.matched_gt == 2);
  CHECK(c.sum_gt == 2);
}

TEST_CASE("matching equals the exhaustive oracle on tiny instances") {
  Rng rng(71);
  for (int trial = 0; trial < 40; ++trial) {
    const int h = 8, w = 8;
    const std::vector<Px> pred = random_pixels(rng, h, w, rng.uniform_int(1, 6));
    const std::vector<Px> gt = random_pixels(rng, h, w, rng.uniform_int(1, 6));
    const double tol = rng.uniform(0.05, 0.35);
    const double r = radius_for(h, w, tol);

    GroundTruthSet gset;
    gset.maps.push_back(map_from(h, w, gt));
    MatchCounts c = match_edges(map_from(h, w, pred), gset, tol);
    const int want = exhaustive_matching(pred, gt, r);
    CHECK(c.matched_gt == static_cast<uint64_t>(want));
    CHECK(c.matched_pred == static_cast<uint64_t>(want));
  }
}

TEST_CASE("matching equals max-flow on random instances") {
  Rng rng(72);
  for (int trial = 0; trial < 30; ++trial) {
    const int h = rng.uniform_int(8, 20), w = rng.uniform_int(8, 20);
    const std::vector<Px> pred = random_pixels(rng, h, w, rng.uniform_int(1, 20));
    const std::vector<Px> gt = random_pixels(rng, h, w, rng.uniform_int(1, 20));
    const double tol = rng.uniform(0.05, 0.3);

    GroundTruthSet gset;
    gset.maps.push_back(map_from(h, w, gt));
    MatchCounts c = match_edges(map_from(h, w, pred), gset, tol);
    const int want = maxflow_matching(pred, gt, radius_for(h, w, tol));
    CHECK(c.matched_gt == static_cast<uint64_t>(want));
  }
}

TEST_CASE("perfect predictions score ones across the board") {
  std::vector<std::vector<MatchCounts>> counts(3);
  for (auto& per : counts)
    for (int t = 0; t < 5; ++t) per.push_back({12, 12, 12, 12});
  EvalResult r = compute_metrics(counts, {0.1, 0.3, 0.5, 0.7, 0.9});
  CHECK(r.ods == doctest::Approx(1.0));
  CHECK(r.ois == doctest::Approx(1.0));
  CHECK(r.ap == doctest::Approx(1.0));
}

TEST_CASE("metrics golden case") {
  // Two images, two thresholds, worked by hand.
  std::vector<std::vector<MatchCounts>> counts = {
      {{10, 8, 10, 7}, {5, 5, 10, 5}},
      {{10, 5, 8, 5}, {4, 4, 8, 4}},
  };
  EvalResult r = compute_metrics(counts, {0.25, 0.75});

  // Totals: t0 P=13/20 R=12/18, t1 P=1 R=1/2.
  CHECK(r.curve[0].precision == doctest::Approx(0.65));
  CHECK(r.curve[0].recall == doctest::Approx(12.0 / 18.0));
  CHECK(r.curve[0].f1 == doctest::Approx(2 * 0.65 * (12.0 / 18.0) / (0.65 + 12.0 / 18.0)));
  CHECK(r.curve[1].f1 == doctest::Approx(2.0 / 3.0));
  CHECK(r.ods == doctest::Approx(2.0 / 3.0));
  CHECK(r.ods_threshold == doctest::Approx(0.75));

  // Image bests: image0 takes t0, image1 takes t1; summed counts
  // (14,12,18,11) give F = 132/185.
  CHECK(r.ois == doctest::Approx(132.0 / 185.0));

  // Recall-sorted interpolated precision: (0.5, 1.0), (0.6667, 0.65).
  CHECK(r.ap == doctest::Approx(0.5 * 1.0 + (12.0 / 18.0 - 0.5) * 0.65));
}

TEST_CASE("no predictions means zero precision, not NaN") {
  std::vector<std::vector<MatchCounts>> counts = {{{0, 0, 9, 0}}};
  EvalResult r = compute_metrics(counts, {0.5});
  CHECK(r.curve[0].precision == 0.0);
  CHECK(r.curve[0].recall == 0.0);
  CHECK(r.ods == 0.0);
  CHECK(std::isfinite(r.ap));
}

TEST_CASE("fixed threshold never beats per-image choice on nested counts") {
  // Counts generated by actually thresholding maps (nested by construction).
  Rng rng(73);
  for (int rep = 0; rep < 5; ++rep) {
    std::vector<MatF> maps;
    std::vector<GroundTruthSet> gts;
    for (int i = 0; i < 4; ++i) {
      MatF m(16, 16);
      for (float& v : m.data) v = rng.bernoulli(0.12) ? static_cast<float>(rng.uniform(0.2, 1.0)) : 0.0f;
      maps.push_back(m);
      GroundTruthSet g;
      g.maps.push_back(map_from(16, 16, random_pixels(rng, 16, 16, rng.uniform_int(4, 20))));
      gts.push_back(g);
    }
    EvalResult r = evaluate_maps(maps, gts, 0.08, {0.25, 0.5, 0.75});
    CHECK(r.ods <= r.ois + 1e-12);
  }
}

TEST_CASE("evaluate_maps is identical across job counts") {
  Rng rng(74);
  std::vector<MatF> maps;
  std::vector<GroundTruthSet> gts;
  for (int i = 0; i < 6; ++i) {
    MatF m(20, 20);
    for (float& v : m.data) v = rng.bernoulli(0.1) ? static_cast<float>(rng.uniform(0.3, 1.0)) : 0.0f;
    maps.push_back(m);
    GroundTruthSet g;
    g.maps.push_back(map_from(20, 20, random_pixels(rng, 20, 20, 12)));
    gts.push_back(g);
  }
  EvalResult a = evaluate_maps(maps, gts, 0.1, default_thresholds(), 1);
  EvalResult b = evaluate_maps(maps, gts, 0.1, default_thresholds(), 4);
  CHECK(a.ods == b.ods);
  CHECK(a.ois == b.ois);
  CHECK(a.ap == b.ap);
  CHECK(default_thresholds().size() == 99);
}
