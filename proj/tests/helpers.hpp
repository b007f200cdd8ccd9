#pragma once

#include <algorithm>
#include <cmath>
#include <random>
#include <set>
#include <vector>

#include "paraflow/analysis.hpp"
#include "paraflow/efpa.hpp"
#include "paraflow/fw.hpp"

namespace testutil {

using namespace paraflow;

// Triangle s=0, v=1, t=2 with two-part marginals:
//   e0 s-v: x (x<3), 5x-12 (x>=3)
//   e1 v-t: x (x<2), 3x-4  (x>=2)
//   e2 s-t: x (x<1), 4x-3  (x>=1)
// Unbounded flow in both directions; the exact parametric solution for the
// demand 1_t - 1_s has lambda breakpoints 0, 3/2, 15/4, 23/4.
inline PwqInstance kinked_triangle() {
  Network net(3, {{0, 1}, {1, 2}, {0, 2}}, Mode::Undirected);
  auto two_part = [](double kink, double s_lo, double s_hi) {
    return PwlMarginal::from_parts(
        {{s_lo, 0.0, true, 0.0}, {s_hi, (s_lo - s_hi) * kink, true, 0.0}},
        {kink});
  };
  return PwqInstance{net,
                     {two_part(3.0, 1.0, 5.0), two_part(2.0, 1.0, 3.0),
                      two_part(1.0, 1.0, 4.0)}};
}

// Two-route choice with a constant-cost route and a congestible one,
// with the constant route split over an intermediate vertex so the graph
// has no parallel edges; a high-cost return arc makes it strongly
// connected. Demand direction: 1 unit from 0 to 2.
//   0->1->2: constant 1/2 + 1/2 = 1 total
//   0->2:    f(x) = x
inline AnalyticInstance pigou_pair() {
  Network net(3, {{0, 1}, {1, 2}, {0, 2}, {2, 0}}, Mode::Directed);
  return AnalyticInstance{
      net,
      {AnalyticMarginal::polynomial({0.5}), AnalyticMarginal::polynomial({0.5}),
       AnalyticMarginal::polynomial({0.0, 1.0}),
       AnalyticMarginal::polynomial({10.0})}};
}

inline DemandFunction pigou_demand(double lambda_max = 1.0) {
  return DemandFunction(Vec::Zero(3), st_vector(3, 0, 2, 1.0), lambda_max);
}

// Beckmann optimum of the two-route instance: everything on the
// congestible route until its marginal reaches 1.
inline double pigou_cost(double lambda) {
  double x2 = std::min(lambda, 1.0);
  return 0.5 * x2 * x2 + (lambda - x2) * 1.0;
}

// Random connected undirected graph with n vertices and extra chords.
inline Network random_connected(std::mt19937_64& rng, int n, int extra,
                                Mode mode = Mode::Undirected) {
  std::vector<Edge> edges;
  std::set<std::pair<int, int>> seen;
  for (int v = 1; v < n; ++v) {
    std::uniform_int_distribution<int> pick(0, v - 1);
    int u = pick(rng);
    edges.push_back({u, v});
    seen.insert({u, v});
  }
  std::uniform_int_distribution<int> pick(0, n - 1);
  int guard = 0;
  while (extra > 0 && ++guard < 1000) {
    int a = pick(rng), b = pick(rng);
    if (a == b) continue;
    auto key = std::minmax(a, b);
    if (seen.count(key)) continue;
    seen.insert(key);
    edges.push_back({key.first, key.second});
    --extra;
  }
  if (mode == Mode::Directed) {
    // add the reverse of every arc so the graph is strongly connected
    size_t m0 = edges.size();
    for (size_t e = 0; e < m0; ++e)
      edges.push_back({edges[e].head, edges[e].tail});
  }
  return Network(n, std::move(edges), mode);
}

// Random balanced demand vector over a few vertices.
inline Vec random_balanced(std::mt19937_64& rng, int n) {
  std::uniform_real_distribution<double> mag(0.2, 2.0);
  std::uniform_int_distribution<int> pick(0, n - 1);
  Vec b = Vec::Zero(n);
  int s = pick(rng), t = pick(rng);
  while (t == s) t = pick(rng);
  double r = mag(rng);
  b[s] -= r;
  b[t] += r;
  return b;
}

// Random strictly increasing piecewise linear marginal through 0 with
// up to `parts` pieces (homogeneous: f(0) = 0).
inline PwlMarginal random_pwl(std::mt19937_64& rng, int parts) {
  std::uniform_real_distribution<double> slope(0.2, 3.0);
  std::uniform_real_distribution<double> gap(0.3, 1.5);
  int k = 1 + static_cast<int>(rng() % static_cast<unsigned>(parts));
  std::vector<double> pts, vals;
  double x = 0.0, y = 0.0;
  // walk left then right from the origin so f(0) = 0 lands on a sample
  std::vector<std::pair<double, double>> left, right;
  double xl = 0.0, yl = 0.0;
  for (int i = 0; i < k; ++i) {
    double dx = gap(rng), s = slope(rng);
    xl -= dx;
    yl -= s * dx;
    left.push_back({xl, yl});
  }
  for (int i = 0; i < k; ++i) {
    double dx = gap(rng), s = slope(rng);
    x += dx;
    y += s * dx;
    right.push_back({x, y});
  }
  for (auto it = left.rbegin(); it != left.rend(); ++it) {
    pts.push_back(it->first);
    vals.push_back(it->second);
  }
  pts.push_back(0.0);
  vals.push_back(0.0);
  for (auto& p : right) {
    pts.push_back(p.first);
    vals.push_back(p.second);
  }
  return PwlMarginal::from_samples(pts, vals);
}

}  // namespace testutil
