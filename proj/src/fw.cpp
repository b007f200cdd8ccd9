#include "paraflow/fw.hpp"

#include <algorithm>
#include <cmath>
#include <queue>

namespace paraflow {

double AnalyticInstance::objective(const Vec& x) const {
  double c = 0.0;
  for (int e = 0; e < network.n_edges(); ++e)
    c += costs[static_cast<size_t>(e)].beckmann(x[e]);
  return c;
}

Vec AnalyticInstance::marginal_values(const Vec& x) const {
  Vec f(network.n_edges());
  for (int e = 0; e < network.n_edges(); ++e)
    f[e] = costs[static_cast<size_t>(e)].eval(x[e]);
  return f;
}

double AnalyticInstance::directional_derivative(const Vec& x,
                                                const Vec& h) const {
  return marginal_values(x).dot(h);
}

namespace {

// shortest-path tree from source under nonnegative arc weights; returns
// per-vertex predecessor edge (-1 at the source)
std::vector<int> dijkstra_tree(const Network& net, const Vec& w, int source) {
  const int n = net.n_vertices();
  std::vector<double> dist(static_cast<size_t>(n), kInf);
  std::vector<int> pred(static_cast<size_t>(n), -1);
  using Item = std::pair<double, int>;
  std::priority_queue<Item, std::vector<Item>, std::greater<Item>> pq;
  dist[static_cast<size_t>(source)] = 0.0;
  pq.push({0.0, source});
  while (!pq.empty()) {
    auto [d, v] = pq.top();
    pq.pop();
    if (d > dist[static_cast<size_t>(v)]) continue;
    for (int e : net.out_edges()[static_cast<size_t>(v)]) {
      int u = net.edge(e).head;
      double cand = d + w[e];
      if (cand < dist[static_cast<size_t>(u)]) {
        dist[static_cast<size_t>(u)] = cand;
        pred[static_cast<size_t>(u)] = e;
        pq.push({cand, u});
      }
    }
  }
  return pred;
}

Vec all_or_nothing(const Network& net, const Vec& w, const Vec& d) {
  if (w.minCoeff() < 0.0)
    throw DomainError("negative weight in the directed shortest-path oracle");
  Vec y = Vec::Zero(net.n_edges());
  SourceSinkDecomposition dec = source_sink_decompose(d);
  std::sort(dec.triples.begin(), dec.triples.end(),
            [](const SourceSinkTriple& a, const SourceSinkTriple& b) {
              return a.source < b.source;
            });
  std::vector<int> pred;
  int tree_source = -1;
  for (const SourceSinkTriple& t : dec.triples) {
    if (t.source != tree_source) {
      pred = dijkstra_tree(net, w, t.source);
      tree_source = t.source;
    }
    int v = t.sink;
    while (v != t.source) {
      int e = pred[static_cast<size_t>(v)];
      if (e < 0) throw InfeasibleError("sink unreachable from source");
      y[e] += t.rate;
      v = net.edge(e).tail;
    }
  }
  return y;
}

// min-cost flow with box bounds |y| <= U via the shift z = y + U and
// successive shortest paths on the residual graph
Vec bounded_min_cost_flow(const Network& net, const Vec& w, const Vec& d,
                          double U) {
  const int n = net.n_vertices();
  const int m = net.n_edges();
  if (!(U > 0.0)) throw DomainError("undirected oracle needs a positive bound");
  const double cap = 2.0 * U;
  // saturating every negative-cost arc yields a min-cost pseudoflow, so all
  // residual costs start nonnegative and stay so under SSP with potentials
  Vec z(m);
  for (int e = 0; e < m; ++e) z[e] = w[e] < 0.0 ? cap : 0.0;
  Vec target = d + net.excess(Vec::Constant(m, U));
  Vec excess = target - net.excess(z);

  std::vector<double> phi(static_cast<size_t>(n), 0.0);
  double scale = 1.0 + target.cwiseAbs().sum();
  long guard = 0;
  while (true) {
    int source = -1;
    for (int v = 0; v < n; ++v)
      if (excess[v] < -1e-12 * scale) {
        source = v;
        break;
      }
    if (source < 0) break;
    if (++guard > 4L * (n + m) * (n + m))
      throw ResourceError("min-cost flow oracle stalled");

    // Dijkstra on the residual graph with reduced costs
    std::vector<double> dist(static_cast<size_t>(n), kInf);
    std::vector<int> pred_edge(static_cast<size_t>(n), -1);
    std::vector<int> pred_dir(static_cast<size_t>(n), 0);
    using Item = std::pair<double, int>;
    std::priority_queue<Item, std::vector<Item>, std::greater<Item>> pq;
    dist[static_cast<size_t>(source)] = 0.0;
    pq.push({0.0, source});
    while (!pq.empty()) {
      auto [dv, v] = pq.top();
      pq.pop();
      if (dv > dist[static_cast<size_t>(v)]) continue;
      auto relax = [&](int u, int e, int dir, double cost) {
        double red = cost + phi[static_cast<size_t>(v)] -
                     phi[static_cast<size_t>(u)];
        double cand = dv + std::max(red, 0.0);
        if (cand < dist[static_cast<size_t>(u)] - 1e-15) {
          dist[static_cast<size_t>(u)] = cand;
          pred_edge[static_cast<size_t>(u)] = e;
          pred_dir[static_cast<size_t>(u)] = dir;
          pq.push({cand, u});
        }
      };
      for (int e : net.out_edges()[static_cast<size_t>(v)])
        if (z[e] < cap - 1e-15 * cap) relax(net.edge(e).head, e, +1, w[e]);
      for (int e : net.in_edges()[static_cast<size_t>(v)])
        if (z[e] > 1e-15 * cap) relax(net.edge(e).tail, e, -1, -w[e]);
    }
    int sink = -1;
    double best = kInf;
    for (int v = 0; v < n; ++v)
      if (excess[v] > 1e-12 * scale && dist[static_cast<size_t>(v)] < best) {
        best = dist[static_cast<size_t>(v)];
        sink = v;
      }
    if (sink < 0) throw InfeasibleError("bounded linear subproblem infeasible");

    double amount = std::min(-excess[source], excess[sink]);
    int v = sink;
    while (v != source) {
      int e = pred_edge[static_cast<size_t>(v)];
      if (pred_dir[static_cast<size_t>(v)] > 0) {
        amount = std::min(amount, cap - z[e]);
        v = net.edge(e).tail;
      } else {
        amount = std::min(amount, z[e]);
        v = net.edge(e).head;
      }
    }
    v = sink;
    while (v != source) {
      int e = pred_edge[static_cast<size_t>(v)];
      if (pred_dir[static_cast<size_t>(v)] > 0) {
        z[e] += amount;
        v = net.edge(e).tail;
      } else {
        z[e] -= amount;
        v = net.edge(e).head;
      }
    }
    excess[source] += amount;
    excess[sink] -= amount;
    for (int u = 0; u < n; ++u)
      if (std::isfinite(dist[static_cast<size_t>(u)]))
        phi[static_cast<size_t>(u)] += dist[static_cast<size_t>(u)];
  }
  return z.array() - U;
}

}  // namespace

Vec linear_oracle(const AnalyticInstance& inst, const Vec& weights,
                  const Vec& d, double x_max) {
  if (inst.network.mode() == Mode::Directed)
    return all_or_nothing(inst.network, weights, d);
  return bounded_min_cost_flow(inst.network, weights, d, x_max);
}

namespace {

// minimize C(a + t h) over [0, t_max] by bisection on the derivative
double directional_min(const AnalyticInstance& inst, const Vec& a,
                       const Vec& h, double t_max) {
  double g0 = inst.directional_derivative(a, h);
  double gscale = std::max(1.0, std::abs(g0));
  if (g0 >= -1e-10 * gscale) return 0.0;
  double g1 = inst.directional_derivative(a + t_max * h, h);
  if (g1 <= 0.0) return t_max;
  double lo = 0.0, hi = t_max;
  while (hi - lo > 1e-12) {
    double mid = 0.5 * (lo + hi);
    double g = inst.directional_derivative(a + mid * h, h);
    if (std::abs(g) <= 1e-10 * gscale) return mid;
    (g < 0.0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace

double line_search(const AnalyticInstance& inst, const Vec& x, const Vec& y) {
  return directional_min(inst, x, y - x, 1.0);
}

FwResult solve_fixed(const AnalyticInstance& inst,
                     const DemandFunction& demand, double lambda, double eps,
                     const FwOptions& opts) {
  if (!(eps > 0.0)) throw DomainError("eps must be positive");
  const Network& net = inst.network;
  Vec d = demand.at(lambda);
  double U = opts.x_max > 0.0 ? opts.x_max : DemandFunction::total_inflow(d);
  const bool directed = net.mode() == Mode::Directed;

  FwResult res;
  if (DemandFunction::total_inflow(d) == 0.0) {
    res.flow = Vec::Zero(net.n_edges());
    res.upper_cost = inst.objective(res.flow);
    res.lower_bound = res.upper_cost;
    res.iterations = 1;
    res.converged = true;
    return res;
  }
  if (!directed && U == 0.0) U = 1.0;

  Vec x;
  if (opts.warm_start) {
    x = *opts.warm_start;
  } else {
    x = linear_oracle(inst, inst.marginal_values(Vec::Zero(net.n_edges())), d,
                      U);
  }

  double lower = -kInf;
  Vec x_prev;
  bool have_prev = false;
  int since_restart = 0;
  const double tiny = 1e-30;

  for (long k = 1; k <= opts.max_iterations; ++k) {
    res.iterations = k;
    Vec w = inst.marginal_values(x);
    Vec y = linear_oracle(inst, w, d, U);
    double upper = inst.objective(x);
    lower = std::max(lower, upper + w.dot(y - x));
    res.flow = x;
    res.upper_cost = upper;
    res.lower_bound = lower;
    if (upper - lower <= eps * std::max(std::abs(lower), tiny)) {
      res.converged = true;
      return res;
    }

    Vec x_old = x;
    double gamma = directional_min(inst, x, y - x, 1.0);
    x = x + gamma * (y - x);

    if (have_prev && ++since_restart < opts.partan_restart) {
      Vec h = x - x_prev;
      // largest eta keeping the accelerated point inside the flow bounds
      double eta_max = kInf;
      for (int e = 0; e < net.n_edges(); ++e) {
        double lim_lo = directed ? 0.0 : -U;
        if (h[e] > 0.0) eta_max = std::min(eta_max, (U - x[e]) / h[e]);
        if (h[e] < 0.0) eta_max = std::min(eta_max, (lim_lo - x[e]) / h[e]);
      }
      if (std::isfinite(eta_max) && eta_max > 0.0) {
        double eta = directional_min(inst, x, h, eta_max);
        if (eta > 0.0 && inst.objective(x + eta * h) <= upper) {
          x += eta * h;
        } else {
          since_restart = 0;  // non-descent: restart the acceleration
        }
      }
    } else if (since_restart >= opts.partan_restart) {
      since_restart = 0;
    }
    x_prev = x_old;
    have_prev = true;
  }
  throw FwConvergenceError("iteration cap reached before the requested gap",
                           res);
}

}  // namespace paraflow
