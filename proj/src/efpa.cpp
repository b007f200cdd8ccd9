#include "paraflow/efpa.hpp"

#include <algorithm>
#include <cmath>

#include "paraflow/analysis.hpp"

namespace paraflow {

double PwqInstance::objective(const Vec& x) const {
  double c = 0.0;
  for (int e = 0; e < network.n_edges(); ++e)
    c += marginals[static_cast<size_t>(e)].integral(x[e]);
  return c;
}

bool PwqInstance::homogeneous() const {
  for (const PwlMarginal& f : marginals) {
    if (f.lower_bound() > 0.0 || f.upper_bound() < 0.0) return false;
    if (std::abs(f.value(0.0)) > 1e-12) return false;
  }
  return true;
}

const SolutionSegment& ParametricSolution::segment_at(double lambda) const {
  if (segments.empty()) throw DomainError("empty parametric solution");
  double lo = segments.front().lambda_lo, hi = segments.back().lambda_hi;
  double tol = 1e-9 * (1.0 + std::abs(hi));
  if (lambda < lo - tol || lambda > hi + tol)
    throw DomainError("lambda outside the solved range");
  auto it = std::upper_bound(
      segments.begin(), segments.end(), lambda,
      [](double l, const SolutionSegment& s) { return l < s.lambda_lo; });
  if (it != segments.begin()) --it;
  return *it;
}

Vec ParametricSolution::flow_at(double lambda) const {
  return segment_at(lambda).flow_at(lambda);
}

Vec ParametricSolution::potential_at(double lambda) const {
  return segment_at(lambda).potential_at(lambda);
}

std::vector<double> ParametricSolution::breakpoints() const {
  std::vector<double> bp;
  for (const SolutionSegment& s : segments) bp.push_back(s.lambda_lo);
  if (!segments.empty()) bp.push_back(segments.back().lambda_hi);
  return bp;
}

Vec initial_potential(const PwqInstance& inst, const Vec& x0) {
  const Network& net = inst.network;
  const int n = net.n_vertices();
  struct Arc {
    int from, to;
    double w;
  };
  std::vector<Arc> arcs;
  for (int e = 0; e < net.n_edges(); ++e) {
    const PwlMarginal& f = inst.marginals[static_cast<size_t>(e)];
    double x = x0[e];
    double tol = 1e-12 * (1.0 + std::abs(x));
    double fv = f.value(x);
    if (!std::isfinite(fv)) throw DomainError("marginal infinite at x0");
    const Edge& ed = net.edge(e);
    if (x < f.upper_bound() - tol) arcs.push_back({ed.tail, ed.head, fv});
    if (x > f.lower_bound() + tol) arcs.push_back({ed.head, ed.tail, -fv});
  }
  std::vector<double> dist(static_cast<size_t>(n), kInf);
  dist[static_cast<size_t>(net.reference_vertex())] = 0.0;
  for (int round = 0; round < n; ++round) {
    bool improved = false;
    for (const Arc& a : arcs) {
      double cand = dist[static_cast<size_t>(a.from)] + a.w;
      double& cur = dist[static_cast<size_t>(a.to)];
      if (cand < cur - 1e-12 * (1.0 + std::abs(cand))) {
        dist[static_cast<size_t>(a.to)] = cand;
        improved = true;
      }
    }
    if (!improved) break;
    if (round == n - 1)
      throw DomainError("negative cycle: supplied flow is not optimal");
  }
  Vec pi(n);
  for (int v = 0; v < n; ++v) {
    if (!std::isfinite(dist[static_cast<size_t>(v)]))
      throw DomainError("vertex unreachable in the residual graph");
    pi[v] = dist[static_cast<size_t>(v)];
  }
  return pi;
}

Region locate_region(const PwqInstance& inst, const Vec& pi) {
  Region r;
  Vec y = inst.network.potential_differences(pi);
  for (int e = 0; e < inst.network.n_edges(); ++e)
    r.t.push_back(inst.marginals[static_cast<size_t>(e)].part_of_potential(y[e]));
  return r;
}

namespace {

Vec region_conductances(const PwqInstance& inst, const Region& r) {
  Vec c(inst.network.n_edges());
  for (int e = 0; e < inst.network.n_edges(); ++e)
    c[e] = inst.marginals[static_cast<size_t>(e)].part(r.t[static_cast<size_t>(e)]).c();
  return c;
}

// Connected components of the positive-conductance subgraph. Edges sitting
// in a flow-bound part have zero conductance; vertices they isolate carry
// free potentials that only the cross-component clamp constraints restrict.
struct Components {
  std::vector<int> id;  // vertex -> component
  int count = 0;
};

Components active_components(const Network& net, const Vec& c) {
  const int n = net.n_vertices();
  Components comps;
  comps.id.assign(static_cast<size_t>(n), -1);
  std::vector<std::vector<int>> adj(static_cast<size_t>(n));
  for (int e = 0; e < net.n_edges(); ++e)
    if (c[e] > 0.0) {
      adj[static_cast<size_t>(net.edge(e).tail)].push_back(net.edge(e).head);
      adj[static_cast<size_t>(net.edge(e).head)].push_back(net.edge(e).tail);
    }
  std::vector<int> stack;
  for (int s = 0; s < n; ++s) {
    if (comps.id[static_cast<size_t>(s)] >= 0) continue;
    comps.id[static_cast<size_t>(s)] = comps.count;
    stack.push_back(s);
    while (!stack.empty()) {
      int v = stack.back();
      stack.pop_back();
      for (int w : adj[static_cast<size_t>(v)])
        if (comps.id[static_cast<size_t>(w)] < 0) {
          comps.id[static_cast<size_t>(w)] = comps.count;
          stack.push_back(w);
        }
    }
    ++comps.count;
  }
  return comps;
}

// Exact potentials for a disconnected conductance graph: ground one vertex
// per component, so values are exact within components while the
// cross-component offsets stay free (chosen later against the clamp
// constraints). ok reports whether every component balances its demand.
Vec solve_components(const Network& net, const Vec& c, const Vec& rhs,
                     const Components& comps, bool& ok) {
  const int n = net.n_vertices();
  std::vector<int> rep(static_cast<size_t>(comps.count), -1);
  rep[static_cast<size_t>(comps.id[static_cast<size_t>(
      net.reference_vertex())])] = net.reference_vertex();
  for (int v = 0; v < n; ++v) {
    int& rc = rep[static_cast<size_t>(comps.id[static_cast<size_t>(v)])];
    if (rc < 0) rc = v;
  }
  std::vector<int> idx(static_cast<size_t>(n), -1);
  int k = 0;
  for (int v = 0; v < n; ++v)
    if (rep[static_cast<size_t>(comps.id[static_cast<size_t>(v)])] != v)
      idx[static_cast<size_t>(v)] = k++;
  Eigen::MatrixXd L = Eigen::MatrixXd::Zero(k, k);
  for (int e = 0; e < net.n_edges(); ++e) {
    if (!(c[e] > 0.0)) continue;
    const Edge& ed = net.edge(e);
    int a = idx[static_cast<size_t>(ed.tail)];
    int b = idx[static_cast<size_t>(ed.head)];
    if (a >= 0) L(a, a) += c[e];
    if (b >= 0) L(b, b) += c[e];
    if (a >= 0 && b >= 0) {
      L(a, b) -= c[e];
      L(b, a) -= c[e];
    }
  }
  Vec rr = Vec::Zero(k);
  Vec bal = Vec::Zero(comps.count);
  for (int v = 0; v < n; ++v) {
    if (idx[static_cast<size_t>(v)] >= 0) rr[idx[static_cast<size_t>(v)]] = rhs[v];
    bal[comps.id[static_cast<size_t>(v)]] += rhs[v];
  }
  ok = bal.cwiseAbs().maxCoeff() <= 1e-6 * (1.0 + rhs.cwiseAbs().maxCoeff());
  Vec pi = Vec::Zero(n);
  if (k > 0) {
    Eigen::LDLT<Eigen::MatrixXd> ldlt(L);
    Vec sol = ldlt.solve(rr);
    sol += ldlt.solve(rr - L * sol);  // refine: steep parts amplify error
    for (int v = 0; v < n; ++v)
      if (idx[static_cast<size_t>(v)] >= 0) pi[v] = sol[idx[static_cast<size_t>(v)]];
  }
  return pi;
}

// Fallback when a component cannot balance its demand (transient regions
// passed through by pivot cascades): ground the system with an
// infinitesimal conductance on every edge. Potentials blow up across the
// cut that must reopen, which drives the reactivating pivots.
Vec solve_grounded(const Network& net, const Vec& c, const Vec& rhs) {
  const int n = net.n_vertices();
  const int ref = net.reference_vertex();
  auto ridx = [&](int v) { return v < ref ? v : v - 1; };
  double eps = 1e-12 * std::max(c.maxCoeff(), 1.0);
  Eigen::MatrixXd L = Eigen::MatrixXd::Zero(n - 1, n - 1);
  for (int e = 0; e < net.n_edges(); ++e) {
    double ce = c[e] + eps;
    const Edge& ed = net.edge(e);
    int a = ed.tail, b = ed.head;
    if (a != ref) L(ridx(a), ridx(a)) += ce;
    if (b != ref) L(ridx(b), ridx(b)) += ce;
    if (a != ref && b != ref) {
      L(ridx(a), ridx(b)) -= ce;
      L(ridx(b), ridx(a)) -= ce;
    }
  }
  Vec r(n - 1);
  for (int v = 0; v < n; ++v)
    if (v != ref) r[ridx(v)] = rhs[v];
  Vec sol = L.ldlt().solve(r);
  Vec pi = Vec::Zero(n);
  for (int v = 0; v < n; ++v)
    if (v != ref) pi[v] = sol[ridx(v)];
  return pi;
}

SolutionSegment segment_from(const PwqInstance& inst, const Region& r,
                             const DemandFunction& demand,
                             const LaplacianState& lap) {
  const Network& net = inst.network;
  const int m = net.n_edges();
  Vec d(m), c(m);
  for (int e = 0; e < m; ++e) {
    const PwlPart& p =
        inst.marginals[static_cast<size_t>(e)].part(r.t[static_cast<size_t>(e)]);
    d[e] = p.d();
    c[e] = p.c();
  }
  SolutionSegment seg;
  seg.region = r;
  Vec rhs0 = demand.b0() + net.excess(d);
  if (!lap.singular()) {
    seg.pi_offset = lap.solve(rhs0);
    seg.pi_dir = lap.solve(demand.b());
  } else {
    seg.pi_offset = solve_grounded(net, c, rhs0);
    seg.pi_dir = solve_grounded(net, c, demand.b());
  }
  Vec yo = net.potential_differences(seg.pi_offset);
  Vec yd = net.potential_differences(seg.pi_dir);
  seg.x_offset = c.cwiseProduct(yo) - d;
  seg.x_dir = c.cwiseProduct(yd);
  return seg;
}

SolutionSegment segment_singular(const PwqInstance& inst, const Region& r,
                                 const DemandFunction& demand,
                                 const Components& comps, bool& consistent) {
  const Network& net = inst.network;
  const int m = net.n_edges();
  Vec d(m), c(m);
  for (int e = 0; e < m; ++e) {
    const PwlPart& p =
        inst.marginals[static_cast<size_t>(e)].part(r.t[static_cast<size_t>(e)]);
    d[e] = p.d();
    c[e] = p.c();
  }
  SolutionSegment seg;
  seg.region = r;
  Vec rhs0 = demand.b0() + net.excess(d);
  bool ok0 = false, okb = false;
  seg.pi_offset = solve_components(net, c, rhs0, comps, ok0);
  seg.pi_dir = solve_components(net, c, demand.b(), comps, okb);
  consistent = ok0 && okb;
  if (!consistent) {
    seg.pi_offset = solve_grounded(net, c, rhs0);
    seg.pi_dir = solve_grounded(net, c, demand.b());
  }
  Vec yo = net.potential_differences(seg.pi_offset);
  Vec yd = net.potential_differences(seg.pi_dir);
  seg.x_offset = c.cwiseProduct(yo) - d;
  seg.x_dir = c.cwiseProduct(yd);
  return seg;
}

// One difference constraint on the free component offsets u:
// u_to <= u_from + w0 + lambda w1. Each comes from a clamped edge joining
// two components; pivot names the part change that fires when it goes tight.
struct CrossArc {
  int from = 0, to = 0;
  double w0 = 0.0, w1 = 0.0;
  Crossing pivot;
};

std::vector<CrossArc> cross_arcs(const PwqInstance& inst,
                                 const SolutionSegment& seg,
                                 const Components& comps) {
  const Network& net = inst.network;
  Vec yo = net.potential_differences(seg.pi_offset);
  Vec yd = net.potential_differences(seg.pi_dir);
  std::vector<CrossArc> arcs;
  for (int e = 0; e < net.n_edges(); ++e) {
    const Edge& ed = net.edge(e);
    int a = comps.id[static_cast<size_t>(ed.tail)];
    int b = comps.id[static_cast<size_t>(ed.head)];
    if (a == b) continue;
    const PwlMarginal& f = inst.marginals[static_cast<size_t>(e)];
    int t = seg.region.t[static_cast<size_t>(e)];
    double slo = f.sigma(t), shi = f.sigma(t + 1);
    // y_e(lambda) = yo + lambda yd + u_a - u_b must stay in [slo, shi]
    if (std::isfinite(shi))
      arcs.push_back({b, a, shi - yo[e], -yd[e], {e, +1}});
    if (std::isfinite(slo))
      arcs.push_back({a, b, yo[e] - slo, yd[e], {e, -1}});
  }
  return arcs;
}

// Bellman-Ford feasibility of the difference constraints at lambda. On
// success u holds a witness (zero on the reference component); on failure
// cycle lists the pivots of a violated constraint cycle, which must all
// fire together (e.g. a route through an isolated vertex opening).
bool cross_feasible(const std::vector<CrossArc>& arcs, int n_comp,
                    int ref_comp, double lambda, Vec* u,
                    std::vector<Crossing>* cycle) {
  Vec dist = Vec::Zero(n_comp);
  std::vector<int> pred(static_cast<size_t>(n_comp), -1);
  double wscale = 1.0;
  for (const CrossArc& a : arcs)
    wscale = std::max(wscale, std::abs(a.w0 + lambda * a.w1));
  double tol = 1e-12 * wscale;
  int improved = -1;
  for (int round = 0; round <= n_comp; ++round) {
    improved = -1;
    for (size_t i = 0; i < arcs.size(); ++i) {
      const CrossArc& a = arcs[i];
      double cand = dist[a.from] + a.w0 + lambda * a.w1;
      if (cand < dist[a.to] - tol) {
        dist[a.to] = cand;
        pred[static_cast<size_t>(a.to)] = static_cast<int>(i);
        improved = a.to;
      }
    }
    if (improved < 0) break;
  }
  if (improved < 0) {
    if (u) *u = dist.array() - dist[ref_comp];
    return true;
  }
  if (cycle) {
    int v = improved;
    for (int i = 0; i < n_comp; ++i)
      v = arcs[static_cast<size_t>(pred[static_cast<size_t>(v)])].from;
    cycle->clear();
    int w = v;
    do {
      const CrossArc& a = arcs[static_cast<size_t>(pred[static_cast<size_t>(w)])];
      cycle->push_back(a.pivot);
      w = a.from;
    } while (w != v);
  }
  return false;
}

}  // namespace

SolutionSegment region_segment(const PwqInstance& inst, const Region& r,
                               const DemandFunction& demand) {
  LaplacianState lap(inst.network, region_conductances(inst, r));
  if (lap.singular()) throw DomainError("ambiguous region");
  return segment_from(inst, r, demand, lap);
}

std::pair<double, std::vector<Crossing>> lambda_exit(
    const PwqInstance& inst, const SolutionSegment& seg, double lambda_lo,
    const std::vector<int>* component) {
  const Network& net = inst.network;
  Vec yo = net.potential_differences(seg.pi_offset);
  Vec yd = net.potential_differences(seg.pi_dir);
  struct Cand {
    double lambda;
    int edge, dir;
  };
  std::vector<Cand> cands;
  for (int e = 0; e < net.n_edges(); ++e) {
    if (component &&
        (*component)[static_cast<size_t>(net.edge(e).tail)] !=
            (*component)[static_cast<size_t>(net.edge(e).head)])
      continue;
    const PwlMarginal& f = inst.marginals[static_cast<size_t>(e)];
    int t = seg.region.t[static_cast<size_t>(e)];
    double slo = f.sigma(t), shi = f.sigma(t + 1);
    double ynow = yo[e] + lambda_lo * yd[e];
    double vtol = 1e-9 * (1.0 + std::abs(ynow));
    // already outside (numerical landing past a boundary): exit immediately,
    // unless the trajectory re-enters the part within a vanishing interval
    // (steep grounded potentials entering a region at its boundary)
    double ltol = 1e-9 * (1.0 + std::abs(lambda_lo));
    if (std::isfinite(shi) && ynow > shi + vtol) {
      if (!(yd[e] < 0.0 && (shi - yo[e]) / yd[e] <= lambda_lo + ltol))
        cands.push_back({lambda_lo, e, +1});
    } else if (std::isfinite(slo) && ynow < slo - vtol) {
      if (!(yd[e] > 0.0 && (slo - yo[e]) / yd[e] <= lambda_lo + ltol))
        cands.push_back({lambda_lo, e, -1});
    }
    if (yd[e] > 0.0 && std::isfinite(shi))
      cands.push_back({std::max(lambda_lo, (shi - yo[e]) / yd[e]), e, +1});
    else if (yd[e] < 0.0 && std::isfinite(slo))
      cands.push_back({std::max(lambda_lo, (slo - yo[e]) / yd[e]), e, -1});
  }
  if (cands.empty()) return {kInf, {}};
  double best = kInf;
  for (const Cand& c : cands) best = std::min(best, c.lambda);
  double mtol = 1e-12 * std::max(1.0, std::abs(best));
  std::vector<Crossing> crossings;
  for (const Cand& c : cands)
    if (c.lambda <= best + mtol) crossings.push_back({c.edge, c.dir});
  std::sort(crossings.begin(), crossings.end(),
            [](const Crossing& a, const Crossing& b) { return a.edge < b.edge; });
  crossings.erase(std::unique(crossings.begin(), crossings.end(),
                              [](const Crossing& a, const Crossing& b) {
                                return a.edge == b.edge && a.direction == b.direction;
                              }),
                  crossings.end());
  return {best, crossings};
}

ParametricSolution run_efpa(const PwqInstance& inst,
                            const DemandFunction& demand,
                            std::optional<std::pair<Vec, Vec>> warm_start,
                            long max_regions) {
  const Network& net = inst.network;
  if (static_cast<int>(inst.marginals.size()) != net.n_edges())
    throw DomainError("marginal count mismatch");
  const double lambda_max = demand.lambda_max();

  Vec x0, pi0;
  if (warm_start) {
    x0 = warm_start->first;
    pi0 = warm_start->second;
  } else if (demand.b0().cwiseAbs().sum() <=
             1e-14 * std::max(1.0, demand.b().cwiseAbs().sum())) {
    x0 = Vec::Zero(net.n_edges());
    pi0 = initial_potential(inst, x0);
  } else if (inst.homogeneous()) {
    // Phase I: scale the offset demand up from zero, then continue from it
    DemandFunction phase1(Vec::Zero(net.n_vertices()), demand.b0(), 1.0);
    ParametricSolution sol1 = run_efpa(inst, phase1, std::nullopt, max_regions);
    x0 = sol1.flow_at(1.0);
    pi0 = sol1.potential_at(1.0);
  } else {
    throw DomainError(
        "nonzero offset demand with inhomogeneous costs needs a warm start");
  }

  Region r = locate_region(inst, pi0);
  LaplacianState lap(net, region_conductances(inst, r));
  if (lap.singular()) {
    // tie-broken parts can pin every edge; bump edges sitting exactly on
    // their upper part boundary into the next part. A region that stays
    // singular is fine: its segments are solved by the grounded fallback.
    Vec y = net.potential_differences(pi0);
    for (int e = 0; e < net.n_edges(); ++e) {
      const PwlMarginal& f = inst.marginals[static_cast<size_t>(e)];
      int& t = r.t[static_cast<size_t>(e)];
      double shi = f.sigma(t + 1);
      if (std::isfinite(shi) &&
          std::abs(y[e] - shi) <= 1e-9 * (1.0 + std::abs(shi)) &&
          t + 1 < f.n_parts()) {
        ++t;
        lap.set_conductance(e, f.part(t).c());
      }
    }
  }

  ParametricSolution out;
  double cur = 0.0;
  long visited = 0;
  long stalled = 0;
  bool conservation_failed = false;  // seen at the current cur
  Crossing last_pivot{-1, 0};
  long stall_cap = 64;
  for (const PwlMarginal& f : inst.marginals) stall_cap += 2 * f.n_parts();

  // Degenerate vertices (several part boundaries met at once) can make the
  // single-edge pivots cycle. Relocate the region from an exact dual solve
  // just past the stuck parameter value; a probe that cannot be solved
  // leaves the normal pivoting to run until the stall cap trips.
  auto rescue = [&](double stuck, long attempt) -> bool {
    double eps = 1e-9 * (1.0 + lambda_max) *
                 std::pow(10.0, static_cast<double>(attempt % 6));
    double probe = std::min(stuck + eps, lambda_max);
    std::pair<Vec, Vec> sol;
    try {
      sol = oracle_solve_with_potentials(inst, demand.at(probe), 1e-10, 20000);
    } catch (const std::exception&) {
      return false;
    }
    Vec dp = demand.at(probe);
    if ((net.excess(sol.first) - dp).cwiseAbs().maxCoeff() >
        1e-6 * (1.0 + dp.cwiseAbs().maxCoeff()))
      return false;  // probe demand is not actually satisfiable
    r = locate_region(inst, sol.second);
    lap = LaplacianState(net, region_conductances(inst, r));
    return true;
  };

  while (true) {
    if (++visited > max_regions)
      throw ResourceError("region cap exceeded in the homotopy walk");
    bool singular = lap.singular();
    SolutionSegment seg;
    Components comps;
    bool consistent = true;
    if (!singular) {
      seg = segment_from(inst, r, demand, lap);
    } else {
      comps = active_components(net, region_conductances(inst, r));
      seg = segment_singular(inst, r, demand, comps, consistent);
    }
    bool constrained = singular && consistent && comps.count > 1;
    auto [exit_lambda, crossings] =
        lambda_exit(inst, seg, cur, constrained ? &comps.id : nullptr);
    // by default a single pivot fires: the smallest crossing edge id, except
    // that undoing the previous pivot is a last resort (degenerate vertices
    // tie several crossings and reversing first would cycle)
    std::vector<Crossing> pivots;
    for (const Crossing& cr : crossings) {
      if (cr.edge == last_pivot.edge && cr.direction == -last_pivot.direction)
        continue;
      pivots.push_back(cr);
      break;
    }
    if (pivots.empty() && !crossings.empty())
      pivots.push_back(crossings.front());
    if (constrained) {
      // the free component offsets must keep every cross-component clamped
      // edge inside its part; the region ends where that system turns
      // infeasible, and the violated constraint cycle pivots as one
      std::vector<CrossArc> arcs = cross_arcs(inst, seg, comps);
      int refc = comps.id[static_cast<size_t>(net.reference_vertex())];
      Vec u_lo = Vec::Zero(comps.count), u_hi = Vec::Zero(comps.count);
      std::vector<Crossing> cyc;
      double hi_t = std::min(exit_lambda, lambda_max);
      if (!cross_feasible(arcs, comps.count, refc, cur, &u_lo, &cyc)) {
        exit_lambda = cur;
        pivots = cyc;
        u_hi = u_lo = Vec::Zero(comps.count);
      } else if (!cross_feasible(arcs, comps.count, refc, hi_t, &u_hi,
                                 nullptr)) {
        double lo = cur, hi2 = hi_t;
        for (int i = 0; i < 80 && hi2 - lo > 1e-14 * (1.0 + hi2); ++i) {
          double mid = 0.5 * (lo + hi2);
          if (cross_feasible(arcs, comps.count, refc, mid, nullptr, nullptr))
            lo = mid;
          else
            hi2 = mid;
        }
        cross_feasible(arcs, comps.count, refc, lo, &u_hi, nullptr);
        cross_feasible(arcs, comps.count, refc, hi2, nullptr, &cyc);
        exit_lambda = lo;
        pivots = cyc;
      }
      double lam_end = std::min(exit_lambda, lambda_max);
      Vec udir = Vec::Zero(comps.count);
      if (lam_end > cur + 1e-15 * (1.0 + lam_end))
        udir = (u_hi - u_lo) / (lam_end - cur);
      for (int v = 0; v < net.n_vertices(); ++v) {
        int k = comps.id[static_cast<size_t>(v)];
        seg.pi_dir[v] += udir[k];
        seg.pi_offset[v] += u_lo[k] - cur * udir[k];
      }
    }
    double hi = std::min(exit_lambda, lambda_max);
    double mtol = 1e-12 * std::max(1.0, std::abs(cur));
    bool pushable = hi > cur + mtol;
    if (pushable) {
      // a region that looks stable can still fail to carry the demand when
      // the remaining slack sits behind saturated flow bounds: the grounded
      // solve then leaks across the saturated cut instead of conserving flow
      double mid = 0.5 * (cur + hi);
      Vec dm = demand.at(mid);
      double resid = (net.excess(seg.x_offset + mid * seg.x_dir) - dm)
                         .cwiseAbs()
                         .maxCoeff();
      if (resid > 1e-6 * (1.0 + dm.cwiseAbs().maxCoeff())) {
        conservation_failed = true;
        pushable = false;
        // a vanishing unbalanced segment is a transient region of a pivot
        // cascade: keep pivoting; a longer one needs an exact probe
        if (hi - cur > 1e-9 * (1.0 + hi)) {
          if (++stalled > stall_cap || !rescue(cur, stalled))
            throw InfeasibleError(
                "demand not satisfiable within the flow bounds");
          continue;
        }
      }
    }
    if (pushable) {
      seg.lambda_lo = cur;
      seg.lambda_hi = hi;
      out.segments.push_back(seg);
      stalled = 0;
      conservation_failed = false;
      last_pivot = {-1, 0};
    } else if (++stalled > stall_cap) {
      if (conservation_failed)
        throw InfeasibleError("demand not satisfiable within the flow bounds");
      throw ResourceError("homotopy walk is not making progress");
    } else if (stalled >= 16 && stalled % 16 == 0 && cur < lambda_max) {
      if (rescue(cur, stalled / 16 - 1)) continue;
    }
    if (exit_lambda >= lambda_max) break;
    cur = std::max(cur, exit_lambda);

    for (const Crossing& cr : pivots) {
      const PwlMarginal& f = inst.marginals[static_cast<size_t>(cr.edge)];
      int& t = r.t[static_cast<size_t>(cr.edge)];
      t += cr.direction;
      if (t < 0 || t >= f.n_parts())
        throw InfeasibleError("demand not satisfiable within the flow bounds");
      lap.set_conductance(cr.edge, f.part(t).c());
    }
    last_pivot = pivots.size() == 1 ? pivots.front() : Crossing{-1, 0};
  }

  if (out.segments.empty()) {
    // degenerate range [0, 0]
    SolutionSegment seg;
    if (!lap.singular()) {
      seg = segment_from(inst, r, demand, lap);
    } else {
      Components comps0 = active_components(net, region_conductances(inst, r));
      bool c0 = true;
      seg = segment_singular(inst, r, demand, comps0, c0);
    }
    seg.lambda_lo = seg.lambda_hi = 0.0;
    out.segments.push_back(seg);
  }
  out.segments.front().lambda_lo = 0.0;
  out.segments.back().lambda_hi = lambda_max;
  return out;
}

}  // namespace paraflow
