#include "paraflow/mcfi.hpp"

#include "paraflow/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <queue>

namespace paraflow {

Vec InterpolatedSolution::flow_at(double lambda) const {
  if (breakpoints.empty()) throw DomainError("empty interpolated solution");
  double hi = breakpoints.back().lambda;
  double tol = 1e-9 * (1.0 + std::abs(hi));
  if (lambda < breakpoints.front().lambda - tol || lambda > hi + tol)
    throw DomainError("lambda outside the solved range");
  lambda = std::clamp(lambda, breakpoints.front().lambda, hi);
  auto it = std::upper_bound(
      breakpoints.begin(), breakpoints.end(), lambda,
      [](double l, const McfiBreakpoint& b) { return l < b.lambda; });
  if (it == breakpoints.begin()) return breakpoints.front().flow;
  if (it == breakpoints.end()) return breakpoints.back().flow;
  const McfiBreakpoint& b1 = *(it - 1);
  const McfiBreakpoint& b2 = *it;
  double delta = b2.lambda - b1.lambda;
  if (delta <= 0.0) return b2.flow;
  double w = (lambda - b1.lambda) / delta;
  return (1.0 - w) * b1.flow + w * b2.flow;
}

double nu_bound(const AnalyticInstance& inst, double M, int s, int t) {
  const Network& net = inst.network;
  const int n = net.n_vertices();
  Vec nu(net.n_edges());
  for (int e = 0; e < net.n_edges(); ++e) {
    const AnalyticMarginal& f = inst.costs[static_cast<size_t>(e)];
    nu[e] = std::max(f.eval(M), -f.eval(-M));
    if (nu[e] < 0.0) throw DomainError("negative potential-difference bound");
  }
  std::vector<double> dist(static_cast<size_t>(n), kInf);
  using Item = std::pair<double, int>;
  std::priority_queue<Item, std::vector<Item>, std::greater<Item>> pq;
  dist[static_cast<size_t>(s)] = 0.0;
  pq.push({0.0, s});
  while (!pq.empty()) {
    auto [d, v] = pq.top();
    pq.pop();
    if (d > dist[static_cast<size_t>(v)]) continue;
    auto relax = [&](int u, double w) {
      if (d + w < dist[static_cast<size_t>(u)]) {
        dist[static_cast<size_t>(u)] = d + w;
        pq.push({d + w, u});
      }
    };
    for (int e : net.out_edges()[static_cast<size_t>(v)])
      relax(net.edge(e).head, nu[e]);
    for (int e : net.in_edges()[static_cast<size_t>(v)])
      relax(net.edge(e).tail, nu[e]);
  }
  return dist[static_cast<size_t>(t)];
}

namespace {

double rhs_linear(double c_lower, const ApproxParams& p) {
  if (!(p.alpha - 1.0 - p.epsilon > 0.0))
    throw DomainError("need eps < alpha - 1");
  return ((p.alpha - 1.0 - p.epsilon) * std::max(c_lower, 0.0) + p.beta) /
         (1.0 + p.epsilon);
}

struct StepDetail {
  double delta = 0.0;
  double factor = 0.0;
  double inflow_bound = 0.0;
};

// largest delta <= remaining with delta * factor(bound(delta)) <= rhs, for a
// factor nondecreasing in its bound (monotone predicate)
template <typename FactorFn, typename BoundFn>
StepDetail monotone_step(double remaining, double rhs, FactorFn factor,
                         BoundFn bound) {
  StepDetail d;
  d.inflow_bound = bound(remaining);
  d.factor = factor(d.inflow_bound);
  if (remaining * d.factor <= rhs) {
    d.delta = remaining;
    return d;
  }
  double lo = 0.0, hi = remaining;
  for (int i = 0; i < 60; ++i) {
    double mid = 0.5 * (lo + hi);
    double f = factor(bound(mid));
    (mid * f <= rhs ? lo : hi) = mid;
  }
  d.delta = lo;
  d.inflow_bound = bound(lo);
  d.factor = factor(d.inflow_bound);
  return d;
}

StepDetail step_i_detail(const AnalyticInstance& inst,
                         const DemandFunction& demand, double lambda_i,
                         double c_lower, const ApproxParams& params,
                         StepBoundMode mode) {
  double remaining = params.lambda_max - lambda_i;
  if (remaining <= 0.0) return {};
  double rhs = rhs_linear(c_lower, params);
  if (!(rhs > 0.0))
    throw DomainError("zero admissible step: use beta > 0");
  SourceSinkDecomposition dec = source_sink_decompose(demand.b());
  auto factor = [&](double M) {
    double s = 0.0;
    for (const SourceSinkTriple& tr : dec.triples)
      s += tr.rate * nu_bound(inst, M, tr.source, tr.sink);
    return s;
  };
  if (mode == StepBoundMode::Conservative) {
    StepDetail d;
    d.inflow_bound = demand.max_inflow(0.0, params.lambda_max);
    d.factor = factor(d.inflow_bound);
    d.delta = d.factor > 0.0 ? std::min(remaining, rhs / d.factor) : remaining;
    return d;
  }
  return monotone_step(remaining, rhs, factor, [&](double delta) {
    return demand.max_inflow(0.0, lambda_i + delta);
  });
}

StepDetail step_ii_detail(const AnalyticInstance& inst,
                          const DemandFunction& demand, double lambda_i,
                          double c_lower, const ApproxParams& params,
                          StepBoundMode mode) {
  double remaining = params.lambda_max - lambda_i;
  if (remaining <= 0.0) return {};
  double rhs = 2.0 * std::sqrt(2.0) * std::sqrt(rhs_linear(c_lower, params));
  if (!(rhs > 0.0)) throw DomainError("zero admissible step: use beta > 0");
  auto factor = [&](double B) {
    Vec c(inst.network.n_edges());
    for (int e = 0; e < inst.network.n_edges(); ++e) {
      const AnalyticMarginal& f = inst.costs[static_cast<size_t>(e)];
      double slope = std::max(f.eval(B, 1), f.eval(-B, 1));
      if (!(slope > 0.0))
        throw DomainError("step rule needs strictly increasing marginals");
      c[e] = 1.0 / slope;
    }
    LaplacianState lap(inst.network, c);
    if (lap.singular())
      throw DomainError("disconnected support in the step-size Laplacian");
    return std::sqrt(std::max(lap.quadratic_form(demand.b()), 0.0));
  };
  if (mode == StepBoundMode::Conservative) {
    StepDetail d;
    d.inflow_bound = demand.max_inflow(lambda_i, params.lambda_max);
    d.factor = factor(d.inflow_bound);
    d.delta = d.factor > 0.0 ? std::min(remaining, rhs / d.factor) : remaining;
    return d;
  }
  return monotone_step(remaining, rhs, factor, [&](double delta) {
    return demand.max_inflow(lambda_i, lambda_i + delta);
  });
}

}  // namespace

double step_rule_i(const AnalyticInstance& inst, const DemandFunction& demand,
                   double lambda_i, double c_lower, const ApproxParams& params,
                   StepBoundMode mode) {
  return step_i_detail(inst, demand, lambda_i, c_lower, params, mode).delta;
}

double step_rule_ii(const AnalyticInstance& inst, const DemandFunction& demand,
                    double lambda_i, double c_lower,
                    const ApproxParams& params, StepBoundMode mode) {
  return step_ii_detail(inst, demand, lambda_i, c_lower, params, mode).delta;
}

double gas_zeta(const AnalyticInstance& inst, const DemandFunction& demand) {
  double beta_star = kInf;
  for (const AnalyticMarginal& f : inst.costs) {
    if (f.kind() != AnalyticMarginal::Kind::Weymouth)
      throw DomainError("regularization applies to Weymouth instances only");
    beta_star = std::min(beta_star, f.weymouth_beta());
  }
  if (!(beta_star > 0.0)) throw DomainError("pipe coefficients must be > 0");
  double m = inst.network.n_edges();
  double x_max = demand.max_inflow();
  if (!(x_max > 0.0)) throw DomainError("zero inflow range");
  const double alpha_sub = 1e-5, beta_sub = 1e-5;
  return 2.0 * std::sqrt(alpha_sub * beta_sub * beta_star / (m * x_max));
}

bool certificates_hold(const InterpolatedSolution& sol, double rel_slack) {
  for (const McfiStep& s : sol.steps) {
    double lhs = s.delta * s.bound_factor;
    double rhs = sol.rule == McfiRule::I
                     ? rhs_linear(s.c_lower, sol.budget)
                     : 2.0 * std::sqrt(2.0) *
                           std::sqrt(rhs_linear(s.c_lower, sol.budget));
    if (lhs > rhs * (1.0 + rel_slack) + 1e-300) return false;
  }
  return true;
}

InterpolatedSolution run_mcfi(const AnalyticInstance& inst,
                              const DemandFunction& demand,
                              const ApproxParams& params,
                              std::optional<McfiRule> force_rule,
                              StepBoundMode mode, const FwOptions& fw_opts) {
  const bool directed = inst.network.mode() == Mode::Directed;
  McfiRule rule =
      force_rule.value_or(directed ? McfiRule::I : McfiRule::II);

  InterpolatedSolution sol;
  sol.rule = rule;
  sol.budget = params;
  if (sol.budget.epsilon <= 0.0)
    sol.budget.epsilon = directed ? 0.0015 : 0.0025;

  const AnalyticInstance* solve_inst = &inst;
  AnalyticInstance regularized{inst.network, {}};
  bool all_weymouth = !inst.costs.empty();
  for (const AnalyticMarginal& f : inst.costs)
    all_weymouth = all_weymouth && f.kind() == AnalyticMarginal::Kind::Weymouth;
  if (rule == McfiRule::II && all_weymouth) {
    sol.zeta = gas_zeta(inst, demand);
    for (const AnalyticMarginal& f : inst.costs)
      regularized.costs.push_back(AnalyticMarginal::regularized_weymouth(
          f.weymouth_beta(), sol.zeta));
    solve_inst = &regularized;
    // the regularized solve consumed the (1+1e-5, 1e-5) sub-budget
    const double a1 = 1.0 + 1e-5, b1 = 1e-5;
    sol.budget.alpha = params.alpha / a1;
    sol.budget.beta = params.beta - sol.budget.alpha * b1;
    if (!(sol.budget.alpha > 1.0) || sol.budget.beta < 0.0)
      throw DomainError("budget too small for the gas regularization");
  }
  if (!(sol.budget.epsilon < sol.budget.alpha - 1.0))
    throw DomainError("need eps < alpha - 1");
  if (rule == McfiRule::I &&
      demand.b0().cwiseAbs().sum() >
          1e-12 * std::max(1.0, demand.b().cwiseAbs().sum()))
    throw DomainError("step rule I needs a zero offset demand; use rule II");

  FwOptions fw = fw_opts;
  if (fw.x_max <= 0.0) fw.x_max = demand.max_inflow();

  double cur = 0.0;
  double prev_lambda = 0.0;
  bool have_prev = false;
  Vec prev_flow;
  const long cap = 2000000;
  while (true) {
    if (static_cast<long>(sol.breakpoints.size()) > cap)
      throw ResourceError("breakpoint cap exceeded");
    FwOptions opts = fw;
    if (have_prev) {
      // shift the previous solution by a feasible flow for the demand delta
      Vec dd = (cur - prev_lambda) * demand.b();
      if (DemandFunction::total_inflow(dd) > 0.0) {
        Vec shift = linear_oracle(*solve_inst,
                                  solve_inst->marginal_values(prev_flow), dd,
                                  fw.x_max);
        opts.warm_start = prev_flow + shift;
      } else {
        opts.warm_start = prev_flow;
      }
    }
    FwResult r = solve_fixed(*solve_inst, demand, cur, sol.budget.epsilon,
                             opts);
    sol.breakpoints.push_back(
        {cur, r.flow, r.lower_bound, r.upper_cost, r.iterations});
    if (rule == McfiRule::I && sol.breakpoints.size() >= 2) {
      const McfiBreakpoint& a = sol.breakpoints[sol.breakpoints.size() - 2];
      if (r.upper_cost < a.cost_lo * (1.0 - 1e-9) - 1e-12)
        throw DomainError("objective decreased along the sweep; use rule II");
    }
    if (cur >= params.lambda_max) break;

    StepDetail d =
        rule == McfiRule::I
            ? step_i_detail(*solve_inst, demand, cur, r.lower_bound,
                            sol.budget, mode)
            : step_ii_detail(*solve_inst, demand, cur, r.lower_bound,
                             sol.budget, mode);
    if (!(d.delta > 1e-15 * (1.0 + params.lambda_max)))
      throw DomainError("step underflow: increase beta or alpha");
    sol.steps.push_back({d.delta, d.factor, d.inflow_bound, r.lower_bound});
    prev_lambda = cur;
    prev_flow = r.flow;
    have_prev = true;
    cur += d.delta;
    if (cur > params.lambda_max - 1e-12 * (1.0 + params.lambda_max))
      cur = params.lambda_max;
  }
  return sol;
}

}  // namespace paraflow
