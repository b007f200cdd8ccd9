#include "paraflow/mca.hpp"

namespace paraflow {

PwqInstance build_interpolated_instance(const AnalyticInstance& inst,
                                        const DemandFunction& demand,
                                        const ApproxParams& params,
                                        std::optional<MeshRule> force_rule) {
  const Network& net = inst.network;
  const int m = net.n_edges();
  const double x_max = demand.max_inflow(0.0, params.lambda_max);
  if (!(x_max > 0.0)) throw DomainError("zero inflow range: nothing to mesh");
  const bool directed = net.mode() == Mode::Directed;
  const double lo = directed ? 0.0 : -x_max;

  // Constant marginals make the potential-space walk singular. Tilt them by
  // a slope paid for out of half the additive budget; the other half funds
  // the mesh so the combined spline error stays within (alpha, beta).
  std::vector<AnalyticMarginal> costs = inst.costs;
  bool tilted = false;
  for (int e = 0; e < m; ++e) {
    const AnalyticMarginal& f = costs[static_cast<size_t>(e)];
    if (f.eval(lo, 1) == 0.0 && f.eval(x_max, 1) == 0.0 &&
        f.eval(x_max) == f.eval(lo)) {
      double slope = params.beta / (2.0 * m * x_max * x_max);
      if (!(slope > 0.0))
        throw CostError("constant marginal needs an additive budget > 0");
      costs[static_cast<size_t>(e)] =
          AnalyticMarginal::polynomial({f.eval(0.0), slope});
      tilted = true;
    }
  }
  ApproxParams mesh_params = params;
  if (tilted) mesh_params.beta = params.beta / 2.0;

  PwqInstance out{net, {}};
  out.marginals.reserve(static_cast<size_t>(m));
  for (int e = 0; e < m; ++e) {
    const AnalyticMarginal& f = costs[static_cast<size_t>(e)];
    MeshRule rule = force_rule.value_or(f.rule_two_applicable() ? MeshRule::II
                                                                : MeshRule::I);
    if (rule == MeshRule::II && !f.rule_two_applicable())
      throw CostError("rule II hypotheses do not hold for this cost family");
    Mesh mesh = mca_mesh(f, mesh_params, m, x_max, rule, lo, x_max);
    out.marginals.push_back(linear_spline(f, mesh, true, true));
  }
  return out;
}

ParametricSolution run_mca(const AnalyticInstance& inst,
                           const DemandFunction& demand,
                           const ApproxParams& params,
                           std::optional<MeshRule> force_rule) {
  PwqInstance pwq = build_interpolated_instance(inst, demand, params,
                                                force_rule);
  return run_efpa(pwq, demand);
}

}  // namespace paraflow
