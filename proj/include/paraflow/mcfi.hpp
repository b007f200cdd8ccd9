#pragma once

#include <optional>

#include "paraflow/fw.hpp"
#include "paraflow/instance.hpp"

namespace paraflow {

enum class McfiRule { I, II };

// How the implicit dependence of the step bound on the step itself is
// broken: Conservative evaluates it at the end of the full parameter range,
// Adaptive bisects on the step length (still an upper bound, much larger
// steps on congested instances).
enum class StepBoundMode { Conservative, Adaptive };

struct McfiBreakpoint {
  double lambda = 0.0;
  Vec flow;
  double cost_lo = 0.0;  // certified bounds on C(lambda) (solver costs)
  double cost_hi = 0.0;
  long fw_iterations = 0;
};

// Audit record for the step from breakpoint i to i+1.
struct McfiStep {
  double delta = 0.0;
  // sum_j r_j nu^M_{s_j t_j} (rule I) or sqrt(b^T L*_B b) (rule II)
  double bound_factor = 0.0;
  double inflow_bound = 0.0;  // the M or B the factor was evaluated at
  double c_lower = 0.0;
};

struct InterpolatedSolution {
  std::vector<McfiBreakpoint> breakpoints;
  std::vector<McfiStep> steps;  // breakpoints.size() - 1 entries
  McfiRule rule = McfiRule::I;
  ApproxParams budget;  // the (alpha, beta, eps) the certificates use
  double zeta = 0.0;    // regularization actually applied (gas), else 0

  Vec flow_at(double lambda) const;
  double lambda_max() const { return breakpoints.back().lambda; }
};

// Shortest s-t distance when every edge is usable in both directions at
// uniform weight nu^M_e = max{f_e(M), -f_e(-M)}.
double nu_bound(const AnalyticInstance& inst, double M, int s, int t);

// Step length rules. c_lower must underestimate C(lambda_i); the returned
// step is clamped to lambda_max - lambda_i.
double step_rule_i(const AnalyticInstance& inst, const DemandFunction& demand,
                   double lambda_i, double c_lower, const ApproxParams& params,
                   StepBoundMode mode = StepBoundMode::Conservative);
double step_rule_ii(const AnalyticInstance& inst, const DemandFunction& demand,
                    double lambda_i, double c_lower,
                    const ApproxParams& params,
                    StepBoundMode mode = StepBoundMode::Conservative);

// Weymouth regularization strength consuming the fixed sub-budget
// (1 + 1e-5, 1e-5) of the caller's (alpha, beta).
double gas_zeta(const AnalyticInstance& inst, const DemandFunction& demand);

// Certificate re-check: every stored step satisfies its rule's inequality.
bool certificates_hold(const InterpolatedSolution& sol, double rel_slack = 1e-9);

InterpolatedSolution run_mcfi(const AnalyticInstance& inst,
                              const DemandFunction& demand,
                              const ApproxParams& params,
                              std::optional<McfiRule> force_rule = std::nullopt,
                              StepBoundMode mode = StepBoundMode::Adaptive,
                              const FwOptions& fw_opts = {});

}  // namespace paraflow
