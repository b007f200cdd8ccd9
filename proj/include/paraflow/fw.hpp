#pragma once

#include <optional>

#include "paraflow/instance.hpp"

namespace paraflow {

struct FwResult {
  Vec flow;
  double upper_cost = 0.0;
  double lower_bound = 0.0;
  long iterations = 0;
  bool converged = false;
};

// Convergence failure still carries the best iterate found.
struct FwConvergenceError : ConvergenceError {
  FwConvergenceError(const std::string& msg, FwResult r)
      : ConvergenceError(msg), best(std::move(r)) {}
  FwResult best;
};

struct FwOptions {
  long max_iterations = 100000;
  int partan_restart = 50;
  // box bound for the undirected linear subproblem; 0 means "derive from
  // the queried demand's total inflow"
  double x_max = 0.0;
  std::optional<Vec> warm_start;
};

// Linear-cost subproblem min w.y subject to Gamma y = d. Directed mode:
// all-or-nothing shortest-path assignment (w >= 0 required). Undirected
// mode: min-cost flow with box bounds |y_e| <= x_max.
Vec linear_oracle(const AnalyticInstance& inst, const Vec& weights,
                  const Vec& d, double x_max);

// Exact step: gamma in [0,1] minimizing C(x + gamma (y - x)).
double line_search(const AnalyticInstance& inst, const Vec& x, const Vec& y);

// Frank-Wolfe with PARTAN acceleration to relative duality gap <= eps.
FwResult solve_fixed(const AnalyticInstance& inst,
                     const DemandFunction& demand, double lambda, double eps,
                     const FwOptions& opts = {});

}  // namespace paraflow
