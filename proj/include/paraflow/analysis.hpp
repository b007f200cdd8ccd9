#pragma once

#include <vector>

#include "paraflow/efpa.hpp"
#include "paraflow/instance.hpp"
#include "paraflow/mcfi.hpp"

namespace paraflow {

// Original-cost objective of the solution flow along the grid.
std::vector<std::pair<double, double>> objective_curve(
    const ParametricSolution& sol, const AnalyticInstance& inst,
    const std::vector<double>& grid);
std::vector<std::pair<double, double>> objective_curve(
    const InterpolatedSolution& sol, const AnalyticInstance& inst,
    const std::vector<double>& grid);

// sum_e x_e f_e(x_e)
double total_travel_time(const AnalyticInstance& inst, const Vec& flow);

struct PoaResult {
  std::vector<std::pair<double, double>> curve;  // (lambda, poa)
  // lambdas where some edge flow of the equilibrium solution crosses zero
  std::vector<double> transition_points;
};

// Ratio of equilibrium to system-optimal total travel time on the grid,
// both computed by MCA (the system optimum uses marginals f + x f').
PoaResult poa_curve(const AnalyticInstance& inst, const DemandFunction& demand,
                    const ApproxParams& params,
                    const std::vector<double>& grid);

// default analysis grid: uniform samples plus all solution breakpoints
std::vector<double> analysis_grid(double lambda_max,
                                  const std::vector<double>& breakpoints,
                                  int n_uniform = 201);

// Edges whose KKT condition is tight for (flow, pi).
std::vector<int> support_of(const PwqInstance& inst, const Vec& flow,
                            const Vec& pi, double tol);

// Small-instance reference solver: damped Newton ascent on vertex
// potentials, independent of the homotopy machinery.
Vec oracle_solve(const PwqInstance& inst, const Vec& d, double tol,
                 long max_iterations = 2000000);
Vec oracle_solve(const AnalyticInstance& inst, const Vec& d, double tol,
                 long max_iterations = 2000000);

// Same solver, additionally reporting the dual potentials found.
std::pair<Vec, Vec> oracle_solve_with_potentials(const PwqInstance& inst,
                                                 const Vec& d, double tol,
                                                 long max_iterations = 2000000);

}  // namespace paraflow
