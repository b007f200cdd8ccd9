#pragma once

#include <optional>

#include "paraflow/efpa.hpp"
#include "paraflow/instance.hpp"

namespace paraflow {

// Spline-interpolated piecewise-quadratic instance whose exact solution is
// an (alpha, beta)-approximation of the original. Rule II is used for
// families whose curvature hypotheses hold, rule I otherwise; force_rule
// overrides.
PwqInstance build_interpolated_instance(
    const AnalyticInstance& inst, const DemandFunction& demand,
    const ApproxParams& params,
    std::optional<MeshRule> force_rule = std::nullopt);

// Marginal cost approximation: interpolate, then run the exact homotopy
// (Phase I handles nonzero offset demands on homogeneous costs).
ParametricSolution run_mca(const AnalyticInstance& inst,
                           const DemandFunction& demand,
                           const ApproxParams& params,
                           std::optional<MeshRule> force_rule = std::nullopt);

}  // namespace paraflow
