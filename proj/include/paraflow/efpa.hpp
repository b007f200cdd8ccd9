#pragma once

#include <optional>
#include <vector>

#include "paraflow/cost.hpp"
#include "paraflow/linalg.hpp"
#include "paraflow/network.hpp"

namespace paraflow {

// Piecewise-quadratic-cost instance: one piecewise linear marginal per edge.
struct PwqInstance {
  Network network;
  std::vector<PwlMarginal> marginals;

  // C(x) = sum of edge cost integrals.
  double objective(const Vec& x) const;
  // true when every marginal vanishes at 0 (Phase I applicable).
  bool homogeneous() const;
};

// Per-edge part indices selecting one linear piece of each marginal.
struct Region {
  std::vector<int> t;

  bool operator==(const Region& o) const { return t == o.t; }
};

// Affine piece of the solution: for lambda in [lambda_lo, lambda_hi],
// pi = pi_offset + lambda pi_dir and x = x_offset + lambda x_dir.
struct SolutionSegment {
  double lambda_lo = 0.0;
  double lambda_hi = 0.0;
  Vec pi_offset, pi_dir;
  Vec x_offset, x_dir;
  Region region;

  Vec flow_at(double lambda) const { return x_offset + lambda * x_dir; }
  Vec potential_at(double lambda) const {
    return pi_offset + lambda * pi_dir;
  }
};

struct ParametricSolution {
  std::vector<SolutionSegment> segments;

  const SolutionSegment& segment_at(double lambda) const;
  Vec flow_at(double lambda) const;
  Vec potential_at(double lambda) const;
  // segment boundaries, including 0 and lambda_max
  std::vector<double> breakpoints() const;
};

// Shortest-path potential for an optimal flow x0: forward arcs weighted
// f_e(x0_e) where flow may still increase, backward arcs -f_e(x0_e) where
// it may decrease. Throws when a negative cycle shows x0 is not optimal.
Vec initial_potential(const PwqInstance& inst, const Vec& x0);

// Region containing pi; ties at part boundaries go to the lower index.
Region locate_region(const PwqInstance& inst, const Vec& pi);

// Solves the fixed-region linear system for the affine potential and flow
// maps. lambda_lo/lambda_hi are left open (set by the caller).
SolutionSegment region_segment(const PwqInstance& inst, const Region& r,
                               const DemandFunction& demand);

struct Crossing {
  int edge = 0;
  int direction = 0;  // +1 part increments, -1 decrements
};

// Largest lambda for which the segment's potential stays inside its region,
// together with every edge constraint tight there. lambda = +inf with no
// crossings when the region is never left. When component labels are given,
// edges joining different labels are skipped (their potential difference is
// a free selection, handled by the caller).
std::pair<double, std::vector<Crossing>> lambda_exit(
    const PwqInstance& inst, const SolutionSegment& seg, double lambda_lo,
    const std::vector<int>* component = nullptr);

// Homotopy over [0, demand.lambda_max()]. Warm start (x0, pi0) optional:
// without it, b0 = 0 starts from zero flow and homogeneous instances run a
// Phase I sweep of lambda -> lambda b0 first.
ParametricSolution run_efpa(const PwqInstance& inst,
                            const DemandFunction& demand,
                            std::optional<std::pair<Vec, Vec>> warm_start =
                                std::nullopt,
                            long max_regions = 1000000);

}  // namespace paraflow
