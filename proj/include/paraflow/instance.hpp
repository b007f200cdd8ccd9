#pragma once

#include <string>
#include <vector>

#include "paraflow/cost.hpp"
#include "paraflow/network.hpp"

namespace paraflow {

// Instance with analytic edge costs (the approximation drivers' input).
struct AnalyticInstance {
  Network network;
  std::vector<AnalyticMarginal> costs;

  // C(x) = sum of edge Beckmann integrals.
  double objective(const Vec& x) const;
  // per-edge marginal values f_e(x_e)
  Vec marginal_values(const Vec& x) const;
  // directional derivative of the objective at x along h
  double directional_derivative(const Vec& x, const Vec& h) const;
};

enum class InstanceClass { DirectedTraffic, UndirectedGas, Generic };

struct InstanceBundle {
  AnalyticInstance instance;
  InstanceClass klass = InstanceClass::Generic;
  Vec base_demand;          // gas scenario offset; zero for traffic
  double trips_total = 0.0; // aggregated OD flow when parsed from trips
  std::vector<std::string> labels;  // original node labels per vertex

  // Affine demand: traffic uses a zero offset and an s-t direction; gas
  // uses the scenario offset and an s-t direction of the given rate.
  DemandFunction make_demand(int source, int sink, double rate,
                             double lambda_max) const;
};

}  // namespace paraflow
