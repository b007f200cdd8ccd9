#include <random>

#include "doctest.h"

#include "helpers.hpp"
#include "paraflow/fw.hpp"
#include "paraflow/mca.hpp"

using namespace paraflow;
using testutil::pigou_cost;
using testutil::pigou_demand;
using testutil::pigou_pair;

TEST_CASE("linear marginals interpolate to themselves") {
  Network net(2, {{0, 1}}, Mode::Undirected);
  AnalyticInstance inst{net, {AnalyticMarginal::polynomial({0.0, 2.0})}};
  DemandFunction d(Vec::Zero(2), st_vector(2, 0, 1, 1.0), 1.0);
  PwqInstance pwq = build_interpolated_instance(inst, d, {1.01, 0.5, 1.0, 0.0},
                                                std::nullopt);
  // the mesh needs almost no cells, and the spline is exact everywhere
  int finite = 0;
  for (int t = 0; t < pwq.marginals[0].n_parts(); ++t)
    finite += pwq.marginals[0].part(t).finite ? 1 : 0;
  CHECK(finite >= 1);
  CHECK(finite <= 2);
  for (double x : {-0.9, 0.0, 0.4, 1.0}) {
    CHECK(pwq.marginals[0].value(x) == doctest::Approx(2.0 * x));
  }
}

TEST_CASE("directed instances are interpolated on the one-sided range") {
  AnalyticInstance inst = pigou_pair();
  DemandFunction d = pigou_demand();
  PwqInstance pwq =
      build_interpolated_instance(inst, d, {1.01, 0.01, 1.0, 0.0},
                                  std::nullopt);
  for (const PwlMarginal& f : pwq.marginals) {
    CHECK(f.lower_bound() == doctest::Approx(0.0));
    CHECK(f.upper_bound() == doctest::Approx(1.0));
  }
}

TEST_CASE("two-route instance satisfies the certified bound against the "
          "analytic optimum") {
  AnalyticInstance inst = pigou_pair();
  DemandFunction d = pigou_demand();
  ApproxParams p{1.01, 0.01, 1.0, 0.0};
  ParametricSolution sol = run_mca(inst, d, p);
  for (int i = 1; i <= 10; ++i) {
    double l = i / 10.0;
    double approx = inst.objective(sol.flow_at(l));
    CHECK(approx <= p.alpha * pigou_cost(l) + p.beta + 1e-9);
    CHECK(approx >= pigou_cost(l) - 1e-9);
  }
}

TEST_CASE("undirected interpolation satisfies the bound against the "
          "reference solver") {
  std::mt19937_64 rng(67);
  std::uniform_real_distribution<double> u(0.5, 2.0);
  for (int it = 0; it < 5; ++it) {
    int n = 4 + static_cast<int>(rng() % 3);
    Network net = testutil::random_connected(rng, n, 2);
    AnalyticInstance inst{net, {}};
    for (int e = 0; e < net.n_edges(); ++e)
      inst.costs.push_back(AnalyticMarginal::weymouth(u(rng)));
    Vec b = testutil::random_balanced(rng, n);
    DemandFunction d(Vec::Zero(n), b, 1.0);
    ApproxParams p{1.01, 0.05, 1.0, 0.0};
    ParametricSolution sol = run_mca(inst, d, p);
    for (double l : {0.3, 0.7, 1.0}) {
      double approx = inst.objective(sol.flow_at(l));
      double ref = inst.objective(oracle_solve(inst, d.at(l), 1e-10));
      CHECK(approx <= p.alpha * ref + p.beta + 1e-7);
      CHECK(approx >= ref - 1e-7);
      CHECK((net.excess(sol.flow_at(l)) - d.at(l)).cwiseAbs().maxCoeff() <=
            1e-7);
    }
  }
}

TEST_CASE("offset demands run a scaling phase first and stay continuous") {
  // homogeneous costs, nonzero base demand
  Network net(4, {{0, 1}, {1, 2}, {2, 3}, {0, 3}, {1, 3}}, Mode::Undirected);
  AnalyticInstance inst{net, {}};
  for (int e = 0; e < 5; ++e)
    inst.costs.push_back(AnalyticMarginal::weymouth(0.5 + 0.3 * e));
  Vec b0(4), b(4);
  b0 << -1.0, 0.5, 0.5, 0.0;
  b << -0.5, 0.0, 0.0, 0.5;
  DemandFunction d(b0, b, 1.0);
  ApproxParams p{1.01, 0.05, 1.0, 0.0};
  ParametricSolution sol = run_mca(inst, d, p);
  for (double l : {0.0, 0.5, 1.0}) {
    CHECK((net.excess(sol.flow_at(l)) - d.at(l)).cwiseAbs().maxCoeff() <=
          1e-7);
  }
  double c0 = inst.objective(sol.flow_at(0.0));
  double ref0 = inst.objective(oracle_solve(inst, d.at(0.0), 1e-10));
  CHECK(c0 <= p.alpha * ref0 + p.beta + 1e-7);
}

TEST_CASE("forcing rule two on an unsupported family fails") {
  Network net(2, {{0, 1}}, Mode::Undirected);
  AnalyticInstance inst{net, {AnalyticMarginal::polynomial({0.0, 1.0, 0.0,
                                                            0.5})}};
  DemandFunction d(Vec::Zero(2), st_vector(2, 0, 1, 1.0), 1.0);
  CHECK_THROWS_AS(
      build_interpolated_instance(inst, d, {1.01, 0.5, 1.0, 0.0}, MeshRule::II),
      CostError);
}
