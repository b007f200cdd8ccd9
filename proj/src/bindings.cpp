#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "paraflow/analysis.hpp"
#include "paraflow/io.hpp"
#include "paraflow/mca.hpp"
#include "paraflow/mcfi.hpp"

namespace py = pybind11;
using namespace paraflow;

PYBIND11_MODULE(_paraflow, m) {
  m.doc() = "parametric minimum-cost flows with certified error bounds";

  py::register_exception<NetworkError>(m, "NetworkError");
  py::register_exception<DomainError>(m, "DomainError");
  py::register_exception<CostError>(m, "CostError");
  py::register_exception<InfeasibleError>(m, "InfeasibleError");
  py::register_exception<ConvergenceError>(m, "ConvergenceError");
  py::register_exception<ResourceError>(m, "ResourceError");
  py::register_exception<ParseError>(m, "ParseError");

  py::enum_<Mode>(m, "Mode")
      .value("Directed", Mode::Directed)
      .value("Undirected", Mode::Undirected);

  py::class_<Network>(m, "Network")
      .def(py::init([](int n, const std::vector<std::pair<int, int>>& edges,
                       Mode mode, int ref) {
             std::vector<Edge> es;
             for (auto [a, b] : edges) es.push_back({a, b});
             return Network(n, std::move(es), mode, ref);
           }),
           py::arg("n_vertices"), py::arg("edges"), py::arg("mode"),
           py::arg("reference_vertex") = 0)
      .def_property_readonly("n_vertices", &Network::n_vertices)
      .def_property_readonly("n_edges", &Network::n_edges)
      .def_property_readonly("mode", &Network::mode)
      .def("incidence_matrix",
           [](const Network& n) {
             return Eigen::MatrixXd(n.incidence_matrix());
           })
      .def("excess", &Network::excess)
      .def("potential_differences", &Network::potential_differences);

  py::class_<DemandFunction>(m, "DemandFunction")
      .def(py::init<Vec, Vec, double>(), py::arg("b0"), py::arg("b"),
           py::arg("lambda_max"))
      .def_property_readonly("b0", &DemandFunction::b0)
      .def_property_readonly("b", &DemandFunction::b)
      .def_property_readonly("lambda_max", &DemandFunction::lambda_max)
      .def("at", &DemandFunction::at)
      .def("max_inflow",
           py::overload_cast<double, double>(&DemandFunction::max_inflow,
                                             py::const_))
      .def("max_inflow",
           py::overload_cast<>(&DemandFunction::max_inflow, py::const_));

  py::class_<AnalyticMarginal>(m, "AnalyticMarginal")
      .def_static("bpr", &AnalyticMarginal::bpr, py::arg("fft"), py::arg("b"),
                  py::arg("cap"), py::arg("power") = 4)
      .def_static("weymouth", &AnalyticMarginal::weymouth)
      .def_static("regularized_weymouth",
                  &AnalyticMarginal::regularized_weymouth)
      .def_static("polynomial", &AnalyticMarginal::polynomial)
      .def("eval", &AnalyticMarginal::eval, py::arg("x"), py::arg("order") = 0)
      .def("beckmann", &AnalyticMarginal::beckmann)
      .def("inverse", &AnalyticMarginal::inverse)
      .def("so_marginal", &AnalyticMarginal::so_marginal);

  py::class_<PwlMarginal>(m, "PwlMarginal")
      .def_static("from_samples", &PwlMarginal::from_samples,
                  py::arg("points"), py::arg("values"),
                  py::arg("lower_bounded") = false,
                  py::arg("upper_bounded") = false)
      .def_static("linear", &PwlMarginal::linear, py::arg("alpha"),
                  py::arg("beta") = 0.0)
      .def_property_readonly("n_parts", &PwlMarginal::n_parts)
      .def("value", &PwlMarginal::value)
      .def("integral", &PwlMarginal::integral);

  py::class_<ApproxParams>(m, "ApproxParams")
      .def(py::init([](double alpha, double beta, double lambda_max,
                       double epsilon) {
             return ApproxParams{alpha, beta, lambda_max, epsilon};
           }),
           py::arg("alpha") = 1.01, py::arg("beta") = 1.0,
           py::arg("lambda_max") = 1.0, py::arg("epsilon") = 0.0)
      .def_readwrite("alpha", &ApproxParams::alpha)
      .def_readwrite("beta", &ApproxParams::beta)
      .def_readwrite("lambda_max", &ApproxParams::lambda_max)
      .def_readwrite("epsilon", &ApproxParams::epsilon);

  py::class_<AnalyticInstance>(m, "AnalyticInstance")
      .def(py::init<Network, std::vector<AnalyticMarginal>>(),
           py::arg("network"), py::arg("costs"))
      .def_readonly("network", &AnalyticInstance::network)
      .def("objective", &AnalyticInstance::objective)
      .def("marginal_values", &AnalyticInstance::marginal_values);

  py::class_<PwqInstance>(m, "PwqInstance")
      .def(py::init<Network, std::vector<PwlMarginal>>(), py::arg("network"),
           py::arg("marginals"))
      .def("objective", &PwqInstance::objective);

  py::class_<SolutionSegment>(m, "SolutionSegment")
      .def_readonly("lambda_lo", &SolutionSegment::lambda_lo)
      .def_readonly("lambda_hi", &SolutionSegment::lambda_hi)
      .def_readonly("x_offset", &SolutionSegment::x_offset)
      .def_readonly("x_dir", &SolutionSegment::x_dir)
      .def_readonly("pi_offset", &SolutionSegment::pi_offset)
      .def_readonly("pi_dir", &SolutionSegment::pi_dir);

  py::class_<ParametricSolution>(m, "ParametricSolution")
      .def_readonly("segments", &ParametricSolution::segments)
      .def("flow_at", &ParametricSolution::flow_at)
      .def("potential_at", &ParametricSolution::potential_at)
      .def("breakpoints", &ParametricSolution::breakpoints);

  py::class_<FwResult>(m, "FwResult")
      .def_readonly("flow", &FwResult::flow)
      .def_readonly("upper_cost", &FwResult::upper_cost)
      .def_readonly("lower_bound", &FwResult::lower_bound)
      .def_readonly("iterations", &FwResult::iterations)
      .def_readonly("converged", &FwResult::converged);

  py::class_<McfiBreakpoint>(m, "McfiBreakpoint")
      .def_readonly("lambda_", &McfiBreakpoint::lambda)
      .def_readonly("flow", &McfiBreakpoint::flow)
      .def_readonly("cost_lo", &McfiBreakpoint::cost_lo)
      .def_readonly("cost_hi", &McfiBreakpoint::cost_hi);

  py::class_<InterpolatedSolution>(m, "InterpolatedSolution")
      .def_readonly("breakpoints", &InterpolatedSolution::breakpoints)
      .def("flow_at", &InterpolatedSolution::flow_at)
      .def_property_readonly("lambda_max", &InterpolatedSolution::lambda_max);

  py::enum_<InstanceClass>(m, "InstanceClass")
      .value("DirectedTraffic", InstanceClass::DirectedTraffic)
      .value("UndirectedGas", InstanceClass::UndirectedGas)
      .value("Generic", InstanceClass::Generic);

  py::class_<InstanceBundle>(m, "InstanceBundle")
      .def_readonly("instance", &InstanceBundle::instance)
      .def_readonly("klass", &InstanceBundle::klass)
      .def_readonly("base_demand", &InstanceBundle::base_demand)
      .def_readonly("trips_total", &InstanceBundle::trips_total)
      .def_readonly("labels", &InstanceBundle::labels)
      .def("make_demand", &InstanceBundle::make_demand, py::arg("source"),
           py::arg("sink"), py::arg("rate"), py::arg("lambda_max"));

  m.def("run_efpa",
        [](const PwqInstance& inst, const DemandFunction& demand) {
          return run_efpa(inst, demand);
        },
        py::arg("instance"), py::arg("demand"));
  m.def("run_mca",
        [](const AnalyticInstance& inst, const DemandFunction& demand,
           const ApproxParams& params) { return run_mca(inst, demand, params); },
        py::arg("instance"), py::arg("demand"), py::arg("params"));
  m.def("run_mcfi",
        [](const AnalyticInstance& inst, const DemandFunction& demand,
           const ApproxParams& params) {
          return run_mcfi(inst, demand, params);
        },
        py::arg("instance"), py::arg("demand"), py::arg("params"));
  m.def("solve_fixed",
        [](const AnalyticInstance& inst, const DemandFunction& demand,
           double lambda, double eps) {
          return solve_fixed(inst, demand, lambda, eps);
        },
        py::arg("instance"), py::arg("demand"), py::arg("lambda_"),
        py::arg("eps"));
  m.def("total_travel_time", &total_travel_time);
  m.def("poa_curve",
        [](const AnalyticInstance& inst, const DemandFunction& demand,
           const ApproxParams& params, const std::vector<double>& grid) {
          PoaResult r = poa_curve(inst, demand, params, grid);
          return py::make_tuple(r.curve, r.transition_points);
        });
  m.def("parse_tntp", &parse_tntp);
  m.def("parse_trips_total", &parse_trips_total);
  m.def("parse_gas_json", &parse_gas_json);
  m.def("solution_to_json",
        py::overload_cast<const ParametricSolution&>(&solution_to_json));
  m.def("solution_to_json",
        py::overload_cast<const InterpolatedSolution&>(&solution_to_json));
}
