#include <cstdint>
#include <iostream>
#include <optional>
#include <random>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"

#include "paraflow/analysis.hpp"
#include "paraflow/io.hpp"
#include "paraflow/mca.hpp"
#include "paraflow/mcfi.hpp"

namespace {

using namespace paraflow;

struct Args {
  std::string network;
  std::string trips;
  std::string source, sink;
  double rate = 0.0;
  double alpha = 1.01;
  double beta = 1.0;
  double lambda_max = 1.0;
  double epsilon = 0.0;
  std::string rule;
  std::string out;
  std::string format = "json";
  int samples = 201;
  std::uint64_t seed = 0;
};

void add_common(CLI::App* cmd, Args& a) {
  cmd->add_option("--network", a.network, "network file (TNTP or gas JSON)")
      ->required();
  cmd->add_option("--trips", a.trips, "TNTP trips file (rate = D/10)");
  cmd->add_option("--source", a.source, "source node label");
  cmd->add_option("--sink", a.sink, "sink node label");
  cmd->add_option("--rate", a.rate, "demand rate of the direction vector");
  cmd->add_option("--alpha", a.alpha, "multiplicative budget")
      ->default_val(1.01);
  cmd->add_option("--beta", a.beta, "additive budget")->default_val(1.0);
  cmd->add_option("--lambda-max", a.lambda_max, "parameter range end")
      ->default_val(1.0);
  cmd->add_option("--epsilon", a.epsilon,
                  "oracle precision (0: 0.0015 directed / 0.0025 undirected)");
  cmd->add_option("--rule", a.rule, "force step/mesh rule: i or ii")
      ->check(CLI::IsMember({"i", "ii"}));
  cmd->add_option("--out", a.out, "output path (default: stdout)");
  cmd->add_option("--format", a.format, "json or csv")
      ->check(CLI::IsMember({"json", "csv"}))
      ->default_val("json");
  cmd->add_option("--samples", a.samples, "csv sample count")
      ->default_val(201);
  cmd->add_option("--seed", a.seed, "seed for random source/sink choice")
      ->default_val(0);
}

bool is_gas(const std::string& path) {
  return path.size() > 5 && path.substr(path.size() - 5) == ".json";
}

InstanceBundle load_bundle(const Args& a) {
  if (is_gas(a.network)) return parse_gas_json(read_text_file(a.network));
  InstanceBundle b = parse_tntp(read_text_file(a.network));
  if (!a.trips.empty())
    b.trips_total = parse_trips_total(read_text_file(a.trips));
  return b;
}

DemandFunction build_demand(const InstanceBundle& b, const Args& a) {
  const int n = b.instance.network.n_vertices();
  int s = -1, t = -1;
  if (!a.source.empty() && !a.sink.empty()) {
    s = resolve_node(b, a.source);
    t = resolve_node(b, a.sink);
  } else {
    std::mt19937_64 rng(a.seed);
    std::uniform_int_distribution<int> pick(0, n - 1);
    s = pick(rng);
    do {
      t = pick(rng);
    } while (t == s);
  }
  double rate = a.rate;
  if (rate <= 0.0) {
    if (b.klass == InstanceClass::UndirectedGas)
      rate = 0.5 * b.base_demand.cwiseAbs().sum();
    else if (b.trips_total > 0.0)
      rate = b.trips_total / 10.0;
    else
      throw ParseError("need --rate or --trips to set the demand rate");
  }
  return b.make_demand(s, t, rate, a.lambda_max);
}

std::optional<MeshRule> mesh_rule(const Args& a) {
  if (a.rule == "i") return MeshRule::I;
  if (a.rule == "ii") return MeshRule::II;
  return std::nullopt;
}

std::optional<McfiRule> mcfi_rule(const Args& a) {
  if (a.rule == "i") return McfiRule::I;
  if (a.rule == "ii") return McfiRule::II;
  return std::nullopt;
}

void emit(const Args& a, const std::string& content) {
  if (a.out.empty())
    std::cout << content;
  else
    write_text_file(a.out, content);
}

std::vector<double> sample_grid(double lambda_max, int n) {
  std::vector<double> g;
  for (int i = 0; i < std::max(2, n); ++i)
    g.push_back(lambda_max * static_cast<double>(i) / (std::max(2, n) - 1));
  return g;
}

int run(const std::string& mode, const Args& a) {
  InstanceBundle bundle = load_bundle(a);
  DemandFunction demand = build_demand(bundle, a);
  ApproxParams params{a.alpha, a.beta, a.lambda_max, a.epsilon};

  if (mode == "mca") {
    ParametricSolution sol = run_mca(bundle.instance, demand, params,
                                     mesh_rule(a));
    emit(a, a.format == "json"
                ? solution_to_json(sol)
                : solution_to_csv(sol, sample_grid(a.lambda_max, a.samples)));
  } else if (mode == "mcfi") {
    InterpolatedSolution sol =
        run_mcfi(bundle.instance, demand, params, mcfi_rule(a));
    emit(a, a.format == "json"
                ? solution_to_json(sol)
                : solution_to_csv(sol, sample_grid(a.lambda_max, a.samples)));
  } else if (mode == "poa") {
    if (bundle.klass != InstanceClass::DirectedTraffic)
      throw ParseError("poa needs a directed traffic instance");
    PoaResult res = poa_curve(bundle.instance, demand, params,
                              sample_grid(a.lambda_max, a.samples));
    if (a.format == "json") {
      nlohmann::json pts = nlohmann::json::array();
      for (auto [l, p] : res.curve)
        pts.push_back({{"lambda", l}, {"poa", p}});
      nlohmann::json out{{"poa", pts},
                         {"transitions", res.transition_points}};
      emit(a, out.dump(2) + "\n");
    } else {
      std::ostringstream csv;
      csv.precision(17);
      csv << "lambda,poa\n";
      for (auto [l, p] : res.curve) csv << l << "," << p << "\n";
      emit(a, csv.str());
    }
  } else {  // solve: one Frank-Wolfe run at lambda-max
    double eps = a.epsilon > 0.0 ? a.epsilon : 1e-4;
    FwResult r = solve_fixed(bundle.instance, demand, a.lambda_max, eps);
    if (a.format == "json") {
      nlohmann::json x = nlohmann::json::array();
      for (int e = 0; e < r.flow.size(); ++e) x.push_back(r.flow[e]);
      nlohmann::json out{{"lambda", a.lambda_max},
                         {"x", x},
                         {"cost_lo", r.lower_bound},
                         {"cost_hi", r.upper_cost},
                         {"iterations", r.iterations}};
      emit(a, out.dump(2) + "\n");
    } else {
      std::ostringstream csv;
      csv.precision(17);
      csv << "lambda";
      for (int e = 0; e < r.flow.size(); ++e) csv << ",x" << e;
      csv << "\n" << a.lambda_max;
      for (int e = 0; e < r.flow.size(); ++e) csv << "," << r.flow[e];
      csv << "\n";
      emit(a, csv.str());
    }
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"parametric minimum-cost flows with certified error bounds"};
  app.require_subcommand(1);
  Args args;
  std::string mode;
  for (const char* name : {"mca", "mcfi", "poa", "solve"}) {
    CLI::App* cmd = app.add_subcommand(
        name, name == std::string("solve")
                  ? "single Frank-Wolfe solve at lambda-max"
                  : std::string("run ") + name);
    add_common(cmd, args);
    cmd->callback([&mode, name]() { mode = name; });
  }
  CLI11_PARSE(app, argc, argv);

  try {
    return run(mode, args);
  } catch (const paraflow::ParseError& e) {
    std::cerr << "parse error: " << e.what() << "\n";
    return 2;
  } catch (const paraflow::NetworkError& e) {
    std::cerr << "parse error: " << e.what() << "\n";
    return 2;
  } catch (const paraflow::CostError& e) {
    std::cerr << "parse error: " << e.what() << "\n";
    return 2;
  } catch (const paraflow::InfeasibleError& e) {
    std::cerr << "infeasible: " << e.what() << "\n";
    return 3;
  } catch (const paraflow::ConvergenceError& e) {
    std::cerr << "convergence failure: " << e.what() << "\n";
    return 4;
  } catch (const paraflow::ResourceError& e) {
    std::cerr << "resource cap: " << e.what() << "\n";
    return 5;
  } catch (const paraflow::DomainError& e) {
    std::cerr << "parse error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
