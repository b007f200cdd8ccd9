#include "paraflow/io.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include "json.hpp"

namespace paraflow {

using json = nlohmann::json;

DemandFunction InstanceBundle::make_demand(int source, int sink, double rate,
                                           double lambda_max) const {
  const int n = instance.network.n_vertices();
  if (source < 0 || source >= n || sink < 0 || sink >= n || source == sink)
    throw DomainError("invalid source/sink pair");
  if (!(rate > 0.0)) throw DomainError("rate must be positive");
  Vec b0 = base_demand.size() == n ? base_demand : Vec::Zero(n);
  return DemandFunction(b0, st_vector(n, source, sink, rate), lambda_max);
}

int resolve_node(const InstanceBundle& bundle, const std::string& label) {
  for (size_t i = 0; i < bundle.labels.size(); ++i)
    if (bundle.labels[i] == label) return static_cast<int>(i);
  try {
    size_t pos = 0;
    int idx = std::stoi(label, &pos);
    if (pos == label.size()) {
      // TNTP ids are 1-based; bare numbers fall back to that convention
      if (bundle.klass == InstanceClass::DirectedTraffic) --idx;
      if (idx >= 0 && idx < bundle.instance.network.n_vertices()) return idx;
    }
  } catch (const std::exception&) {
  }
  throw ParseError("unknown node label: " + label);
}

namespace {

[[noreturn]] void parse_fail(int line, const std::string& what) {
  throw ParseError("line " + std::to_string(line) + ": " + what);
}

std::string strip(const std::string& s) {
  size_t a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  size_t b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

}  // namespace

InstanceBundle parse_tntp(const std::string& net_text) {
  std::istringstream in(net_text);
  std::string line;
  int lineno = 0;
  long n_nodes = -1, n_links = -1;
  bool in_body = false;
  struct Link {
    int init, term;
    double cap, fft, b;
    int power;
  };
  std::vector<Link> links;

  while (std::getline(in, line)) {
    ++lineno;
    std::string s = strip(line);
    if (s.empty() || s[0] == '~') continue;
    if (!in_body) {
      auto tag = [&](const char* t) { return s.rfind(t, 0) == 0; };
      if (tag("<NUMBER OF NODES>"))
        n_nodes = std::strtol(s.c_str() + 17, nullptr, 10);
      else if (tag("<NUMBER OF LINKS>"))
        n_links = std::strtol(s.c_str() + 17, nullptr, 10);
      else if (tag("<END OF METADATA>"))
        in_body = true;
      continue;
    }
    std::istringstream row(s);
    Link l{};
    double length, speed, toll, type, power;
    if (!(row >> l.init >> l.term >> l.cap >> length >> l.fft >> l.b >>
          power >> speed >> toll >> type))
      parse_fail(lineno, "malformed link row");
    l.power = static_cast<int>(std::lround(power));
    if (!(l.fft > 0.0)) parse_fail(lineno, "free flow time must be > 0");
    if (!(l.cap > 0.0)) parse_fail(lineno, "capacity must be > 0");
    if (l.b < 0.0) parse_fail(lineno, "BPR coefficient must be >= 0");
    if (l.power < 1) parse_fail(lineno, "BPR power must be >= 1");
    links.push_back(l);
  }
  if (n_nodes < 0 || n_links < 0)
    throw ParseError("missing <NUMBER OF NODES>/<NUMBER OF LINKS> metadata");
  if (!in_body) throw ParseError("missing <END OF METADATA>");
  if (static_cast<long>(links.size()) != n_links)
    throw ParseError("link count does not match <NUMBER OF LINKS>");

  // drop isolated vertices: compact the ids actually used by links
  std::map<int, int> remap;
  for (const Link& l : links) {
    remap.emplace(l.init, 0);
    remap.emplace(l.term, 0);
  }
  int next = 0;
  for (auto& [id, idx] : remap) idx = next++;

  std::vector<Edge> edges;
  std::vector<AnalyticMarginal> costs;
  for (const Link& l : links) {
    edges.push_back({remap[l.init], remap[l.term]});
    costs.push_back(AnalyticMarginal::bpr(l.fft, l.b, l.cap, l.power));
  }
  InstanceBundle bundle{
      {Network(next, std::move(edges), Mode::Directed), std::move(costs)},
      InstanceClass::DirectedTraffic,
      Vec::Zero(next),
      0.0,
      {}};
  for (const auto& [id, idx] : remap)
    bundle.labels.push_back(std::to_string(id));
  return bundle;
}

double parse_trips_total(const std::string& trips_text) {
  std::istringstream in(trips_text);
  std::string line;
  double total = 0.0;
  bool in_body = false;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string s = strip(line);
    if (s.empty() || s[0] == '~') continue;
    if (!in_body) {
      if (s.rfind("<END OF METADATA>", 0) == 0) in_body = true;
      continue;
    }
    if (s.rfind("Origin", 0) == 0) continue;
    // entries look like "2 : 100.0; 3 : 200.0;"
    std::istringstream row(s);
    std::string tok;
    while (std::getline(row, tok, ';')) {
      tok = strip(tok);
      if (tok.empty()) continue;
      size_t colon = tok.find(':');
      if (colon == std::string::npos) parse_fail(lineno, "malformed trip");
      try {
        total += std::stod(tok.substr(colon + 1));
      } catch (const std::exception&) {
        parse_fail(lineno, "non-numeric trip value");
      }
    }
  }
  if (!in_body) throw ParseError("missing <END OF METADATA> in trips file");
  return total;
}

InstanceBundle parse_gas_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ParseError(std::string("invalid JSON: ") + e.what());
  }
  if (!j.contains("nodes") || !j.contains("pipes") || !j.contains("scenario"))
    throw ParseError("gas input needs nodes, pipes, and scenario");

  std::vector<std::string> names;
  std::map<std::string, int> index;
  for (const auto& nd : j["nodes"]) {
    std::string name = nd.is_string() ? nd.get<std::string>() : nd.dump();
    if (!index.emplace(name, static_cast<int>(names.size())).second)
      throw ParseError("duplicate node: " + name);
    names.push_back(name);
  }
  const int n = static_cast<int>(names.size());

  std::vector<Edge> edges;
  std::vector<AnalyticMarginal> costs;
  for (const auto& p : j["pipes"]) {
    std::string from = p.at("from").is_string() ? p["from"].get<std::string>()
                                                : p["from"].dump();
    std::string to =
        p.at("to").is_string() ? p["to"].get<std::string>() : p["to"].dump();
    if (!index.count(from) || !index.count(to))
      throw ParseError("pipe references unknown node");
    double beta = p.at("beta").get<double>();
    if (!(beta > 0.0)) throw ParseError("pipe beta must be > 0");
    edges.push_back({index[from], index[to]});
    costs.push_back(AnalyticMarginal::weymouth(beta));
  }

  Vec b = Vec::Zero(n);
  for (const auto& [name, val] : j["scenario"].items()) {
    if (!index.count(name)) throw ParseError("scenario lists unknown node");
    b[index[name]] = val.get<double>();
  }
  double scale = b.cwiseAbs().sum();
  if (std::abs(b.sum()) > 1e-6 * std::max(1e-300, scale))
    throw ParseError("scenario is not balanced");
  b.array() -= b.sum() / n;  // absorb the (sub-tolerance) rounding residue

  InstanceBundle bundle{
      {Network(n, std::move(edges), Mode::Undirected), std::move(costs)},
      InstanceClass::UndirectedGas,
      std::move(b),
      0.0,
      std::move(names)};
  return bundle;
}

std::string solution_to_json(const ParametricSolution& sol) {
  if (sol.segments.empty()) throw DomainError("empty solution");
  json segs = json::array();
  auto arr = [](const Vec& v) {
    json a = json::array();
    for (int i = 0; i < v.size(); ++i) a.push_back(v[i]);
    return a;
  };
  for (const SolutionSegment& s : sol.segments) {
    segs.push_back({{"lambda_lo", s.lambda_lo},
                    {"lambda_hi", s.lambda_hi},
                    {"x_offset", arr(s.x_offset)},
                    {"x_dir", arr(s.x_dir)},
                    {"pi_offset", arr(s.pi_offset)},
                    {"pi_dir", arr(s.pi_dir)}});
  }
  return json{{"segments", segs}}.dump(2) + "\n";
}

std::string solution_to_json(const InterpolatedSolution& sol) {
  if (sol.breakpoints.empty()) throw DomainError("empty solution");
  json bps = json::array();
  for (const McfiBreakpoint& b : sol.breakpoints) {
    json x = json::array();
    for (int i = 0; i < b.flow.size(); ++i) x.push_back(b.flow[i]);
    bps.push_back({{"lambda", b.lambda},
                   {"x", x},
                   {"cost_lo", b.cost_lo},
                   {"cost_hi", b.cost_hi}});
  }
  return json{{"breakpoints", bps}}.dump(2) + "\n";
}

namespace {

Vec vec_of(const json& a) {
  Vec v(a.size());
  for (size_t i = 0; i < a.size(); ++i) v[static_cast<int>(i)] = a[i];
  return v;
}

}  // namespace

ParametricSolution parametric_from_json(const std::string& text) {
  json j = json::parse(text);
  ParametricSolution sol;
  for (const auto& s : j.at("segments")) {
    SolutionSegment seg;
    seg.lambda_lo = s.at("lambda_lo");
    seg.lambda_hi = s.at("lambda_hi");
    seg.x_offset = vec_of(s.at("x_offset"));
    seg.x_dir = vec_of(s.at("x_dir"));
    seg.pi_offset = vec_of(s.at("pi_offset"));
    seg.pi_dir = vec_of(s.at("pi_dir"));
    sol.segments.push_back(std::move(seg));
  }
  return sol;
}

InterpolatedSolution interpolated_from_json(const std::string& text) {
  json j = json::parse(text);
  InterpolatedSolution sol;
  for (const auto& b : j.at("breakpoints")) {
    McfiBreakpoint bp;
    bp.lambda = b.at("lambda");
    bp.flow = vec_of(b.at("x"));
    bp.cost_lo = b.at("cost_lo");
    bp.cost_hi = b.at("cost_hi");
    sol.breakpoints.push_back(std::move(bp));
  }
  return sol;
}

namespace {

template <typename Sol>
std::string csv_of(const Sol& sol, const std::vector<double>& grid) {
  std::ostringstream out;
  out.precision(17);
  out << "lambda";
  Vec probe = sol.flow_at(grid.empty() ? 0.0 : grid.front());
  for (int e = 0; e < probe.size(); ++e) out << ",x" << e;
  out << "\n";
  for (double l : grid) {
    Vec x = sol.flow_at(l);
    out << l;
    for (int e = 0; e < x.size(); ++e) out << "," << x[e];
    out << "\n";
  }
  return out.str();
}

}  // namespace

std::string solution_to_csv(const ParametricSolution& sol,
                            const std::vector<double>& grid) {
  if (sol.segments.empty()) throw DomainError("empty solution");
  return csv_of(sol, grid);
}

std::string solution_to_csv(const InterpolatedSolution& sol,
                            const std::vector<double>& grid) {
  if (sol.breakpoints.empty()) throw DomainError("empty solution");
  return csv_of(sol, grid);
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw ParseError("cannot open for writing: " + path);
  f << content;
  if (!f) throw ParseError("write failed: " + path);
}

std::string read_text_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw ParseError("cannot open: " + path);
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

}  // namespace paraflow
