#include "paraflow/network.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <set>

namespace paraflow {

Network::Network(int n_vertices, std::vector<Edge> edges, Mode mode,
                 int reference_vertex)
    : n_(n_vertices),
      edges_(std::move(edges)),
      mode_(mode),
      ref_(reference_vertex) {
  validate();
  out_.resize(static_cast<size_t>(n_));
  in_.resize(static_cast<size_t>(n_));
  for (int e = 0; e < n_edges(); ++e) {
    out_[static_cast<size_t>(edges_[static_cast<size_t>(e)].tail)].push_back(e);
    in_[static_cast<size_t>(edges_[static_cast<size_t>(e)].head)].push_back(e);
  }
}

namespace {

// BFS reachability; directed = false walks edges in both directions.
std::vector<char> reachable(int n, const std::vector<Edge>& edges, int start,
                            bool directed, bool reverse = false) {
  std::vector<std::vector<int>> adj(static_cast<size_t>(n));
  for (const Edge& e : edges) {
    int a = e.tail, b = e.head;
    if (reverse) std::swap(a, b);
    adj[static_cast<size_t>(a)].push_back(b);
    if (!directed) adj[static_cast<size_t>(b)].push_back(a);
  }
  std::vector<char> seen(static_cast<size_t>(n), 0);
  std::queue<int> q;
  q.push(start);
  seen[static_cast<size_t>(start)] = 1;
  while (!q.empty()) {
    int v = q.front();
    q.pop();
    for (int w : adj[static_cast<size_t>(v)]) {
      if (!seen[static_cast<size_t>(w)]) {
        seen[static_cast<size_t>(w)] = 1;
        q.push(w);
      }
    }
  }
  return seen;
}

}  // namespace

void Network::validate() const {
  if (n_ < 1) throw NetworkError("network needs at least one vertex");
  if (ref_ < 0 || ref_ >= n_) throw NetworkError("invalid reference vertex");
  std::set<std::pair<int, int>> seen;
  for (const Edge& e : edges_) {
    if (e.tail < 0 || e.tail >= n_ || e.head < 0 || e.head >= n_)
      throw NetworkError("edge endpoint out of range");
    if (e.tail == e.head) throw NetworkError("self-loops are not allowed");
    // directed mode treats antiparallel arcs as distinct
    std::pair<int, int> key =
        mode_ == Mode::Directed
            ? std::pair<int, int>{e.tail, e.head}
            : std::pair<int, int>{std::min(e.tail, e.head),
                                  std::max(e.tail, e.head)};
    if (!seen.insert(key).second)
      throw NetworkError("parallel edges are not allowed");
  }
  if (n_ > 1) {
    if (mode_ == Mode::Directed) {
      auto fwd = reachable(n_, edges_, 0, true, false);
      auto bwd = reachable(n_, edges_, 0, true, true);
      for (int v = 0; v < n_; ++v)
        if (!fwd[static_cast<size_t>(v)] || !bwd[static_cast<size_t>(v)])
          throw NetworkError("directed network must be strongly connected");
    } else {
      auto seen2 = reachable(n_, edges_, 0, false);
      for (int v = 0; v < n_; ++v)
        if (!seen2[static_cast<size_t>(v)])
          throw NetworkError("network must be connected");
    }
  }
}

Eigen::SparseMatrix<double> Network::incidence_matrix() const {
  Eigen::SparseMatrix<double> gamma(n_, n_edges());
  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(2 * static_cast<size_t>(n_edges()));
  for (int e = 0; e < n_edges(); ++e) {
    trips.emplace_back(edges_[static_cast<size_t>(e)].tail, e, -1.0);
    trips.emplace_back(edges_[static_cast<size_t>(e)].head, e, 1.0);
  }
  gamma.setFromTriplets(trips.begin(), trips.end());
  return gamma;
}

Vec Network::potential_differences(const Vec& phi) const {
  Vec d(n_edges());
  for (int e = 0; e < n_edges(); ++e)
    d[e] = phi[edges_[static_cast<size_t>(e)].head] -
           phi[edges_[static_cast<size_t>(e)].tail];
  return d;
}

Vec Network::excess(const Vec& x) const {
  Vec r = Vec::Zero(n_);
  for (int e = 0; e < n_edges(); ++e) {
    r[edges_[static_cast<size_t>(e)].tail] -= x[e];
    r[edges_[static_cast<size_t>(e)].head] += x[e];
  }
  return r;
}

DemandFunction::DemandFunction(Vec b0, Vec b, double lambda_max)
    : b0_(std::move(b0)), b_(std::move(b)), lambda_max_(lambda_max) {
  if (b0_.size() != b_.size())
    throw DomainError("demand vectors must have equal length");
  if (lambda_max_ < 0.0) throw DomainError("lambda_max must be >= 0");
  double scale = b0_.cwiseAbs().sum() + b_.cwiseAbs().sum();
  double tol = 1e-12 * std::max(1.0, scale);
  if (std::abs(b0_.sum()) > tol || std::abs(b_.sum()) > tol)
    throw DomainError("demand vectors must be balanced");
}

Vec DemandFunction::at(double lambda) const {
  if (lambda < 0.0 || lambda > lambda_max_ * (1.0 + 1e-12) + 1e-300)
    throw DomainError("lambda out of range");
  return b0_ + lambda * b_;
}

double DemandFunction::max_inflow(double lo, double hi) const {
  if (lo < 0.0 || hi < lo || hi > lambda_max_ * (1.0 + 1e-12) + 1e-300)
    throw DomainError("invalid inflow interval");
  return std::max(total_inflow(b0_ + lo * b_), total_inflow(b0_ + hi * b_));
}

double SourceSinkDecomposition::total_rate() const {
  double r = 0.0;
  for (const auto& t : triples) r += t.rate;
  return r;
}

Vec SourceSinkDecomposition::induced_vector(int n_vertices) const {
  Vec b = Vec::Zero(n_vertices);
  for (const auto& t : triples) {
    b[t.source] -= t.rate;
    b[t.sink] += t.rate;
  }
  return b;
}

SourceSinkDecomposition source_sink_decompose(const Vec& b) {
  double tol = 1e-12 * std::max(1.0, b.cwiseAbs().sum());
  if (std::abs(b.sum()) > tol) throw DomainError("vector is not balanced");
  // surplus = sources (b_v < 0, net injection), deficit = sinks (b_v > 0)
  std::vector<std::pair<double, int>> sources, sinks;
  for (int v = 0; v < b.size(); ++v) {
    if (b[v] < -tol) sources.push_back({-b[v], v});
    if (b[v] > tol) sinks.push_back({b[v], v});
  }
  auto bigger = [](const auto& a, const auto& b2) { return a.first > b2.first; };
  std::sort(sources.begin(), sources.end(), bigger);
  std::sort(sinks.begin(), sinks.end(), bigger);
  SourceSinkDecomposition dec;
  size_t i = 0, j = 0;
  while (i < sources.size() && j < sinks.size()) {
    double r = std::min(sources[i].first, sinks[j].first);
    dec.triples.push_back({sources[i].second, sinks[j].second, r});
    sources[i].first -= r;
    sinks[j].first -= r;
    if (sources[i].first <= tol) ++i;
    if (sinks[j].first <= tol) ++j;
  }
  return dec;
}

Vec st_vector(int n_vertices, int source, int sink, double rate) {
  Vec b = Vec::Zero(n_vertices);
  b[source] = -rate;
  b[sink] = rate;
  return b;
}

}  // namespace paraflow
