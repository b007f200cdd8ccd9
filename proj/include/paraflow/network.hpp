#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <Eigen/SparseCore>

namespace paraflow {

using Vec = Eigen::VectorXd;

struct NetworkError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct DomainError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Demand not satisfiable within the flow bounds.
struct InfeasibleError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Iterative solver failed to reach the requested precision.
struct ConvergenceError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Iteration or size cap exceeded.
struct ResourceError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class Mode { Directed, Undirected };

struct Edge {
  int tail = 0;
  int head = 0;
};

// Graph with fixed edge order and a reference vertex whose potential is
// pinned to zero. Immutable after construction.
class Network {
 public:
  Network(int n_vertices, std::vector<Edge> edges, Mode mode,
          int reference_vertex = 0);

  int n_vertices() const { return n_; }
  int n_edges() const { return static_cast<int>(edges_.size()); }
  const std::vector<Edge>& edges() const { return edges_; }
  const Edge& edge(int e) const { return edges_[static_cast<size_t>(e)]; }
  Mode mode() const { return mode_; }
  int reference_vertex() const { return ref_; }

  // n x m matrix, column e has -1 at the tail and +1 at the head.
  Eigen::SparseMatrix<double> incidence_matrix() const;

  // Incidence-transpose product: per-edge potential differences head - tail.
  Vec potential_differences(const Vec& phi) const;
  // Incidence product: per-vertex net inflow of the edge flow x.
  Vec excess(const Vec& x) const;

  const std::vector<std::vector<int>>& out_edges() const { return out_; }
  const std::vector<std::vector<int>>& in_edges() const { return in_; }

 private:
  int n_;
  std::vector<Edge> edges_;
  Mode mode_;
  int ref_;
  std::vector<std::vector<int>> out_, in_;

  void validate() const;
};

// Affine demand family lambda -> b0 + lambda * b on [0, lambda_max].
class DemandFunction {
 public:
  DemandFunction(Vec b0, Vec b, double lambda_max);

  const Vec& b0() const { return b0_; }
  const Vec& b() const { return b_; }
  double lambda_max() const { return lambda_max_; }

  Vec at(double lambda) const;

  // max over [lo, hi] of the total network inflow 0.5 * sum |b0 + lambda b|.
  // The expression is convex in lambda, so the maximum sits at an endpoint.
  double max_inflow(double lo, double hi) const;
  double max_inflow() const { return max_inflow(0.0, lambda_max_); }

  static double total_inflow(const Vec& d) { return 0.5 * d.cwiseAbs().sum(); }

 private:
  Vec b0_, b_;
  double lambda_max_;
};

struct SourceSinkTriple {
  int source = 0;
  int sink = 0;
  double rate = 0.0;
};

struct SourceSinkDecomposition {
  std::vector<SourceSinkTriple> triples;

  double total_rate() const;
  Vec induced_vector(int n_vertices) const;
};

// Greedy pairing of surpluses with deficits; yields at most n-1 triples.
SourceSinkDecomposition source_sink_decompose(const Vec& b);

// Convenience: single s-t demand direction of the given rate.
Vec st_vector(int n_vertices, int source, int sink, double rate);

}  // namespace paraflow
