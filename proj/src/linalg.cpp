#include "paraflow/linalg.hpp"

#include <cmath>

namespace paraflow {

LaplacianState::LaplacianState(const Network& net, Vec conductances)
    : net_(&net), c_(std::move(conductances)) {
  if (c_.size() != net.n_edges())
    throw DomainError("conductance vector length mismatch");
  if ((c_.array() < 0.0).any())
    throw DomainError("conductances must be nonnegative");
  refresh();
}

Vec LaplacianState::reduced_incidence_column(int e) const {
  Vec g = Vec::Zero(net_->n_vertices() - 1);
  const Edge& ed = net_->edge(e);
  int it = ridx(ed.tail), ih = ridx(ed.head);
  if (it >= 0) g[it] = -1.0;
  if (ih >= 0) g[ih] = 1.0;
  return g;
}

void LaplacianState::refresh() {
  const int n = net_->n_vertices() - 1;
  updates_ = 0;
  if (n == 0) {
    inv_.resize(0, 0);
    singular_ = false;
    return;
  }
  Eigen::MatrixXd L = Eigen::MatrixXd::Zero(n, n);
  for (int e = 0; e < net_->n_edges(); ++e) {
    double ce = c_[e];
    if (ce == 0.0) continue;
    int it = ridx(net_->edge(e).tail), ih = ridx(net_->edge(e).head);
    if (it >= 0) L(it, it) += ce;
    if (ih >= 0) L(ih, ih) += ce;
    if (it >= 0 && ih >= 0) {
      L(it, ih) -= ce;
      L(ih, it) -= ce;
    }
  }
  Eigen::LDLT<Eigen::MatrixXd> ldlt(L);
  Vec d = ldlt.vectorD();
  double dmax = d.cwiseAbs().maxCoeff();
  singular_ = ldlt.info() != Eigen::Success || dmax == 0.0 ||
              d.minCoeff() < 1e-12 * dmax;
  if (!singular_) inv_ = ldlt.solve(Eigen::MatrixXd::Identity(n, n));
}

void LaplacianState::set_conductance(int e, double value) {
  if (value < 0.0) throw DomainError("conductances must be nonnegative");
  double delta = value - c_[e];
  c_[e] = value;
  if (delta == 0.0) return;
  if (singular_ || ++updates_ >= 64) {
    refresh();
    return;
  }
  Vec g = reduced_incidence_column(e);
  Vec ig = inv_ * g;
  double denom = 1.0 + delta * g.dot(ig);
  if (std::abs(denom) < 1e-9) {
    refresh();
    return;
  }
  inv_.noalias() -= (delta / denom) * ig * ig.transpose();
  // ill-conditioning shows up as a tiny pivot on the next refresh; do a
  // cheap sanity check so singular regions are caught without one
  if (!(std::isfinite(inv_(0, 0)))) refresh();
}

Vec LaplacianState::solve(const Vec& rhs) const {
  if (singular_) throw DomainError("singular Laplacian state");
  double scale = rhs.cwiseAbs().sum();
  if (std::abs(rhs.sum()) > 1e-9 * std::max(1e-300, scale))
    throw DomainError("right-hand side must be balanced");
  const int n = net_->n_vertices();
  Vec r(n - 1);
  for (int v = 0; v < n; ++v) {
    int i = ridx(v);
    if (i >= 0) r[i] = rhs[v];
  }
  Vec pr = inv_ * r;
  // two steps of iterative refinement: the stored inverse accumulates
  // rank-one update error, and steep conductances amplify it in the flows
  for (int step = 0; step < 2; ++step) {
    Vec res = r;
    for (int e = 0; e < net_->n_edges(); ++e) {
      double ce = c_[e];
      if (ce == 0.0) continue;
      int it = ridx(net_->edge(e).tail), ih = ridx(net_->edge(e).head);
      double y = (it >= 0 ? pr[it] : 0.0) - (ih >= 0 ? pr[ih] : 0.0);
      if (it >= 0) res[it] -= ce * y;
      if (ih >= 0) res[ih] += ce * y;
    }
    pr += inv_ * res;
  }
  Vec pi = Vec::Zero(n);
  for (int v = 0; v < n; ++v) {
    int i = ridx(v);
    if (i >= 0) pi[v] = pr[i];
  }
  return pi;
}

double LaplacianState::quadratic_form(const Vec& b) const {
  return b.dot(solve(b));
}

}  // namespace paraflow
