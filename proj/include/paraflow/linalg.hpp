#pragma once

#include <Eigen/Dense>

#include "paraflow/network.hpp"

namespace paraflow {

// Weighted graph Laplacian L = Gamma diag(c) Gamma^T with the reference
// vertex row and column removed. Keeps the dense reduced inverse up to
// date under single-edge conductance changes.
class LaplacianState {
 public:
  LaplacianState(const Network& net, Vec conductances);

  const Vec& conductances() const { return c_; }
  double conductance(int e) const { return c_[e]; }

  // Rank-one update of the reduced inverse; falls back to a full refresh
  // when the update is ill-conditioned or after many increments.
  void set_conductance(int e, double value);

  bool singular() const { return singular_; }

  // pi with L pi = rhs and pi[ref] = 0 (generalized inverse applied to the
  // reduced system). Throws when the state is singular.
  Vec solve(const Vec& rhs) const;

  // b^T L* b for the reduced generalized inverse.
  double quadratic_form(const Vec& b) const;

  void refresh();

 private:
  const Network* net_;
  Vec c_;
  Eigen::MatrixXd inv_;
  bool singular_ = false;
  int updates_ = 0;

  int ridx(int v) const {
    int ref = net_->reference_vertex();
    return v == ref ? -1 : (v < ref ? v : v - 1);
  }
  Vec reduced_incidence_column(int e) const;
};

}  // namespace paraflow
