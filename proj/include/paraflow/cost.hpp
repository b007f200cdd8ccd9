#pragma once

#include <limits>
#include <vector>

#include "paraflow/network.hpp"

namespace paraflow {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Analytic edge cost families, evaluable up to second derivatives.
class AnalyticMarginal {
 public:
  enum class Kind { Bpr, Weymouth, RegularizedWeymouth, Polynomial };

  static AnalyticMarginal bpr(double fft, double b, double cap, int power = 4);
  static AnalyticMarginal weymouth(double beta);
  static AnalyticMarginal regularized_weymouth(double beta, double zeta);
  // f(x) = sum_k coeffs[k] * x^k, must be strictly increasing where used.
  static AnalyticMarginal polynomial(std::vector<double> coeffs);

  Kind kind() const { return kind_; }

  double eval(double x, int order = 0) const;
  double operator()(double x) const { return eval(x, 0); }

  // F(x) = integral of the marginal from 0 to x.
  double beckmann(double x) const;

  // Monotone inverse, f(x) = y. For BPR only y >= f(0) is valid.
  double inverse(double y) const;

  // True when the curvature hypotheses for mesh rule II hold by family.
  bool rule_two_applicable() const;

  // System-optimum counterpart x -> f(x) + x f'(x) (marginal of x*f(x)).
  AnalyticMarginal so_marginal() const;

  double bpr_fft() const { return p1_; }
  double bpr_b() const { return p2_; }
  double bpr_cap() const { return p3_; }
  int bpr_power() const { return power_; }
  double weymouth_beta() const { return p1_; }
  double zeta() const { return p2_; }

 private:
  AnalyticMarginal(Kind k) : kind_(k) {}
  Kind kind_;
  double p1_ = 0, p2_ = 0, p3_ = 0;
  int power_ = 0;
  std::vector<double> coeffs_;
  bool so_ = false;  // Polynomial marked as derived SO marginal of a BPR edge
};

struct CostError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// One linear part of a piecewise linear marginal. Infinite parts encode
// flow bounds: the inverse is constant at the bound (c = 0, x = -d).
struct PwlPart {
  double alpha = 0.0;
  double beta = 0.0;
  bool finite = true;
  double clamp = 0.0;  // bound value for infinite parts

  double c() const { return finite ? 1.0 / alpha : 0.0; }
  double d() const { return finite ? beta / alpha : -clamp; }
};

// Piecewise linear marginal cost with breakpoint sentinels at +-infinity.
// Part t covers flows tau[t]..tau[t+1] and potential differences
// sigma[t]..sigma[t+1].
class PwlMarginal {
 public:
  // interior_taus has n_parts - 1 entries; continuity across them is checked.
  static PwlMarginal from_parts(std::vector<PwlPart> parts,
                                std::vector<double> interior_taus);
  // Linear interpolation through strictly increasing samples; the first and
  // last parts extend to +-infinity unless the respective bound is set, in
  // which case an infinite part pins the flow at points.front()/back().
  static PwlMarginal from_samples(const std::vector<double>& points,
                                  const std::vector<double>& values,
                                  bool lower_bounded = false,
                                  bool upper_bounded = false);
  static PwlMarginal linear(double alpha, double beta = 0.0);

  int n_parts() const { return static_cast<int>(parts_.size()); }
  const PwlPart& part(int t) const { return parts_[static_cast<size_t>(t)]; }
  double tau(int t) const { return tau_[static_cast<size_t>(t)]; }
  double sigma(int t) const { return sigma_[static_cast<size_t>(t)]; }

  double lower_bound() const;  // -inf when unbounded below
  double upper_bound() const;

  // Marginal value; +-infinity outside the flow bounds.
  double value(double x) const;

  int part_of_flow(double x) const;
  // Part with sigma[t] <= y <= sigma[t+1], ties resolved to the lower index.
  int part_of_potential(double y) const;

  // Flow on part t for potential difference y: x = c*y - d, clamped to the
  // bound on infinite parts.
  double inverse(int t, double y) const;

  // F(x), integrated from the lower bound when finite, otherwise from 0.
  double integral(double x) const;

  double integration_origin() const { return origin_; }

 private:
  std::vector<PwlPart> parts_;
  std::vector<double> tau_, sigma_;
  std::vector<double> cumF_;  // integral from origin to tau[t] (finite taus)
  double origin_ = 0.0;

  void finalize();
};

struct Mesh {
  std::vector<double> points;

  int n_cells() const { return static_cast<int>(points.size()) - 1; }
  double step(int i) const {
    return points[static_cast<size_t>(i) + 1] - points[static_cast<size_t>(i)];
  }
};

struct ApproxParams {
  double alpha = 1.01;
  double beta = 1.0;
  double lambda_max = 1.0;
  double epsilon = 0.0;  // MCFI oracle precision
};

enum class MeshRule { I, II };

// Samples f at the mesh points.
PwlMarginal linear_spline(const AnalyticMarginal& f, const Mesh& mesh,
                          bool lower_bounded = false,
                          bool upper_bounded = false);

// Mesh over [lo, hi] (lo <= 0 <= hi) with steps anchored at the endpoint
// closer to zero, satisfying the chosen step size rule per cell.
Mesh mca_mesh(const AnalyticMarginal& f, const ApproxParams& params, int m,
              double x_max, MeshRule rule, double lo, double hi);

// Sampled max of |f''| over [a, b]; one-sided away from 0 at the endpoints.
double fpp_max(const AnalyticMarginal& f, double a, double b);

// Audit helper: true when the step from a to b obeys the rule's inequality,
// anchored at the endpoint closer to zero.
bool mesh_step_ok(const AnalyticMarginal& f, const ApproxParams& params, int m,
                  double x_max, MeshRule rule, double a, double b,
                  double slack = 1e-9);

}  // namespace paraflow
