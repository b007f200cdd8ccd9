#include "paraflow/cost.hpp"

#include <algorithm>
#include <cmath>

namespace paraflow {

namespace {

double ipow(double x, int p) {
  double r = 1.0;
  for (int i = 0; i < p; ++i) r *= x;
  return r;
}

}  // namespace

AnalyticMarginal AnalyticMarginal::bpr(double fft, double b, double cap,
                                       int power) {
  if (fft <= 0.0 || cap <= 0.0 || b < 0.0 || power < 1)
    throw CostError("invalid BPR coefficients");
  AnalyticMarginal f(Kind::Bpr);
  f.p1_ = fft;
  f.p2_ = b;
  f.p3_ = cap;
  f.power_ = power;
  return f;
}

AnalyticMarginal AnalyticMarginal::weymouth(double beta) {
  if (beta <= 0.0) throw CostError("Weymouth beta must be positive");
  AnalyticMarginal f(Kind::Weymouth);
  f.p1_ = beta;
  return f;
}

AnalyticMarginal AnalyticMarginal::regularized_weymouth(double beta,
                                                        double zeta) {
  if (beta <= 0.0 || zeta < 0.0) throw CostError("invalid Weymouth params");
  AnalyticMarginal f(Kind::RegularizedWeymouth);
  f.p1_ = beta;
  f.p2_ = zeta;
  return f;
}

AnalyticMarginal AnalyticMarginal::polynomial(std::vector<double> coeffs) {
  AnalyticMarginal f(Kind::Polynomial);
  f.coeffs_ = std::move(coeffs);
  return f;
}

double AnalyticMarginal::eval(double x, int order) const {
  switch (kind_) {
    case Kind::Bpr: {
      const double fft = p1_, b = p2_, cap = p3_;
      const int p = power_;
      switch (order) {
        case 0:
          return fft * (1.0 + b * ipow(x / cap, p));
        case 1:
          return fft * b * p * ipow(x / cap, p - 1) / cap;
        default:
          if (p < 2) return 0.0;
          return fft * b * p * (p - 1) * ipow(x / cap, p - 2) / (cap * cap);
      }
    }
    case Kind::Weymouth:
    case Kind::RegularizedWeymouth: {
      const double beta = p1_;
      const double zeta = kind_ == Kind::RegularizedWeymouth ? p2_ : 0.0;
      switch (order) {
        case 0:
          return beta * x * std::abs(x) + zeta * x;
        case 1:
          return 2.0 * beta * std::abs(x) + zeta;
        default:
          // one-sided limits disagree in sign at 0; use 0 by convention
          return x == 0.0 ? 0.0 : 2.0 * beta * (x > 0.0 ? 1.0 : -1.0);
      }
    }
    case Kind::Polynomial: {
      double r = 0.0;
      for (size_t k = coeffs_.size(); k-- > 0;) {
        double c = coeffs_[k];
        int kk = static_cast<int>(k);
        switch (order) {
          case 0:
            r += c * ipow(x, kk);
            break;
          case 1:
            if (kk >= 1) r += c * kk * ipow(x, kk - 1);
            break;
          default:
            if (kk >= 2) r += c * kk * (kk - 1) * ipow(x, kk - 2);
            break;
        }
      }
      return r;
    }
  }
  return 0.0;
}

double AnalyticMarginal::beckmann(double x) const {
  switch (kind_) {
    case Kind::Bpr: {
      const double fft = p1_, b = p2_, cap = p3_;
      const int p = power_;
      return fft * (x + b * x * ipow(x / cap, p) / (p + 1));
    }
    case Kind::Weymouth:
      return p1_ * x * x * std::abs(x) / 3.0;
    case Kind::RegularizedWeymouth:
      return p1_ * x * x * std::abs(x) / 3.0 + 0.5 * p2_ * x * x;
    case Kind::Polynomial: {
      double r = 0.0;
      for (size_t k = 0; k < coeffs_.size(); ++k)
        r += coeffs_[k] * ipow(x, static_cast<int>(k) + 1) /
             (static_cast<double>(k) + 1.0);
      return r;
    }
  }
  return 0.0;
}

double AnalyticMarginal::inverse(double y) const {
  switch (kind_) {
    case Kind::Weymouth: {
      double a = std::sqrt(std::abs(y) / p1_);
      return y >= 0.0 ? a : -a;
    }
    case Kind::RegularizedWeymouth: {
      const double beta = p1_, zeta = p2_;
      double a = (-zeta + std::sqrt(zeta * zeta + 4.0 * beta * std::abs(y))) /
                 (2.0 * beta);
      return y >= 0.0 ? a : -a;
    }
    default: {
      // monotone bisection with an expanding bracket
      double lo = 0.0, hi = 0.0;
      if (eval(0.0) > y) {
        lo = -1.0;
        while (eval(lo) > y && lo > -1e18) lo *= 2.0;
      } else {
        hi = 1.0;
        while (eval(hi) < y && hi < 1e18) hi *= 2.0;
      }
      for (int i = 0; i < 200; ++i) {
        double mid = 0.5 * (lo + hi);
        (eval(mid) < y ? lo : hi) = mid;
      }
      return 0.5 * (lo + hi);
    }
  }
}

bool AnalyticMarginal::rule_two_applicable() const {
  switch (kind_) {
    case Kind::Bpr:
    case Kind::Weymouth:
    case Kind::RegularizedWeymouth:
      return true;
    case Kind::Polynomial:
      return false;
  }
  return false;
}

AnalyticMarginal AnalyticMarginal::so_marginal() const {
  switch (kind_) {
    case Kind::Bpr:
      return bpr(p1_, p2_ * (power_ + 1), p3_, power_);
    case Kind::Weymouth:
      return weymouth(3.0 * p1_);
    case Kind::RegularizedWeymouth:
      return regularized_weymouth(3.0 * p1_, 2.0 * p2_);
    case Kind::Polynomial: {
      std::vector<double> c(coeffs_.size());
      for (size_t k = 0; k < coeffs_.size(); ++k)
        c[k] = coeffs_[k] * (static_cast<double>(k) + 1.0);
      return polynomial(std::move(c));
    }
  }
  return *this;
}

// --- PwlMarginal ---

PwlMarginal PwlMarginal::from_parts(std::vector<PwlPart> parts,
                                    std::vector<double> interior_taus) {
  if (parts.empty()) throw CostError("marginal needs at least one part");
  if (interior_taus.size() + 1 != parts.size())
    throw CostError("breakpoint count mismatch");
  PwlMarginal f;
  f.parts_ = std::move(parts);
  f.tau_.push_back(-kInf);
  for (double t : interior_taus) f.tau_.push_back(t);
  f.tau_.push_back(kInf);
  f.finalize();
  return f;
}

void PwlMarginal::finalize() {
  const int P = n_parts();
  if (!std::is_sorted(tau_.begin(), tau_.end()))
    throw CostError("breakpoints must be sorted");
  for (int t = 0; t < P; ++t) {
    const PwlPart& p = parts_[static_cast<size_t>(t)];
    if (p.finite) {
      if (!(p.alpha > 0.0)) throw CostError("finite parts need alpha > 0");
    } else if (t != 0 && t != P - 1) {
      throw CostError("infinite parts may only be a prefix or a suffix");
    }
  }
  // continuity and sigma values
  sigma_.assign(static_cast<size_t>(P) + 1, 0.0);
  sigma_[0] = -kInf;
  sigma_[static_cast<size_t>(P)] = kInf;
  for (int t = 1; t < P; ++t) {
    double tb = tau_[static_cast<size_t>(t)];
    const PwlPart& lo = parts_[static_cast<size_t>(t - 1)];
    const PwlPart& hi = parts_[static_cast<size_t>(t)];
    if (lo.finite && hi.finite) {
      double vl = lo.alpha * tb + lo.beta;
      double vh = hi.alpha * tb + hi.beta;
      double scale = std::max({1.0, std::abs(vl), std::abs(vh)});
      if (std::abs(vl - vh) > 1e-9 * scale)
        throw CostError("marginal discontinuous at a breakpoint");
      sigma_[static_cast<size_t>(t)] = vh;
    } else if (hi.finite) {
      sigma_[static_cast<size_t>(t)] = hi.alpha * tb + hi.beta;
    } else if (lo.finite) {
      sigma_[static_cast<size_t>(t)] = lo.alpha * tb + lo.beta;
    } else {
      throw CostError("adjacent infinite parts");
    }
  }
  for (int t = 1; t < P; ++t)
    if (sigma_[static_cast<size_t>(t)] < sigma_[static_cast<size_t>(t - 1)])
      throw CostError("sigma values must be nondecreasing");

  double lb = lower_bound();
  origin_ = std::isfinite(lb) ? lb : 0.0;

  // cumulative integral from origin at finite breakpoints
  cumF_.assign(tau_.size(), kInf);
  auto seg = [](const PwlPart& p, double a, double b) {
    if (!p.finite) return a == b ? 0.0 : kInf;
    return 0.5 * p.alpha * (b * b - a * a) + p.beta * (b - a);
  };
  int p0 = part_of_flow(origin_);
  if (!parts_[static_cast<size_t>(p0)].finite) {
    // origin sits on the bound; use the adjacent finite part
    p0 = p0 == 0 ? 1 : P - 2;
  }
  if (p0 + 1 <= P) {
    double t1 = tau_[static_cast<size_t>(p0 + 1)];
    if (std::isfinite(t1))
      cumF_[static_cast<size_t>(p0 + 1)] =
          seg(parts_[static_cast<size_t>(p0)], origin_, t1);
  }
  for (int t = p0 + 2; t <= P; ++t) {
    if (!std::isfinite(tau_[static_cast<size_t>(t)])) break;
    cumF_[static_cast<size_t>(t)] =
        cumF_[static_cast<size_t>(t - 1)] +
        seg(parts_[static_cast<size_t>(t - 1)], tau_[static_cast<size_t>(t - 1)],
            tau_[static_cast<size_t>(t)]);
  }
  if (std::isfinite(tau_[static_cast<size_t>(p0)]))
    cumF_[static_cast<size_t>(p0)] =
        -seg(parts_[static_cast<size_t>(p0)], tau_[static_cast<size_t>(p0)],
             origin_);
  for (int t = p0 - 1; t >= 0; --t) {
    if (!std::isfinite(tau_[static_cast<size_t>(t)])) break;
    cumF_[static_cast<size_t>(t)] =
        cumF_[static_cast<size_t>(t + 1)] -
        seg(parts_[static_cast<size_t>(t)], tau_[static_cast<size_t>(t)],
            tau_[static_cast<size_t>(t + 1)]);
  }
}

PwlMarginal PwlMarginal::from_samples(const std::vector<double>& points,
                                      const std::vector<double>& values,
                                      bool lower_bounded, bool upper_bounded) {
  if (points.size() < 2 || points.size() != values.size())
    throw CostError("need at least two samples");
  std::vector<PwlPart> parts;
  std::vector<double> taus;
  if (lower_bounded) {
    parts.push_back({0.0, 0.0, false, points.front()});
    taus.push_back(points.front());
  }
  for (size_t i = 0; i + 1 < points.size(); ++i) {
    double dx = points[i + 1] - points[i];
    double dv = values[i + 1] - values[i];
    if (!(dx > 0.0)) throw CostError("mesh points must be strictly increasing");
    if (!(dv > 0.0))
      throw CostError("sampled values must be strictly increasing");
    double alpha = dv / dx;
    parts.push_back({alpha, values[i] - alpha * points[i], true, 0.0});
    if (i + 2 < points.size()) taus.push_back(points[i + 1]);
  }
  if (upper_bounded) {
    taus.push_back(points.back());
    parts.push_back({0.0, 0.0, false, points.back()});
  }
  return from_parts(std::move(parts), std::move(taus));
}

PwlMarginal PwlMarginal::linear(double alpha, double beta) {
  return from_parts({{alpha, beta, true, 0.0}}, {});
}

double PwlMarginal::lower_bound() const {
  return parts_.front().finite ? -kInf : parts_.front().clamp;
}

double PwlMarginal::upper_bound() const {
  return parts_.back().finite ? kInf : parts_.back().clamp;
}

int PwlMarginal::part_of_flow(double x) const {
  auto it = std::lower_bound(tau_.begin(), tau_.end(), x);
  int t = static_cast<int>(it - tau_.begin()) - 1;
  return std::clamp(t, 0, n_parts() - 1);
}

int PwlMarginal::part_of_potential(double y) const {
  auto it = std::lower_bound(sigma_.begin(), sigma_.end(), y);
  int t = static_cast<int>(it - sigma_.begin()) - 1;
  return std::clamp(t, 0, n_parts() - 1);
}

double PwlMarginal::value(double x) const {
  int t = part_of_flow(x);
  const PwlPart* p = &parts_[static_cast<size_t>(t)];
  if (!p->finite) {
    if (x == p->clamp) {
      // finite one-sided value at the bound
      t = t == 0 ? 1 : n_parts() - 2;
      p = &parts_[static_cast<size_t>(t)];
    } else {
      return t == 0 ? -kInf : kInf;
    }
  }
  return p->alpha * x + p->beta;
}

double PwlMarginal::inverse(int t, double y) const {
  const PwlPart& p = parts_[static_cast<size_t>(t)];
  return p.finite ? (y - p.beta) / p.alpha : p.clamp;
}

double PwlMarginal::integral(double x) const {
  double lb = lower_bound(), ub = upper_bound();
  double tol = 1e-9 * (1.0 + std::abs(x));
  if (x < lb - tol || x > ub + tol) return kInf;
  x = std::clamp(x, lb, ub);
  int t = part_of_flow(x);
  if (!parts_[static_cast<size_t>(t)].finite)
    t = t == 0 ? 1 : n_parts() - 2;
  const PwlPart& p = parts_[static_cast<size_t>(t)];
  auto seg = [&p](double a, double b) {
    return 0.5 * p.alpha * (b * b - a * a) + p.beta * (b - a);
  };
  double lo_tau = tau_[static_cast<size_t>(t)];
  double hi_tau = tau_[static_cast<size_t>(t) + 1];
  if (std::isfinite(lo_tau) && std::isfinite(cumF_[static_cast<size_t>(t)]))
    return cumF_[static_cast<size_t>(t)] + seg(lo_tau, x);
  if (std::isfinite(hi_tau) &&
      std::isfinite(cumF_[static_cast<size_t>(t) + 1]))
    return cumF_[static_cast<size_t>(t) + 1] - seg(x, hi_tau);
  return seg(origin_, x);
}

// --- meshes ---

namespace {

double nudge_into(double x, double toward) {
  if (x != 0.0) return x;
  return toward > x ? 1e-300 : -1e-300;
}

double fpp_abs_one_sided(const AnalyticMarginal& f, double x, double toward) {
  double xx = nudge_into(x, toward);
  // evaluate slightly inside the interval so sign conventions at 0 don't bite
  if (x == 0.0 && f.eval(xx, 2) == 0.0) {
    double eps = (toward > x ? 1.0 : -1.0) * 1e-9;
    return std::abs(f.eval(eps, 2));
  }
  return std::abs(f.eval(xx, 2));
}

}  // namespace

double fpp_max(const AnalyticMarginal& f, double a, double b) {
  const int K = 32;
  double m = 0.0;
  for (int i = 0; i <= K; ++i) {
    double x = a + (b - a) * static_cast<double>(i) / K;
    double toward = i == 0 ? b : a;
    m = std::max(m, fpp_abs_one_sided(f, x, toward));
  }
  return m;
}

bool mesh_step_ok(const AnalyticMarginal& f, const ApproxParams& params, int m,
                  double x_max, MeshRule rule, double a, double b,
                  double slack) {
  const double delta = b - a;
  if (!(delta > 0.0)) return true;
  const double anchor = std::abs(a) <= std::abs(b) ? a : b;
  const double al = params.alpha, be = params.beta;
  double lhs, rhs;
  if (rule == MeshRule::I) {
    double ilo = anchor == a ? a : b - 2.0 * delta;
    double ihi = anchor == a ? a + 2.0 * delta : b;
    lhs = delta * std::sqrt(fpp_max(f, ilo, ihi));
    rhs = 2.0 * std::sqrt(2.0) *
          std::sqrt((al - 1.0) / (1.0 + al) * std::abs(f.eval(anchor)) +
                    be / ((1.0 + al) * m * x_max));
  } else {
    double B2 = std::max(fpp_abs_one_sided(f, a, b), fpp_abs_one_sided(f, b, a));
    lhs = delta * std::sqrt(B2);
    rhs = 2.0 * std::sqrt(2.0) *
          std::sqrt((al - 1.0) * std::abs(f.eval(anchor)) + be / (m * x_max));
  }
  return lhs <= rhs * (1.0 + slack) + 1e-300;
}

Mesh mca_mesh(const AnalyticMarginal& f, const ApproxParams& params, int m,
              double x_max, MeshRule rule, double lo, double hi) {
  if (!(hi > lo)) throw CostError("degenerate mesh range");
  if (lo > 0.0 || hi < 0.0) throw CostError("mesh range must contain 0");
  if (rule == MeshRule::II && !f.rule_two_applicable())
    throw CostError("rule II hypotheses do not hold for this cost family");
  if (!(params.alpha > 1.0) || params.beta < 0.0)
    throw CostError("need alpha > 1 and beta >= 0");

  const size_t kMaxPoints = 4'000'000;
  auto grow = [&](double from, double to, std::vector<double>& out) {
    // march from |from| (at or nearer zero) toward to
    double sgn = to > from ? 1.0 : -1.0;
    double x = from;
    while (sgn * (to - x) > 1e-14 * (1.0 + std::abs(to))) {
      double remaining = std::abs(to - x);
      double a = sgn > 0 ? x : x - remaining;
      double b = sgn > 0 ? x + remaining : x;
      double step;
      if (mesh_step_ok(f, params, m, x_max, rule, a, b, 0.0)) {
        step = remaining;
      } else {
        double dlo = 0.0, dhi = remaining;
        for (int i = 0; i < 80; ++i) {
          double mid = 0.5 * (dlo + dhi);
          double aa = sgn > 0 ? x : x - mid;
          double bb = sgn > 0 ? x + mid : x;
          (mesh_step_ok(f, params, m, x_max, rule, aa, bb, 0.0) ? dlo : dhi) =
              mid;
        }
        step = dlo;
        if (!(step > 1e-13 * (1.0 + std::abs(to))))
          throw CostError(
              "mesh step underflow; use beta > 0 or a coarser budget");
      }
      x += sgn * step;
      out.push_back(x);
      if (out.size() > kMaxPoints) throw CostError("mesh exceeds point cap");
    }
    out.back() = to;  // snap to the range end
  };

  std::vector<double> right, left;
  if (hi > 0.0) grow(0.0, hi, right);
  if (lo < 0.0) grow(0.0, lo, left);

  Mesh mesh;
  for (size_t i = left.size(); i-- > 0;) mesh.points.push_back(left[i]);
  mesh.points.push_back(0.0);
  for (double p : right) mesh.points.push_back(p);
  if (mesh.points.size() < 2) throw CostError("degenerate mesh");
  return mesh;
}

PwlMarginal linear_spline(const AnalyticMarginal& f, const Mesh& mesh,
                          bool lower_bounded, bool upper_bounded) {
  std::vector<double> values(mesh.points.size());
  for (size_t i = 0; i < mesh.points.size(); ++i)
    values[i] = f.eval(mesh.points[i]);
  // Flat stretches (e.g. constant marginals) get a vanishing positive slope
  // so the spline stays invertible; the objective shift is far below any
  // approximation budget.
  for (size_t i = 1; i < values.size(); ++i) {
    double floor = values[i - 1] +
                   1e-12 * (1.0 + std::abs(values[i - 1])) *
                       std::max(1e-3, mesh.points[i] - mesh.points[i - 1]);
    if (values[i] <= floor) values[i] = floor;
  }
  return PwlMarginal::from_samples(mesh.points, values, lower_bounded,
                                   upper_bounded);
}

}  // namespace paraflow
