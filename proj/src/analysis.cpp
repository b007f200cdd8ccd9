#include "paraflow/analysis.hpp"

#include <algorithm>
#include <cmath>

#include "paraflow/mca.hpp"

namespace paraflow {

std::vector<std::pair<double, double>> objective_curve(
    const ParametricSolution& sol, const AnalyticInstance& inst,
    const std::vector<double>& grid) {
  std::vector<std::pair<double, double>> out;
  for (double l : grid) out.push_back({l, inst.objective(sol.flow_at(l))});
  return out;
}

std::vector<std::pair<double, double>> objective_curve(
    const InterpolatedSolution& sol, const AnalyticInstance& inst,
    const std::vector<double>& grid) {
  std::vector<std::pair<double, double>> out;
  for (double l : grid) out.push_back({l, inst.objective(sol.flow_at(l))});
  return out;
}

double total_travel_time(const AnalyticInstance& inst, const Vec& flow) {
  return flow.dot(inst.marginal_values(flow));
}

std::vector<double> analysis_grid(double lambda_max,
                                  const std::vector<double>& breakpoints,
                                  int n_uniform) {
  std::vector<double> g;
  for (int i = 0; i < n_uniform; ++i)
    g.push_back(lambda_max * static_cast<double>(i) / (n_uniform - 1));
  for (double b : breakpoints)
    if (b >= 0.0 && b <= lambda_max) g.push_back(b);
  std::sort(g.begin(), g.end());
  double tol = 1e-12 * (1.0 + lambda_max);
  g.erase(std::unique(g.begin(), g.end(),
                      [tol](double a, double b) { return b - a <= tol; }),
          g.end());
  return g;
}

PoaResult poa_curve(const AnalyticInstance& inst, const DemandFunction& demand,
                    const ApproxParams& params,
                    const std::vector<double>& grid) {
  ParametricSolution ue = run_mca(inst, demand, params);
  AnalyticInstance so_inst{inst.network, {}};
  for (const AnalyticMarginal& f : inst.costs)
    so_inst.costs.push_back(f.so_marginal());
  ParametricSolution so = run_mca(so_inst, demand, params);

  PoaResult res;
  for (double l : grid) {
    double tt_ue = total_travel_time(inst, ue.flow_at(l));
    double tt_so = total_travel_time(inst, so.flow_at(l));
    res.curve.push_back({l, tt_so > 0.0 ? tt_ue / tt_so : 1.0});
  }
  for (const SolutionSegment& s : ue.segments) {
    for (int e = 0; e < inst.network.n_edges(); ++e) {
      double dir = s.x_dir[e];
      if (std::abs(dir) < 1e-14) continue;
      double l0 = -s.x_offset[e] / dir;
      if (l0 > s.lambda_lo - 1e-12 && l0 <= s.lambda_hi + 1e-12)
        res.transition_points.push_back(std::clamp(l0, s.lambda_lo,
                                                   s.lambda_hi));
    }
  }
  std::sort(res.transition_points.begin(), res.transition_points.end());
  double tol = 1e-9 * (1.0 + params.lambda_max);
  res.transition_points.erase(
      std::unique(res.transition_points.begin(), res.transition_points.end(),
                  [tol](double a, double b) { return b - a <= tol; }),
      res.transition_points.end());
  return res;
}

std::vector<int> support_of(const PwqInstance& inst, const Vec& flow,
                            const Vec& pi, double tol) {
  std::vector<int> s;
  Vec y = inst.network.potential_differences(pi);
  for (int e = 0; e < inst.network.n_edges(); ++e) {
    double fv = inst.marginals[static_cast<size_t>(e)].value(flow[e]);
    if (std::isfinite(fv) && std::abs(fv - y[e]) <= tol) s.push_back(e);
  }
  return s;
}

namespace {

// maximize g(phi) = phi.d - sum_e conj_e((Gamma^T phi)_e) by a damped
// Newton ascent: the Hessian of -g is the graph Laplacian with the
// conductances dx_e/dy_e of the current potential differences, so the
// ascent direction solves a (regularized) reduced Laplacian system.
// grad g = d - Gamma x(phi).
template <typename InvFn, typename ConjFn, typename SlopeFn>
std::pair<Vec, Vec> dual_ascent(const Network& net, const Vec& d, double tol,
                                long max_iter, InvFn inverse_flow,
                                ConjFn conjugate, SlopeFn slope) {
  const int n = net.n_vertices();
  const int m = net.n_edges();
  const int ref = net.reference_vertex();
  Vec phi = Vec::Zero(n);

  auto evaluate = [&](const Vec& p, Vec& x_out, Vec& grad_out) {
    Vec y = net.potential_differences(p);
    double conj = 0.0;
    x_out.resize(m);
    for (int e = 0; e < m; ++e) {
      x_out[e] = inverse_flow(e, y[e]);
      conj += conjugate(e, y[e], x_out[e]);
    }
    grad_out = d - net.excess(x_out);
    return p.dot(d) - conj;
  };

  auto ridx = [&](int v) { return v < ref ? v : v - 1; };
  auto newton_direction = [&](const Vec& p, const Vec& grad) {
    Vec y = net.potential_differences(p);
    Eigen::MatrixXd L = Eigen::MatrixXd::Zero(n - 1, n - 1);
    for (int e = 0; e < m; ++e) {
      double c = slope(e, y[e]);
      if (!(c >= 0.0) || !std::isfinite(c)) c = 0.0;
      const Edge& ed = net.edge(e);
      int a = ed.tail, b = ed.head;
      if (a != ref) L(ridx(a), ridx(a)) += c;
      if (b != ref) L(ridx(b), ridx(b)) += c;
      if (a != ref && b != ref) {
        L(ridx(a), ridx(b)) -= c;
        L(ridx(b), ridx(a)) -= c;
      }
    }
    // scale-aware damping: relative on active rows, tiny absolute floor
    // so fully clamped vertices still yield a finite direction
    for (int i = 0; i < n - 1; ++i)
      L(i, i) = L(i, i) * (1.0 + 1e-12) + 1e-9;
    Vec gr(n - 1);
    for (int v = 0; v < n; ++v)
      if (v != ref) gr[ridx(v)] = grad[v];
    Vec dr = L.ldlt().solve(gr);
    Vec dir = Vec::Zero(n);
    for (int v = 0; v < n; ++v)
      if (v != ref) dir[v] = dr[ridx(v)];
    return dir;
  };

  Vec x, grad;
  double g = evaluate(phi, x, grad);
  double res_tol = tol * (1.0 + d.cwiseAbs().maxCoeff());

  for (long k = 0; k < max_iter; ++k) {
    if (grad.cwiseAbs().maxCoeff() <= res_tol) return {x, phi};
    Vec dir = newton_direction(phi, grad);
    double slope0 = grad.dot(dir);
    if (!(slope0 > 0.0) || !dir.allFinite()) {
      dir = grad;
      slope0 = grad.squaredNorm();
    }
    Vec x_new, grad_new;
    double g_new = evaluate(phi + dir, x_new, grad_new);
    bool accepted = g_new >= g + 1e-4 * slope0;
    double t_acc = 1.0;
    if (!accepted) {
      // the full step crossed a kink of the piecewise model: maximize the
      // concave section g(phi + t dir) exactly by golden-section search
      Vec xt, gt;
      auto h = [&](double t) { return evaluate(phi + t * dir, xt, gt); };
      double t_hi = 1.0;
      while (t_hi < 1e6 && h(t_hi) > h(0.5 * t_hi)) t_hi *= 2.0;
      double a = 0.0, b = t_hi;
      const double inv_phi = 0.5 * (std::sqrt(5.0) - 1.0);
      double c1 = b - inv_phi * (b - a), c2 = a + inv_phi * (b - a);
      double h1 = h(c1), h2 = h(c2);
      for (int i = 0; i < 160 && b - a > 1e-18 * (1.0 + b); ++i) {
        if (h1 < h2) {
          a = c1;
          c1 = c2;
          h1 = h2;
          c2 = a + inv_phi * (b - a);
          h2 = h(c2);
        } else {
          b = c2;
          c2 = c1;
          h2 = h1;
          c1 = b - inv_phi * (b - a);
          h1 = h(c1);
        }
      }
      t_acc = 0.5 * (a + b);
      g_new = evaluate(phi + t_acc * dir, x_new, grad_new);
      accepted = g_new > g;
    }
    if (!accepted) {
      // flat to machine precision along the ascent direction
      return {x, phi};
    }
    phi += t_acc * dir;
    x = x_new;
    grad = grad_new;
    g = g_new;
  }
  throw ConvergenceError("dual ascent did not reach the requested residual");
}

}  // namespace

Vec oracle_solve(const PwqInstance& inst, const Vec& d, double tol,
                 long max_iterations) {
  return oracle_solve_with_potentials(inst, d, tol, max_iterations).first;
}

std::pair<Vec, Vec> oracle_solve_with_potentials(const PwqInstance& inst,
                                                 const Vec& d, double tol,
                                                 long max_iterations) {
  return dual_ascent(
      inst.network, d, tol, max_iterations,
      [&](int e, double y) {
        const PwlMarginal& f = inst.marginals[static_cast<size_t>(e)];
        return f.inverse(f.part_of_potential(y), y);
      },
      [&](int e, double y, double x) {
        return x * y - inst.marginals[static_cast<size_t>(e)].integral(x);
      },
      [&](int e, double y) {
        const PwlMarginal& f = inst.marginals[static_cast<size_t>(e)];
        return f.part(f.part_of_potential(y)).c();
      });
}

Vec oracle_solve(const AnalyticInstance& inst, const Vec& d, double tol,
                 long max_iterations) {
  return dual_ascent(
      inst.network, d, tol, max_iterations,
      [&](int e, double y) {
        const AnalyticMarginal& f = inst.costs[static_cast<size_t>(e)];
        if (f.kind() == AnalyticMarginal::Kind::Bpr && y <= f.eval(0.0))
          return 0.0;  // flow bound of the directed family
        return f.inverse(y);
      },
      [&](int e, double y, double x) {
        return x * y - inst.costs[static_cast<size_t>(e)].beckmann(x);
      },
      [&](int e, double y) {
        const AnalyticMarginal& f = inst.costs[static_cast<size_t>(e)];
        if (f.kind() == AnalyticMarginal::Kind::Bpr && y <= f.eval(0.0))
          return 0.0;
        double fp = f.eval(f.inverse(y), 1);
        return fp > 1e-14 ? 1.0 / fp : 1e14;
      }).first;
}

}  // namespace paraflow
