#include "bw/geometry.hpp"

#include <cmath>

namespace bw {

namespace {

void require_same_base(const VelocityField& u, const VelocityField& v) {
  if (u.base.size() != v.base.size() || u.base.dim() != v.base.dim())
    throw input_error("otto_inner: velocity fields have different bases");
  if ((u.base.points - v.base.points).cwiseAbs().maxCoeff() > 1e-14 ||
      (u.base.weights - v.base.weights).cwiseAbs().maxCoeff() > 1e-14)
    throw input_error("otto_inner: velocity fields have different bases");
  if (u.vectors.rows() != u.base.size() || u.vectors.cols() != u.base.dim() ||
      v.vectors.rows() != v.base.size() || v.vectors.cols() != v.base.dim())
    throw input_error("otto_inner: vector block shape does not match the base");
}

void require_codomain(const ConvexMap& map, Chart expected, const char* what) {
  if (map.codomain != expected)
    throw input_error(std::string(what) + ": map '" + map.label +
                      "' has the wrong codomain chart");
}

}  // namespace

std::pair<double, double> pythagorean_point(const Generator& gen,
                                            const Vector& p, const Vector& a,
                                            const Vector& b, double t) {
  gen.require_primal(p, "pythagorean_point");
  Vector y_p = gen.grad(p);
  Vector x_gamma = p + t * a;
  Vector y_sigma = y_p + t * b;
  gen.require_primal(x_gamma, "pythagorean_point (primal-straight curve)");
  gen.require_dual(y_sigma, "pythagorean_point (dual-straight curve)");

  /* All three divergences in the mixed-coordinate form; the pieces
     Omega(x_p), Omega*(y_sigma), ... cancel pairwise so that the
     identity is exact up to roundoff. */
  double b_p_sigma = gen.value(p) + gen.dual_value(y_sigma) - p.dot(y_sigma);
  double b_gamma_p =
      gen.value(x_gamma) + gen.dual_value(y_p) - x_gamma.dot(y_p);
  double b_gamma_sigma =
      gen.value(x_gamma) + gen.dual_value(y_sigma) - x_gamma.dot(y_sigma);
  double lhs = b_p_sigma + b_gamma_p - b_gamma_sigma;
  double rhs = t * t * a.dot(b);
  return {lhs, rhs};
}

double otto_inner(const Generator& gen, const VelocityField& u,
                  const VelocityField& v) {
  require_same_base(u, v);
  if (u.base.dim() != gen.dim)
    throw input_error(gen.name + ": otto_inner dimension mismatch");

  double s = 0.0;
  for (Index i = 0; i < u.base.size(); ++i) {
    Vector ui = u.vectors.row(i), vi = v.vectors.row(i);
    double term;
    if (u.chart == v.chart) {
      Vector x = u.base.points.row(i);
      gen.require_primal(x, "otto_inner");
      if (u.chart == Chart::primal) {
        term = ui.dot(gen.hess(x) * vi);
      } else {
        term = ui.dot(gen.dual_hess(gen.grad(x)) * vi);
      }
    } else {
      term = ui.dot(vi);  // biorthogonal mixed charts
    }
    s += u.base.weights[i] * term;
  }
  return s;
}

std::pair<double, double> bw_pythagorean(const Generator& gen,
                                         const DiscreteMeasure& rho,
                                         const ConvexMap& Dh,
                                         const ConvexMap& Df, double t) {
  require_codomain(Dh, Chart::primal, "bw_pythagorean");
  require_codomain(Df, Chart::dual, "bw_pythagorean");
  if (!(t >= 0.0 && t <= 1.0))
    throw input_error("bw_pythagorean: t must lie in [0,1]");

  const Index n = rho.size(), d = rho.dim();
  Matrix mu_pts(n, d), nu_pts(n, d), a(n, d), b(n, d);
  for (Index i = 0; i < n; ++i) {
    Vector x = rho.points.row(i);
    gen.require_primal(x, "bw_pythagorean");
    Vector y = gen.grad(x);
    Vector hx = Dh.grad(y);  // primal-chart target
    Vector fy = Df.grad(x);  // dual-chart target
    gen.require_primal(hx, "bw_pythagorean (Dh target)");
    gen.require_dual(fy, "bw_pythagorean (Df target)");
    mu_pts.row(i) = (1.0 - t) * x + t * hx;
    Vector y_t = (1.0 - t) * y + t * fy;
    gen.require_dual(y_t, "bw_pythagorean (dual path point)");
    nu_pts.row(i) = gen.dual_grad(y_t);
    a.row(i) = hx - x;  // primal-chart initial velocity
    b.row(i) = fy - y;  // dual-chart initial velocity
  }
  DiscreteMeasure mu_t{mu_pts, rho.weights};
  DiscreteMeasure nu_t{nu_pts, rho.weights};

  SolverConfig cfg;  // exact solves throughout
  double lhs = bw_divergence(gen, rho, nu_t, cfg).value +
               bw_divergence(gen, mu_t, rho, cfg).value -
               bw_divergence(gen, mu_t, nu_t, cfg).value;

  VelocityField udot{rho, a, Chart::primal};
  VelocityField vdot{rho, b, Chart::dual};
  double rhs = t * t * otto_inner(gen, udot, vdot);
  return {lhs, rhs};
}

double skewness_integral(const Generator& gen, const DiscreteMeasure& rho,
                         const ConvexMap& Df) {
  require_codomain(Df, Chart::dual, "skewness_integral");
  double s = 0.0;
  for (Index i = 0; i < rho.size(); ++i) {
    Vector x = rho.points.row(i);
    gen.require_primal(x, "skewness_integral");
    Vector y = gen.grad(x);
    Vector d = Df.grad(x) - y;
    s += rho.weights[i] * gen.dual_third(y).apply(d, d, d);
  }
  return s;
}

namespace {

/* Central finite difference of the primal Hessian; mirrors
   dual_third_default on the primal side for primal-kind expansions. */
SymTensor3 primal_third_fd(const Generator& gen, const Vector& x) {
  double h = 1e-4 * std::max(1.0, x.cwiseAbs().maxCoeff());
  SymTensor3 t(gen.dim);
  Vector xp = x, xm = x;
  for (Index k = 0; k < gen.dim; ++k) {
    xp[k] = x[k] + h;
    xm[k] = x[k] - h;
    if (!gen.primal_contains(xp) || !gen.primal_contains(xm))
      throw stencil_error(gen.name +
                          ": primal third-derivative stencil leaves the domain");
    Matrix hp = gen.hess(xp), hm = gen.hess(xm);
    for (Index i = 0; i < gen.dim; ++i)
      for (Index j = 0; j < gen.dim; ++j)
        t(i, j, k) = (hp(i, j) - hm(i, j)) / (2.0 * h);
    xp[k] = x[k];
    xm[k] = x[k];
  }
  return t.symmetrized();
}

}  // namespace

ExpansionReport expansion_check(const Generator& gen, const DiscreteMeasure& rho,
                                const ConvexMap& map, Chart kind,
                                std::vector<double> t_grid) {
  require_codomain(map, kind == Chart::dual ? Chart::dual : Chart::primal,
                   "expansion_check");
  if (t_grid.empty()) t_grid = {5e-2, 2.5e-2, 1.25e-2, 6.25e-3};
  if (t_grid.size() < 4)
    throw input_error("expansion_check: need at least four grid points");

  const Index n = rho.size(), d = rho.dim();
  Matrix base_chart(n, d), target(n, d), velocity(n, d);
  Vector base_value(n);
  for (Index i = 0; i < n; ++i) {
    Vector x = rho.points.row(i);
    gen.require_primal(x, "expansion_check");
    Vector y = gen.grad(x);
    Vector m = map.grad(kind == Chart::dual ? x : y);
    if (kind == Chart::dual) {
      gen.require_dual(m, "expansion_check (map target)");
      base_chart.row(i) = y;
    } else {
      gen.require_primal(m, "expansion_check (map target)");
      base_chart.row(i) = x;
    }
    target.row(i) = m;
    velocity.row(i) = m.transpose() - base_chart.row(i);
  }

  ExpansionReport report;
  report.t_grid = t_grid;
  for (double t : t_grid) {
    /* Monge evaluation: each atom moves along a straight line in the
       kind's chart; the divergence back to the base is a plain sum. */
    double dv = 0.0;
    for (Index i = 0; i < n; ++i) {
      Vector x = rho.points.row(i);
      if (kind == Chart::dual) {
        Vector y_t =
            (1.0 - t) * base_chart.row(i).transpose() + t * target.row(i).transpose();
        gen.require_dual(y_t, "expansion_check (path point)");
        dv += rho.weights[i] * (gen.value(x) + gen.dual_value(y_t) - x.dot(y_t));
      } else {
        Vector x_t =
            (1.0 - t) * base_chart.row(i).transpose() + t * target.row(i).transpose();
        gen.require_primal(x_t, "expansion_check (path point)");
        dv += rho.weights[i] *
              (gen.value(x_t) - gen.value(x) - gen.grad(x).dot(x_t - x));
      }
    }
    report.divergence.push_back(dv);
  }

  /* Richardson: E(t) = D(t)/t^2 = c2 + c3 t + ...; the interpolating
     polynomial through the grid gives c2 = p(0) and c3 = p'(0) via
     Newton divided differences. */
  const std::size_t k = t_grid.size();
  std::vector<double> dd(k);
  for (std::size_t i = 0; i < k; ++i)
    dd[i] = report.divergence[i] / (t_grid[i] * t_grid[i]);
  for (std::size_t level = 1; level < k; ++level)
    for (std::size_t i = k - 1; i >= level; --i)
      dd[i] = (dd[i] - dd[i - 1]) / (t_grid[i] - t_grid[i - level]);
  /* Evaluate p and p' at 0 from the Newton form (Horner-like). */
  double p = dd[k - 1], dp = 0.0;
  for (std::size_t i = k - 1; i-- > 0;) {
    dp = p + (0.0 - t_grid[i]) * dp;
    p = dd[i] + (0.0 - t_grid[i]) * p;
  }
  report.second_fitted = p;
  report.third_fitted = dp;

  VelocityField vel{rho, velocity, kind};
  report.second_predicted = 0.5 * otto_inner(gen, vel, vel);

  double skew = 0.0;
  if (kind == Chart::dual) {
    skew = skewness_integral(gen, rho, map);
  } else {
    for (Index i = 0; i < n; ++i) {
      Vector x = rho.points.row(i);
      Vector a = velocity.row(i);
      skew += rho.weights[i] * primal_third_fd(gen, x).apply(a, a, a);
    }
  }
  report.third_predicted = skew / 6.0;
  return report;
}

}  // namespace bw
