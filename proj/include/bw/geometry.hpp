#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "bw/defs.hpp"
#include "bw/generator.hpp"
#include "bw/measure.hpp"
#include "bw/transport.hpp"

namespace bw {

/* Which coordinate system a velocity or a path lives in. */
enum class Chart { primal, dual };

/* The gradient of a convex potential, used as a transport target map.
   `codomain` records whether values land in the primal or dual domain. */
struct ConvexMap {
  std::string label;
  std::function<Vector(const Vector&)> grad;
  Chart codomain = Chart::dual;
  std::optional<std::function<Matrix(const Vector&)>> analytic_hess;
};

/* A tangent vector field along a discrete measure: one vector per atom,
   components taken in `chart`. */
struct VelocityField {
  DiscreteMeasure base;
  Matrix vectors;  // n x d
  Chart chart = Chart::primal;
};

/* Pointwise three-term identity: p a base primal point, gamma_t the
   primal-straight curve x_p + t a, sigma_t the dual-straight curve
   y_p + t b.  Returns (lhs, rhs) with
   lhs = B(p, sigma_t) + B(gamma_t, p) - B(gamma_t, sigma_t) and
   rhs = t^2 <a, b>; the two agree to solver precision. */
std::pair<double, double> pythagorean_point(const Generator& gen,
                                            const Vector& p, const Vector& a,
                                            const Vector& b, double t);

/* Weighted Riemannian inner product of two velocity fields over a shared
   base: primal/primal pairs contract through D^2 Omega, dual/dual pairs
   through D^2 Omega*, and mixed pairs reduce to the plain dot product. */
double otto_inner(const Generator& gen, const VelocityField& u,
                  const VelocityField& v);

/* Measure-level three-term comparison: rho is transported along a primal
   displacement path built from Dh (into the primal domain) and a dual
   one built from Df (into the dual domain).  Returns (lhs, rhs) with
   lhs the alternating sum of the three divergences at time t and
   rhs = t^2 * g(mu_dot, nu_dot); lhs >= rhs - 1e-7 in exact arithmetic
   collapses to an inequality certified here by exact solves. */
std::pair<double, double> bw_pythagorean(const Generator& gen,
                                         const DiscreteMeasure& rho,
                                         const ConvexMap& Dh,
                                         const ConvexMap& Df, double t);

/* Shared-base third-derivative quadrature
   sum_i w_i D^3 Omega*(grad Omega(x_i))[d_i, d_i, d_i] with
   d_i = Df(x_i) - grad Omega(x_i); Df must map into the dual domain. */
double skewness_integral(const Generator& gen, const DiscreteMeasure& rho,
                         const ConvexMap& Df);

struct ExpansionReport {
  std::vector<double> t_grid;
  std::vector<double> divergence;  // D(t) per grid point
  double second_fitted = 0.0;
  double second_predicted = 0.0;  // 1/2 * otto_inner(v, v)
  double third_fitted = 0.0;
  double third_predicted = 0.0;  // 1/6 * skewness quadrature
};

/* Fits D(t) = c2 t^2 + c3 t^3 + O(t^4) on a geometric t grid by
   Richardson extrapolation of D(t)/t^2 and compares the coefficients
   with the metric and skewness predictions.  `kind` selects a primal- or
   dual-straight displacement of rho under `map`; an empty grid selects
   the default {5e-2, 2.5e-2, 1.25e-2, 6.25e-3}. */
ExpansionReport expansion_check(const Generator& gen, const DiscreteMeasure& rho,
                                const ConvexMap& map, Chart kind,
                                std::vector<double> t_grid = {});

}  // namespace bw
