#include "bw/generator.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <sstream>

namespace bw {

double SymTensor3::apply(const Vector& a, const Vector& b,
                         const Vector& c) const {
  double s = 0.0;
  for (Index i = 0; i < d_; ++i)
    for (Index j = 0; j < d_; ++j)
      for (Index k = 0; k < d_; ++k) s += (*this)(i, j, k) * a[i] * b[j] * c[k];
  return s;
}

double SymTensor3::max_asymmetry() const {
  double worst = 0.0;
  for (Index i = 0; i < d_; ++i)
    for (Index j = 0; j < d_; ++j)
      for (Index k = 0; k < d_; ++k) {
        double t = (*this)(i, j, k);
        worst = std::max(worst, std::abs(t - (*this)(i, k, j)));
        worst = std::max(worst, std::abs(t - (*this)(j, i, k)));
        worst = std::max(worst, std::abs(t - (*this)(k, j, i)));
      }
  return worst;
}

SymTensor3 SymTensor3::symmetrized() const {
  SymTensor3 out(d_);
  for (Index i = 0; i < d_; ++i)
    for (Index j = 0; j < d_; ++j)
      for (Index k = 0; k < d_; ++k)
        out(i, j, k) = ((*this)(i, j, k) + (*this)(i, k, j) + (*this)(j, i, k) +
                        (*this)(j, k, i) + (*this)(k, i, j) + (*this)(k, j, i)) /
                       6.0;
  return out;
}

namespace {

[[noreturn]] void throw_domain(const std::string& gen, const char* side,
                               const char* what, const Vector& v, int coord) {
  std::ostringstream os;
  os << gen << ": " << side << " point rejected in " << what << " (";
  if (coord >= 0 && coord < v.size())
    os << "coordinate " << coord << " = " << v[coord];
  else
    os << "joint constraint, coordinate index " << coord;
  os << " outside the open domain)";
  throw domain_violation(os.str(), coord);
}

int all_finite_violation(const Vector& v) {
  for (Index i = 0; i < v.size(); ++i)
    if (!std::isfinite(v[i])) return int(i);
  return -1;
}

/* Numerically stable logistic and softplus. */
double logistic(double t) {
  if (t >= 0.0) return 1.0 / (1.0 + std::exp(-t));
  double e = std::exp(t);
  return e / (1.0 + e);
}

double softplus(double t) { return std::max(t, 0.0) + std::log1p(std::exp(-std::abs(t))); }

double xlogx(double t) { return t > 0.0 ? t * std::log(t) : 0.0; }

}  // namespace

void Generator::require_primal(const Vector& x, const char* what) const {
  if (x.size() != dim)
    throw input_error(name + ": primal point of dimension " +
                      std::to_string(x.size()) + " passed to " + what +
                      " (expected " + std::to_string(dim) + ")");
  int c = primal_violation(x);
  if (c >= 0) throw_domain(name, "primal", what, x, c);
}

void Generator::require_dual(const Vector& y, const char* what) const {
  if (y.size() != dim)
    throw input_error(name + ": dual point of dimension " +
                      std::to_string(y.size()) + " passed to " + what +
                      " (expected " + std::to_string(dim) + ")");
  int c = dual_violation(y);
  if (c >= 0) throw_domain(name, "dual", what, y, c);
}

/* ---------------------------------------------------------------- */
/* quadratic: Omega(x) = 1/2 |x|^2, self-dual, flat.                */
/* ---------------------------------------------------------------- */

Generator quadratic(Index d) {
  Generator g;
  g.name = "quadratic";
  g.dim = d;
  g.primal_violation = all_finite_violation;
  g.dual_violation = all_finite_violation;
  g.value = [](const Vector& x) { return 0.5 * x.squaredNorm(); };
  g.grad = [](const Vector& x) { return x; };
  g.hess = [d](const Vector&) { return Matrix(Matrix::Identity(d, d)); };
  g.dual_value = [](const Vector& y) { return 0.5 * y.squaredNorm(); };
  g.dual_grad = [](const Vector& y) { return y; };
  g.dual_hess = [d](const Vector&) { return Matrix(Matrix::Identity(d, d)); };
  g.dual_third = [d](const Vector&) { return SymTensor3(d); };
  return g;
}

/* ---------------------------------------------------------------- */
/* logsumexp: Omega(x) = log(1 + sum_i e^{x_i}); the mirror map is  */
/* the softmax onto the open sub-simplex {y in (0,1)^d, sum y < 1}. */
/* Omega*(y) = sum_{i=0}^d y_i log y_i with y_0 = 1 - sum y_i.      */
/* ---------------------------------------------------------------- */

Generator logsumexp(Index d) {
  Generator g;
  g.name = "logsumexp";
  g.dim = d;
  g.primal_violation = all_finite_violation;
  g.dual_violation = [](const Vector& y) {
    double s = 0.0;
    for (Index i = 0; i < y.size(); ++i) {
      if (!(y[i] > kDomainMargin) || !std::isfinite(y[i])) return int(i);
      s += y[i];
    }
    if (!(s < 1.0 - kDomainMargin)) return int(y.size());  // sum constraint
    return -1;
  };
  /* Shifted evaluation: the implicit zero coordinate joins the max. */
  auto lse = [](const Vector& x) {
    double m = std::max(0.0, x.maxCoeff());
    double s = std::exp(-m);
    for (Index i = 0; i < x.size(); ++i) s += std::exp(x[i] - m);
    return m + std::log(s);
  };
  auto softmax = [lse](const Vector& x) {
    double om = lse(x);
    Vector y(x.size());
    for (Index i = 0; i < x.size(); ++i) y[i] = std::exp(x[i] - om);
    return y;
  };
  g.value = lse;
  g.grad = softmax;
  g.hess = [softmax](const Vector& x) {
    Vector y = softmax(x);
    Matrix h = Matrix(y.asDiagonal());
    h.noalias() -= y * y.transpose();
    return h;
  };
  g.dual_value = [](const Vector& y) {
    double s = xlogx(1.0 - y.sum());
    for (Index i = 0; i < y.size(); ++i) s += xlogx(y[i]);
    return s;
  };
  g.dual_grad = [](const Vector& y) {
    double ly0 = std::log(1.0 - y.sum());
    Vector x(y.size());
    for (Index i = 0; i < y.size(); ++i) x[i] = std::log(y[i]) - ly0;
    return x;
  };
  g.dual_hess = [](const Vector& y) {
    double y0 = 1.0 - y.sum();
    Matrix h = Matrix::Constant(y.size(), y.size(), 1.0 / y0);
    for (Index i = 0; i < y.size(); ++i) h(i, i) += 1.0 / y[i];
    return h;
  };
  g.dual_third = [](const Vector& y) {
    double y0 = 1.0 - y.sum();
    Index d2 = y.size();
    SymTensor3 t(d2);
    double c = 1.0 / (y0 * y0);
    for (Index i = 0; i < d2; ++i)
      for (Index j = 0; j < d2; ++j)
        for (Index k = 0; k < d2; ++k) {
          t(i, j, k) = c;
          if (i == j && j == k) t(i, j, k) -= 1.0 / (y[i] * y[i]);
        }
    return t;
  };
  return g;
}

/* ---------------------------------------------------------------- */
/* diaglogistic: Omega(x) = sum softplus(x_i); mirror map applies   */
/* the logistic coordinatewise (Hopfield-style diagonal system).    */
/* ---------------------------------------------------------------- */

Generator diaglogistic(Index d) {
  Generator g;
  g.name = "diaglogistic";
  g.dim = d;
  g.primal_violation = all_finite_violation;
  g.dual_violation = [](const Vector& y) {
    for (Index i = 0; i < y.size(); ++i)
      if (!(y[i] > kDomainMargin) || !(y[i] < 1.0 - kDomainMargin)) return int(i);
    return -1;
  };
  g.value = [](const Vector& x) {
    double s = 0.0;
    for (Index i = 0; i < x.size(); ++i) s += softplus(x[i]);
    return s;
  };
  g.grad = [](const Vector& x) {
    Vector y(x.size());
    for (Index i = 0; i < x.size(); ++i) y[i] = logistic(x[i]);
    return y;
  };
  g.hess = [](const Vector& x) {
    Matrix h = Matrix::Zero(x.size(), x.size());
    for (Index i = 0; i < x.size(); ++i) h(i, i) = logistic(x[i]) * logistic(-x[i]);
    return h;
  };
  g.dual_value = [](const Vector& y) {
    double s = 0.0;
    for (Index i = 0; i < y.size(); ++i) s += xlogx(y[i]) + xlogx(1.0 - y[i]);
    return s;
  };
  g.dual_grad = [](const Vector& y) {
    Vector x(y.size());
    for (Index i = 0; i < y.size(); ++i) x[i] = std::log(y[i] / (1.0 - y[i]));
    return x;
  };
  g.dual_hess = [](const Vector& y) {
    Matrix h = Matrix::Zero(y.size(), y.size());
    for (Index i = 0; i < y.size(); ++i) h(i, i) = 1.0 / (y[i] * (1.0 - y[i]));
    return h;
  };
  g.dual_third = [](const Vector& y) {
    SymTensor3 t(y.size());
    for (Index i = 0; i < y.size(); ++i) {
      double p = y[i] * (1.0 - y[i]);
      t(i, i, i) = (2.0 * y[i] - 1.0) / (p * p);
    }
    return t;
  };
  return g;
}

/* ---------------------------------------------------------------- */
/* sinhcube: Omega(t) = sum log(sinh t_i / t_i); the mirror map is  */
/* the coordinatewise Langevin function coth t - 1/t onto (-1,1)^d. */
/* ---------------------------------------------------------------- */

double log_sinhc(double t) {
  t = std::abs(t);
  if (t < 0.1) {
    double t2 = t * t;
    return t2 / 6.0 - t2 * t2 / 180.0 + t2 * t2 * t2 / 2835.0;
  }
  if (t < 20.0) return std::log(std::sinh(t) / t);
  return t - std::log(2.0 * t) + std::log1p(-std::exp(-2.0 * t));
}

double langevin(double t) {
  if (std::abs(t) < 1e-4) return t / 3.0 - t * t * t / 45.0;
  return 1.0 / std::tanh(t) - 1.0 / t;
}

double langevin_prime(double t) {
  if (std::abs(t) < 1e-2) {
    double t2 = t * t;
    return 1.0 / 3.0 - t2 / 15.0 + 2.0 * t2 * t2 / 189.0;
  }
  double s = std::sinh(t);
  return 1.0 / (t * t) - 1.0 / (s * s);
}

double langevin_second(double t) {
  if (std::abs(t) < 1e-2) return -2.0 * t / 15.0 + 8.0 * t * t * t / 189.0;
  if (std::abs(t) > 30.0) return -2.0 / (t * t * t);  // cosh/sinh^3 < 1e-25
  double s = std::sinh(t);
  return -2.0 / (t * t * t) + 2.0 * std::cosh(t) / (s * s * s);
}

double langevin_inverse(double y) {
  if (std::abs(y) >= 1.0)
    throw domain_violation("sinhcube: Langevin inverse needs |y| < 1", 0);
  if (y == 0.0) return 0.0;
  double sign = y < 0.0 ? -1.0 : 1.0;
  double ya = std::abs(y);
  /* Bracket [lo, hi] with L(lo) <= ya <= L(hi). */
  double lo = 0.0;
  double hi = 3.0 * ya / (1.0 - ya * ya);
  while (langevin(hi) < ya) hi *= 2.0;
  double t = std::min(hi, 3.0 * ya / (1.0 - ya * ya));
  for (int it = 0; it < 100; ++it) {
    double f = langevin(t) - ya;
    if (f > 0.0)
      hi = t;
    else
      lo = t;
    if (std::abs(f) < 1e-15) return sign * t;
    double step = f / langevin_prime(t);
    double next = t - step;
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);  // safeguard
    if (std::abs(next - t) <= 1e-12 * (1.0 + std::abs(next))) return sign * next;
    t = next;
  }
  throw convergence_error("sinhcube: Langevin inverse did not converge",
                          std::abs(langevin(t) - ya));
}

Generator sinhcube(Index d) {
  Generator g;
  g.name = "sinhcube";
  g.dim = d;
  g.primal_violation = all_finite_violation;
  g.dual_violation = [](const Vector& y) {
    for (Index i = 0; i < y.size(); ++i)
      if (!(std::abs(y[i]) < 1.0 - kDomainMargin)) return int(i);
    return -1;
  };
  g.value = [](const Vector& x) {
    double s = 0.0;
    for (Index i = 0; i < x.size(); ++i) s += log_sinhc(x[i]);
    return s;
  };
  g.grad = [](const Vector& x) {
    Vector y(x.size());
    for (Index i = 0; i < x.size(); ++i) y[i] = langevin(x[i]);
    return y;
  };
  g.hess = [](const Vector& x) {
    Matrix h = Matrix::Zero(x.size(), x.size());
    for (Index i = 0; i < x.size(); ++i) h(i, i) = langevin_prime(x[i]);
    return h;
  };
  g.dual_value = [](const Vector& y) {
    double s = 0.0;
    for (Index i = 0; i < y.size(); ++i) {
      double t = langevin_inverse(y[i]);
      s += t * y[i] - log_sinhc(t);
    }
    return s;
  };
  g.dual_grad = [](const Vector& y) {
    Vector x(y.size());
    for (Index i = 0; i < y.size(); ++i) x[i] = langevin_inverse(y[i]);
    return x;
  };
  g.dual_hess = [](const Vector& y) {
    Matrix h = Matrix::Zero(y.size(), y.size());
    for (Index i = 0; i < y.size(); ++i)
      h(i, i) = 1.0 / langevin_prime(langevin_inverse(y[i]));
    return h;
  };
  g.dual_third = [](const Vector& y) {
    SymTensor3 t3(y.size());
    for (Index i = 0; i < y.size(); ++i) {
      double t = langevin_inverse(y[i]);
      double lp = langevin_prime(t);
      t3(i, i, i) = -langevin_second(t) / (lp * lp * lp);
    }
    return t3;
  };
  return g;
}

std::vector<std::string> generator_names() {
  return {"quadratic", "logsumexp", "diaglogistic", "sinhcube"};
}

Generator make_generator(const std::string& name, Index d) {
  if (d < 1) throw input_error("generator dimension must be positive");
  if (name == "quadratic") return quadratic(d);
  if (name == "logsumexp") return logsumexp(d);
  if (name == "diaglogistic") return diaglogistic(d);
  if (name == "sinhcube") return sinhcube(d);
  throw input_error("unknown generator '" + name + "'");
}

double bregman(const Generator& gen, const Vector& x, const Vector& xp) {
  gen.require_primal(x, "bregman");
  gen.require_primal(xp, "bregman");
  return gen.value(x) - gen.value(xp) - gen.grad(xp).dot(x - xp);
}

double canonical_divergence(const Generator& gen, const Vector& x_p,
                            const Vector& y_q) {
  gen.require_primal(x_p, "canonical_divergence");
  gen.require_dual(y_q, "canonical_divergence");
  return gen.value(x_p) + gen.dual_value(y_q) - x_p.dot(y_q);
}

SymTensor3 dual_third_default(const Generator& gen, const Vector& y, double h) {
  gen.require_dual(y, "dual_third_default");
  if (h <= 0.0) h = 1e-4 * std::max(1.0, y.cwiseAbs().maxCoeff());
  Index d = gen.dim;
  SymTensor3 t(d);
  Vector yp = y, ym = y;
  for (Index k = 0; k < d; ++k) {
    yp[k] = y[k] + h;
    ym[k] = y[k] - h;
    if (!gen.dual_contains(yp) || !gen.dual_contains(ym))
      throw stencil_error(gen.name +
                          ": finite-difference stencil for the dual third "
                          "derivative leaves the domain (coordinate " +
                          std::to_string(k) + ", step " + std::to_string(h) + ")");
    Matrix hp = gen.dual_hess(yp), hm = gen.dual_hess(ym);
    for (Index i = 0; i < d; ++i)
      for (Index j = 0; j < d; ++j) t(i, j, k) = (hp(i, j) - hm(i, j)) / (2.0 * h);
    yp[k] = y[k];
    ym[k] = y[k];
  }
  return t.symmetrized();
}

}  // namespace bw
