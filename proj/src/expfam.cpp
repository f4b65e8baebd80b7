#include "bw/expfam.hpp"

#include <algorithm>
#include <cmath>

namespace bw {

namespace {

void check_sigma(const MatchingInstance& inst, const std::vector<int>& sigma) {
  if (Index(sigma.size()) != inst.size())
    throw input_error("matching: permutation length does not match instance");
  std::vector<char> seen(sigma.size(), 0);
  for (int s : sigma) {
    if (s < 0 || Index(s) >= inst.size() || seen[std::size_t(s)])
      throw input_error("matching: sigma is not a permutation");
    seen[std::size_t(s)] = 1;
  }
}

/* Dual-side divergence B_{Omega*}(y', eta) via the generator's dual
   functions (the conjugate values come from the Langevin root-find, an
   independent route from the primal log-likelihood). */
double dual_bregman(const Generator& gen, const Vector& yp, const Vector& eta) {
  return gen.dual_value(yp) - gen.dual_value(eta) -
         gen.dual_grad(eta).dot(yp - eta);
}

Matrix matching_cost(const MatchingInstance& inst) {
  const Index N = inst.size();
  Matrix C(N, N);
  for (Index i = 0; i < N; ++i) {
    Vector eta = inst.etas.row(i);
    for (Index j = 0; j < N; ++j)
      C(i, j) = dual_bregman(inst.gen, Vector(inst.ys.row(j)), eta);
  }
  return C;
}

}  // namespace

MatchingInstance make_matching_instance(Matrix thetas, Matrix ys) {
  if (thetas.rows() != ys.rows() || thetas.cols() != ys.cols())
    throw input_error("matching instance: thetas and ys must share shape");
  if (thetas.rows() == 0 || thetas.cols() == 0)
    throw input_error("matching instance: empty inputs");

  MatchingInstance inst;
  inst.gen = sinhcube(thetas.cols());
  inst.thetas = std::move(thetas);
  inst.ys = std::move(ys);
  inst.etas.resize(inst.thetas.rows(), inst.thetas.cols());
  for (Index i = 0; i < inst.thetas.rows(); ++i) {
    Vector th = inst.thetas.row(i);
    inst.gen.require_primal(th, "matching instance (theta)");
    Vector y = inst.ys.row(i);
    inst.gen.require_dual(y, "matching instance (observation)");
    inst.etas.row(i) = inst.gen.grad(th);
  }
  return inst;
}

double loglik(const MatchingInstance& inst, const std::vector<int>& sigma) {
  check_sigma(inst, sigma);
  double s = 0.0;
  for (Index i = 0; i < inst.size(); ++i) {
    Vector th = inst.thetas.row(i);
    s += th.dot(inst.ys.row(sigma[std::size_t(i)])) - inst.gen.value(th);
  }
  return s;
}

std::pair<std::vector<int>, double> match_mle(const MatchingInstance& inst) {
  Matrix C = matching_cost(inst);
  auto sigma = solve_assignment(C);
  return {sigma, loglik(inst, sigma)};
}

std::pair<double, double> likelihood_identity_check(const MatchingInstance& inst,
                                                    const std::vector<int>& sigma) {
  check_sigma(inst, sigma);
  const double N = double(inst.size());
  double lhs = 0.0;
  for (Index i = 0; i < inst.size(); ++i)
    lhs += dual_bregman(inst.gen, Vector(inst.ys.row(sigma[std::size_t(i)])),
                        Vector(inst.etas.row(i)));
  lhs /= N;

  double conj = 0.0;
  for (Index j = 0; j < inst.size(); ++j)
    conj += inst.gen.dual_value(Vector(inst.ys.row(j)));
  double rhs = -loglik(inst, sigma) / N + conj / N;
  return {lhs, rhs};
}

TransportPlan soft_match(const MatchingInstance& inst, const Vector& w_theta,
                         const Vector& w_obs) {
  Matrix C = matching_cost(inst);
  return solve_exact(C, w_theta, w_obs);
}

Matrix sample_tilted_cube(const Matrix& thetas, SplitRng& rng) {
  Matrix ys(thetas.rows(), thetas.cols());
  for (Index i = 0; i < thetas.rows(); ++i)
    for (Index j = 0; j < thetas.cols(); ++j) {
      double th = thetas(i, j);
      double u = rng.uniform01();
      double y;
      if (th == 0.0) {
        y = 2.0 * u - 1.0;
      } else {
        /* Invert F(y) = (e^{th y} - e^{-th}) / (2 sinh th); stable via
           log1p since the argument tends to 0 with th. */
        y = std::log1p(std::expm1(-th) + 2.0 * u * std::sinh(th)) / th;
      }
      ys(i, j) = std::clamp(y, -1.0 + 1e-9, 1.0 - 1e-9);
    }
  return ys;
}

}  // namespace bw
