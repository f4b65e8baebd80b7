#include <cmath>
#include <limits>

#include "bw/transport.hpp"

namespace bw {

namespace {

/* f_i = -eps * log sum_j exp(logw_j + (pot_j - C(i,j)) / eps), computed
   against rows (transpose=false) or columns (transpose=true) of C. */
void lse_update(const Matrix& C, const Vector& logw, const Vector& pot,
                double eps, bool transpose, Vector& out) {
  const Index rows = transpose ? C.cols() : C.rows();
  const Index cols = transpose ? C.rows() : C.cols();
  for (Index i = 0; i < rows; ++i) {
    double m = -std::numeric_limits<double>::infinity();
    for (Index j = 0; j < cols; ++j) {
      double t = logw[j] + (pot[j] - (transpose ? C(j, i) : C(i, j))) / eps;
      m = std::max(m, t);
    }
    double s = 0.0;
    for (Index j = 0; j < cols; ++j) {
      double t = logw[j] + (pot[j] - (transpose ? C(j, i) : C(i, j))) / eps;
      s += std::exp(t - m);
    }
    out[i] = -eps * (m + std::log(s));
  }
}

}  // namespace

TransportPlan solve_sinkhorn(const Matrix& cost, const Vector& a,
                             const Vector& b, const SolverConfig& cfg,
                             SinkhornInfo* info, const Vector* f0,
                             const Vector* g0) {
  const Index n = a.size(), m = b.size();
  if (cost.rows() != n || cost.cols() != m)
    throw input_error("sinkhorn: cost matrix shape does not match marginals");
  if (!(cfg.epsilon > 0.0))
    throw input_error("sinkhorn: epsilon must be positive");
  for (Index i = 0; i < n; ++i)
    if (!(a[i] > 0.0)) throw input_error("sinkhorn: source weights must be positive");
  for (Index j = 0; j < m; ++j)
    if (!(b[j] > 0.0)) throw input_error("sinkhorn: target weights must be positive");

  Vector loga = a.array().log().matrix(), logb = b.array().log().matrix();
  Vector f = f0 ? *f0 : Vector::Zero(n);
  Vector g = g0 ? *g0 : Vector::Zero(m);

  /* Stabilized kernel iterations: K holds the plan at the absorbed
     potentials (f, g) and the running scalings (u, v) stay near 1, so
     each sweep is two mat-vecs instead of two log-sum-exp passes.  When
     a scaling drifts (or a row of K underflows entirely) the scalings
     are folded back into the potentials and K is rebuilt. */
  Matrix K(n, m);
  Vector u = Vector::Ones(n), v = Vector::Ones(m);
  auto rebuild = [&](double e) {
    for (Index i = 0; i < n; ++i)
      for (Index j = 0; j < m; ++j)
        K(i, j) = std::exp(loga[i] + logb[j] + (f[i] + g[j] - cost(i, j)) / e);
    u.setOnes();
    v.setOnes();
  };
  auto absorb = [&](double e) {
    f += e * u.array().log().matrix();
    g += e * v.array().log().matrix();
    rebuild(e);
  };
  constexpr double kDriftHi = 1e13, kDriftLo = 1e-13;  // ~|log u| > 30

  /* Epsilon scaling: anneal from the cost scale down to the target,
     warm-starting the potentials (they live in cost units).  Potentials
     supplied by the caller replace the annealing ladder. */
  const double eps_target = cfg.epsilon;
  const bool warm = f0 != nullptr && g0 != nullptr;
  double eps = warm ? eps_target
                    : std::max(eps_target, cost.cwiseAbs().maxCoeff() / 8.0);
  int iters = 0;
  double viol = std::numeric_limits<double>::infinity();
  while (true) {
    const bool final_stage = eps <= eps_target * (1.0 + 1e-12);
    const double tol =
        final_stage ? cfg.marginal_tol : std::max(cfg.marginal_tol, 1e-6);
    const int budget =
        final_stage ? cfg.max_iters - iters : std::min(500, cfg.max_iters - iters);
    rebuild(eps);
    viol = std::numeric_limits<double>::infinity();
    for (int it = 0; it < budget && viol > tol; ++it) {
      Vector Kv = K * v;
      if (!(Kv.minCoeff() > 0.0) || !Kv.allFinite()) {
        /* Degenerate kernel row: take one log-domain sweep instead. */
        absorb(eps);
        Vector fnext(n), gnext(m);
        lse_update(cost, logb, g, eps, false, fnext);
        f = fnext;  // rows now exact
        lse_update(cost, loga, f, eps, true, gnext);
        viol = 0.0;
        for (Index j = 0; j < m; ++j)
          viol = std::max(viol,
                          b[j] * std::abs(std::expm1((g[j] - gnext[j]) / eps)));
        g = gnext;  // columns now exact
        rebuild(eps);
        ++iters;
        continue;
      }
      u = a.cwiseQuotient(Kv);  // rows now exact
      Vector KTu = K.transpose() * u;
      viol = 0.0;
      for (Index j = 0; j < m; ++j)
        viol = std::max(viol, std::abs(v[j] * KTu[j] - b[j]));
      if (!(KTu.minCoeff() > 0.0) || !KTu.allFinite()) {
        absorb(eps);
        ++iters;
        continue;
      }
      v = b.cwiseQuotient(KTu);  // columns now exact
      ++iters;
      if (u.maxCoeff() > kDriftHi || u.minCoeff() < kDriftLo ||
          v.maxCoeff() > kDriftHi || v.minCoeff() < kDriftLo)
        absorb(eps);
    }
    absorb(eps);  // fold the scalings back into the potentials
    if (final_stage) break;
    eps = std::max(eps_target, eps * 0.25);
  }
  if (viol > cfg.marginal_tol)
    throw convergence_error(
        "sinkhorn did not reach the marginal tolerance in " +
            std::to_string(cfg.max_iters) + " iterations (violation " +
            format_double(viol) + ")",
        viol);

  TransportPlan plan;
  plan.matrix.resize(n, m);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < m; ++j)
      plan.matrix(i, j) = std::exp(loga[i] + logb[j] +
                                   (f[i] + g[j] - cost(i, j)) / eps_target);
  plan.row_marginal = plan.matrix.rowwise().sum();
  plan.col_marginal = plan.matrix.colwise().sum().transpose();
  plan.cost = (plan.matrix.array() * cost.array()).sum();

  if (info) {
    info->f = f;
    info->g = g;
    info->transport_cost = plan.cost;
    double kl = 0.0;
    for (Index i = 0; i < n; ++i)
      for (Index j = 0; j < m; ++j)
        kl += plan.matrix(i, j) * (f[i] + g[j] - cost(i, j)) / eps_target;
    info->entropic_objective = plan.cost + eps_target * kl;
    info->marginal_violation = viol;
    info->iterations = iters;
  }
  return plan;
}

}  // namespace bw
