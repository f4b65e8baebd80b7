#include <cmath>
#include <vector>

#include "bw/transport.hpp"

namespace bw {

Matrix cost_matrix(const Generator& gen, const DiscreteMeasure& mu,
                   const DiscreteMeasure& nu) {
  if (mu.dim() != gen.dim || nu.dim() != gen.dim)
    throw input_error(gen.name + ": cost_matrix dimension mismatch (" +
                      std::to_string(mu.dim()) + " and " +
                      std::to_string(nu.dim()) + " vs generator " +
                      std::to_string(gen.dim) + ")");

  const Index n = mu.size(), m = nu.size();
  Vector val_mu(n), val_nu(m);
  std::vector<Vector> grad_nu(static_cast<std::size_t>(m));
  for (Index i = 0; i < n; ++i) {
    Vector x = mu.points.row(i);
    gen.require_primal(x, "cost_matrix");
    val_mu[i] = gen.value(x);
  }
  for (Index j = 0; j < m; ++j) {
    Vector xp = nu.points.row(j);
    gen.require_primal(xp, "cost_matrix");
    val_nu[j] = gen.value(xp);
    grad_nu[std::size_t(j)] = gen.grad(xp);
  }

  Matrix C(n, m);
  for (Index i = 0; i < n; ++i) {
    Vector x = mu.points.row(i);
    for (Index j = 0; j < m; ++j) {
      Vector xp = nu.points.row(j);
      C(i, j) = val_mu[i] - val_nu[j] - grad_nu[std::size_t(j)].dot(x - xp);
    }
  }
  return C;
}

BwResult bw_divergence(const Generator& gen, const DiscreteMeasure& mu,
                       const DiscreteMeasure& nu, const SolverConfig& cfg) {
  Matrix C = cost_matrix(gen, mu, nu);
  BwResult out;
  if (cfg.method == Method::exact)
    out.plan = solve_exact(C, mu.weights, nu.weights);
  else
    out.plan = solve_sinkhorn(C, mu.weights, nu.weights, cfg);
  out.value = out.plan.cost;
  return out;
}

double bw_via_mirror(const Generator& gen, const DiscreteMeasure& mu,
                     const DiscreteMeasure& nu) {
  Matrix ydual = to_dual(gen, nu);  // checks domains and dimensions
  const Index n = mu.size(), m = nu.size();

  Matrix C(n, m);
  for (Index i = 0; i < n; ++i) {
    Vector x = mu.points.row(i);
    gen.require_primal(x, "bw_via_mirror");
    for (Index j = 0; j < m; ++j)
      C(i, j) = 0.5 * (x - ydual.row(j).transpose()).squaredNorm();
  }
  double value = solve_exact(C, mu.weights, nu.weights).cost;

  /* Re-centered generator pair: Omega - |.|^2/2 and Omega* - |.|^2/2. */
  for (Index i = 0; i < n; ++i) {
    Vector x = mu.points.row(i);
    value += mu.weights[i] * (gen.value(x) - 0.5 * x.squaredNorm());
  }
  for (Index j = 0; j < m; ++j) {
    Vector y = ydual.row(j);
    value += nu.weights[j] * (gen.dual_value(y) - 0.5 * y.squaredNorm());
  }
  return value;
}

}  // namespace bw
