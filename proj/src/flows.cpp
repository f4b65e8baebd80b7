#include "bw/flows.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

namespace bw {

GridMeasure1D make_grid_measure(Vector grid, Vector probs) {
  if (grid.size() != probs.size() || grid.size() < 2)
    throw input_error("grid measure: need matching grid/probs with >= 2 points");
  for (Index i = 0; i + 1 < grid.size(); ++i)
    if (!(grid[i] < grid[i + 1]))
      throw input_error("grid measure: grid must be strictly increasing");
  double s = 0.0;
  for (Index i = 0; i < probs.size(); ++i) {
    if (!(probs[i] >= 0.0) || !std::isfinite(probs[i]))
      throw input_error("grid measure: probabilities must be nonnegative");
    s += probs[i];
  }
  if (std::abs(s - 1.0) > 1e-6)
    throw input_error("grid measure: probabilities must sum to 1");
  probs /= s;
  return GridMeasure1D{std::move(grid), std::move(probs)};
}

GridMeasure1D uniform_grid_measure(Index n, double lo, double hi) {
  if (n < 2 || !(lo < hi)) throw input_error("grid measure: bad grid request");
  Vector grid(n);
  for (Index i = 0; i < n; ++i)
    grid[i] = lo + (hi - lo) * double(i) / double(n - 1);
  return GridMeasure1D{grid, Vector::Constant(n, 1.0 / double(n))};
}

double FreeEnergySpec::value(const Vector& probs) const {
  double s = 0.0;
  for (Index i = 0; i < probs.size(); ++i) {
    s += potential[i] * probs[i];
    if (probs[i] > 0.0) s += beta * probs[i] * std::log(probs[i]);
  }
  return s;
}

Vector FreeEnergySpec::gradient(const Vector& probs) const {
  Vector g(probs.size());
  for (Index i = 0; i < probs.size(); ++i)
    g[i] = potential[i] +
           beta * (1.0 + std::log(std::max(probs[i], 1e-300)));
  return g;
}

Vector gibbs_measure(const FreeEnergySpec& spec) {
  if (!(spec.beta > 0.0))
    throw input_error("gibbs measure: beta must be positive");
  double vmin = spec.potential.minCoeff();
  Vector g(spec.potential.size());
  for (Index i = 0; i < g.size(); ++i)
    g[i] = std::exp(-(spec.potential[i] - vmin) / spec.beta);
  return g / g.sum();
}

double kl_divergence(const Vector& p, const Vector& q) {
  if (p.size() != q.size()) throw input_error("kl: size mismatch");
  double s = 0.0;
  for (Index i = 0; i < p.size(); ++i) {
    if (p[i] <= 0.0) continue;
    if (q[i] <= 0.0) return std::numeric_limits<double>::infinity();
    s += p[i] * std::log(p[i] / q[i]);
  }
  return s;
}

Matrix grid_cost_matrix(const Generator& gen, const Vector& grid) {
  if (gen.dim != 1)
    throw input_error("grid flows are 1-D; generator dimension must be 1");
  const Index n = grid.size();
  Vector val(n), grd(n);
  for (Index i = 0; i < n; ++i) {
    Vector x(1);
    x[0] = grid[i];
    gen.require_primal(x, "grid_cost_matrix");
    val[i] = gen.value(x);
    grd[i] = gen.grad(x)[0];
  }
  Matrix C(n, n);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j)
      C(i, j) = val[i] - val[j] - grd[j] * (grid[i] - grid[j]);
  return C;
}

double default_epsilon(const Matrix& cost) {
  std::vector<double> pos;
  for (Index i = 0; i < cost.rows(); ++i)
    for (Index j = 0; j < cost.cols(); ++j)
      if (cost(i, j) > 0.0) pos.push_back(cost(i, j));
  if (pos.empty()) return 1e-2;
  std::nth_element(pos.begin(), pos.begin() + long(pos.size() / 2), pos.end());
  return 1e-2 * pos[pos.size() / 2];
}

namespace {

GridMeasure1D jko_step_with_cost(const Generator&, const FreeEnergySpec& spec,
                                 const GridMeasure1D& mu_k, double delta,
                                 double epsilon, const SolverConfig& cfg,
                                 bool swap_proximal, const Matrix& C,
                                 JkoStepInfo* info, Vector* f_carry,
                                 Vector* g_carry) {
  if (!(delta > 0.0)) throw input_error("jko: delta must be positive");
  if (spec.potential.size() != mu_k.grid.size())
    throw input_error("jko: potential not sampled on the flow grid");
  const Index n = mu_k.grid.size();

  SolverConfig scfg;
  scfg.epsilon = epsilon;
  scfg.marginal_tol = std::min(cfg.marginal_tol, 1e-9);
  scfg.max_iters = cfg.max_iters;

  /* Entropic proximal term and its first-marginal gradient (the optimal
     dual potential); potentials warm-start across evaluations, and a
     caller-held carry warm-starts across flow steps. */
  Vector f = Vector::Zero(n), g = Vector::Zero(n);
  bool have_warm = false;
  if (f_carry && g_carry && f_carry->size() == n && g_carry->size() == n) {
    f = *f_carry;
    g = *g_carry;
    have_warm = true;
  }
  auto proximal = [&](const Vector& p, Vector& grad_out) {
    SinkhornInfo si;
    const Vector* wf = have_warm ? &f : nullptr;
    const Vector* wg = have_warm ? &g : nullptr;
    if (swap_proximal)
      solve_sinkhorn(C, mu_k.probs, p, scfg, &si, wf, wg);
    else
      solve_sinkhorn(C, p, mu_k.probs, scfg, &si, wf, wg);
    f = si.f;
    g = si.g;
    have_warm = true;
    grad_out = swap_proximal ? si.g : si.f;
    return si.entropic_objective;
  };

  Vector mu = mu_k.probs.cwiseMax(1e-300);
  mu /= mu.sum();
  Vector grad_prox(n);
  double objective = spec.value(mu) + proximal(mu, grad_prox) / delta;
  const double objective_start = objective;

  double rate = 1.0;
  double residual = std::numeric_limits<double>::infinity();
  int inner = 0;
  bool at_floor = false;
  const int inner_cap = std::min(cfg.max_iters, 500);
  for (; inner < inner_cap && !at_floor; ++inner) {
    Vector grad = spec.gradient(mu) + grad_prox / delta;
    double mean = mu.dot(grad);
    double scale = 1.0 + grad.cwiseAbs().maxCoeff();
    residual = 0.0;
    for (Index i = 0; i < n; ++i)
      residual = std::max(residual, std::abs(mu[i] * (grad[i] - mean)) / scale);
    if (residual <= cfg.marginal_tol) break;
    if (!std::isfinite(objective))
      throw step_error("jko: objective is not finite");

    /* Mirror step mu <- softmax(log mu - rate * grad); reject and halve
       the rate until the proximal objective stops increasing. */
    bool accepted = false;
    for (int half = 0; half < 60 && !accepted; ++half) {
      Vector z(n);
      for (Index i = 0; i < n; ++i)
        z[i] = std::log(mu[i]) - rate * grad[i];
      double zmax = z.maxCoeff();
      Vector mu_new(n);
      for (Index i = 0; i < n; ++i)
        mu_new[i] = std::max(std::exp(z[i] - zmax), 1e-300);
      mu_new /= mu_new.sum();

      Vector grad_prox_new(n);
      double objective_new =
          spec.value(mu_new) + proximal(mu_new, grad_prox_new) / delta;
      if (objective_new <= objective + 1e-12 * (1.0 + std::abs(objective))) {
        double movement = (mu_new - mu).cwiseAbs().sum();
        mu = mu_new;
        grad_prox = grad_prox_new;
        objective = objective_new;
        rate = std::min(rate * 1.5, 64.0);
        accepted = true;
        at_floor = movement < 1e-14;  // iterate pinned at precision floor
      } else {
        rate *= 0.5;
      }
    }
    if (!accepted) break;  // no descent possible at any rate: stationary
  }

  if (info) {
    info->objective_start = objective_start;
    info->objective_end = objective;
    info->kkt_residual = residual;
    info->inner_iterations = inner;
  }
  if (f_carry) *f_carry = f;
  if (g_carry) *g_carry = g;
  return GridMeasure1D{mu_k.grid, mu};
}

}  // namespace

GridMeasure1D jko_step(const Generator& gen, const FreeEnergySpec& spec,
                       const GridMeasure1D& mu_k, double delta, double epsilon,
                       const SolverConfig& cfg, bool swap_proximal,
                       JkoStepInfo* info) {
  Matrix C = grid_cost_matrix(gen, mu_k.grid);
  if (epsilon <= 0.0) epsilon = default_epsilon(C);
  return jko_step_with_cost(gen, spec, mu_k, delta, epsilon, cfg, swap_proximal,
                            C, info, nullptr, nullptr);
}

FlowResult run_flow(const Generator& gen, const FreeEnergySpec& spec,
                    const GridMeasure1D& mu0, double delta, double epsilon,
                    int steps, const SolverConfig& cfg, bool swap_proximal) {
  if (steps < 0) throw input_error("run_flow: steps must be nonnegative");
  Matrix C = grid_cost_matrix(gen, mu0.grid);
  if (epsilon <= 0.0) epsilon = default_epsilon(C);

  FlowResult out;
  out.grid = mu0.grid;
  GridMeasure1D mu = mu0;
  out.trajectory.push_back(mu.probs);
  out.energy.push_back(spec.value(mu.probs));
  Vector f_carry, g_carry;  // dual potentials persist across steps
  for (int k = 0; k < steps; ++k) {
    JkoStepInfo si;
    mu = jko_step_with_cost(gen, spec, mu, delta, epsilon, cfg, swap_proximal,
                            C, &si, &f_carry, &g_carry);
    out.trajectory.push_back(mu.probs);
    out.energy.push_back(spec.value(mu.probs));
    out.steps.push_back(si);
  }
  return out;
}

}  // namespace bw
