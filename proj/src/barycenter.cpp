#include "bw/barycenter.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "bw/rng.hpp"

namespace bw {

namespace {

void validate_inputs(const std::vector<DiscreteMeasure>& nus,
                     const Vector& lambdas, Index gen_dim) {
  if (nus.empty()) throw input_error("barycenter: no input measures");
  if (Index(nus.size()) != lambdas.size())
    throw input_error("barycenter: lambda count does not match measure count");
  double s = 0.0;
  for (Index i = 0; i < lambdas.size(); ++i) {
    if (!(lambdas[i] > 0.0))
      throw input_error("barycenter: lambdas must be positive");
    s += lambdas[i];
  }
  if (std::abs(s - 1.0) > 1e-9)
    throw input_error("barycenter: lambdas must sum to 1");
  for (const auto& nu : nus)
    if (nu.dim() != gen_dim)
      throw input_error("barycenter: measure dimension does not match generator");
}

}  // namespace

BarycenterResult barycenter_fixed_point(const Generator& gen,
                                        const std::vector<DiscreteMeasure>& nus,
                                        const Vector& lambdas, Index k,
                                        const SolverConfig& cfg,
                                        std::uint64_t seed,
                                        const Matrix* init_support) {
  validate_inputs(nus, lambdas, gen.dim);
  if (k < 1) throw input_error("barycenter: support size must be positive");
  const Index d = gen.dim;
  const std::size_t m = nus.size();

  Matrix support(k, d);
  if (init_support) {
    if (init_support->rows() != k || init_support->cols() != d)
      throw input_error("barycenter: init support has wrong shape");
    support = *init_support;
  } else {
    /* Initial support: per atom, a lambda-weighted Euclidean mean of one
       randomly chosen atom from each input. */
    SplitRng rng(seed);
    for (Index j = 0; j < k; ++j) {
      Vector z = Vector::Zero(d);
      for (std::size_t l = 0; l < m; ++l) {
        int pick = rng.uniform_int(0, int(nus[l].size()) - 1);
        z += lambdas[Index(l)] * nus[l].points.row(pick).transpose();
      }
      support.row(j) = z;
    }
  }
  Vector bar_w = Vector::Constant(k, 1.0 / double(k));

  BarycenterResult res;
  const int max_sweeps = std::clamp(cfg.max_iters, 1, 1000);
  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    DiscreteMeasure bar{support, bar_w};

    /* (a) re-solve every plan exactly against the current support */
    res.plans.clear();
    double obj = 0.0;
    for (std::size_t l = 0; l < m; ++l) {
      Matrix C = cost_matrix(gen, nus[l], bar);
      res.plans.push_back(solve_exact(C, nus[l].weights, bar_w));
      obj += lambdas[Index(l)] * res.plans.back().cost;
    }
    res.objective_trace.push_back(obj);
    res.objective = obj;
    res.iterations = sweep + 1;

    /* (b) move every atom to the weighted mean of its incoming mass */
    Matrix next = Matrix::Zero(k, d);
    Vector col_mass =
        Vector::Constant(k, std::numeric_limits<double>::infinity());
    for (std::size_t l = 0; l < m; ++l) {
      const Matrix& pi = res.plans[l].matrix;
      for (Index j = 0; j < k; ++j) {
        Vector num = Vector::Zero(d);
        double mass = 0.0;
        for (Index a = 0; a < nus[l].size(); ++a) {
          num += pi(a, j) * nus[l].points.row(a).transpose();
          mass += pi(a, j);
        }
        col_mass[j] = std::min(col_mass[j], mass);
        if (mass > 0.0) next.row(j) += lambdas[Index(l)] * num.transpose() / bar_w[j];
      }
    }
    for (Index j = 0; j < k; ++j)
      if (col_mass[j] < 1e-15) {
        /* No plan routes mass here; re-seed from the heaviest input atom. */
        warning_handler()("barycenter: support atom " + std::to_string(j) +
                          " received no mass; reinitializing");
        Index heavy_l = 0, heavy_a = 0;
        double best = -1.0;
        for (std::size_t l = 0; l < m; ++l)
          for (Index a = 0; a < nus[l].size(); ++a)
            if (nus[l].weights[a] > best) {
              best = nus[l].weights[a];
              heavy_l = Index(l);
              heavy_a = a;
            }
        next.row(j) = nus[std::size_t(heavy_l)].points.row(heavy_a);
      }

    double movement = (next - support).cwiseAbs().maxCoeff();
    support = next;
    if (movement < cfg.marginal_tol) break;
  }

  res.barycenter = DiscreteMeasure{support, bar_w};
  return res;
}

MultimarginalResult multimarginal_bruteforce(
    const Generator& gen, const std::vector<DiscreteMeasure>& nus,
    const Vector& lambdas) {
  validate_inputs(nus, lambdas, gen.dim);
  const std::size_t m = nus.size();
  const Index N = nus[0].size();
  if (m > 3) throw input_error("multimarginal oracle: at most 3 measures");
  if (N > 4) throw input_error("multimarginal oracle: at most 4 atoms");
  for (const auto& nu : nus) {
    if (nu.size() != N)
      throw input_error("multimarginal oracle: equal-size supports required");
    for (Index i = 0; i < N; ++i)
      if (std::abs(nu.weights[i] - 1.0 / double(N)) > 1e-12)
        throw input_error("multimarginal oracle: uniform weights required");
  }

  /* All permutations of {0..N-1} in lexicographic order. */
  std::vector<std::vector<int>> perms;
  {
    std::vector<int> p(static_cast<std::size_t>(N));
    for (Index i = 0; i < N; ++i) p[std::size_t(i)] = int(i);
    do {
      perms.push_back(p);
    } while (std::next_permutation(p.begin(), p.end()));
  }

  auto tuple_cost = [&](const std::vector<std::size_t>& choice, Matrix* atoms) {
    double total = 0.0;
    for (Index a = 0; a < N; ++a) {
      Vector mean = Vector::Zero(gen.dim);
      for (std::size_t l = 0; l < m; ++l) {
        int row = l == 0 ? int(a) : perms[choice[l - 1]][std::size_t(a)];
        mean += lambdas[Index(l)] * nus[l].points.row(row).transpose();
      }
      if (atoms) atoms->row(a) = mean;
      for (std::size_t l = 0; l < m; ++l) {
        int row = l == 0 ? int(a) : perms[choice[l - 1]][std::size_t(a)];
        total += lambdas[Index(l)] *
                 bregman(gen, Vector(nus[l].points.row(row)), mean) / double(N);
      }
    }
    return total;
  };

  MultimarginalResult best;
  best.value = std::numeric_limits<double>::infinity();
  std::vector<std::size_t> choice(m > 1 ? m - 1 : 0, 0);
  std::vector<std::size_t> best_choice = choice;
  while (true) {
    double c = tuple_cost(choice, nullptr);
    /* Strict improvement beyond a tie tolerance keeps the first (and so
       lexicographically smallest) minimizer stable. */
    if (c < best.value - 1e-13 * (1.0 + std::abs(c))) {
      best.value = c;
      best_choice = choice;
    }
    std::size_t pos = choice.size();
    while (pos > 0 && choice[pos - 1] + 1 == perms.size()) {
      choice[pos - 1] = 0;
      --pos;
    }
    if (pos == 0) break;
    ++choice[pos - 1];
  }

  Matrix atoms(N, gen.dim);
  best.value = tuple_cost(best_choice, &atoms);
  best.assignment.clear();
  {
    std::vector<int> ident(static_cast<std::size_t>(N));
    for (Index i = 0; i < N; ++i) ident[std::size_t(i)] = int(i);
    best.assignment.push_back(ident);
    for (std::size_t l = 1; l < m; ++l)
      best.assignment.push_back(perms[best_choice[l - 1]]);
  }
  best.barycenter = uniform_measure(atoms);
  return best;
}

}  // namespace bw
