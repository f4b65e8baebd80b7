#pragma once

#include <optional>
#include <vector>

#include "bw/defs.hpp"
#include "bw/errors.hpp"
#include "bw/generator.hpp"
#include "bw/measure.hpp"

namespace bw {

enum class Method { exact, sinkhorn };

struct SolverConfig {
  Method method = Method::exact;
  double epsilon = 1e-2;       // entropic regularization strength
  double marginal_tol = 1e-9;  // Sinkhorn marginal violation / fixed-point tol
  int max_iters = 100000;
};

struct TransportPlan {
  Matrix matrix;        // n x m coupling
  Vector row_marginal;  // matrix * 1
  Vector col_marginal;  // matrix^T * 1
  double cost = 0.0;    // sum_ij matrix_ij * C_ij
};

/* Dual certificate from the exact solver: potentials with
   u_i + v_j <= C_ij and duality_gap = primal - dual objective. */
struct ExactDiagnostics {
  Vector u, v;
  double duality_gap = 0.0;
  double min_reduced_cost = 0.0;
};

/* Extra outputs from the entropic solver. */
struct SinkhornInfo {
  Vector f, g;  // dual potentials in cost units
  double transport_cost = 0.0;
  double entropic_objective = 0.0;  // transport + eps * KL(plan | a (x) b)
  double marginal_violation = 0.0;
  int iterations = 0;
};

/* C_ij = B(mu_i, nu_j) under the generator's divergence. */
Matrix cost_matrix(const Generator& gen, const DiscreteMeasure& mu,
                   const DiscreteMeasure& nu);

/* Optimal assignment (square cost, one column per row) by shortest
   augmenting paths; returns the column matched to each row. */
std::vector<int> solve_assignment(const Matrix& cost, double* value = nullptr,
                                  Vector* u = nullptr, Vector* v = nullptr);

/* Exact linear-program solve of the transportation problem.  Uniform
   square instances route through solve_assignment; everything else runs
   a bipartite network simplex.  The duality gap of the result is at most
   1e-9 (a convergence_error is thrown otherwise). */
TransportPlan solve_exact(const Matrix& cost, const Vector& a, const Vector& b,
                          ExactDiagnostics* diag = nullptr);

/* Log-domain Sinkhorn with epsilon scaling.  The plan cost is the
   transport term sum pi * C; the entropic objective lives in `info`.
   Optional f0/g0 warm-start the potentials. */
TransportPlan solve_sinkhorn(const Matrix& cost, const Vector& a,
                             const Vector& b, const SolverConfig& cfg,
                             SinkhornInfo* info = nullptr,
                             const Vector* f0 = nullptr,
                             const Vector* g0 = nullptr);

struct BwResult {
  double value = 0.0;
  TransportPlan plan;
};

/* Divergence between measures: optimal expected pointwise divergence
   over couplings, by the configured solver. */
BwResult bw_divergence(const Generator& gen, const DiscreteMeasure& mu,
                       const DiscreteMeasure& nu, const SolverConfig& cfg = {});

/* Same value through the re-centered route: a quadratic transport
   between primal atoms of mu and dual atoms of nu plus integrals of the
   re-centered generator pair. */
double bw_via_mirror(const Generator& gen, const DiscreteMeasure& mu,
                     const DiscreteMeasure& nu);

}  // namespace bw
