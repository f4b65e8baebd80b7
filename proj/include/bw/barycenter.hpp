#pragma once

#include <cstdint>
#include <vector>

#include "bw/defs.hpp"
#include "bw/generator.hpp"
#include "bw/measure.hpp"
#include "bw/transport.hpp"

namespace bw {

struct BarycenterResult {
  DiscreteMeasure barycenter;  // k uniform atoms
  double objective = 0.0;      // sum_i lambda_i * divergence(nu_i, barycenter)
  std::vector<TransportPlan> plans;
  std::vector<double> objective_trace;  // nonincreasing across sweeps
  int iterations = 0;
};

/* Fixed-point iteration for argmin_nu sum_i lambda_i * divergence(nu_i, nu)
   over measures with k uniform atoms: alternately re-solve the exact
   plans and move every support atom to the lambda-weighted Euclidean
   mean of the mass transported onto it (the right-argument divergence
   barycenter of points is their mean).  `seed` fixes the initial
   support draw; cfg.marginal_tol doubles as the support-movement
   stopping tolerance.  A non-null init_support (k x d) overrides the
   random initialization. */
BarycenterResult barycenter_fixed_point(const Generator& gen,
                                        const std::vector<DiscreteMeasure>& nus,
                                        const Vector& lambdas, Index k,
                                        const SolverConfig& cfg = {},
                                        std::uint64_t seed = 7,
                                        const Matrix* init_support = nullptr);

struct MultimarginalResult {
  double value = 0.0;
  /* assignment[l] is the permutation applied to measure l (identity for
     l = 0); lexicographically smallest among minimizers. */
  std::vector<std::vector<int>> assignment;
  DiscreteMeasure barycenter;  // atoms T_a = sum_l lambda_l x^(l)_{sigma_l(a)}
};

/* Exhaustive multimarginal oracle over matching tuples for uniform
   equal-size inputs (at most 3 measures of at most 4 atoms): minimizes
   the expected lambda-weighted divergence to the Euclidean mean point. */
MultimarginalResult multimarginal_bruteforce(
    const Generator& gen, const std::vector<DiscreteMeasure>& nus,
    const Vector& lambdas);

}  // namespace bw
