#pragma once

#include <utility>
#include <vector>

#include "bw/defs.hpp"
#include "bw/generator.hpp"
#include "bw/rng.hpp"
#include "bw/transport.hpp"

namespace bw {

/* A matching problem between N natural parameters and N observations of
   the product exponential tilt on the cube (-1,1)^d whose log-partition
   is the sinhcube generator.  etas = mirror images of the thetas (the
   per-parameter mean observations). */
struct MatchingInstance {
  Generator gen;  // sinhcube(d)
  Matrix thetas;  // N x d natural parameters
  Matrix ys;      // N x d observations in (-1,1)^d
  Matrix etas;    // N x d mean parameters, grad Omega(theta_i)

  Index size() const { return thetas.rows(); }
  Index dim() const { return thetas.cols(); }
};

MatchingInstance make_matching_instance(Matrix thetas, Matrix ys);

/* Average log-likelihood numerator of the pairing sigma (observation
   sigma(i) explained by parameter i), relative to the uniform base:
   sum_i [theta_i . y_sigma(i) - Omega(theta_i)]. */
double loglik(const MatchingInstance& inst, const std::vector<int>& sigma);

/* Maximum-likelihood pairing via an exact assignment on the dual-side
   divergence cost B_{Omega*}(y_j, eta_i); returns (sigma, loglik). */
std::pair<std::vector<int>, double> match_mle(const MatchingInstance& inst);

/* Two independently computed sides of the likelihood identity for a
   pairing sigma:
   lhs = (1/N) sum_i B_{Omega*}(y_sigma(i), eta_i)  (dual divergences)
   rhs = -(1/N) loglik(sigma) + (1/N) sum_j Omega*(y_j)
   They agree for every permutation, so matching maximizes likelihood. */
std::pair<double, double> likelihood_identity_check(const MatchingInstance& inst,
                                                    const std::vector<int>& sigma);

/* Soft variant: the exact plan between arbitrarily weighted parameter
   and observation collections under the same dual-side cost. */
TransportPlan soft_match(const MatchingInstance& inst, const Vector& w_theta,
                         const Vector& w_obs);

/* Inverse-CDF sampler of the 1-D exponential tilt per coordinate:
   density proportional to exp(theta * y) on (-1,1). */
Matrix sample_tilted_cube(const Matrix& thetas, SplitRng& rng);

}  // namespace bw
