#pragma once

#include <functional>
#include <string>
#include <vector>

#include "bw/defs.hpp"
#include "bw/errors.hpp"

namespace bw {

/* Dense symmetric rank-3 tensor of third derivatives, t(i,j,k). */
class SymTensor3 {
 public:
  explicit SymTensor3(Index d) : d_(d), v_(std::size_t(d * d * d), 0.0) {}

  Index dim() const { return d_; }

  double& operator()(Index i, Index j, Index k) {
    return v_[std::size_t((i * d_ + j) * d_ + k)];
  }
  double operator()(Index i, Index j, Index k) const {
    return v_[std::size_t((i * d_ + j) * d_ + k)];
  }

  /* Trilinear contraction t[a,b,c]. */
  double apply(const Vector& a, const Vector& b, const Vector& c) const;

  /* Largest deviation from full index-permutation symmetry. */
  double max_asymmetry() const;

  /* Average over all six index permutations. */
  SymTensor3 symmetrized() const;

 private:
  Index d_;
  std::vector<double> v_;
};

/* A smooth strictly convex generator on an open convex primal domain,
   together with its Legendre transform on the dual domain.  The mirror
   map `grad` is a diffeomorphism between the two domains and `dual_grad`
   is its inverse.  Domain predicates test the open sets with a margin of
   kDomainMargin; `*_violation` returns the first offending coordinate
   (dim() for a joint constraint such as a simplex sum), or -1 if inside. */
struct Generator {
  std::string name;
  Index dim = 0;

  std::function<double(const Vector&)> value;       // Omega(x)
  std::function<Vector(const Vector&)> grad;        // mirror map X -> Y
  std::function<Matrix(const Vector&)> hess;        // D^2 Omega(x)
  std::function<double(const Vector&)> dual_value;  // Omega*(y)
  std::function<Vector(const Vector&)> dual_grad;   // inverse mirror map
  std::function<Matrix(const Vector&)> dual_hess;   // D^2 Omega*(y)
  std::function<SymTensor3(const Vector&)> dual_third;  // D^3 Omega*(y)

  std::function<int(const Vector&)> primal_violation;
  std::function<int(const Vector&)> dual_violation;

  bool primal_contains(const Vector& x) const { return primal_violation(x) < 0; }
  bool dual_contains(const Vector& y) const { return dual_violation(y) < 0; }

  /* Throw domain_violation (naming the coordinate) if outside. */
  void require_primal(const Vector& x, const char* what) const;
  void require_dual(const Vector& y, const char* what) const;
};

/* Catalog factories. */
Generator quadratic(Index d);      // 1/2 |x|^2 on R^d
Generator logsumexp(Index d);      // log(1 + sum exp x^i), dual = open sub-simplex
Generator diaglogistic(Index d);   // sum softplus(x^i), mirror map = coordinatewise logistic
Generator sinhcube(Index d);       // sum log(sinh t / t), mirror map = Langevin function

std::vector<std::string> generator_names();
Generator make_generator(const std::string& name, Index d);

/* B(x, x') = Omega(x) - Omega(x') - <grad Omega(x'), x - x'>. */
double bregman(const Generator& gen, const Vector& x, const Vector& xp);

/* Self-dual form B(p, q) = Omega(x_p) + Omega*(y_q) - <x_p, y_q> with the
   first point given in primal and the second in dual coordinates. */
double canonical_divergence(const Generator& gen, const Vector& x_p,
                            const Vector& y_q);

/* Central finite difference of dual_hess, symmetrized over index
   permutations.  h <= 0 selects the default step 1e-4 * max(1, |y|_inf).
   Throws stencil_error if any stencil point leaves the dual domain. */
SymTensor3 dual_third_default(const Generator& gen, const Vector& y,
                              double h = 0.0);

/* Scalar Langevin kernels used by the sinhcube generator; exposed for
   direct testing.  langevin_inverse uses a bracketed Newton iteration
   (tolerance 1e-12, at most 100 steps). */
double langevin(double t);
double langevin_prime(double t);
double langevin_second(double t);
double langevin_inverse(double y);
double log_sinhc(double t);  // log(sinh t / t), even, finite at 0

}  // namespace bw
