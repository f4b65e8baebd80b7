#pragma once

#include <stdexcept>
#include <string>

namespace bw {

/* Error taxonomy shared by the library and the CLI.  The CLI maps these
   onto process exit codes: input problems -> 1, solver failures -> 2
   (check failures are reported separately and exit 3). */

class error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/* Malformed or out-of-contract inputs: bad weights, dimension mismatches,
   points outside a generator domain, unparseable files. */
class input_error : public error {
 public:
  using error::error;
};

/* A point violated an open-domain constraint.  Carries the index of the
   offending coordinate; `coordinate() == dim` flags a joint constraint
   (e.g. the simplex sum) rather than a single component. */
class domain_violation : public input_error {
 public:
  domain_violation(const std::string& what, int coordinate)
      : input_error(what), coordinate_(coordinate) {}
  int coordinate() const { return coordinate_; }

 private:
  int coordinate_;
};

/* An iterative solver ran out of iterations.  Carries the last residual
   so callers can report how close it got. */
class convergence_error : public error {
 public:
  convergence_error(const std::string& what, double residual)
      : error(what), residual_(residual) {}
  double residual() const { return residual_; }

 private:
  double residual_;
};

/* A finite-difference stencil would leave the domain. */
class stencil_error : public error {
 public:
  using error::error;
};

/* A descent step could not be accepted even after exhausting the
   rate-halving budget. */
class step_error : public error {
 public:
  using error::error;
};

}  // namespace bw
