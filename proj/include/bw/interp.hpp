#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "bw/defs.hpp"
#include "bw/generator.hpp"
#include "bw/geometry.hpp"
#include "bw/measure.hpp"

namespace bw {

/* A displacement interpolation: every atom of `base` moves along a
   straight line in the kind's chart from its base chart coordinate to
   `targets`.  at(t) returns the measure in primal coordinates. */
struct InterpolationPath {
  Chart kind = Chart::primal;
  Generator gen;
  DiscreteMeasure base;
  Matrix targets;  // n x d, chart coordinates of the t=1 atoms

  /* Optional d(target chart coord)/d(base chart coord) per atom, for
     the 1-D internal-energy density (analytic map derivative). */
  std::optional<Vector> derivative_1d;

  Matrix chart_points(double t) const;  // straight lines in the chart
  DiscreteMeasure at(double t) const;   // primal coordinates
};

/* Builds the path whose targets are map(y_i) (primal kind, map into the
   primal domain) or map(x_i) (dual kind, map into the dual domain).
   Verifies chart/codomain agreement and domain membership at t in {0,1}. */
InterpolationPath make_path(const Generator& gen, const DiscreteMeasure& mu0,
                            const ConvexMap& map, Chart kind);

/* Energy functionals along a path.  Exactly one of the three parts is
   evaluated per kind:
   - potential:    sum_i w_i V(p_i(t)) (primal coordinates)
   - interaction:  sum_ij w_i w_j W(p_i(t) - p_j(t))
   - internal1d:   sum_i w_i U(rho_i(t)) / rho_i(t) where rho_i is the
     1-D chart density from the change of variables along the path. */
struct EnergyFunctional {
  enum class Kind { potential, interaction, internal1d };
  Kind kind = Kind::potential;
  std::function<double(const Vector&)> V;
  std::function<double(const Vector&)> W;
  std::function<double(double)> U;
};

double evaluate_energy(const EnergyFunctional& fun, const InterpolationPath& path,
                       double t);

struct ConvexityReport {
  std::vector<double> t_grid;
  std::vector<double> energy;
  double min_second_difference = 0.0;
  double scale = 1.0;
  bool pass = false;  // min second difference >= -1e-7 * scale
};

/* Samples the energy on a uniform grid over [0,1] (at least five points)
   and checks discrete convexity through central second differences. */
ConvexityReport convexity_profile(const EnergyFunctional& fun,
                                  const InterpolationPath& path,
                                  Index grid_points = 9);

}  // namespace bw
