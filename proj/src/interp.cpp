#include "bw/interp.hpp"

#include <cmath>
#include <limits>

namespace bw {

Matrix InterpolationPath::chart_points(double t) const {
  Matrix base_chart(base.size(), base.dim());
  for (Index i = 0; i < base.size(); ++i) {
    Vector x = base.points.row(i);
    base_chart.row(i) =
        kind == Chart::primal ? x : Vector(gen.grad(x));
  }
  return (1.0 - t) * base_chart + t * targets;
}

DiscreteMeasure InterpolationPath::at(double t) const {
  if (!(t >= 0.0 && t <= 1.0))
    throw input_error("interpolation path: t must lie in [0,1]");
  Matrix chart = chart_points(t);
  if (kind == Chart::primal) return DiscreteMeasure{chart, base.weights};
  Matrix primal(chart.rows(), chart.cols());
  for (Index i = 0; i < chart.rows(); ++i) {
    Vector y = chart.row(i);
    gen.require_dual(y, "interpolation path");
    primal.row(i) = gen.dual_grad(y);
  }
  return DiscreteMeasure{primal, base.weights};
}

InterpolationPath make_path(const Generator& gen, const DiscreteMeasure& mu0,
                            const ConvexMap& map, Chart kind) {
  if (map.codomain != kind)
    throw input_error("make_path: a " +
                      std::string(kind == Chart::primal ? "primal" : "dual") +
                      " path needs a map into the matching chart, but '" +
                      map.label + "' has the other codomain");
  if (mu0.dim() != gen.dim)
    throw input_error(gen.name + ": make_path dimension mismatch");

  InterpolationPath path;
  path.kind = kind;
  path.gen = gen;
  path.base = mu0;
  path.targets.resize(mu0.size(), mu0.dim());
  for (Index i = 0; i < mu0.size(); ++i) {
    Vector x = mu0.points.row(i);
    gen.require_primal(x, "make_path");
    Vector arg = kind == Chart::primal ? Vector(gen.grad(x)) : x;
    Vector tgt = map.grad(arg);
    if (kind == Chart::primal)
      gen.require_primal(tgt, "make_path (target)");
    else
      gen.require_dual(tgt, "make_path (target)");
    path.targets.row(i) = tgt;
  }
  return path;
}

namespace {

/* Chart density of atom i at time t from the 1-D change of variables:
   rho_i(t) = sigma_i / s_i(t) with sigma_i = w_i / cell width at t=0 and
   s_i(t) the (analytic or centered-difference) slope of the interpolated
   map.  Base chart coordinates must be strictly increasing. */
std::vector<double> chart_densities(const InterpolationPath& path, double t) {
  if (path.base.dim() != 1)
    throw input_error("internal energy is only defined for 1-D paths");
  const Index n = path.base.size();
  if (n < 2)
    throw input_error("internal energy needs at least two atoms");
  Matrix c0m = path.chart_points(0.0), ctm = path.chart_points(t);
  Vector c0 = c0m.col(0), ct = ctm.col(0);
  for (Index i = 0; i + 1 < n; ++i)
    if (!(c0[i] < c0[i + 1]))
      throw input_error(
          "internal energy: base atoms must be strictly increasing in the "
          "path chart");

  std::vector<double> rho(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) {
    Index lo = std::max<Index>(0, i - 1), hi = std::min<Index>(n - 1, i + 1);
    double width = (c0[hi] - c0[lo]) / double(hi - lo);
    double slope;
    if (path.derivative_1d) {
      slope = (1.0 - t) + t * (*path.derivative_1d)[i];
    } else {
      slope = (ct[hi] - ct[lo]) / (c0[hi] - c0[lo]);
    }
    if (!(slope > 1e-12))
      throw input_error(
          "internal energy: interpolated map derivative vanishes (density "
          "singularity at atom " +
          std::to_string(i) + ")");
    rho[std::size_t(i)] = path.base.weights[i] / (width * slope);
  }
  return rho;
}

}  // namespace

double evaluate_energy(const EnergyFunctional& fun, const InterpolationPath& path,
                       double t) {
  switch (fun.kind) {
    case EnergyFunctional::Kind::potential: {
      if (!fun.V) throw input_error("potential energy needs V");
      DiscreteMeasure mu = path.at(t);
      double s = 0.0;
      for (Index i = 0; i < mu.size(); ++i)
        s += mu.weights[i] * fun.V(Vector(mu.points.row(i)));
      return s;
    }
    case EnergyFunctional::Kind::interaction: {
      if (!fun.W) throw input_error("interaction energy needs W");
      DiscreteMeasure mu = path.at(t);
      double s = 0.0;
      for (Index i = 0; i < mu.size(); ++i)
        for (Index j = 0; j < mu.size(); ++j)
          s += mu.weights[i] * mu.weights[j] *
               fun.W(Vector(mu.points.row(i) - mu.points.row(j)));
      return s;
    }
    case EnergyFunctional::Kind::internal1d: {
      if (!fun.U) throw input_error("internal energy needs U");
      auto rho = chart_densities(path, t);
      double s = 0.0;
      for (Index i = 0; i < path.base.size(); ++i)
        s += path.base.weights[i] * fun.U(rho[std::size_t(i)]) /
             rho[std::size_t(i)];
      return s;
    }
  }
  throw input_error("evaluate_energy: unknown functional kind");
}

ConvexityReport convexity_profile(const EnergyFunctional& fun,
                                  const InterpolationPath& path,
                                  Index grid_points) {
  if (grid_points < 5)
    throw input_error("convexity_profile: need at least five grid points");
  ConvexityReport report;
  double dt = 1.0 / double(grid_points - 1);
  for (Index k = 0; k < grid_points; ++k) {
    double t = double(k) * dt;
    report.t_grid.push_back(t);
    report.energy.push_back(evaluate_energy(fun, path, t));
  }
  double scale = 1.0;
  for (double e : report.energy) scale = std::max(scale, std::abs(e));
  double min_dd = std::numeric_limits<double>::infinity();
  for (std::size_t k = 1; k + 1 < report.energy.size(); ++k)
    min_dd = std::min(min_dd, report.energy[k - 1] - 2.0 * report.energy[k] +
                                  report.energy[k + 1]);
  report.min_second_difference = min_dd;
  report.scale = scale;
  report.pass = min_dd >= -1e-7 * scale;
  return report;
}

}  // namespace bw
