#pragma once

#include <vector>

#include "bw/defs.hpp"
#include "bw/generator.hpp"
#include "bw/transport.hpp"

namespace bw {

/* A probability vector on a fixed strictly increasing 1-D grid. */
struct GridMeasure1D {
  Vector grid;
  Vector probs;
};

GridMeasure1D make_grid_measure(Vector grid, Vector probs);
GridMeasure1D uniform_grid_measure(Index n, double lo, double hi);

/* Linear potential energy plus beta-weighted negative entropy on the
   grid: F(mu) = sum V mu + beta sum mu log mu. */
struct FreeEnergySpec {
  Vector potential;  // V sampled on the grid
  double beta = 1.0;

  double value(const Vector& probs) const;
  Vector gradient(const Vector& probs) const;  // V + beta (1 + log mu)
};

/* Normalized exp(-V/beta) on the grid; the stationary point of the
   scheme for every generator.  Requires beta > 0. */
Vector gibbs_measure(const FreeEnergySpec& spec);

double kl_divergence(const Vector& p, const Vector& q);

/* Grid-to-grid divergence costs C_ij = B(grid_i, grid_j). */
Matrix grid_cost_matrix(const Generator& gen, const Vector& grid);

/* 1e-2 times the median positive cost; the default regularization. */
double default_epsilon(const Matrix& cost);

struct JkoStepInfo {
  double objective_start = 0.0;  // F(mu_k) + (1/delta) B_eps(mu_k, mu_k)
  double objective_end = 0.0;    // same functional at the accepted iterate
  double kkt_residual = 0.0;
  int inner_iterations = 0;
};

/* One proximal step: minimize F(mu) + (1/delta) B_eps(mu, mu_k) over the
   simplex by mirror descent, using the optimal entropic dual potential
   as the gradient of the proximal term.  Steps that fail to decrease the
   objective are rejected and the inner rate halved, so
   objective_end <= objective_start always holds on return.
   epsilon <= 0 selects default_epsilon; swap_proximal uses
   B_eps(mu_k, mu) instead (divergence arguments exchanged). */
GridMeasure1D jko_step(const Generator& gen, const FreeEnergySpec& spec,
                       const GridMeasure1D& mu_k, double delta, double epsilon,
                       const SolverConfig& cfg = {}, bool swap_proximal = false,
                       JkoStepInfo* info = nullptr);

struct FlowResult {
  Vector grid;
  std::vector<Vector> trajectory;  // probs, steps+1 entries
  std::vector<double> energy;      // F along the trajectory
  std::vector<JkoStepInfo> steps;
};

FlowResult run_flow(const Generator& gen, const FreeEnergySpec& spec,
                    const GridMeasure1D& mu0, double delta, double epsilon,
                    int steps, const SolverConfig& cfg = {},
                    bool swap_proximal = false);

}  // namespace bw
