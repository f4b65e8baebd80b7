#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "bw/errors.hpp"
#include "bw/flows.hpp"
#include "test_support.hpp"

using namespace bw;

namespace {

Vector vec(std::initializer_list<double> xs) {
  Vector v(Index(xs.size()));
  Index i = 0;
  for (double x : xs) v[i++] = x;
  return v;
}

Vector gaussian_bump(const Vector& grid, double c, double w) {
  Vector p(grid.size());
  for (Index i = 0; i < grid.size(); ++i)
    p[i] = std::exp(-(grid[i] - c) * (grid[i] - c) / (2.0 * w * w));
  return p / p.sum();
}

FreeEnergySpec harmonic_spec(const Vector& grid, double beta) {
  return FreeEnergySpec{0.5 * grid.cwiseProduct(grid), beta};
}

/* KKT tolerance for the proximal solves in these fixtures. */
SolverConfig loose_cfg() {
  SolverConfig cfg;
  cfg.marginal_tol = 1e-6;
  return cfg;
}

}  // namespace

TEST_CASE("grid measures") {
  SUBCASE("construction and normalization") {
    auto gm = make_grid_measure(vec({0.0, 1.0, 2.0}), vec({0.2, 0.3, 0.5}));
    CHECK(gm.probs.sum() == 1.0);
    // slightly-off mass is rescaled exactly
    auto re = make_grid_measure(vec({0.0, 1.0}), vec({0.5, 0.5 + 4e-7}));
    CHECK(std::abs(re.probs.sum() - 1.0) <= 1e-15);
    CHECK(re.probs[1] > re.probs[0]);
    auto ug = uniform_grid_measure(5, -2.0, 2.0);
    CHECK(ug.grid[0] == -2.0);
    CHECK(ug.grid[4] == 2.0);
    CHECK(ug.grid[2] == 0.0);
    CHECK(ug.probs.minCoeff() == 0.2);
  }

  SUBCASE("invalid grids are rejected") {
    CHECK_THROWS_AS(make_grid_measure(vec({0.0, 1.0}), vec({1.0})),
                    input_error);
    CHECK_THROWS_AS(make_grid_measure(vec({0.0}), vec({1.0})), input_error);
    CHECK_THROWS_AS(make_grid_measure(vec({1.0, 0.0}), vec({0.5, 0.5})),
                    input_error);
    CHECK_THROWS_AS(make_grid_measure(vec({0.0, 0.0}), vec({0.5, 0.5})),
                    input_error);
    CHECK_THROWS_AS(make_grid_measure(vec({0.0, 1.0}), vec({1.5, -0.5})),
                    input_error);
    CHECK_THROWS_AS(
        make_grid_measure(vec({0.0, 1.0}), vec({0.5, std::nan("")})),
        input_error);
    CHECK_THROWS_AS(make_grid_measure(vec({0.0, 1.0}), vec({0.5, 0.6})),
                    input_error);
    CHECK_THROWS_AS(uniform_grid_measure(1, 0.0, 1.0), input_error);
    CHECK_THROWS_AS(uniform_grid_measure(4, 1.0, 1.0), input_error);
  }
}

TEST_CASE("free energy and Gibbs measures") {
  SUBCASE("value handles empty cells and matches a hand sum") {
    FreeEnergySpec spec{vec({2.0, 5.0}), 1.0};
    CHECK(spec.value(vec({1.0, 0.0})) == 2.0);  // 1*log 1 contributes nothing
    // 0.5*2 + 0.5*5 + 2 * 0.5 log 0.5
    double expected = 3.5 + 2.0 * 0.5 * std::log(0.5);
    CHECK(std::abs(spec.value(vec({0.5, 0.5})) - expected) <= 1e-15);
  }

  SUBCASE("gradient agrees with central differences") {
    SplitRng rng(61);
    Vector V(6), mu(6);
    for (Index i = 0; i < 6; ++i) {
      V[i] = rng.uniform(-1.0, 1.0);
      mu[i] = rng.uniform(0.05, 0.3);
    }
    mu /= mu.sum();
    FreeEnergySpec spec{V, 0.7};
    Vector grad = spec.gradient(mu);
    const double h = 1e-6;
    for (Index i = 0; i < 6; ++i) {
      Vector hi = mu, lo = mu;
      hi[i] += h;
      lo[i] -= h;
      double fd = (spec.value(hi) - spec.value(lo)) / (2.0 * h);
      CHECK(std::abs(fd - grad[i]) <= 1e-6);
    }
  }

  SUBCASE("gibbs ratios, shift invariance, and validation") {
    Vector grid = vec({-2.0, -0.5, 0.0, 1.0, 2.5});
    FreeEnergySpec spec{0.5 * grid.cwiseProduct(grid), 0.8};
    Vector g = gibbs_measure(spec);
    CHECK(std::abs(g.sum() - 1.0) <= 1e-15);
    for (Index i = 1; i < g.size(); ++i) {
      double expected =
          std::exp(-(spec.potential[i] - spec.potential[0]) / spec.beta);
      CHECK(std::abs(g[i] / g[0] - expected) <= 1e-12);
    }
    FreeEnergySpec shifted = spec;
    shifted.potential.array() += 3.25;
    CHECK((gibbs_measure(shifted) - g).cwiseAbs().maxCoeff() <= 1e-15);
    FreeEnergySpec frozen{grid, 0.0};
    CHECK_THROWS_AS(gibbs_measure(frozen), input_error);
  }

  SUBCASE("kl divergence") {
    Vector p = vec({0.7, 0.3}), q = vec({0.5, 0.5});
    CHECK(kl_divergence(p, p) == 0.0);
    CHECK(std::abs(kl_divergence(p, q) - 0.082282878505051782) <= 1e-15);
    CHECK(std::abs(kl_divergence(vec({1.0, 0.0}), q) - 0.69314718055994529) <=
          1e-15);
    CHECK(std::isinf(kl_divergence(p, vec({1.0, 0.0}))));
    CHECK_THROWS_AS(kl_divergence(p, vec({1.0})), input_error);
  }
}

TEST_CASE("grid costs and regularization defaults") {
  SUBCASE("quadratic grid costs are half squared distances") {
    Vector grid = vec({-1.5, -0.2, 0.4, 1.0, 2.0});
    Matrix C = grid_cost_matrix(quadratic(1), grid);
    for (Index i = 0; i < 5; ++i)
      for (Index j = 0; j < 5; ++j) {
        double d = grid[i] - grid[j];
        CHECK(std::abs(C(i, j) - 0.5 * d * d) <= 1e-15);
      }
  }

  SUBCASE("general grid costs are nonnegative with zero diagonal") {
    Vector grid = vec({-1.5, -0.2, 0.4, 1.0, 2.0});
    for (const auto& gen : {logsumexp(1), diaglogistic(1), sinhcube(1)}) {
      CAPTURE(gen.name);
      Matrix C = grid_cost_matrix(gen, grid);
      CHECK(C.minCoeff() >= 0.0);
      for (Index i = 0; i < 5; ++i) CHECK(C(i, i) == 0.0);
    }
    CHECK_THROWS_AS(grid_cost_matrix(quadratic(2), grid), input_error);
  }

  SUBCASE("default epsilon picks the median positive cost") {
    Matrix C(2, 2);
    C << 0.0, 1.0, 4.0, 3.0;  // positives {1,3,4}, median 3
    CHECK(default_epsilon(C) == 0.03);
    C << 0.0, 1.0, 2.0, 0.0;  // positives {1,2}, upper median 2
    CHECK(default_epsilon(C) == 0.02);
    CHECK(default_epsilon(Matrix::Zero(3, 3)) == 1e-2);
  }
}

TEST_CASE("single proximal steps") {
  SUBCASE("invalid arguments are rejected") {
    auto mu = uniform_grid_measure(9, -1.0, 1.0);
    FreeEnergySpec spec = harmonic_spec(mu.grid, 1.0);
    CHECK_THROWS_AS(jko_step(quadratic(1), spec, mu, 0.0, 1e-2), input_error);
    CHECK_THROWS_AS(jko_step(quadratic(1), spec, mu, -1.0, 1e-2), input_error);
    FreeEnergySpec wrong{Vector::Zero(5), 1.0};
    CHECK_THROWS_AS(jko_step(quadratic(1), wrong, mu, 0.1, 1e-2), input_error);
  }

  SUBCASE("zero free energy leaves only the entropic bias") {
    auto g = uniform_grid_measure(33, -2.0, 2.0);
    GridMeasure1D mu{g.grid, gaussian_bump(g.grid, 0.5, 0.7)};
    FreeEnergySpec spec{Vector::Zero(33), 0.0};
    JkoStepInfo info;
    auto mu1 = jko_step(quadratic(1), spec, mu, 0.1, 0.0, loose_cfg(), false,
                        &info);
    // the minimizer of the entropic proximal term sits near (not at) mu
    CHECK(0.5 * (mu1.probs - mu.probs).cwiseAbs().sum() <= 0.05);
    CHECK(info.objective_end <= info.objective_start + 1e-12);
    CHECK(std::abs(mu1.probs.sum() - 1.0) <= 1e-12);
    CHECK(mu1.probs.minCoeff() > 0.0);
  }

  SUBCASE("tiny step size pins the iterate up to the entropic bias") {
    auto g = uniform_grid_measure(33, -3.0, 3.0);
    FreeEnergySpec spec = harmonic_spec(g.grid, 1.0);
    GridMeasure1D mu{g.grid, gibbs_measure(spec)};
    JkoStepInfo info;
    auto mu1 =
        jko_step(quadratic(1), spec, mu, 1e-6, 0.0, loose_cfg(), false, &info);
    CHECK(0.5 * (mu1.probs - mu.probs).cwiseAbs().sum() <= 0.03);
    CHECK(info.objective_end <= info.objective_start + 1e-12);
    CHECK(std::abs(mu1.probs.sum() - 1.0) <= 1e-12);
  }

  SUBCASE("swapped proximal arguments work the same way") {
    auto g = uniform_grid_measure(33, -3.0, 3.0);
    FreeEnergySpec spec = harmonic_spec(g.grid, 1.0);
    GridMeasure1D mu{g.grid, gibbs_measure(spec)};
    JkoStepInfo info;
    auto mu1 = jko_step(quadratic(1), spec, mu, 0.05, 1e-2, loose_cfg(), true,
                        &info);
    CHECK(0.5 * (mu1.probs - mu.probs).cwiseAbs().sum() <= 0.05);
    CHECK(info.objective_end <= info.objective_start + 1e-12);
    CHECK(std::abs(mu1.probs.sum() - 1.0) <= 1e-12);
  }
}

TEST_CASE("flows") {
  SUBCASE("zero steps echo the start") {
    auto mu = uniform_grid_measure(9, -1.0, 1.0);
    FreeEnergySpec spec = harmonic_spec(mu.grid, 1.0);
    auto res = run_flow(quadratic(1), spec, mu, 0.1, 1e-2, 0);
    REQUIRE(res.trajectory.size() == 1);
    REQUIRE(res.energy.size() == 1);
    CHECK(res.steps.empty());
    CHECK((res.trajectory[0] - mu.probs).cwiseAbs().maxCoeff() == 0.0);
    CHECK(res.energy[0] == spec.value(mu.probs));
    CHECK_THROWS_AS(run_flow(quadratic(1), spec, mu, 0.1, 1e-2, -1),
                    input_error);
  }

  SUBCASE("a Gibbs start stays near the Gibbs free energy") {
    auto g = uniform_grid_measure(33, -3.0, 3.0);
    FreeEnergySpec spec = harmonic_spec(g.grid, 1.0);
    Vector pi = gibbs_measure(spec);
    GridMeasure1D mu{g.grid, pi};
    auto res = run_flow(quadratic(1), spec, mu, 0.05, 0.0, 50, loose_cfg());
    double f_pi = spec.value(pi);
    for (const auto& p : res.trajectory) {
      CHECK(std::abs(spec.value(p) - f_pi) <= 0.05);
      CHECK(std::abs(p.sum() - 1.0) <= 1e-12);
    }
    CHECK(0.5 * (res.trajectory.back() - pi).cwiseAbs().sum() <= 0.15);
    for (const auto& s : res.steps)
      CHECK(s.objective_end <= s.objective_start + 1e-12);
  }

  SUBCASE("a uniform start decays to the Gibbs measure") {
    auto mu = uniform_grid_measure(32, -4.0, 4.0);
    FreeEnergySpec spec = harmonic_spec(mu.grid, 1.0);
    Vector pi = gibbs_measure(spec);
    auto res = run_flow(quadratic(1), spec, mu, 0.1, 1e-2, 40, loose_cfg());
    REQUIRE(res.trajectory.size() == 41);
    int first = -1;
    for (std::size_t k = 0; k < res.trajectory.size(); ++k)
      if (kl_divergence(res.trajectory[k], pi) <= 0.05) {
        first = int(k);
        break;
      }
    CHECK(first >= 1);
    CHECK(first <= 20);
    CHECK(kl_divergence(res.trajectory.back(), pi) <= 1e-3);
    for (std::size_t k = 0; k < res.steps.size(); ++k) {
      CAPTURE(k);
      CHECK(res.steps[k].objective_end <=
            res.steps[k].objective_start + 1e-12);
      CHECK(std::abs(res.trajectory[k + 1].sum() - 1.0) <= 1e-12);
    }
    // recorded energies match a recomputation
    for (std::size_t k = 0; k < res.energy.size(); ++k)
      CHECK(res.energy[k] == spec.value(res.trajectory[k]));
  }
}
