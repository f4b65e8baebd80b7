#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "bw/errors.hpp"
#include "bw/interp.hpp"
#include "test_support.hpp"

using namespace bw;
using bwtest::checked_map_into_dual;
using bwtest::random_cloud;

namespace {

std::vector<Generator> catalog(Index d) {
  return {quadratic(d), logsumexp(d), diaglogistic(d), sinhcube(d)};
}

ConvexMap mirror_map(const Generator& gen) {
  return {"mirror", [gen](const Vector& x) { return Vector(gen.grad(x)); },
          Chart::dual, std::nullopt};
}

ConvexMap inverse_mirror_map(const Generator& gen) {
  return {"inverse mirror",
          [gen](const Vector& y) { return Vector(gen.dual_grad(y)); },
          Chart::primal, std::nullopt};
}

ConvexMap constant_dual_target(double c) {
  return {"constant target",
          [c](const Vector& x) { return Vector(Vector::Constant(x.size(), c)); },
          Chart::dual, std::nullopt};
}

DiscreteMeasure line_measure(std::initializer_list<double> xs,
                             std::initializer_list<double> ws) {
  Matrix pts(Index(xs.size()), 1);
  Vector w(Index(ws.size()));
  Index i = 0;
  for (double x : xs) pts(i++, 0) = x;
  i = 0;
  for (double v : ws) w[i++] = v;
  return DiscreteMeasure{pts, w};
}

}  // namespace

TEST_CASE("displacement paths") {
  SUBCASE("identity maps give constant paths") {
    SplitRng rng(11);
    for (const auto& gen : catalog(2)) {
      CAPTURE(gen.name);
      DiscreteMeasure mu = random_cloud(gen, 5, rng);
      auto dual_path = make_path(gen, mu, mirror_map(gen), Chart::dual);
      auto primal_path =
          make_path(gen, mu, inverse_mirror_map(gen), Chart::primal);
      for (double t : {0.0, 0.37, 1.0}) {
        CAPTURE(t);
        DiscreteMeasure md = dual_path.at(t), mp = primal_path.at(t);
        CHECK((md.points - mu.points).cwiseAbs().maxCoeff() <= 1e-8);
        CHECK((mp.points - mu.points).cwiseAbs().maxCoeff() <= 1e-8);
        CHECK((md.weights - mu.weights).cwiseAbs().maxCoeff() == 0.0);
      }
    }
  }

  SUBCASE("quadratic primal and dual paths coincide on straight lines") {
    auto gen = quadratic(2);
    SplitRng rng(12);
    DiscreteMeasure mu = random_cloud(gen, 6, rng);
    Vector shift(2);
    shift << 0.1, -0.2;
    auto affine = [shift](const Vector& x) { return Vector(0.8 * x + shift); };
    ConvexMap into_dual{"affine", affine, Chart::dual, std::nullopt};
    ConvexMap into_primal{"affine", affine, Chart::primal, std::nullopt};
    auto dual_path = make_path(gen, mu, into_dual, Chart::dual);
    auto primal_path = make_path(gen, mu, into_primal, Chart::primal);
    for (double t : {0.0, 0.25, 0.5, 0.75, 1.0}) {
      CAPTURE(t);
      Matrix pd = dual_path.at(t).points, pp = primal_path.at(t).points;
      CHECK((pd - pp).cwiseAbs().maxCoeff() <= 1e-15);
      // straight line in the (shared) chart, computed independently
      for (Index i = 0; i < mu.size(); ++i) {
        Vector x = mu.points.row(i);
        Vector line = (1.0 - t) * x + t * affine(x);
        CHECK((Vector(pp.row(i)) - line).cwiseAbs().maxCoeff() <= 1e-15);
      }
    }
  }

  SUBCASE("single atom with a constant dual target") {
    auto gen = logsumexp(1);
    DiscreteMeasure mu = line_measure({0.0}, {1.0});
    auto path = make_path(gen, mu, constant_dual_target(0.9), Chart::dual);
    CHECK(std::abs(path.at(0.0).points(0, 0)) <= 1e-12);
    // endpoint log(0.9/0.1) and midpoint log(0.7/0.3), frozen
    CHECK(std::abs(path.at(1.0).points(0, 0) - 2.1972245773362196) <= 1e-10);
    CHECK(std::abs(path.at(0.5).points(0, 0) - 0.84729786038720367) <= 1e-10);
  }

  SUBCASE("invalid inputs are rejected") {
    auto gen = logsumexp(2);
    SplitRng rng(13);
    DiscreteMeasure mu = random_cloud(gen, 4, rng);
    CHECK_THROWS_AS(make_path(gen, mu, mirror_map(gen), Chart::primal),
                    input_error);
    CHECK_THROWS_AS(make_path(gen, mu, inverse_mirror_map(gen), Chart::dual),
                    input_error);
    auto path = make_path(gen, mu, mirror_map(gen), Chart::dual);
    CHECK_THROWS_AS(path.at(-0.1), input_error);
    CHECK_THROWS_AS(path.at(1.1), input_error);
    auto gen3 = logsumexp(3);
    DiscreteMeasure mu3 = random_cloud(gen3, 4, rng);
    CHECK_THROWS_AS(make_path(gen, mu3, mirror_map(gen), Chart::dual),
                    input_error);
    // a target outside the open dual domain
    auto gen1 = logsumexp(1);
    DiscreteMeasure one = line_measure({0.0}, {1.0});
    CHECK_THROWS_AS(
        make_path(gen1, one, constant_dual_target(1.5), Chart::dual),
        domain_violation);
  }
}

TEST_CASE("energy functionals") {
  SUBCASE("zero potential and missing callbacks") {
    auto gen = quadratic(2);
    SplitRng rng(21);
    DiscreteMeasure mu = random_cloud(gen, 4, rng);
    auto path = make_path(gen, mu, mirror_map(gen), Chart::dual);
    EnergyFunctional zero{EnergyFunctional::Kind::potential,
                          [](const Vector&) { return 0.0; }, {}, {}};
    CHECK(evaluate_energy(zero, path, 0.5) == 0.0);
    EnergyFunctional no_v{EnergyFunctional::Kind::potential, {}, {}, {}};
    CHECK_THROWS_AS(evaluate_energy(no_v, path, 0.5), input_error);
    EnergyFunctional no_w{EnergyFunctional::Kind::interaction, {}, {}, {}};
    CHECK_THROWS_AS(evaluate_energy(no_w, path, 0.5), input_error);
    EnergyFunctional no_u{EnergyFunctional::Kind::internal1d, {}, {}, {}};
    CHECK_THROWS_AS(evaluate_energy(no_u, path, 0.5), input_error);
  }

  SUBCASE("two-atom squared-distance interaction") {
    auto gen = quadratic(1);
    DiscreteMeasure mu = line_measure({0.0, 2.0}, {0.5, 0.5});
    auto path = make_path(gen, mu, mirror_map(gen), Chart::dual);
    EnergyFunctional w2{EnergyFunctional::Kind::interaction, {},
                        [](const Vector& z) { return z.squaredNorm(); }, {}};
    // two cross terms 0.25 * 4 each; diagonal vanishes
    CHECK(evaluate_energy(w2, path, 0.0) == 2.0);
    CHECK(evaluate_energy(w2, path, 1.0) == 2.0);
  }

  SUBCASE("one-dimensional density bookkeeping") {
    auto gen = quadratic(1);
    // equally spaced atoms: every lumped cell width is 0.8
    DiscreteMeasure mu =
        line_measure({-1.0, -0.2, 0.6, 1.4}, {0.25, 0.25, 0.25, 0.25});
    auto path = make_path(gen, mu, mirror_map(gen), Chart::dual);
    EnergyFunctional ent{EnergyFunctional::Kind::internal1d, {}, {},
                         [](double r) { return r * std::log(r); }};
    // identity path: densities rho = 0.25/0.8 at every atom and every t,
    // so the energy is log(0.3125), frozen
    double e0 = evaluate_energy(ent, path, 0.0);
    CHECK(std::abs(e0 - -1.1631508098056809) <= 1e-12);
    CHECK(std::abs(evaluate_energy(ent, path, 0.3) - e0) <= 1e-13);
    CHECK(std::abs(evaluate_energy(ent, path, 1.0) - e0) <= 1e-13);
    // the analytic-derivative route must agree on an identity path
    auto analytic = path;
    analytic.derivative_1d = Vector::Ones(4);
    CHECK(std::abs(evaluate_energy(ent, analytic, 0.4) - e0) <= 1e-13);
  }

  SUBCASE("degenerate one-dimensional paths are rejected") {
    auto gen = quadratic(1);
    EnergyFunctional ent{EnergyFunctional::Kind::internal1d, {}, {},
                         [](double r) { return r * std::log(r); }};
    DiscreteMeasure unsorted = line_measure({0.5, -0.5}, {0.5, 0.5});
    auto bad_order = make_path(gen, unsorted, mirror_map(gen), Chart::dual);
    CHECK_THROWS_AS(evaluate_energy(ent, bad_order, 0.5), input_error);

    DiscreteMeasure single = line_measure({0.0}, {1.0});
    auto lone = make_path(gen, single, mirror_map(gen), Chart::dual);
    CHECK_THROWS_AS(evaluate_energy(ent, lone, 0.5), input_error);

    auto gen2 = quadratic(2);
    SplitRng rng(22);
    DiscreteMeasure planar = random_cloud(gen2, 4, rng);
    auto flat = make_path(gen2, planar, mirror_map(gen2), Chart::dual);
    CHECK_THROWS_AS(evaluate_energy(ent, flat, 0.5), input_error);

    // all atoms sent to one point: the interpolated slope hits zero at t=1
    DiscreteMeasure mu = line_measure({-0.5, 0.5}, {0.5, 0.5});
    auto collapse = make_path(gen, mu, constant_dual_target(0.1), Chart::dual);
    CHECK_THROWS_AS(evaluate_energy(ent, collapse, 1.0), input_error);
    CHECK(std::isfinite(evaluate_energy(ent, collapse, 0.5)));

    // analytic derivative with a vanishing entry, same failure mode
    auto stalled = make_path(gen, mu, mirror_map(gen), Chart::dual);
    Vector d(2);
    d << 1.0, 0.0;
    stalled.derivative_1d = d;
    CHECK_THROWS_AS(evaluate_energy(ent, stalled, 1.0), input_error);
  }
}

TEST_CASE("convexity profiles") {
  SUBCASE("quadratic potential energy is exactly quadratic in t") {
    auto gen = quadratic(2);
    SplitRng rng(31);
    DiscreteMeasure mu = random_cloud(gen, 6, rng);
    auto map = checked_map_into_dual(gen, mu, rng);
    auto path = make_path(gen, mu, map, Chart::dual);
    EnergyFunctional v2{EnergyFunctional::Kind::potential,
                        [](const Vector& x) { return x.squaredNorm(); }, {},
                        {}};
    auto report = convexity_profile(v2, path, 9);
    CHECK(report.pass);
    CHECK(report.t_grid.size() == 9);
    // second differences of a quadratic are constant
    double lo = 1e300, hi = -1e300;
    for (std::size_t k = 1; k + 1 < report.energy.size(); ++k) {
      double dd = report.energy[k - 1] - 2.0 * report.energy[k] +
                  report.energy[k + 1];
      lo = std::min(lo, dd);
      hi = std::max(hi, dd);
    }
    CHECK(hi - lo <= 1e-12 * report.scale);
    CHECK(report.min_second_difference >= 0.0);
  }

  SUBCASE("chart-convex potentials are convex along dual paths") {
    SplitRng rng(32);
    for (const auto& gen : catalog(2)) {
      CAPTURE(gen.name);
      DiscreteMeasure mu = random_cloud(gen, 5, rng);
      auto map = checked_map_into_dual(gen, mu, rng);
      auto path = make_path(gen, mu, map, Chart::dual);
      EnergyFunctional chart_sq{
          EnergyFunctional::Kind::potential,
          [gen](const Vector& x) { return gen.grad(x).squaredNorm(); }, {},
          {}};
      auto r1 = convexity_profile(chart_sq, path, 11);
      CHECK(r1.pass);
      EnergyFunctional cond_ent{
          EnergyFunctional::Kind::potential,
          [gen](const Vector& x) { return gen.dual_value(gen.grad(x)); }, {},
          {}};
      auto r2 = convexity_profile(cond_ent, path, 11);
      CHECK(r2.pass);
    }
  }

  SUBCASE("a concave potential is flagged") {
    auto gen = logsumexp(2);
    SplitRng rng(33);
    DiscreteMeasure mu = random_cloud(gen, 5, rng);
    auto map = checked_map_into_dual(gen, mu, rng);
    auto path = make_path(gen, mu, map, Chart::dual);
    EnergyFunctional neg{
        EnergyFunctional::Kind::potential,
        [gen](const Vector& x) { return -gen.grad(x).squaredNorm(); }, {}, {}};
    auto report = convexity_profile(neg, path, 11);
    CHECK_FALSE(report.pass);
    CHECK(report.min_second_difference < 0.0);
  }

  SUBCASE("entropy along a monotone one-dimensional path") {
    auto gen = quadratic(1);
    DiscreteMeasure mu =
        line_measure({-1.0, -0.3, 0.5, 1.2}, {0.25, 0.25, 0.25, 0.25});
    // gradient of x^4/12: strictly increasing, slope x^2 never zero here
    ConvexMap cubic{"cubic",
                    [](const Vector& x) {
                      return Vector(x.array().cube().matrix() / 3.0);
                    },
                    Chart::dual, std::nullopt};
    auto path = make_path(gen, mu, cubic, Chart::dual);
    EnergyFunctional ent{EnergyFunctional::Kind::internal1d, {}, {},
                         [](double r) { return r * std::log(r); }};
    auto fd = convexity_profile(ent, path, 11);
    CHECK(fd.pass);
    auto analytic = path;
    analytic.derivative_1d = mu.points.col(0).array().square().matrix();
    auto an = convexity_profile(ent, analytic, 11);
    CHECK(an.pass);
  }

  SUBCASE("grid size is validated") {
    auto gen = quadratic(2);
    SplitRng rng(34);
    DiscreteMeasure mu = random_cloud(gen, 4, rng);
    auto path = make_path(gen, mu, mirror_map(gen), Chart::dual);
    EnergyFunctional v{EnergyFunctional::Kind::potential,
                       [](const Vector&) { return 0.0; }, {}, {}};
    CHECK_THROWS_AS(convexity_profile(v, path, 4), input_error);
  }
}
