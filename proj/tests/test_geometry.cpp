#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "bw/geometry.hpp"
#include "bw/interp.hpp"
#include "test_support.hpp"

using namespace bw;
using bwtest::checked_map_into_dual;
using bwtest::checked_map_into_primal;
using bwtest::random_cloud;
using bwtest::random_primal_point;

namespace {

std::vector<Generator> catalog(Index d) {
  return {quadratic(d), logsumexp(d), diaglogistic(d), sinhcube(d)};
}

/* A random pointwise tuple (p, a, b, t) with both geodesic endpoints
   verified inside their domains. */
struct Tuple {
  Vector p, a, b;
  double t = 0.0;
};

Tuple random_tuple(const Generator& gen, SplitRng& rng) {
  for (int attempt = 0; attempt < 200; ++attempt) {
    Tuple s;
    s.p = random_primal_point(gen, rng);
    s.a = random_primal_point(gen, rng, 0.5);
    Vector y = gen.grad(s.p);
    Vector y1 = gen.grad(random_primal_point(gen, rng));
    s.b = 0.3 * (y1 - y);  // convex segment: stays inside the dual domain
    s.t = rng.uniform(0.05, 1.0);
    if (gen.primal_contains(s.p + s.t * s.a) &&
        gen.dual_contains(y + s.t * s.b))
      return s;
  }
  throw std::runtime_error("no in-domain tuple found");
}

}  // namespace

TEST_CASE("pointwise pythagorean identity") {
  SUBCASE("degenerate cases vanish") {
    auto gen = logsumexp(2);
    SplitRng rng(1);
    Vector p = random_primal_point(gen, rng);
    Vector a = random_primal_point(gen, rng, 0.3);
    Vector b = Vector::Zero(2);
    auto [l0, r0] = pythagorean_point(gen, p, a, b, 0.0);
    // at t = 0 the mixed-form lhs collapses to the Fenchel-Young gap at p
    CHECK(std::abs(l0) <= 1e-12);
    CHECK(r0 == 0.0);
    auto [lb, rb] = pythagorean_point(gen, p, a, b, 0.8);
    CHECK(std::abs(lb) <= 1e-12);
    CHECK(rb == 0.0);
  }
  SUBCASE("fixed logsumexp fixture at t = 0.7") {
    auto gen = logsumexp(2);
    SplitRng rng(607);
    Vector p = random_primal_point(gen, rng);
    Vector a = random_primal_point(gen, rng, 0.5);
    Vector b(2);
    b << 0.05, -0.04;
    auto [lhs, rhs] = pythagorean_point(gen, p, a, b, 0.7);
    CHECK(std::abs(lhs - rhs) <= 1e-10);
    CHECK(lhs == doctest::Approx(0.0052543208388591278).epsilon(1e-10));
  }
  SUBCASE("holds on 200 random tuples per generator") {
    for (const auto& gen : catalog(2)) {
      CAPTURE(gen.name);
      SplitRng rng(2);
      for (int k = 0; k < 200; ++k) {
        Tuple s = random_tuple(gen, rng);
        auto [lhs, rhs] = pythagorean_point(gen, s.p, s.a, s.b, s.t);
        CHECK(std::abs(lhs - rhs) <= 1e-9);
      }
    }
  }
}

TEST_CASE("otto inner product") {
  SUBCASE("quadratic unit fields") {
    auto gen = quadratic(2);
    SplitRng rng(3);
    auto mu = random_cloud(gen, 4, rng, true);
    Matrix vec(4, 2);
    for (Index i = 0; i < 4; ++i) {
      vec(i, 0) = 1.0;
      vec(i, 1) = 0.0;
    }
    VelocityField u{mu, vec, Chart::primal};
    CHECK(otto_inner(gen, u, u) == doctest::Approx(1.0).epsilon(1e-14));
  }
  SUBCASE("mixed charts with orthogonal vectors vanish") {
    auto gen = logsumexp(2);
    SplitRng rng(4);
    auto mu = random_cloud(gen, 5, rng);
    Matrix va(5, 2), vb(5, 2);
    for (Index i = 0; i < 5; ++i) {
      va(i, 0) = 1.0;
      va(i, 1) = 0.0;
      vb(i, 0) = 0.0;
      vb(i, 1) = 1.0;
    }
    VelocityField u{mu, va, Chart::primal};
    VelocityField v{mu, vb, Chart::dual};
    CHECK(otto_inner(gen, u, v) == 0.0);
  }
  SUBCASE("dual-chart 1-D frozen value") {
    auto gen = logsumexp(1);
    Matrix pt(1, 1);
    pt << 0.0;
    auto mu = uniform_measure(pt);
    Matrix vec(1, 1);
    vec << 0.1;
    VelocityField u{mu, vec, Chart::dual};
    CHECK(otto_inner(gen, u, u) == doctest::Approx(0.04).epsilon(1e-12));
  }
  SUBCASE("symmetric, bilinear, positive") {
    for (const auto& gen : catalog(2)) {
      CAPTURE(gen.name);
      SplitRng rng(5);
      auto mu = random_cloud(gen, 4, rng);
      auto draw = [&](Chart c) {
        Matrix m(4, 2);
        for (Index i = 0; i < 4; ++i)
          for (Index j = 0; j < 2; ++j) m(i, j) = rng.uniform(-0.3, 0.3);
        return VelocityField{mu, m, c};
      };
      for (Chart cu : {Chart::primal, Chart::dual})
        for (Chart cv : {Chart::primal, Chart::dual}) {
          auto u = draw(cu), v = draw(cv), w = draw(cv);
          double uv = otto_inner(gen, u, v);
          double vu = otto_inner(gen, v, u);
          CHECK(std::abs(uv - vu) <= 1e-12);
          VelocityField vw{mu, 2.0 * v.vectors + w.vectors, cv};
          double lin = otto_inner(gen, u, vw);
          CHECK(lin == doctest::Approx(2.0 * uv + otto_inner(gen, u, w))
                           .epsilon(1e-10));
          CHECK(otto_inner(gen, u, u) > 1e-12);
        }
    }
  }
  SUBCASE("base mismatch is rejected") {
    auto gen = quadratic(1);
    SplitRng rng(6);
    auto mu = random_cloud(gen, 3, rng);
    auto nu = random_cloud(gen, 3, rng);
    VelocityField u{mu, Matrix::Ones(3, 1), Chart::primal};
    VelocityField v{nu, Matrix::Ones(3, 1), Chart::primal};
    CHECK_THROWS_AS(otto_inner(gen, u, v), input_error);
  }
}

TEST_CASE("measure-level pythagorean comparison") {
  SUBCASE("degenerate cases vanish") {
    auto gen = logsumexp(2);
    SplitRng rng(7);
    auto rho = random_cloud(gen, 4, rng);
    auto Dh = checked_map_into_primal(gen, rho, rng);
    auto Df = checked_map_into_dual(gen, rho, rng);
    auto [l0, r0] = bw_pythagorean(gen, rho, Dh, Df, 0.0);
    CHECK(std::abs(l0) <= 1e-12);
    CHECK(r0 == 0.0);

    ConvexMap idX{"mirror-inverse", [g = gen](const Vector& y) { return g.dual_grad(y); },
                  Chart::primal, std::nullopt};
    ConvexMap idY{"mirror", [g = gen](const Vector& x) { return g.grad(x); },
                  Chart::dual, std::nullopt};
    auto [li, ri] = bw_pythagorean(gen, rho, idX, idY, 0.7);
    CHECK(std::abs(li) <= 1e-10);
    CHECK(std::abs(ri) <= 1e-12);
  }
  SUBCASE("quadratic fixed-seed regression values") {
    auto gen = quadratic(2);
    SplitRng rng(606);
    auto rho = random_cloud(gen, 6, rng, true);
    auto Dh = checked_map_into_primal(gen, rho, rng);
    auto Df = checked_map_into_dual(gen, rho, rng);
    auto [lhs, rhs] = bw_pythagorean(gen, rho, Dh, Df, 0.5);
    CHECK(lhs >= rhs - 1e-7);
    CHECK(lhs == doctest::Approx(-0.0033296732544527002).epsilon(1e-10));
    CHECK(rhs == doctest::Approx(-0.0033296732544527106).epsilon(1e-10));
  }
  SUBCASE("inequality holds on 50 instances per generator") {
    for (const auto& gen : catalog(2)) {
      CAPTURE(gen.name);
      SplitRng rng(8);
      for (int k = 0; k < 50; ++k) {
        auto rho = random_cloud(gen, 4, rng);
        auto Dh = checked_map_into_primal(gen, rho, rng);
        auto Df = checked_map_into_dual(gen, rho, rng);
        double t = rng.uniform(0.1, 1.0);
        auto [lhs, rhs] = bw_pythagorean(gen, rho, Dh, Df, t);
        CHECK(lhs >= rhs - 1e-7);
      }
    }
  }
}

TEST_CASE("skewness quadrature") {
  SUBCASE("vanishes for the quadratic generator and for zero displacement") {
    auto gq = quadratic(2);
    SplitRng rng(9);
    auto rho = random_cloud(gq, 4, rng);
    auto Df = checked_map_into_dual(gq, rho, rng);
    CHECK(std::abs(skewness_integral(gq, rho, Df)) <= 1e-12);

    auto gl = logsumexp(2);
    auto rho2 = random_cloud(gl, 4, rng);
    ConvexMap mirror{"mirror", [g = gl](const Vector& x) { return g.grad(x); },
                     Chart::dual, std::nullopt};
    CHECK(std::abs(skewness_integral(gl, rho2, mirror)) <= 1e-12);
  }
  SUBCASE("logsumexp single-atom frozen value") {
    auto gen = logsumexp(1);
    Matrix pt(1, 1);
    pt << std::log(1.0 / 3.0);  // mirror image 0.25
    auto rho = uniform_measure(pt);
    ConvexMap shift{"shift",
                    [g = gen](const Vector& x) {
                      Vector y = g.grad(x);
                      y[0] += 0.2;
                      return y;
                    },
                    Chart::dual, std::nullopt};
    CHECK(skewness_integral(gen, rho, shift) ==
          doctest::Approx(-0.11377777777777777).epsilon(1e-9));
  }
}

TEST_CASE("expansion coefficients") {
  SUBCASE("quadratic dual displacement is purely second order") {
    auto gen = quadratic(2);
    SplitRng rng(10);
    auto rho = random_cloud(gen, 4, rng);
    auto Df = checked_map_into_dual(gen, rho, rng);
    auto rep = expansion_check(gen, rho, Df, Chart::dual);
    CHECK(rep.second_fitted ==
          doctest::Approx(rep.second_predicted).epsilon(1e-9));
    CHECK(std::abs(rep.third_fitted) <= 1e-9);
    CHECK(std::abs(rep.third_predicted) <= 1e-12);
    // D(t) = c2 t^2 exactly on the whole grid
    for (std::size_t i = 0; i < rep.t_grid.size(); ++i)
      CHECK(rep.divergence[i] ==
            doctest::Approx(rep.second_predicted * rep.t_grid[i] * rep.t_grid[i])
                .epsilon(1e-10));
  }
  SUBCASE("logsumexp symmetric point has no third-order term") {
    auto gen = logsumexp(1);
    Matrix pt(1, 1);
    pt << 0.0;  // mirror image 0.5: skewness vanishes
    auto rho = uniform_measure(pt);
    ConvexMap shift{"shift",
                    [g = gen](const Vector& x) {
                      Vector y = g.grad(x);
                      y[0] += 0.1;
                      return y;
                    },
                    Chart::dual, std::nullopt};
    auto rep = expansion_check(gen, rho, shift, Chart::dual);
    CHECK(std::abs(rep.third_predicted) <= 1e-12);
    CHECK(std::abs(rep.third_fitted) <= 1e-8);
  }
  SUBCASE("logsumexp skewed point matches the cubic prediction") {
    auto gen = logsumexp(1);
    Matrix pt(1, 1);
    pt << std::log(3.0);  // mirror image 0.75
    auto rho = uniform_measure(pt);
    ConvexMap shift{"shift",
                    [g = gen](const Vector& x) {
                      Vector y = g.grad(x);
                      y[0] += 0.1;
                      return y;
                    },
                    Chart::dual, std::nullopt};
    auto rep = expansion_check(gen, rho, shift, Chart::dual);
    CHECK(rep.third_predicted ==
          doctest::Approx(0.0023703703703703703).epsilon(1e-9));
    CHECK(rep.third_fitted ==
          doctest::Approx(rep.third_predicted).epsilon(1e-3));
  }
  SUBCASE("second and third order ratios on random fixtures") {
    for (auto name : {"logsumexp", "diaglogistic"}) {
      auto gen = make_generator(name, 2);
      CAPTURE(name);
      SplitRng rng(11);
      for (int k = 0; k < 5; ++k) {
        auto rho = random_cloud(gen, 3, rng);
        auto Df = checked_map_into_dual(gen, rho, rng);
        auto rep = expansion_check(gen, rho, Df, Chart::dual);
        CHECK(rep.second_fitted ==
              doctest::Approx(rep.second_predicted).epsilon(0.02));
        if (std::abs(rep.third_predicted) > 1e-8)
          CHECK(rep.third_fitted ==
                doctest::Approx(rep.third_predicted).epsilon(0.10));
      }
    }
  }
  SUBCASE("primal-kind expansion matches its predictions") {
    for (auto name : {"logsumexp", "diaglogistic"}) {
      auto gen = make_generator(name, 2);
      CAPTURE(name);
      SplitRng rng(12);
      auto rho = random_cloud(gen, 3, rng);
      auto Dh = checked_map_into_primal(gen, rho, rng);
      auto rep = expansion_check(gen, rho, Dh, Chart::primal);
      CHECK(rep.second_fitted ==
            doctest::Approx(rep.second_predicted).epsilon(0.02));
      if (std::abs(rep.third_predicted) > 1e-8)
        CHECK(rep.third_fitted ==
              doctest::Approx(rep.third_predicted).epsilon(0.10));
    }
  }
  SUBCASE("monge evaluation is optimal at the largest grid point") {
    auto gen = logsumexp(2);
    SplitRng rng(13);
    auto rho = random_cloud(gen, 4, rng, true);
    auto Df = checked_map_into_dual(gen, rho, rng);
    auto rep = expansion_check(gen, rho, Df, Chart::dual);
    double tmax = rep.t_grid.front();
    auto path = make_path(gen, rho, Df, Chart::dual);
    auto mu_t = path.at(tmax);
    double solved = bw_divergence(gen, rho, mu_t).value;
    CHECK(rep.divergence.front() == doctest::Approx(solved).epsilon(1e-9));
  }
}
