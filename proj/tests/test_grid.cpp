#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "physvac/grid.hpp"

using namespace physvac;

namespace {
const BarenblattParams p2 = derive_constants(2.0, 1.0);
}

TEST_CASE("grid construction") {
  CHECK_THROWS_AS(build_grid(p2, 16), std::domain_error);

  const double L = std::sqrt(p2.A / p2.B);
  const auto gu = build_grid(p2, 32, Grading::uniform);
  REQUIRE(gu.n_nodes() == 33);
  for (std::size_t i = 0; i + 1 < gu.n_nodes(); ++i)
    CHECK_THAT(gu.r[i + 1] - gu.r[i],
               Catch::Matchers::WithinRel(L / 32, 1e-12));
  CHECK(gu.sigma.back() == 0.0);
  CHECK(gu.r.front() == 0.0);
  CHECK(gu.r.back() == L);

  // doubling n_cells halves the max spacing
  const auto gu2 = build_grid(p2, 64, Grading::uniform);
  double h1 = 0.0, h2 = 0.0;
  for (std::size_t i = 0; i + 1 < gu.n_nodes(); ++i)
    h1 = std::max(h1, gu.r[i + 1] - gu.r[i]);
  for (std::size_t i = 0; i + 1 < gu2.n_nodes(); ++i)
    h2 = std::max(h2, gu2.r[i + 1] - gu2.r[i]);
  CHECK_THAT(h2, Catch::Matchers::WithinRel(h1 / 2, 1e-12));

  const auto gb = build_grid(p2, 64, Grading::boundary_graded);
  REQUIRE(gb.n_nodes() == 65);
  CHECK(gb.sigma.back() == 0.0);
  CHECK(gb.r.back() == L);
  for (std::size_t i = 0; i + 1 < gb.n_nodes(); ++i)
    CHECK(gb.r[i + 1] > gb.r[i]);
  // clustered toward the edge: last cell much smaller than the first
  CHECK(gb.r[gb.n_nodes() - 1] - gb.r[gb.n_nodes() - 2] <
        0.5 * (gb.r[1] - gb.r[0]));
}

TEST_CASE("sigma identities at the nodes") {
  for (double g : {1.5, 2.0, 3.0}) {
    const auto p = derive_constants(g, 1.0);
    const auto grid = build_grid(p, 48);
    for (std::size_t i = 0; i < grid.n_nodes(); ++i) {
      CHECK(grid.sigma_r[i] == -2.0 * p.B * grid.r[i]);
      CHECK(std::fabs(std::pow(grid.rho0bar[i], g - 1.0) - grid.sigma[i]) <=
            1e-12 * p.A);
      CHECK(std::fabs(grid.sigma[i] - (p.A - p.B * grid.r[i] * grid.r[i])) <=
            1e-12 * p.A);
    }
  }
}

TEST_CASE("weighted integrals against closed forms") {
  const auto g = build_grid(p2, 200);
  std::vector<double> ones(g.n_nodes(), 1.0), zeros(g.n_nodes(), 0.0);
  CHECK(weighted_integral(g, zeros, 1.0, 2) == 0.0);
  const double AB = p2.A / p2.B;
  CHECK_THAT(weighted_integral(g, ones, 0.0, 2),
             Catch::Matchers::WithinRel(std::pow(AB, 1.5) / 3.0, 1e-12));
  CHECK_THAT(weighted_integral(g, ones, 1.0, 0),
             Catch::Matchers::WithinRel(2.0 / 3.0 * p2.A * std::sqrt(AB),
                                        1e-12));
  // the grid reproduces the total mass: int r^2 sigma^alpha dr = M
  CHECK_THAT(weighted_integral(g, ones, p2.alpha, 2),
             Catch::Matchers::WithinRel(1.0, 1e-11));
  CHECK_THROWS_AS(weighted_integral(g, ones, -1.5, 0), std::domain_error);

  // nodal trapezoid weights see the same mass at their own lower order
  double mass_trap = 0.0;
  for (std::size_t i = 0; i < g.n_nodes(); ++i)
    mass_trap += g.cell_weights[i] * g.r[i] * g.r[i] * g.rho0bar[i];
  CHECK_THAT(mass_trap, Catch::Matchers::WithinRel(1.0, 1e-2));
}

TEST_CASE("weighted integral converges at the nominal order") {
  // the F-interpolation error is O(h^2); the weight is exact
  auto err_at = [&](int n) {
    const auto g = build_grid(p2, n, Grading::uniform);
    const auto gref = build_grid(p2, 10 * n, Grading::uniform);
    std::vector<double> F(g.n_nodes()), Fref(gref.n_nodes());
    for (std::size_t i = 0; i < g.n_nodes(); ++i) F[i] = std::sin(g.r[i]);
    for (std::size_t i = 0; i < gref.n_nodes(); ++i)
      Fref[i] = std::sin(gref.r[i]);
    return std::fabs(weighted_integral(g, F, p2.alpha, 2) -
                     weighted_integral(gref, Fref, p2.alpha, 2));
  };
  const double e1 = err_at(64), e2 = err_at(128);
  CHECK(e1 / e2 > 3.5);
}

TEST_CASE("spatial derivatives") {
  const auto g = build_grid(p2, 100);
  const std::size_t n = g.n_nodes();
  std::vector<double> F(n);

  for (std::size_t i = 0; i < n; ++i) F[i] = g.r[i] * g.r[i];
  auto d1 = spatial_derivative(g, F, 1);
  for (std::size_t i = 0; i < n; ++i)
    CHECK(std::fabs(d1[i] - 2.0 * g.r[i]) < 1e-10);

  auto d1s = spatial_derivative(g, std::span(g.sigma), 1);
  for (std::size_t i = 0; i < n; ++i)
    CHECK(std::fabs(d1s[i] - g.sigma_r[i]) < 1e-10);

  // quartic: third and fourth derivatives exact up to round-off
  // amplification of the high-order weights on the graded tail
  for (std::size_t i = 0; i < n; ++i) F[i] = std::pow(g.r[i], 4);
  auto d3 = spatial_derivative(g, F, 3);
  auto d4 = spatial_derivative(g, F, 4);
  for (std::size_t i = 0; i < n; ++i) {
    CHECK(std::fabs(d3[i] - 24.0 * g.r[i]) < 1e-4);
    CHECK(std::fabs(d4[i] - 24.0) < 5e-3);
  }

  CHECK_THROWS_AS(spatial_derivative(g, F, 0), std::domain_error);
  CHECK_THROWS_AS(spatial_derivative(g, F, 5), std::domain_error);
}

TEST_CASE("second derivative truncation order") {
  auto err_at = [&](int n) {
    const auto g = build_grid(p2, n, Grading::uniform);
    std::vector<double> F(g.n_nodes());
    for (std::size_t i = 0; i < g.n_nodes(); ++i) F[i] = std::sin(g.r[i]);
    const auto d2 = spatial_derivative(g, F, 2);
    double worst = 0.0;
    for (std::size_t i = 0; i < g.n_nodes(); ++i)
      worst = std::max(worst, std::fabs(d2[i] + std::sin(g.r[i])));
    return worst;
  };
  CHECK(err_at(64) / err_at(128) > 3.5);
}

TEST_CASE("evenness-aware stencils") {
  const auto g = build_grid(p2, 64);
  const std::size_t n = g.n_nodes();
  std::vector<double> F(n), d1(n), d2(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double r = g.r[i];
    F[i] = 1.0 + 0.5 * r * r - 0.1 * r * r * r * r;
  }
  g.d1_even.apply(F, d1);
  g.d2_even.apply(F, d2);
  CHECK(d1[0] == 0.0);  // structurally zero for even data
  for (std::size_t i = 0; i < n; ++i) {
    const double r = g.r[i];
    CHECK(std::fabs(d1[i] - (r - 0.4 * r * r * r)) < 1e-9);
    CHECK(std::fabs(d2[i] - (1.0 - 1.2 * r * r)) < 1e-8);
  }
}

TEST_CASE("hardy ratio basics") {
  const auto g = build_grid(p2, 200);
  std::vector<double> zeros(g.n_nodes(), 0.0), ones(g.n_nodes(), 1.0);
  CHECK(hardy_ratio(g, zeros, 2.0) == 0.0);
  CHECK_THROWS_AS(hardy_ratio(g, ones, 1.0), std::domain_error);

  // F == 1, k = 3: ratio of two polynomial integrals over (L/2, L)
  const double L = g.edge();
  auto I1 = [&](double r) { return p2.A * r - p2.B * r * r * r / 3.0; };
  auto I3 = [&](double r) {
    const double A = p2.A, B = p2.B;
    return A * A * A * r - A * A * B * r * r * r +
           0.6 * A * B * B * std::pow(r, 5) - B * B * B * std::pow(r, 7) / 7.0;
  };
  const double expected =
      (I1(L) - I1(L / 2)) / (I3(L) - I3(L / 2));
  CHECK_THAT(hardy_ratio(g, ones, 3.0),
             Catch::Matchers::WithinRel(expected, 1e-10));
}

TEST_CASE("hardy ratios bounded over a random polynomial family") {
  const auto g1 = build_grid(p2, 128);
  const auto g2 = build_grid(p2, 256);
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> coef(-1.0, 1.0);
  double worst1 = 0.0, worst2 = 0.0;
  for (int d = 0; d < 30; ++d) {
    double c[7];
    for (auto& x : c) x = coef(rng);
    auto ratio = [&](const Grid& g) {
      std::vector<double> F(g.n_nodes());
      for (std::size_t i = 0; i < g.n_nodes(); ++i) {
        double acc = 0.0;
        for (int q = 6; q >= 0; --q) acc = acc * g.r[i] + c[q];
        F[i] = acc;
      }
      return hardy_ratio(g, F, 2.0);
    };
    const double r1 = ratio(g1), r2 = ratio(g2);
    CHECK(std::isfinite(r1));
    worst1 = std::max(worst1, r1);
    worst2 = std::max(worst2, r2);
  }
  CHECK(std::fabs(worst2 - worst1) < 0.2 * worst1);
}
