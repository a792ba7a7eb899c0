#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "physvac/ode.hpp"
#include "physvac/quadrature.hpp"

using namespace physvac;

TEST_CASE("gauss panel rule is exact on polynomials") {
  // 16 points integrate degree <= 31 exactly
  for (int deg : {0, 1, 7, 16, 31}) {
    const double got =
        quad::gauss16([deg](double x) { return std::pow(x, deg); }, 0.0, 1.0);
    CHECK_THAT(got, Catch::Matchers::WithinRel(1.0 / (deg + 1), 1e-13));
  }
  CHECK_THAT(quad::composite16([](double x) { return std::cos(x); }, 0.0,
                               10.0, 20),
             Catch::Matchers::WithinAbs(std::sin(10.0), 1e-13));
}

TEST_CASE("graded panels resolve endpoint degeneracy") {
  // int_0^1 (1-x)^{-1/2} dx = 2: integrable singularity at the endpoint.
  // The refinement floor leaves a dropped sliver of O(w_floor^{1+p}),
  // about 1.7e-7 here and far smaller for p > 0.
  CHECK_THAT(quad::graded_upper(
                 [](double x) { return 1.0 / std::sqrt(1.0 - x); }, 0.0, 1.0),
             Catch::Matchers::WithinRel(2.0, 1e-6));
  // fractional positive power: int_0^1 (1-x)^{0.3} dx = 1/1.3
  CHECK_THAT(quad::graded_upper(
                 [](double x) { return std::pow(1.0 - x, 0.3); }, 0.0, 1.0),
             Catch::Matchers::WithinRel(1.0 / 1.3, 1e-13));
  // mirrored variant
  CHECK_THAT(quad::graded_lower(
                 [](double x) { return std::pow(x, -0.25); }, 0.0, 1.0),
             Catch::Matchers::WithinRel(1.0 / 0.75, 1e-9));
}

TEST_CASE("embedded integrator on a linear problem") {
  ode::Options opt;
  opt.rtol = opt.atol = 1e-12;
  double last_t = -1.0, last_y = 0.0;
  long accepts = 0;
  ode::integrate_dopri5<1>(
      [](double, const ode::State<1>& y) -> ode::State<1> {
        return {-y[0]};
      },
      0.0, {1.0}, 5.0, opt,
      [&](double t, const ode::State<1>& y, const ode::State<1>&) {
        CHECK(t > last_t);  // observer sees monotone accepted times
        last_t = t;
        last_y = y[0];
        ++accepts;
      });
  CHECK(last_t == 5.0);
  CHECK(accepts > 2);
  CHECK_THAT(last_y, Catch::Matchers::WithinRel(std::exp(-5.0), 1e-10));
}

TEST_CASE("embedded integrator tracks an oscillator and honors max_step") {
  ode::Options opt;
  opt.rtol = opt.atol = 1e-11;
  opt.max_step = [](double) { return 0.05; };
  double prev_t = 0.0, max_dt = 0.0;
  ode::State<2> last{};
  ode::integrate_dopri5<2>(
      [](double, const ode::State<2>& y) -> ode::State<2> {
        return {y[1], -y[0]};
      },
      0.0, {1.0, 0.0}, 10.0, opt,
      [&](double t, const ode::State<2>& y, const ode::State<2>&) {
        max_dt = std::max(max_dt, t - prev_t);
        prev_t = t;
        last = y;
      });
  CHECK(max_dt <= 0.05 + 1e-12);
  CHECK_THAT(last[0], Catch::Matchers::WithinAbs(std::cos(10.0), 1e-9));
  CHECK_THAT(last[1], Catch::Matchers::WithinAbs(-std::sin(10.0), 1e-9));
}
