#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "physvac/diagnostics.hpp"

using namespace physvac;

namespace {
struct Setup {
  BarenblattParams p = derive_constants(2.0, 1.0);
  CorrectorPath path = CorrectorPath::solve(2.0, 200.0, 1e-10);
  Grid grid = build_grid(p, 100);
};
const Setup& setup() {
  static Setup s;
  return s;
}
PerturbationState small_state(const Setup& s, double amp, double t = 0.0) {
  InitialDataSpec spec;
  spec.amplitude = amp;
  auto st = make_initial_data(s.p, spec, s.grid);
  st.t = t;
  return st;
}
}  // namespace

TEST_CASE("energies vanish for the zero state and stay nonnegative") {
  const auto& s = setup();
  const std::size_t n = s.grid.n_nodes();
  PerturbationState zero{3.0, std::vector<double>(n, 0.0),
                         std::vector<double>(n, 0.0)};
  const auto rep = energy_levels(s.p, s.path, s.grid, zero);
  CHECK(rep.E_total == 0.0);
  for (double v : rep.E_j) CHECK(v == 0.0);

  const auto rep2 = energy_levels(s.p, s.path, s.grid, small_state(s, 1e-3));
  CHECK(rep2.E_total > 0.0);
  for (double v : rep2.E_j) CHECK(v >= 0.0);
  for (const auto& row : rep2.E_ji)
    for (double v : row) CHECK(v >= 0.0);
}

TEST_CASE("energy total is the sum of its cells") {
  const auto& s = setup();
  const auto rep = energy_levels(s.p, s.path, s.grid, small_state(s, 1e-3));
  double sum = 0.0;
  for (double v : rep.E_j) sum += v;
  for (const auto& row : rep.E_ji)
    for (double v : row) sum += v;
  CHECK_THAT(rep.E_total, Catch::Matchers::WithinRel(sum, 1e-14));
  // ladder depth honored: for gamma=2, l=5, so j=2 caps at i=3
  CHECK(rep.E_ji[2].size() == 3);
  CHECK(rep.E_ji[0].size() == 4);
  // the i=4 cells need a fifth derivative, which is a composed stencil
  for (const auto& c : rep.cells) {
    if (c.i == 4) CHECK(c.composed_stencil);
    if (c.i <= 3) CHECK_FALSE(c.composed_stencil);
  }
}

TEST_CASE("sigma-weighted sup family on a quadratic state") {
  // zeta = r^2 has exact stencil derivatives: entry (i=2, j=0) carries
  // weight sigma^{1/2} and value sup (sigma^{1/2} * 2)^2 = 4 A.
  const auto& s = setup();
  const std::size_t n = s.grid.n_nodes();
  PerturbationState st{0.0, std::vector<double>(n), std::vector<double>(n, 0.0)};
  for (std::size_t i = 0; i < n; ++i) st.zeta[i] = s.grid.r[i] * s.grid.r[i];
  const auto rep = sup_norm_report(s.p, s.path, s.grid, st);
  bool found = false;
  for (const auto& e : rep.sigma_family) {
    if (e.i == 2 && e.j == 0) {
      found = true;
      CHECK(e.r_power == 0);  // i+j = 2 <= l-2 for gamma = 2
      CHECK(e.in_apriori_set);
      CHECK_THAT(e.value, Catch::Matchers::WithinRel(4.0 * s.p.A, 1e-8));
    }
    if (e.i + e.j == s.p.ell) CHECK(e.r_power == 2);
    if (e.i + e.j == s.p.ell - 1) CHECK(e.r_power == 1);
  }
  CHECK(found);
}

TEST_CASE("state-variable quadratic terms scale by four") {
  const auto& s = setup();
  auto st = small_state(s, 1e-3, 2.0);
  for (auto& v : st.zeta_t) v = 1e-4;  // nonzero velocity part
  auto doubled = st;
  for (auto& v : doubled.zeta) v *= 2.0;
  for (auto& v : doubled.zeta_t) v *= 2.0;
  const auto r1 = energy_levels(s.p, s.path, s.grid, st);
  const auto r2 = energy_levels(s.p, s.path, s.grid, doubled);
  CHECK_THAT(r2.state_quadratic[0],
             Catch::Matchers::WithinRel(4.0 * r1.state_quadratic[0], 1e-12));
  CHECK_THAT(r2.state_quadratic[1],
             Catch::Matchers::WithinRel(4.0 * r1.state_quadratic[1], 1e-12));
}

TEST_CASE("sup norms of simple states") {
  const auto& s = setup();
  const std::size_t n = s.grid.n_nodes();
  PerturbationState zero{0.0, std::vector<double>(n, 0.0),
                         std::vector<double>(n, 0.0)};
  auto rep = sup_norm_report(s.p, s.path, s.grid, zero);
  CHECK(rep.zeta_timed[0] == 0.0);
  CHECK(rep.zeta_timed[1] == 0.0);
  CHECK(rep.zeta_r_timed[0] == 0.0);
  CHECK(rep.apriori_sum == 0.0);

  PerturbationState constant{0.0, std::vector<double>(n, 0.01),
                             std::vector<double>(n, 0.0)};
  rep = sup_norm_report(s.p, s.path, s.grid, constant);
  CHECK_THAT(rep.zeta_timed[0], Catch::Matchers::WithinRel(1e-4, 1e-12));
  CHECK(rep.zeta_r_timed[0] < 1e-20);  // stencil weights cancel on constants
}

TEST_CASE("vacuum slope closed form for the unperturbed flow") {
  const auto& s = setup();
  const std::size_t n = s.grid.n_nodes();
  PerturbationState zero{0.0, std::vector<double>(n, 0.0),
                         std::vector<double>(n, 0.0)};
  auto br = vacuum_slope(s.p, s.path, s.grid, zero);
  // at t=0 the slope is 2 B r, maximal at the edge: 2 sqrt(A B)
  CHECK_THAT(br.max_abs,
             Catch::Matchers::WithinRel(2.0 * std::sqrt(s.p.A * s.p.B),
                                        1e-12));
  CHECK(br.norm_max / br.norm_min <= 2.0 + 1e-12);
  CHECK(br.norm_max / br.norm_min > 1.85);

  // normalized bracket is stable between t=0 and t=100 up to the
  // corrector drift
  PerturbationState late{100.0, std::vector<double>(n, 0.0),
                         std::vector<double>(n, 0.0)};
  auto brl = vacuum_slope(s.p, s.path, s.grid, late);
  CHECK(std::fabs(brl.norm_max - br.norm_max) < 0.05 * br.norm_max);

  // closed form 2 B r eta_r^{2-3g} at every selected node
  const double e = s.path.eta_r(100.0);
  const double expect_max =
      2.0 * s.p.B * s.grid.edge() * std::pow(e, 2.0 - 3.0 * s.p.gamma);
  CHECK_THAT(brl.max_abs, Catch::Matchers::WithinRel(expect_max, 1e-12));
}

TEST_CASE("rate fitting on synthetic series") {
  std::vector<double> t, y;
  for (int k = 0; k < 40; ++k) {
    t.push_back(std::pow(10.0, 3.0 * k / 39.0));
    y.push_back(std::pow(1.0 + t.back(), 0.2));
  }
  auto fit = fit_rate(t, y, 1.0, 1000.0, FitModel::pure_power);
  CHECK_THAT(fit.exponent, Catch::Matchers::WithinAbs(0.2, 1e-10));
  CHECK(fit.r_squared == 1.0);
  CHECK_FALSE(fit.degenerate);

  for (auto& v : y) v = 7.0;
  fit = fit_rate(t, y, 1.0, 1000.0, FitModel::pure_power);
  CHECK(fit.degenerate);
  CHECK(fit.exponent == 0.0);

  for (std::size_t k = 0; k < t.size(); ++k)
    y[k] = std::pow(1.0 + t[k], -0.8) * std::log(2.0 + t[k]);
  fit = fit_rate(t, y, 1.0, 1000.0, FitModel::power_times_log);
  CHECK_THAT(fit.exponent, Catch::Matchers::WithinAbs(-0.8, 1e-3));

  CHECK_THROWS_AS(fit_rate(t, y, 999.0, 1000.0, FitModel::pure_power),
                  std::domain_error);
}

TEST_CASE("decay-rate report for the unperturbed run") {
  // With zeta == 0 everything is driven by the corrector: R(t) fits the
  // exact expansion exponent and the velocity difference is h_t alone.
  const auto p = derive_constants(2.0, 1.0);
  const auto path = CorrectorPath::solve(2.0, 1e5, 1e-10);
  const auto grid = build_grid(p, 64, Grading::uniform);
  PerturbationSolver solver(p, path, grid);
  InitialDataSpec spec;
  spec.amplitude = 0.0;
  const auto traj =
      solver.run(make_initial_data(p, spec, grid), 1e5, {.count = 100});
  const auto rep = decay_rate_report(traj, p, path, grid);

  CHECK(std::fabs(rep.boundary.base_exponent - 0.2) < 1e-3);
  CHECK(rep.boundary.fit_pure.r_squared > 0.999999);

  // |h_t| decays like (1+t)^{-1.8} ln(1+t): the fitted power_times_log
  // exponent sits near -1.8 and the regime-corrected base near -1.
  CHECK(std::fabs(rep.velocity.fit_log.exponent + 1.8) < 0.1);
  CHECK(rep.regime == DecayRegime::log_dominant);
  CHECK(std::fabs(rep.velocity.base_exponent + 1.0) < 0.15);
  CHECK(std::fabs(rep.density.base_exponent + 0.8) < 0.12);
  CHECK(rep.bracket_ratio < 3.0);
}

TEST_CASE("a-priori sup set stays small along a small-data run") {
  const auto& s = setup();
  PerturbationSolver solver(s.p, s.path, s.grid);
  InitialDataSpec spec;
  spec.amplitude = 1e-3;
  const auto traj =
      solver.run(make_initial_data(s.p, spec, s.grid), 100.0, {.count = 30});
  double apriori_max = 0.0, apriori_late = 0.0;
  for (const auto& sm : traj.samples) {
    const auto rep = sup_norm_report(s.p, s.path, s.grid,
                                     {sm.t, sm.zeta, sm.zeta_t});
    apriori_max = std::max(apriori_max, rep.apriori_sum);
    if (sm.t >= 50.0) apriori_late = std::max(apriori_late, rep.apriori_sum);
  }
  CHECK(apriori_max < 1.0);                  // consistent with eps0 < 1
  CHECK(apriori_late <= 1.1 * apriori_max);  // no late-time growth
}
