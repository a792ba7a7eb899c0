#pragma once

// The acceptance suite: every criterion of the long-time decay study,
// each with its threshold pinned in code. Used both by the dedicated
// acceptance test binary and by the CLI 'selftest' subcommand.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "physvac/barenblatt.hpp"
#include "physvac/corrector.hpp"
#include "physvac/diagnostics.hpp"
#include "physvac/grid.hpp"
#include "physvac/solver.hpp"

namespace physvac::acceptance {

struct CriterionResult {
  int id = 0;
  std::string name;
  bool pass = false;
  std::string detail;
};

namespace detail {

inline std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

// The gamma=2 decay run shared by criteria 7-11.
struct SharedRun {
  BarenblattParams p;
  CorrectorPath path;
  Grid grid;
  Trajectory traj;
  DecayRateReport report;
  std::vector<EnergyReport> energies;

  static SharedRun make() {
    const auto p = derive_constants(2.0, 1.0);
    auto path = CorrectorPath::solve(2.0, 1.1e3, 1e-10);
    auto grid = build_grid(p, 400, Grading::boundary_graded);
    PerturbationSolver solver(p, path, grid);
    InitialDataSpec init;
    init.amplitude = 1e-3;
    auto traj =
        solver.run(make_initial_data(p, init, grid), 1e3, {.count = 120});
    auto report = decay_rate_report(traj, p, path, grid);
    std::vector<EnergyReport> energies;
    energies.reserve(traj.samples.size());
    for (const auto& s : traj.samples)
      energies.push_back(
          energy_levels(p, path, grid, {s.t, s.zeta, s.zeta_t}));
    return {p, std::move(path), std::move(grid), std::move(traj),
            std::move(report), std::move(energies)};
  }
};

}  // namespace detail

// 1. Mass of the Barenblatt profile is invariant in time.
inline CriterionResult mass_invariance() {
  double worst = 0.0;
  for (double gamma : {1.5, 2.0, 3.0})
    for (double mass : {1.0, 5.0}) {
      const auto p = derive_constants(gamma, mass);
      for (double t : {0.0, 1.0, 10.0, 100.0, 1000.0})
        worst = std::max(worst,
                         std::fabs(total_mass(p, t).value - mass) / mass);
    }
  return {1, "barenblatt-mass-invariance", worst < 1e-8,
          detail::fmt("max relative mass error %.3e (< 1e-8)", worst)};
}

// 2. The profile satisfies PME + Darcy at second order.
inline CriterionResult pme_darcy_order() {
  const auto p = derive_constants(2.0, 1.0);
  const double t = 1.0;
  const double Rin = 0.9 * boundary_radius(p, t);
  auto worst_at = [&](double dh) {
    double pme = 0.0, darcy = 0.0;
    for (int k = 0; k < 20; ++k) {
      const double r = 0.05 * Rin + (Rin - 0.1 * Rin) * k / 19.0;
      const auto [rp, rd] = pme_residual(p, r, t, dh);
      pme = std::max(pme, std::fabs(rp));
      darcy = std::max(darcy, std::fabs(rd));
    }
    return std::pair{pme, darcy};
  };
  const auto [p1, d1] = worst_at(1e-2);
  const auto [p2, d2] = worst_at(5e-3);
  const double ord_pme = std::log2(p1 / p2);
  const double ord_darcy = std::log2(d1 / d2);
  return {2, "barenblatt-pme-darcy-order",
          ord_pme >= 1.9 && ord_darcy >= 1.9,
          detail::fmt("observed orders pme %.3f, darcy %.3f (>= 1.9)",
                      ord_pme, ord_darcy)};
}

// 3. Corrector structure: positivity, single h_t sign change, Volterra
// cross-check, tail-stable decay quotients.
inline CriterionResult corrector_structure() {
  bool pass = true;
  std::string detail_all;
  for (double gamma : {1.5, 2.0, 3.0}) {
    const auto path = CorrectorPath::solve(gamma, 1e4, 1e-10);
    double h_min = 0.0, ert_min = 0.0, volterra_max = 0.0;
    for (const auto& st : path.steps()) {
      h_min = std::min(h_min, st.h);
      ert_min = std::min(
          ert_min, st.ht + physvac::detail::ebar_r(gamma, st.t, 1));
    }
    for (int k = 0; k < 50; ++k) {
      const double t = 0.1 * std::pow(1e5, k / 49.0);
      volterra_max = std::max(volterra_max, volterra_residual(path, t));
    }
    const auto sig = phase_signature(path);
    const auto decay = decay_report(path);
    const bool ok = h_min >= -1e-12 && ert_min >= -1e-12 &&
                    sig.ht_sign_changes == 1 && volterra_max < 1e-8 &&
                    decay.tail_stable;
    pass = pass && ok;
    detail_all += detail::fmt(
        "[g=%.1f: h_min %.1e, ert_min %.1e, signchg %d, volterra %.2e, "
        "tail %s] ",
        gamma, h_min, ert_min, sig.ht_sign_changes, volterra_max,
        decay.tail_stable ? "stable" : "GROWING");
  }
  return {3, "corrector-structure", pass, detail_all};
}

// 4. The corrected ansatz solves the Lagrangian equation pointwise.
inline CriterionResult ansatz_exactness() {
  const auto p = derive_constants(2.0, 1.0);
  const auto path = CorrectorPath::solve(2.0, 1e3, 1e-10);
  const double L = std::sqrt(p.A / p.B);
  double worst = 0.0;
  for (int i = 0; i < 10; ++i) {
    const double r = L * (0.05 + 0.9 * i / 9.0);
    for (int k = 0; k < 10; ++k) {
      const double t = 0.1 * std::pow(1e4, k / 9.0);
      worst = std::max(worst, std::fabs(ansatz_residual(p, path, r, t)));
    }
  }
  return {4, "ansatz-exactness", worst < 1e-8,
          detail::fmt("max |residual| %.3e (< 1e-8)", worst)};
}

// 5. The zero perturbation is preserved.
inline CriterionResult zero_solution() {
  const auto p = derive_constants(2.0, 1.0);
  const auto path = CorrectorPath::solve(2.0, 110.0, 1e-10);
  const auto grid = build_grid(p, 200);
  PerturbationSolver solver(p, path, grid);
  InitialDataSpec init;
  init.amplitude = 0.0;
  const auto traj =
      solver.run(make_initial_data(p, init, grid), 100.0, {.count = 40});
  double sup = 0.0;
  for (const auto& s : traj.samples)
    for (double z : s.zeta) sup = std::max(sup, std::fabs(z));
  return {5, "zero-solution-preservation", sup < 1e-10,
          detail::fmt("sup|zeta| = %.3e over [0,100] (< 1e-10)", sup)};
}

// 6. rhs linearizes to the coded linear operator at first order.
inline CriterionResult linearization_consistency() {
  const auto p = derive_constants(2.0, 1.0);
  const auto path = CorrectorPath::solve(2.0, 10.0, 1e-10);
  const auto grid = build_grid(p, 200);
  PerturbationSolver solver(p, path, grid);
  const std::size_t n = grid.n_nodes();
  std::vector<double> phi(n), lin(n), pert(n), acc(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double s = (p.B / p.A) * grid.r[i] * grid.r[i];
    phi[i] = -(1.0 - s + 0.3 * s * s);
  }
  solver.linearized_accel(0.0, phi, lin);
  const double epses[3] = {1e-2, 1e-3, 1e-4};
  double lx[3], ly[3];
  for (int k = 0; k < 3; ++k) {
    for (std::size_t i = 0; i < n; ++i) pert[i] = epses[k] * phi[i];
    solver.accel(0.0, pert, acc);
    double err = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      err = std::max(err, std::fabs(acc[i] / epses[k] - lin[i]));
    lx[k] = std::log(epses[k]);
    ly[k] = std::log(err);
  }
  // least-squares slope through the three points
  const double mx = (lx[0] + lx[1] + lx[2]) / 3, my = (ly[0] + ly[1] + ly[2]) / 3;
  double num = 0, den = 0;
  for (int k = 0; k < 3; ++k) {
    num += (lx[k] - mx) * (ly[k] - my);
    den += (lx[k] - mx) * (lx[k] - mx);
  }
  const double slope = num / den;
  return {6, "linearization-consistency", slope >= 1.0,
          detail::fmt("Richardson slope %.4f (>= 1)", slope)};
}

// 7. Free boundary expands like (1+t)^{1/(3g-1)}.
inline CriterionResult boundary_rate(const detail::SharedRun& run) {
  const auto& e = run.report.boundary;
  return {7, "boundary-expansion-rate", e.rel_deviation < 0.05,
          detail::fmt("fitted %.5f vs 0.2, deviation %.2f%% (< 5%%)",
                      e.base_exponent, 100 * e.rel_deviation)};
}

// 8. Velocity converges to the Barenblatt field at the expected rate.
inline CriterionResult velocity_rate(const detail::SharedRun& run) {
  const auto& e = run.report.velocity;
  return {8, "velocity-decay-rate", e.rel_deviation < 0.15,
          detail::fmt("base exponent %.4f vs -1, deviation %.2f%% (< 15%%), "
                      "regime %s",
                      e.base_exponent, 100 * e.rel_deviation,
                      e.regime == DecayRegime::log_dominant ? "ln-dominant"
                                                            : "sqrt(E0)")};
}

// 9. Density converges at rate -4/(3g-1) after sigma normalization.
inline CriterionResult density_rate(const detail::SharedRun& run) {
  const auto& e = run.report.density;
  return {9, "density-decay-rate", e.rel_deviation < 0.15,
          detail::fmt("base exponent %.4f vs -0.8, deviation %.2f%% (< 15%%), "
                      "regime %s",
                      e.base_exponent, 100 * e.rel_deviation,
                      e.regime == DecayRegime::log_dominant ? "ln-dominant"
                                                            : "sqrt(E0)")};
}

// 10. The vacuum boundary stays physical with a stable normalized slope.
inline CriterionResult vacuum_bracket(const detail::SharedRun& run) {
  const double ratio = run.report.bracket_ratio;
  return {10, "physical-vacuum-bracket", ratio <= 10.0,
          detail::fmt("normalized bracket [%.4f, %.4f], ratio %.2f (<= 10)",
                      run.report.bracket_norm_min, run.report.bracket_norm_max,
                      ratio)};
}

// 11. The weighted energy stays bounded by its initial value.
inline CriterionResult energy_bound(const detail::SharedRun& run) {
  const double E0 = run.energies.front().E_total;
  double worst = 0.0;
  bool nonneg = true;
  for (const auto& e : run.energies) {
    worst = std::max(worst, e.E_total / E0);
    for (double v : e.E_j) nonneg = nonneg && v >= 0.0;
    for (const auto& row : e.E_ji)
      for (double v : row) nonneg = nonneg && v >= 0.0;
  }
  return {11, "energy-boundedness", worst <= 10.0 && nonneg,
          detail::fmt("max E(t)/E(0) = %.3f (<= 10), entries nonnegative: %s",
                      worst, nonneg ? "yes" : "NO")};
}

// 12. Hardy inequality holds uniformly over a random polynomial family.
inline CriterionResult hardy_property(long seed = 12345) {
  const auto p = derive_constants(2.0, 1.0);
  const auto g1 = build_grid(p, 200);
  const auto g2 = build_grid(p, 400);
  std::mt19937_64 rng(static_cast<unsigned long>(seed));
  std::uniform_real_distribution<double> coef(-1.0, 1.0);
  bool pass = true;
  std::string note;
  for (double k : {1.5, 2.0, 3.0}) {
    std::vector<double> ratios1, ratios2;
    std::mt19937_64 r2 = rng;  // same draws on both grids
    for (int d = 0; d < 100; ++d) {
      double c[7];
      for (auto& x : c) x = coef(r2);
      auto eval = [&](const Grid& g) {
        std::vector<double> F(g.n_nodes());
        for (std::size_t i = 0; i < g.n_nodes(); ++i) {
          double acc = 0.0;
          for (int q = 6; q >= 0; --q) acc = acc * g.r[i] + c[q];
          F[i] = acc;
        }
        return hardy_ratio(g, F, k);
      };
      ratios1.push_back(eval(g1));
      ratios2.push_back(eval(g2));
    }
    auto med = [](std::vector<double> v) {
      std::nth_element(v.begin(), v.begin() + v.size() / 2, v.end());
      return v[v.size() / 2];
    };
    const double max1 = *std::max_element(ratios1.begin(), ratios1.end());
    const double max2 = *std::max_element(ratios2.begin(), ratios2.end());
    const double med1 = med(ratios1);
    const bool ok =
        max1 <= 10.0 * med1 && std::fabs(max2 - max1) <= 0.2 * max1;
    pass = pass && ok;
    note += detail::fmt("[k=%.1f: max %.3f, med %.3f, refined max %.3f] ", k,
                        max1, med1, max2);
  }
  return {12, "hardy-inequality", pass, note};
}

// 13. Solver self-convergence in the grid spacing.
inline CriterionResult self_convergence() {
  const auto p = derive_constants(2.0, 1.0);
  const auto path = CorrectorPath::solve(2.0, 11.0, 1e-10);
  InitialDataSpec init;
  init.amplitude = 1e-3;
  auto solve_n = [&](int n) {
    const auto grid = build_grid(p, n, Grading::uniform);
    PerturbationSolver solver(p, path, grid);
    const auto traj =
        solver.run(make_initial_data(p, init, grid), 10.0, {.count = 2});
    return traj.samples.back().zeta;
  };
  const auto z100 = solve_n(100);
  const auto z200 = solve_n(200);
  const auto z400 = solve_n(400);
  double d1 = 0.0, d2 = 0.0;
  for (std::size_t i = 0; i <= 100; ++i) {
    d1 = std::max(d1, std::fabs(z100[i] - z200[2 * i]));
    d2 = std::max(d2, std::fabs(z200[2 * i] - z400[4 * i]));
  }
  const double order = std::log2(d1 / d2);
  return {13, "solver-self-convergence", order >= 1.0,
          detail::fmt("sup diffs %.3e / %.3e, observed order %.2f (>= 1)", d1,
                      d2, order)};
}

inline std::vector<CriterionResult> run_all(long seed = 12345) {
  std::vector<CriterionResult> out;
  out.push_back(mass_invariance());
  out.push_back(pme_darcy_order());
  out.push_back(corrector_structure());
  out.push_back(ansatz_exactness());
  out.push_back(zero_solution());
  out.push_back(linearization_consistency());
  const auto run = detail::SharedRun::make();
  out.push_back(boundary_rate(run));
  out.push_back(velocity_rate(run));
  out.push_back(density_rate(run));
  out.push_back(vacuum_bracket(run));
  out.push_back(energy_bound(run));
  out.push_back(hardy_property(seed));
  out.push_back(self_convergence());
  return out;
}

}  // namespace physvac::acceptance
