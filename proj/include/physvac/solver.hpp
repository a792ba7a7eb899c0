#pragma once

// Method-of-lines evolution of the Lagrangian perturbation zeta(r,t)
// around the corrected Barenblatt ansatz. With e(t) the corrected slope,
// w1 = e + zeta, w2 = e + zeta + r zeta_r, the sigma-divided equation is
//
//   zeta_tt = -zeta_t
//           + sigma [ 2g w1^{1-2g} w2^{-g} (zeta_r/r)
//                   + g  w1^{2-2g} w2^{-g-1} (2 zeta_r/r + zeta_rr) ]
//           + (2 B g/(g-1)) [ w1^{2-2g} w2^{-g} - e^{2-3g} ],
//
// where the flux derivative has been expanded by the chain rule (no
// differencing of the composite flux). The 1/r factors are removable:
// zeta_r/r -> zeta_rr(0) by evenness, and sigma_r/r = -2B everywhere.
// The bracketed power difference is evaluated through expm1/log1p so the
// zero perturbation is a bit-exact fixed point of the whole scheme.
//
// Time integration: two-stage exponential scheme, second order, with the
// damping factor e^{-dt} treated exactly. The equation degenerates at
// the vacuum edge (sigma = 0 kills the second-order term) and is
// integrated there as an ODE with one-sided zeta_r; no boundary
// condition is imposed.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "physvac/corrector.hpp"
#include "physvac/grid.hpp"

namespace physvac {

class numerical_error : public std::runtime_error {
 public:
  numerical_error(const std::string& what, double t, int node)
      : std::runtime_error(what + " at t=" + std::to_string(t) +
                           ", node=" + std::to_string(node)),
        t_fail(t),
        node(node) {}
  double t_fail;
  int node;
};

struct PerturbationState {
  double t = 0.0;
  std::vector<double> zeta, zeta_t;
};

struct InitialDataSpec {
  double amplitude = 1e-3;
  std::vector<double> shape = {1.0, -1.0};  // polynomial in s = (B/A) r^2
  double velocity_amplitude = 0.0;
  std::vector<double> shape_t;              // polynomial in s
};

struct EulerianSnapshot {
  std::vector<double> eta, rho, u;
  double R = 0.0;
};

struct TrajectorySample {
  double t = 0.0;
  std::vector<double> zeta, zeta_t;
};

struct RunSummary {
  long steps = 0;
  double jacobian_min = std::numeric_limits<double>::infinity();
  double mass_residual_max = 0.0;
  double dt_min = std::numeric_limits<double>::infinity();
  double dt_max = 0.0;
};

struct Trajectory {
  std::vector<TrajectorySample> samples;
  RunSummary summary;
  double horizon = 0.0;
};

struct SamplingSpec {
  int count = 120;
  double t_first = 0.0;  // 0 -> max(1e-2, horizon * 5e-4)
};

namespace detail {
inline double poly_in_s(std::span<const double> coef, double s) {
  double acc = 0.0;
  for (std::size_t k = coef.size(); k-- > 0;) acc = acc * s + coef[k];
  return acc;
}
}  // namespace detail

class PerturbationSolver {
 public:
  PerturbationSolver(const BarenblattParams& p, const CorrectorPath& path,
                     const Grid& g, double cfl = 0.5)
      : p_(p), path_(&path), g_(&g), cfl_(cfl) {
    const std::size_t n = g.n_nodes();
    zr_.resize(n);
    zrr_.resize(n);
    wr_.resize(n);
    wrr_.resize(n);
    f1_.resize(n);
    f2_.resize(n);
    zpred_.resize(n);
  }

  const BarenblattParams& params() const { return p_; }
  const Grid& grid() const { return *g_; }
  const CorrectorPath& path() const { return *path_; }
  double jacobian_min_seen() const { return jac_min_; }

  // Optional source term added to the acceleration (manufactured-solution
  // studies). Receives (t, accel) and adds in place.
  std::function<void(double, std::span<double>)> forcing;

  // Acceleration G with the damping term excluded: zeta_tt = -zeta_t + G.
  void accel(double t, std::span<const double> zeta, std::span<double> out) {
    const Grid& g = *g_;
    const double gam = p_.gamma;
    const double e = path_->eta_r_deriv(t, 0);
    const double em23 = std::pow(e, 2.0 - 3.0 * gam);
    const double cB = 2.0 * p_.B * gam / (gam - 1.0);
    g.d1_even.apply(zeta, zr_);
    g.d2_even.apply(zeta, zrr_);
    const std::size_t n = g.n_nodes();
    for (std::size_t i = 0; i < n; ++i) {
      const double r = g.r[i];
      const double z = zeta[i];
      const double rzr = r * zr_[i];
      const double w1 = e + z;
      const double w2 = e + z + rzr;
      if (!(w1 > 0.0) || !(w2 > 0.0))
        throw numerical_error("Jacobian positivity lost", t,
                              static_cast<int>(i));
      jac_min_ = std::min(jac_min_, std::min(w1, w2));
      const double q = i == 0 ? zrr_[0] : zr_[i] / r;
      const double pw1 = std::pow(w1, 1.0 - 2.0 * gam);   // w1^{1-2g}
      const double pw2 = std::pow(w2, -1.0 - gam);        // w2^{-g-1}
      const double tp =
          em23 * std::expm1((2.0 - 2.0 * gam) * std::log1p(z / e) -
                            gam * std::log1p((z + rzr) / e));
      out[i] = g.sigma[i] * (2.0 * gam * pw1 * (w2 * pw2) * q +
                             gam * (w1 * pw1) * pw2 * (2.0 * q + zrr_[i])) +
               cB * tp;
    }
    if (forcing) forcing(t, out);
  }

  void rhs(const PerturbationState& s, std::span<double> zeta_tt) {
    accel(s.t, s.zeta, zeta_tt);
    for (std::size_t i = 0; i < zeta_tt.size(); ++i) zeta_tt[i] -= s.zeta_t[i];
  }

  // Linearization of the acceleration around zeta = 0 at time t:
  //   L phi = g e^{1-3g} [ sigma phi_rr + 4 sigma phi_r/r
  //                      + (g/(g-1)) sigma_r phi_r
  //                      + 2B(2-3g)/(g-1) phi ].
  void linearized_accel(double t, std::span<const double> phi,
                        std::span<double> out) {
    const Grid& g = *g_;
    const double gam = p_.gamma;
    const double e = path_->eta_r_deriv(t, 0);
    const double pref = gam * std::pow(e, 1.0 - 3.0 * gam);
    const double zcoef = 2.0 * p_.B * (2.0 - 3.0 * gam) / (gam - 1.0);
    g.d1_even.apply(phi, zr_);
    g.d2_even.apply(phi, zrr_);
    for (std::size_t i = 0; i < g.n_nodes(); ++i) {
      const double q = i == 0 ? zrr_[0] : zr_[i] / g.r[i];
      out[i] = pref * (g.sigma[i] * zrr_[i] + 4.0 * g.sigma[i] * q +
                       (gam / (gam - 1.0)) * g.sigma_r[i] * zr_[i] +
                       zcoef * phi[i]);
    }
  }

  // d/dt of zeta_tt along the solution, all partials analytic; the only
  // differenced inputs are the spatial stencils of zeta and zeta_t. The
  // time derivative of the power-difference term is taken through the
  // same expm1/log1p route as the rhs, so the zero perturbation gives an
  // exactly zero third derivative.
  void rhs_time_derivative(const PerturbationState& s,
                           std::span<const double> zeta_tt,
                           std::span<double> zeta_ttt) {
    const Grid& g = *g_;
    const double gam = p_.gamma;
    const double e = path_->eta_r_deriv(s.t, 0);
    const double edot = path_->eta_r_deriv(s.t, 1);
    const double cB = 2.0 * p_.B * gam / (gam - 1.0);
    const double em23 = std::pow(e, 2.0 - 3.0 * gam);
    g.d1_even.apply(s.zeta, zr_);
    g.d2_even.apply(s.zeta, zrr_);
    g.d1_even.apply(s.zeta_t, wr_);
    g.d2_even.apply(s.zeta_t, wrr_);
    for (std::size_t i = 0; i < g.n_nodes(); ++i) {
      const double r = g.r[i];
      const double z = s.zeta[i];
      const double zt = s.zeta_t[i];
      const double w1 = e + z;
      const double w2 = w1 + r * zr_[i];
      const double q = i == 0 ? zrr_[0] : zr_[i] / r;
      const double qd = i == 0 ? wrr_[0] : wr_[i] / r;
      const double w1d = edot + zt;
      const double w2d = w1d + r * wr_[i];
      const double a1 = std::pow(w1, 1.0 - 2.0 * gam);
      const double b2 = std::pow(w2, -gam - 1.0);
      const double P1 = a1 * (w2 * b2);
      const double P2 = (w1 * a1) * b2;
      const double P1d = (1.0 - 2.0 * gam) * (a1 / w1) * (w2 * b2) * w1d -
                         gam * a1 * b2 * w2d;
      const double P2d = (2.0 - 2.0 * gam) * a1 * b2 * w1d -
                         (gam + 1.0) * (w1 * a1) * (b2 / w2) * w2d;
      // d/dt of e^{2-3g} expm1(X) with X = (2-2g)log1p(u1) - g log1p(u2)
      const double u1 = z / e;
      const double u2 = (z + r * zr_[i]) / e;
      const double u1d = zt / e - z * edot / (e * e);
      const double u2d =
          (zt + r * wr_[i]) / e - (z + r * zr_[i]) * edot / (e * e);
      const double X =
          (2.0 - 2.0 * gam) * std::log1p(u1) - gam * std::log1p(u2);
      const double Xd =
          (2.0 - 2.0 * gam) * u1d / (1.0 + u1) - gam * u2d / (1.0 + u2);
      const double tp_dot =
          (2.0 - 3.0 * gam) * (em23 / e) * edot * std::expm1(X) +
          em23 * std::exp(X) * Xd;
      const double Gdot =
          g.sigma[i] * (2.0 * gam * (P1d * q + P1 * qd) +
                        gam * (P2d * (2.0 * q + zrr_[i]) +
                               P2 * (2.0 * qd + wrr_[i]))) +
          cB * tp_dot;
      zeta_ttt[i] = -zeta_tt[i] + Gdot;
    }
  }

  // Effective wave speed of the zeta_rr coefficient; the time step obeys
  // dt <= cfl * min_cells (dr / c) with c = sqrt(g sigma) e^{(1-3g)/2}.
  double cfl_dt(double t) const {
    const Grid& g = *g_;
    const double espeed =
        std::pow(path_->eta_r_deriv(t, 0), 0.5 * (1.0 - 3.0 * p_.gamma));
    double dt = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i + 1 < g.n_nodes(); ++i) {
      const double c =
          std::sqrt(p_.gamma * std::max(g.sigma[i], g.sigma[i + 1])) * espeed;
      dt = std::min(dt, (g.r[i + 1] - g.r[i]) / c);
    }
    return cfl_ * dt;
  }

  // One exponential two-stage step; exact e^{-dt} on the damping term.
  void step(PerturbationState& s, double dt) {
    const std::size_t n = g_->n_nodes();
    const double em1 = std::expm1(-dt);  // e^{-dt} - 1
    const double em = 1.0 + em1;
    const double phi2 = (em1 + dt) / dt;
    accel(s.t, s.zeta, f1_);
    for (std::size_t i = 0; i < n; ++i)
      zpred_[i] = s.zeta[i] - em1 * s.zeta_t[i] + (dt + em1) * f1_[i];
    accel(s.t + dt, zpred_, f2_);
    for (std::size_t i = 0; i < n; ++i) {
      const double w_new =
          em * s.zeta_t[i] - em1 * f1_[i] + phi2 * (f2_[i] - f1_[i]);
      s.zeta[i] += 0.5 * dt * (s.zeta_t[i] + w_new);
      s.zeta_t[i] = w_new;
    }
    s.t += dt;
  }

  Trajectory run(const PerturbationState& init, double horizon,
                 const SamplingSpec& sampling = {}) {
    if (horizon > path_->horizon())
      throw std::domain_error("run: horizon beyond the corrector path");
    const double t_first = sampling.t_first > 0.0
                               ? sampling.t_first
                               : std::max(1e-2, horizon * 5e-4);
    std::vector<double> stimes = {0.0};
    for (int k = 0; k < sampling.count; ++k)
      stimes.push_back(t_first *
                       std::pow(horizon / t_first,
                                static_cast<double>(k) /
                                    std::max(1, sampling.count - 1)));
    stimes.back() = horizon;

    Trajectory traj;
    traj.horizon = horizon;
    PerturbationState s = init;
    std::size_t si = 0;
    auto record = [&] {
      traj.samples.push_back({s.t, s.zeta, s.zeta_t});
      traj.summary.mass_residual_max = std::max(
          traj.summary.mass_residual_max, mass_identity_residual(s));
    };
    record();
    ++si;
    while (s.t < horizon) {
      double dt = std::min(cfl_dt(s.t), horizon - s.t);
      if (si < stimes.size() && s.t + dt >= stimes[si] - 1e-13)
        dt = stimes[si] - s.t;
      step(s, dt);
      ++traj.summary.steps;
      traj.summary.dt_min = std::min(traj.summary.dt_min, dt);
      traj.summary.dt_max = std::max(traj.summary.dt_max, dt);
      if (si < stimes.size() && s.t >= stimes[si] - 1e-13) {
        s.t = stimes[si];
        record();
        ++si;
      }
    }
    traj.summary.jacobian_min = jac_min_;
    return traj;
  }

  EulerianSnapshot reconstruct(const PerturbationState& s) {
    const Grid& g = *g_;
    const double e = path_->eta_r_deriv(s.t, 0);
    const double edot = path_->eta_r_deriv(s.t, 1);
    g.d1_even.apply(s.zeta, zr_);
    EulerianSnapshot snap;
    const std::size_t n = g.n_nodes();
    snap.eta.resize(n);
    snap.rho.resize(n);
    snap.u.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      const double w1 = e + s.zeta[i];
      const double w2 = w1 + g.r[i] * zr_[i];
      if (!(w1 > 0.0) || !(w2 > 0.0))
        throw numerical_error("Jacobian positivity lost", s.t,
                              static_cast<int>(i));
      snap.eta[i] = g.r[i] * w1;
      // rho = r^2 rho0bar / (eta^2 eta_r); the 0/0 at the origin cancels.
      snap.rho[i] = g.rho0bar[i] / (w1 * w1 * w2);
      snap.u[i] = g.r[i] * (edot + s.zeta_t[i]);
    }
    snap.R = snap.eta.back();
    return snap;
  }

  // Dual-route mass identity: rho (built from the analytic eta_r) times
  // eta^2 times the stencil derivative of eta, against r^2 rho0bar.
  // eta is odd in r, so the plain one-sided stencils apply, not the
  // even-reflecting plan.
  double mass_identity_residual(const PerturbationState& s) {
    const auto snap = reconstruct(s);
    const Grid& g = *g_;
    const auto deta = spatial_derivative(g, snap.eta, 1);
    double worst = 0.0;
    for (std::size_t i = 0; i < g.n_nodes(); ++i) {
      const double lhs = snap.rho[i] * snap.eta[i] * snap.eta[i] * deta[i];
      worst = std::max(worst,
                       std::fabs(lhs - g.r[i] * g.r[i] * g.rho0bar[i]));
    }
    return worst;
  }

 private:
  BarenblattParams p_;
  const CorrectorPath* path_;
  const Grid* g_;
  double cfl_;
  double jac_min_ = std::numeric_limits<double>::infinity();
  std::vector<double> zr_, zrr_, wr_, wrr_, f1_, f2_, zpred_;
};

// Initial perturbation zeta = eps * shape((B/A) r^2); evenness in r is
// structural. Mass matching is automatic in Lagrangian variables (the
// identity rho eta^2 eta_r = r^2 rho0bar holds by construction).
inline PerturbationState make_initial_data(const BarenblattParams& p,
                                           const InitialDataSpec& spec,
                                           const Grid& g) {
  const std::size_t n = g.n_nodes();
  PerturbationState s;
  s.t = 0.0;
  s.zeta.resize(n);
  s.zeta_t.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double x = (p.B / p.A) * g.r[i] * g.r[i];
    s.zeta[i] = spec.amplitude * detail::poly_in_s(spec.shape, x);
    s.zeta_t[i] = spec.shape_t.empty()
                      ? 0.0
                      : spec.velocity_amplitude *
                            detail::poly_in_s(spec.shape_t, x);
  }
  // Jacobian positivity at t = 0 (eta_r(0) = 1) and the physical-vacuum
  // shape of the reconstructed Eulerian data: positive inside, zero at
  // the edge, finite negative boundary slope of rho0^{gamma-1}.
  std::vector<double> zr(n);
  g.d1_even.apply(s.zeta, zr);
  for (std::size_t i = 0; i < n; ++i) {
    const double w1 = 1.0 + s.zeta[i];
    const double w2 = w1 + g.r[i] * zr[i];
    if (!(w1 > 0.0) || !(w2 > 0.0))
      throw numerical_error("initial data rejected: Jacobian nonpositive",
                            0.0, static_cast<int>(i));
  }
  const double w1b = 1.0 + s.zeta.back();
  const double w2b = w1b + g.r.back() * zr.back();
  const double slope = -2.0 * p.B * g.r.back() *
                       std::pow(w1b, 2.0 - 2.0 * p.gamma) *
                       std::pow(w2b, -p.gamma);
  if (!std::isfinite(slope) || !(slope < 0.0))
    throw numerical_error("initial data rejected: boundary slope not physical",
                          0.0, static_cast<int>(n) - 1);
  return s;
}

}  // namespace physvac
