#pragma once

// Corrector ODE for the Lagrangian ansatz slope. The Barenblatt slope
// ebar_r(t) = (1+t)^{1/(3g-1)} does not solve the damped Lagrangian
// equation exactly; the scalar correction h(t) with
//
//   h_tt + h_t - (ebar_r + h)^{2-3g}/(3g-1) + ebar_rtt + ebar_rt = 0,
//   h(0) = h_t(0) = 0,
//
// repairs it. The corrected slope e(t) = ebar_r(t) + h(t) then satisfies
// the autonomous form  e_tt + e_t = e^{2-3g}/(3g-1), which supplies
// second and third time derivatives by substitution (no numerical
// differentiation) and the Volterra representation
//
//   e_t(t) = e^{-t}/(3g-1) + (1/(3g-1)) int_0^t e^{-(t-s)} e(s)^{2-3g} ds
//
// used here as an independent cross-check of the solve.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

#include "physvac/barenblatt.hpp"
#include "physvac/ode.hpp"
#include "physvac/quadrature.hpp"

namespace physvac {

struct CorrectorStep {
  double t, h, ht, htt;
};

namespace detail {
inline double ebar_r(double gamma, double t, int k) {
  const double q = 1.0 / (3.0 * gamma - 1.0);
  switch (k) {
    case 0: return std::pow(1.0 + t, q);
    case 1: return q * std::pow(1.0 + t, q - 1.0);
    case 2: return q * (q - 1.0) * std::pow(1.0 + t, q - 2.0);
    case 3: return q * (q - 1.0) * (q - 2.0) * std::pow(1.0 + t, q - 3.0);
    default: throw std::domain_error("ebar_r: k in [0,3]");
  }
}
}  // namespace detail

class CorrectorPath {
 public:
  static CorrectorPath solve(double gamma, double horizon, double tol);

  double gamma() const { return gamma_; }
  double horizon() const { return horizon_; }
  double tolerance() const { return tol_; }
  std::span<const CorrectorStep> steps() const { return steps_; }

  // Quintic Hermite in (h, h_t, h_tt) node data.
  double h(double t) const {
    const auto [s0, s1, u] = locate(t);
    const double dt = s1.t - s0.t;
    const double u2 = u * u, u3 = u2 * u, u4 = u3 * u, u5 = u4 * u;
    const double H0 = 1.0 - 10 * u3 + 15 * u4 - 6 * u5;
    const double H1 = u - 6 * u3 + 8 * u4 - 3 * u5;
    const double H2 = 0.5 * u2 - 1.5 * u3 + 1.5 * u4 - 0.5 * u5;
    const double H3 = 10 * u3 - 15 * u4 + 6 * u5;
    const double H4 = -4 * u3 + 7 * u4 - 3 * u5;
    const double H5 = 0.5 * u3 - u4 + 0.5 * u5;
    return s0.h * H0 + s0.ht * dt * H1 + s0.htt * dt * dt * H2 + s1.h * H3 +
           s1.ht * dt * H4 + s1.htt * dt * dt * H5;
  }

  // Cubic Hermite in (h_t, h_tt) node data.
  double h_t(double t) const {
    const auto [s0, s1, u] = locate(t);
    const double dt = s1.t - s0.t;
    const double u2 = u * u, u3 = u2 * u;
    return s0.ht * (1.0 - 3 * u2 + 2 * u3) + s0.htt * dt * (u - 2 * u2 + u3) +
           s1.ht * (3 * u2 - 2 * u3) + s1.htt * dt * (u3 - u2);
  }

  // k-th time derivative of the corrected slope e = ebar_r + h. k >= 2
  // substitutes the autonomous equation e_tt = e^{2-3g}/(3g-1) - e_t and
  // its derivative rather than differentiating dense output.
  double eta_r_deriv(double t, int k) const {
    const double g = gamma_;
    switch (k) {
      case 0: return detail::ebar_r(g, t, 0) + h(t);
      case 1: return detail::ebar_r(g, t, 1) + h_t(t);
      case 2: {
        const double e = eta_r_deriv(t, 0);
        return std::pow(e, 2.0 - 3.0 * g) / (3.0 * g - 1.0) -
               eta_r_deriv(t, 1);
      }
      case 3: {
        const double e = eta_r_deriv(t, 0);
        const double e1 = eta_r_deriv(t, 1);
        const double e2 = eta_r_deriv(t, 2);
        return (2.0 - 3.0 * g) * std::pow(e, 1.0 - 3.0 * g) * e1 /
                   (3.0 * g - 1.0) -
               e2;
      }
      default: throw std::domain_error("eta_r_deriv: k in [0,3]");
    }
  }
  double eta_r(double t) const { return eta_r_deriv(t, 0); }

 private:
  CorrectorPath() = default;
  struct Located {
    const CorrectorStep& s0;
    const CorrectorStep& s1;
    double u;
  };
  Located locate(double t) const {
    if (t < 0.0 || t > horizon_ * (1.0 + 1e-12))
      throw std::domain_error("CorrectorPath: t outside [0, horizon]");
    auto it = std::upper_bound(
        steps_.begin(), steps_.end(), t,
        [](double v, const CorrectorStep& s) { return v < s.t; });
    const std::size_t j =
        std::min(steps_.size() - 1,
                 static_cast<std::size_t>(std::max<std::ptrdiff_t>(
                     1, it - steps_.begin())));
    const CorrectorStep& s0 = steps_[j - 1];
    const CorrectorStep& s1 = steps_[j];
    return {s0, s1, (t - s0.t) / (s1.t - s0.t)};
  }

  double gamma_ = 0.0, horizon_ = 0.0, tol_ = 0.0;
  std::vector<CorrectorStep> steps_;
};

inline CorrectorPath CorrectorPath::solve(double gamma, double horizon,
                                          double tol) {
  if (!(gamma > 1.0)) throw std::domain_error("solve_corrector: gamma > 1");
  if (!(horizon >= 1.0))
    throw std::domain_error("solve_corrector: horizon >= 1");
  if (!(tol >= 1e-14 && tol <= 1e-6))
    throw std::domain_error("solve_corrector: tol in [1e-14, 1e-6]");

  CorrectorPath path;
  path.gamma_ = gamma;
  path.horizon_ = horizon;
  path.tol_ = tol;

  auto f = [gamma](double t, const ode::State<2>& y) -> ode::State<2> {
    const double eb = detail::ebar_r(gamma, t, 0);
    const double base = eb + y[0];
    if (!(base > 0.0))
      throw ode::integration_error("corrector: ansatz slope lost positivity",
                                   t);
    return {y[1], -y[1] +
                      std::pow(base, 2.0 - 3.0 * gamma) / (3.0 * gamma - 1.0) -
                      detail::ebar_r(gamma, t, 2) -
                      detail::ebar_r(gamma, t, 1)};
  };

  ode::Options opt;
  opt.rtol = opt.atol = std::max(tol * 1e-2, 1e-15);
  opt.h_init = 1e-4;
  // Step cap keeps Hermite dense output within the requested tolerance;
  // the solution varies on the (1+t) scale at late times.
  const double cap =
      std::clamp(0.02 * std::pow(tol / 1e-10, 0.25), 1e-3, 0.05);
  opt.max_step = [cap](double t) { return cap * (1.0 + t); };

  path.steps_.reserve(4096);
  ode::integrate_dopri5<2>(
      f, 0.0, {0.0, 0.0}, horizon, opt,
      [&](double t, const ode::State<2>& y, const ode::State<2>& dy) {
        path.steps_.push_back({t, y[0], y[1], dy[1]});
      });
  return path;
}

inline CorrectorPath solve_corrector(double gamma, double horizon,
                                     double tol) {
  return CorrectorPath::solve(gamma, horizon, tol);
}

// |e_t(t) - Volterra integral representation|, quadrature over the dense
// output. The kernel e^{-(t-s)} localizes the integral; the truncated
// tail is below e^{-45} since e(s)^{2-3g} <= 1.
inline double volterra_residual(const CorrectorPath& path, double t) {
  if (t > path.horizon())
    throw std::domain_error("volterra_residual: t beyond horizon");
  const double g = path.gamma();
  const double s_lo = std::max(0.0, t - 45.0);
  auto integrand = [&](double s) {
    return std::exp(s - t) * std::pow(path.eta_r(s), 2.0 - 3.0 * g);
  };
  const int panels = std::max(1, static_cast<int>((t - s_lo) / 0.5) + 1);
  const double integral = quad::composite16(integrand, s_lo, t, panels);
  const double oracle = (std::exp(-t) + integral) / (3.0 * g - 1.0);
  return std::fabs(path.eta_r_deriv(t, 1) - oracle);
}

// Jet of the corrected slope at one time: (e, e_t, e_tt).
struct AnsatzJet {
  double e0, e1, e2;
};

// Pointwise residual of the ansatz eta = r e(t) in the damped Lagrangian
// equation. The flux derivative reduces analytically (e is r-free):
//   residual = r sigma^alpha [ e_tt + e_t - 2 g B/(g-1) e^{2-3g} ],
// and 2 g B/(g-1) = 1/(3g-1), so it vanishes iff h solves the ODE.
inline double ansatz_residual(const BarenblattParams& p, double r,
                              const AnsatzJet& jet) {
  const double sigma = p.A - p.B * r * r;
  const double flux_coef = 2.0 * p.gamma * p.B / (p.gamma - 1.0);
  return r * std::pow(sigma, p.alpha) *
         (jet.e2 + jet.e1 -
          flux_coef * std::pow(jet.e0, 2.0 - 3.0 * p.gamma));
}

inline double ansatz_residual(const BarenblattParams& p,
                              const CorrectorPath& path, double r, double t) {
  if (!(r > 0.0 && r < std::sqrt(p.A / p.B)))
    throw std::domain_error("ansatz_residual: r inside (0, sqrt(A/B))");
  return ansatz_residual(
      p, r,
      {path.eta_r_deriv(t, 0), path.eta_r_deriv(t, 1), path.eta_r_deriv(t, 2)});
}

// Phase-plane structure of (h, h_t): h_t rises, crosses zero once, then
// relaxes to zero from below; h has a single interior maximum.
struct PhaseSignature {
  int ht_sign_changes = 0;
  int h_interior_maxima = 0;
  double ht_final = 0.0;
};

inline PhaseSignature phase_signature(const CorrectorPath& path,
                                      double deadband = 1e-12) {
  PhaseSignature sig;
  int last = 0;
  for (const auto& s : path.steps()) {
    const int cur = s.ht > deadband ? 1 : (s.ht < -deadband ? -1 : 0);
    if (cur != 0) {
      if (last != 0 && cur != last) {
        ++sig.ht_sign_changes;
        if (last > 0) ++sig.h_interior_maxima;
      }
      last = cur;
    }
  }
  sig.ht_final = path.steps().back().ht;
  return sig;
}

// Measured sups of the decay quotients behind the bounds
//   h <= C (1+t)^{1/(3g-1)-1} ln(1+t),  |h_t| <= C (1+t)^{1/(3g-1)-2} ln(1+t).
// ln(2+t) in the denominators avoids the 0/0 at t=0. The constants are
// existence-only, so only finiteness and tail stability are reported.
struct DecayReport {
  double sup_h_quotient = 0.0;
  double sup_ht_quotient = 0.0;
  double sup_h_last_decade = 0.0;
  double sup_ht_last_decade = 0.0;
  bool tail_stable = false;  // last decade adds nothing to the running sup
};

inline DecayReport decay_report(const CorrectorPath& path) {
  if (!(path.horizon() >= 100.0))
    throw std::domain_error("decay_report: horizon >= 100");
  const double g = path.gamma();
  const double wh = (3.0 * g - 2.0) / (3.0 * g - 1.0);
  const double wht = (6.0 * g - 3.0) / (3.0 * g - 1.0);
  DecayReport rep;
  const double tail_start = path.horizon() / 10.0;
  double sup_h_before = 0.0, sup_ht_before = 0.0;
  for (const auto& s : path.steps()) {
    const double qh =
        s.h * std::pow(1.0 + s.t, wh) / std::log(2.0 + s.t);
    const double qht =
        std::fabs(s.ht) * std::pow(1.0 + s.t, wht) / std::log(2.0 + s.t);
    rep.sup_h_quotient = std::max(rep.sup_h_quotient, qh);
    rep.sup_ht_quotient = std::max(rep.sup_ht_quotient, qht);
    if (s.t >= tail_start) {
      rep.sup_h_last_decade = std::max(rep.sup_h_last_decade, qh);
      rep.sup_ht_last_decade = std::max(rep.sup_ht_last_decade, qht);
    } else {
      sup_h_before = std::max(sup_h_before, qh);
      sup_ht_before = std::max(sup_ht_before, qht);
    }
  }
  rep.tail_stable = std::isfinite(rep.sup_h_quotient) &&
                    std::isfinite(rep.sup_ht_quotient) &&
                    rep.sup_h_last_decade <= sup_h_before &&
                    rep.sup_ht_last_decade <= sup_ht_before;
  return rep;
}

}  // namespace physvac
