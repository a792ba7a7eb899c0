#pragma once

// Closed-form Barenblatt reference flow of the porous medium equation
// with Darcy's law, spherically symmetric with finite mass:
//
//   rho(r,t) = (1+t)^{-3/(3g-1)} (A - B (1+t)^{-2/(3g-1)} r^2)^{1/(g-1)}
//   u(r,t)   = r / ((3g-1)(1+t)),   R(t) = sqrt(A/B) (1+t)^{1/(3g-1)}
//
// B is explicit in gamma; A follows from the total-mass constraint via
// the profile moment integral. Residual self-checks evaluate the PME and
// Darcy equations by centered differences on the exact profiles.

#include <cmath>
#include <stdexcept>
#include <string>
#include <utility>

#include "physvac/quadrature.hpp"

namespace physvac {

struct BarenblattParams {
  double gamma = 2.0;  // adiabatic exponent, > 1
  double mass = 1.0;   // total mass M
  double A = 0.0;
  double B = 0.0;
  double alpha = 1.0;  // 1/(gamma-1)
  int ell = 5;         // derivative-ladder depth 4 + floor(alpha)
};

// int_0^1 y^2 (1-y^2)^{1/(g-1)} dy. The integrand vanishes like
// (1-y)^{1/(g-1)} at y=1; graded panels keep full accuracy for any g>1.
inline double profile_moment(double gamma) {
  if (!(gamma > 1.0))
    throw std::domain_error("profile_moment: gamma must be > 1");
  const double a = 1.0 / (gamma - 1.0);
  return quad::graded_upper(
      [a](double y) { return y * y * std::pow((1.0 - y) * (1.0 + y), a); },
      0.0, 1.0);
}

// A is solved in closed form: the mass relation is a pure power law,
//   (g A)^{(3g-1)/(2(g-1))} = M g^{1/(g-1)} (g B)^{3/2} / moment(g).
inline BarenblattParams derive_constants(double gamma, double mass) {
  if (!(gamma > 1.0) || !std::isfinite(gamma))
    throw std::domain_error("derive_constants: gamma must be finite and > 1");
  if (!(mass > 0.0) || !std::isfinite(mass))
    throw std::domain_error("derive_constants: mass must be finite and > 0");
  BarenblattParams p;
  p.gamma = gamma;
  p.mass = mass;
  p.alpha = 1.0 / (gamma - 1.0);
  p.ell = 4 + static_cast<int>(std::floor(p.alpha));
  p.B = (gamma - 1.0) / (2.0 * gamma * (3.0 * gamma - 1.0));
  const double rhs = mass * std::pow(gamma, 1.0 / (gamma - 1.0)) *
                     std::pow(gamma * p.B, 1.5) / profile_moment(gamma);
  p.A = std::pow(rhs, 2.0 * (gamma - 1.0) / (3.0 * gamma - 1.0)) / gamma;
  return p;
}

inline double boundary_radius(const BarenblattParams& p, double t) {
  if (t < 0.0) throw std::domain_error("boundary_radius: t must be >= 0");
  return std::sqrt(p.A / p.B) * std::pow(1.0 + t, 1.0 / (3.0 * p.gamma - 1.0));
}

// Analytic d/dt of boundary_radius; equals velocity(R(t),t).
inline double boundary_speed(const BarenblattParams& p, double t) {
  return boundary_radius(p, t) / ((3.0 * p.gamma - 1.0) * (1.0 + t));
}

inline double density(const BarenblattParams& p, double r, double t) {
  if (r < 0.0 || t < 0.0) throw std::domain_error("density: r,t must be >= 0");
  const double s = std::pow(1.0 + t, -2.0 / (3.0 * p.gamma - 1.0));
  double radicand = p.A - p.B * s * r * r;
  if (radicand < 0.0) {
    // Round-off at the vacuum edge clamps to zero; beyond that is an error.
    if (radicand > -1e-14 * p.A)
      radicand = 0.0;
    else
      throw std::domain_error("density: r beyond the vacuum boundary");
  }
  return std::pow(1.0 + t, -3.0 / (3.0 * p.gamma - 1.0)) *
         std::pow(radicand, p.alpha);
}

inline double velocity(const BarenblattParams& p, double r, double t) {
  if (r < 0.0 || t < 0.0)
    throw std::domain_error("velocity: r,t must be >= 0");
  if (r > boundary_radius(p, t) * (1.0 + 1e-12))
    throw std::domain_error("velocity: r beyond the vacuum boundary");
  return r / ((3.0 * p.gamma - 1.0) * (1.0 + t));
}

struct MassEstimate {
  double value = 0.0;
  double rel_error = 0.0;  // estimate from one grading refinement
};

// Quadrature of int_0^{R(t)} r^2 rho dr, graded toward the degenerate
// boundary. Independent of the closed-form route that determined A.
inline MassEstimate total_mass(const BarenblattParams& p, double t) {
  const double R = boundary_radius(p, t);
  auto f = [&](double r) { return r * r * density(p, r, t); };
  const double coarse = quad::graded_upper(f, 0.0, R, 40);
  const double fine = quad::graded_upper(f, 0.0, R, 64);
  MassEstimate m;
  m.value = fine;
  m.rel_error = std::fabs(fine - coarse) / std::max(std::fabs(fine), 1e-300);
  return m;
}

// One-sided slope of the squared sound speed c^2 = g rho^{g-1} at the
// vacuum boundary (analytic): -2 g B R(t) / (1+t). Finite and negative,
// which is the physical-vacuum condition.
inline double sound_speed_sq_boundary_slope(const BarenblattParams& p,
                                            double t) {
  return -2.0 * p.gamma * p.B * boundary_radius(p, t) / (1.0 + t);
}

// Centered finite-difference residuals of the two equations the profile
// solves exactly: rho_t = (1/r^2)(r^2 (rho^g)_r)_r  and  (rho^g)_r = -rho u.
// Both are O(dh^2) on the exact solution. Returns (pme, darcy).
inline std::pair<double, double> pme_residual(const BarenblattParams& p,
                                              double r, double t, double dh) {
  if (!(t > dh)) throw std::domain_error("pme_residual: need t > dh");
  if (!(dh > 0.0)) throw std::domain_error("pme_residual: dh must be > 0");
  const double R = boundary_radius(p, t);
  if (R - r < 2.0 * dh)
    throw std::domain_error("pme_residual: point too close to the boundary");
  // Even reflection through the origin keeps the stencil symmetric there.
  auto rho = [&](double x, double tt) { return density(p, std::fabs(x), tt); };
  auto prs = [&](double x, double tt) {
    return std::pow(rho(x, tt), p.gamma);
  };
  const double rho_t = (rho(r, t + dh) - rho(r, t - dh)) / (2.0 * dh);
  double lap;
  if (r > 0.0) {
    const double rp = r + 0.5 * dh, rm = r - 0.5 * dh;
    lap = (rp * rp * (prs(r + dh, t) - prs(r, t)) -
           rm * rm * (prs(r, t) - prs(r - dh, t))) /
          (dh * dh * r * r);
  } else {
    // Spherical Laplacian of an even function at the origin: 3 p_rr(0).
    lap = 6.0 * (prs(dh, t) - prs(0.0, t)) / (dh * dh);
  }
  const double pme = rho_t - lap;
  const double darcy = (prs(r + dh, t) - prs(r - dh, t)) / (2.0 * dh) +
                       rho(r, t) * velocity(p, r, t);
  return {pme, darcy};
}

}  // namespace physvac
