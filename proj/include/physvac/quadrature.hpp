#pragma once

// Panel-based Gauss-Legendre quadrature with dyadic grading toward an
// endpoint where the integrand degenerates like (b-x)^p, p > -1. Gauss
// nodes are interior, so a weakly singular endpoint is never sampled.

#include <cmath>
#include <limits>
#include <utility>

namespace physvac::quad {

// 16-point Gauss-Legendre rule on (-1,1), positive half.
inline constexpr double kGaussNode[8] = {
    0.0950125098376374, 0.2816035507792589, 0.4580167776572274,
    0.6178762444026438, 0.7554044083550030, 0.8656312023878318,
    0.9445750230732326, 0.9894009349916499};
inline constexpr double kGaussWeight[8] = {
    0.1894506104550685, 0.1826034150449236, 0.1691565193950025,
    0.1495959888165767, 0.1246289712555339, 0.0951585116824928,
    0.0622535239386479, 0.0271524594117541};

template <class F>
double gauss16(F&& f, double a, double b) {
  const double c = 0.5 * (a + b);
  const double h = 0.5 * (b - a);
  double s = 0.0;
  for (int i = 0; i < 8; ++i) {
    const double dx = h * kGaussNode[i];
    s += kGaussWeight[i] * (f(c - dx) + f(c + dx));
  }
  return s * h;
}

template <class F>
double composite16(F&& f, double a, double b, int panels) {
  double s = 0.0;
  const double w = (b - a) / panels;
  for (int k = 0; k < panels; ++k) s += gauss16(f, a + k * w, a + (k + 1) * w);
  return s;
}

// Integral over [a,b] with dyadic panel refinement toward b. Panel k is
// [b - w/2^k, b - w/2^{k+1}], each a fixed distance ratio from the
// degenerate endpoint, so per-panel Gauss error stays at round-off. The
// refinement stops at the rounding scale of b, where panel midpoints
// would collapse onto the singular endpoint; the dropped sliver is
// O(w^{1+p}) with w a few ulps wide.
template <class F>
double graded_upper(F&& f, double a, double b, int levels = 64) {
  double s = 0.0;
  double lo = a;
  double w = b - a;
  const double w_floor =
      32.0 * std::numeric_limits<double>::epsilon() * std::fabs(b);
  for (int k = 0; k < levels && w > w_floor; ++k) {
    w *= 0.5;
    const double hi = b - w;
    if (hi <= lo) return s;
    s += gauss16(f, lo, hi);
    lo = hi;
  }
  if (b - lo > w_floor) s += gauss16(f, lo, b);
  return s;
}

template <class F>
double graded_lower(F&& f, double a, double b, int levels = 64) {
  return graded_upper([&](double x) { return f(a + b - x); }, a, b, levels);
}

}  // namespace physvac::quad
