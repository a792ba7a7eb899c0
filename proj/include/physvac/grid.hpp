#pragma once

// Fixed Lagrangian reference grid on [0, sqrt(A/B)] with the degenerate
// weight sigma(r) = A - B r^2 = rho0bar^{gamma-1}, weight-aware
// quadrature, and finite-difference stencils on arbitrary node spacing.
//
// Quadrature policy: the integrand's field F is taken piecewise linear
// between nodes, while the weight r^b sigma^a is evaluated analytically
// inside each cell. sigma^a has unbounded derivatives at the vacuum edge
// for fractional a, so the cell touching sigma = 0 is integrated with
// dyadic grading toward the edge.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <stdexcept>
#include <vector>

#include "physvac/barenblatt.hpp"
#include "physvac/quadrature.hpp"

namespace physvac {

enum class Grading { uniform, boundary_graded };

namespace detail {

// Fornberg finite-difference weights for the m-th derivative at z from
// the nodes x (arbitrary spacing).
inline void fornberg_weights(double z, std::span<const double> x, int m,
                             std::span<double> out) {
  const int n = static_cast<int>(x.size());
  const int w = m + 1;
  std::vector<double> C(static_cast<std::size_t>(n) * w, 0.0);
  double c1 = 1.0;
  double c4 = x[0] - z;
  C[0] = 1.0;
  for (int i = 1; i < n; ++i) {
    const int mn = std::min(i, m);
    double c2 = 1.0;
    double c5 = c4;
    c4 = x[i] - z;
    for (int j = 0; j < i; ++j) {
      const double c3 = x[i] - x[j];
      c2 *= c3;
      if (j == i - 1) {
        for (int k = mn; k >= 1; --k)
          C[i * w + k] =
              c1 * (k * C[(i - 1) * w + k - 1] - c5 * C[(i - 1) * w + k]) / c2;
        C[i * w] = -c1 * c5 * C[(i - 1) * w] / c2;
      }
      for (int k = mn; k >= 1; --k)
        C[j * w + k] = (c4 * C[j * w + k] - k * C[j * w + k - 1]) / c3;
      C[j * w] = c4 * C[j * w] / c3;
    }
    c1 = c2;
  }
  for (int i = 0; i < n; ++i) out[i] = C[i * w + m];
}

}  // namespace detail

// Precomputed banded stencil: node i applies weights[ofs[i]..ofs[i+1])
// to F[first[i]..].
struct StencilPlan {
  std::vector<int> first;
  std::vector<std::size_t> ofs;
  std::vector<double> weights;

  void apply(std::span<const double> F, std::span<double> out) const {
    const std::size_t n = first.size();
    for (std::size_t i = 0; i < n; ++i) {
      double acc = 0.0;
      const int f = first[i];
      for (std::size_t k = ofs[i]; k < ofs[i + 1]; ++k)
        acc += weights[k] * F[f + (k - ofs[i])];
      out[i] = acc;
    }
  }
};

struct Grid {
  BarenblattParams params;
  Grading grading = Grading::boundary_graded;
  std::vector<double> r;             // nodes, r[0]=0, r[n]=sqrt(A/B)
  std::vector<double> sigma;         // A - B r^2, exactly 0 at the edge
  std::vector<double> sigma_r;       // -2 B r
  std::vector<double> rho0bar;       // sigma^alpha
  std::vector<double> cell_weights;  // nodal trapezoid weights
  StencilPlan d1_even, d2_even;      // evenness-aware first/second derivative

  std::size_t n_nodes() const { return r.size(); }
  double edge() const { return r.back(); }
  double sigma_at(double x) const {
    return params.B * (edge() - x) * (edge() + x);
  }
};

namespace detail {

// Window of 5 nodes, reflected through r=0 (the fields this plan serves
// are even in r), one-sided at the outer edge. The folded first-derivative
// weights at r=0 cancel exactly; we zero them explicitly.
inline StencilPlan build_even_plan(const std::vector<double>& r, int order) {
  const int n = static_cast<int>(r.size());
  const int w = std::min(5, n);
  const int p = w / 2;
  StencilPlan plan;
  plan.first.resize(n);
  plan.ofs.resize(n + 1, 0);
  std::vector<double> x(w), wt(w);
  std::vector<double> folded;
  for (int i = 0; i < n; ++i) {
    int lo = i - p;
    int hi = lo + w - 1;
    if (hi > n - 1) {
      hi = n - 1;
      lo = hi - w + 1;
    }
    // lo may be negative near the origin: those nodes reflect.
    for (int j = 0; j < w; ++j) {
      const int idx = lo + j;
      x[j] = idx < 0 ? -r[-idx] : r[idx];
    }
    detail::fornberg_weights(r[i], x, order, wt);
    const int first = std::max(0, lo);
    folded.assign(static_cast<std::size_t>(hi - first + 1), 0.0);
    for (int j = 0; j < w; ++j) {
      const int idx = lo + j;
      const int target = idx < 0 ? -idx : idx;
      folded[target - first] += wt[j];
    }
    if (order == 1 && i == 0)
      std::fill(folded.begin(), folded.end(), 0.0);  // even => F_r(0) = 0
    plan.first[i] = first;
    plan.ofs[i + 1] = plan.ofs[i] + folded.size();
    plan.weights.insert(plan.weights.end(), folded.begin(), folded.end());
  }
  return plan;
}

}  // namespace detail

inline Grid build_grid(const BarenblattParams& p, int n_cells,
                       Grading grading = Grading::boundary_graded) {
  if (n_cells < 32) throw std::domain_error("build_grid: n_cells >= 32");
  const double L = std::sqrt(p.A / p.B);
  Grid g;
  g.params = p;
  g.grading = grading;
  g.r.reserve(n_cells + 1);
  if (grading == Grading::uniform) {
    for (int i = 0; i <= n_cells; ++i) g.r.push_back(L * i / n_cells);
  } else {
    // Dyadic clustering over the last 10% of the interval: four blocks
    // of halving width resolve the layer where sigma -> 0.
    int n_tail = std::max(8, n_cells / 5);
    n_tail -= n_tail % 4;
    const int n_int = n_cells - n_tail;
    const int per_block = n_tail / 4;
    for (int i = 0; i < n_int; ++i) g.r.push_back(0.9 * L * i / n_int);
    double lo = 0.9, span = 0.05;
    for (int b = 0; b < 4; ++b) {
      for (int i = 0; i < per_block; ++i)
        g.r.push_back(L * (lo + span * i / per_block));
      lo += span;
      if (b < 2) span *= 0.5;
    }
    g.r.push_back(L);
  }
  g.r.back() = L;

  const std::size_t n = g.r.size();
  g.sigma.resize(n);
  g.sigma_r.resize(n);
  g.rho0bar.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    g.sigma[i] = g.sigma_at(g.r[i]);
    g.sigma_r[i] = -2.0 * p.B * g.r[i];
    g.rho0bar[i] = std::pow(g.sigma[i], p.alpha);
  }
  g.cell_weights.assign(n, 0.0);
  for (std::size_t i = 0; i + 1 < n; ++i) {
    const double w = 0.5 * (g.r[i + 1] - g.r[i]);
    g.cell_weights[i] += w;
    g.cell_weights[i + 1] += w;
  }
  g.d1_even = detail::build_even_plan(g.r, 1);
  g.d2_even = detail::build_even_plan(g.r, 2);
  return g;
}

// int r^b sigma(r)^a F(r)^2 dr over [r_lo, r_hi], F piecewise linear in
// the node values, the weight analytic inside cells. Requires a > -1
// (the edge cell is integrable); energy weights in practice have a >= 0.
inline double weighted_integral_range(const Grid& g, std::span<const double> F,
                                      double a, int b, double r_lo,
                                      double r_hi) {
  if (F.size() != g.n_nodes())
    throw std::invalid_argument("weighted_integral: F size mismatch");
  if (!(a > -1.0))
    throw std::domain_error("weighted_integral: need sigma power > -1");
  if (b < 0) throw std::domain_error("weighted_integral: need b >= 0");
  r_lo = std::max(r_lo, g.r.front());
  r_hi = std::min(r_hi, g.r.back());
  if (!(r_hi > r_lo)) return 0.0;

  double total = 0.0;
  const std::size_t n = g.n_nodes();
  for (std::size_t i = 0; i + 1 < n; ++i) {
    const double c_lo = std::max(g.r[i], r_lo);
    const double c_hi = std::min(g.r[i + 1], r_hi);
    if (!(c_hi > c_lo)) continue;
    const double x0 = g.r[i], x1 = g.r[i + 1];
    const double f0 = F[i], f1 = F[i + 1];
    auto integrand = [&](double x) {
      const double u = (x - x0) / (x1 - x0);
      const double fv = f0 + (f1 - f0) * u;
      return std::pow(x, b) * std::pow(g.sigma_at(x), a) * fv * fv;
    };
    const bool touches_edge = (i + 2 == n) && (c_hi == g.r.back());
    if (touches_edge && a != 0.0)
      total += quad::graded_upper(integrand, c_lo, c_hi);
    else
      total += quad::gauss16(integrand, c_lo, c_hi);
  }
  return total;
}

inline double weighted_integral(const Grid& g, std::span<const double> F,
                                double a, int b) {
  return weighted_integral_range(g, F, a, b, g.r.front(), g.r.back());
}

// Nodal derivative of arbitrary per-node data: symmetric windows in the
// interior, one-sided at both endpoints. Windows of order+3 nodes
// (rounded up to odd), so formal accuracy exceeds the order-2 / order-1
// contract for low/high derivative orders on smooth grids.
inline std::vector<double> spatial_derivative(const Grid& g,
                                              std::span<const double> F,
                                              int order) {
  const int n = static_cast<int>(g.n_nodes());
  if (order < 1 || order > 4)
    throw std::domain_error("spatial_derivative: order in [1,4]");
  if (n < order + 2)
    throw std::domain_error("spatial_derivative: grid too small for order");
  if (F.size() != g.n_nodes())
    throw std::invalid_argument("spatial_derivative: F size mismatch");
  int w = order + 3;
  if (w % 2 == 0) ++w;
  w = std::min(w, n);
  const int p = w / 2;
  std::vector<double> out(n), wt(w);
  for (int i = 0; i < n; ++i) {
    int lo = std::clamp(i - p, 0, n - w);
    detail::fornberg_weights(g.r[i], std::span(g.r).subspan(lo, w), order, wt);
    double acc = 0.0;
    for (int j = 0; j < w; ++j) acc += wt[j] * F[lo + j];
    out[i] = acc;
  }
  return out;
}

// LHS/RHS of the boundary Hardy inequality on I_b = (sqrt(A/4B), sqrt(A/B)):
//   int sigma^{k-2} F^2  <=  C int sigma^k (F^2 + F_r^2).
// Returns the ratio; +inf flags the (impossible for k>1, smooth F)
// violation RHS = 0 < LHS.
inline double hardy_ratio(const Grid& g, std::span<const double> F, double k) {
  if (!(k > 1.0)) throw std::domain_error("hardy_ratio: k > 1 required");
  const double L = g.edge();
  const double lo = 0.5 * L;  // sqrt(A/(4B))
  const auto Fr = spatial_derivative(g, F, 1);
  const double lhs = weighted_integral_range(g, F, k - 2.0, 0, lo, L);
  const double rhs = weighted_integral_range(g, F, k, 0, lo, L) +
                     weighted_integral_range(g, Fr, k, 0, lo, L);
  if (rhs == 0.0)
    return lhs == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
  return lhs / rhs;
}

}  // namespace physvac
