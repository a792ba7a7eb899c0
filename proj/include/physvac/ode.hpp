#pragma once

// Embedded Dormand-Prince 5(4) integrator with PI step-size control.
// Small fixed-dimension states only; the observer sees every accepted
// step together with the derivative there, which is what dense-output
// reconstruction downstream needs.

#include <array>
#include <cmath>
#include <cstddef>
#include <functional>
#include <initializer_list>
#include <stdexcept>
#include <string>
#include <utility>

namespace physvac::ode {

template <std::size_t N>
using State = std::array<double, N>;

struct Options {
  double rtol = 1e-10;
  double atol = 1e-10;
  double h_init = 1e-4;
  double h_min = 1e-13;
  long max_steps = 200000000;
  // Optional cap on the step size as a function of time.
  std::function<double(double)> max_step;
};

class integration_error : public std::runtime_error {
 public:
  integration_error(const std::string& what, double t)
      : std::runtime_error(what + " at t=" + std::to_string(t)), t_fail(t) {}
  double t_fail;
};

namespace detail {
// Dormand-Prince 5(4) tableau.
inline constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
inline constexpr double a21 = 1.0 / 5;
inline constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
inline constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
inline constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187,
                        a53 = 64448.0 / 6561, a54 = -212.0 / 729;
inline constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33,
                        a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                        a65 = -5103.0 / 18656;
inline constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                        b5 = -2187.0 / 6784, b6 = 11.0 / 84;
inline constexpr double e1 = 35.0 / 384 - 5179.0 / 57600,
                        e3 = 500.0 / 1113 - 7571.0 / 16695,
                        e4 = 125.0 / 192 - 393.0 / 640,
                        e5 = -2187.0 / 6784 + 92097.0 / 339200,
                        e6 = 11.0 / 84 - 187.0 / 2100, e7 = -1.0 / 40;
}  // namespace detail

// f(t, y) -> dy/dt. on_accept(t, y, dydt) fires at t0 and after every
// accepted step (FSAL: the passed derivative is exact at that point).
template <std::size_t N, class Rhs, class Obs>
void integrate_dopri5(Rhs&& f, double t0, State<N> y, double t1,
                      const Options& opt, Obs&& on_accept) {
  using namespace detail;
  auto axpy = [](State<N>& out, const State<N>& y0, double h,
                 std::initializer_list<std::pair<double, const State<N>*>> ks) {
    for (std::size_t i = 0; i < N; ++i) {
      double acc = 0.0;
      for (const auto& [c, k] : ks) acc += c * (*k)[i];
      out[i] = y0[i] + h * acc;
    }
  };

  double t = t0;
  double h = opt.h_init;
  double err_prev = 1.0;
  State<N> k1 = f(t, y);
  on_accept(t, y, k1);
  long steps = 0;
  while (t < t1) {
    if (++steps > opt.max_steps)
      throw integration_error("dopri5: step budget exhausted", t);
    if (opt.max_step) h = std::min(h, opt.max_step(t));
    h = std::min(h, t1 - t);
    if (!(h > opt.h_min) && t + h < t1)
      throw integration_error("dopri5: step-size underflow", t);

    State<N> k2, k3, k4, k5, k6, k7, tmp;
    axpy(tmp, y, h, {{a21, &k1}});
    k2 = f(t + c2 * h, tmp);
    axpy(tmp, y, h, {{a31, &k1}, {a32, &k2}});
    k3 = f(t + c3 * h, tmp);
    axpy(tmp, y, h, {{a41, &k1}, {a42, &k2}, {a43, &k3}});
    k4 = f(t + c4 * h, tmp);
    axpy(tmp, y, h, {{a51, &k1}, {a52, &k2}, {a53, &k3}, {a54, &k4}});
    k5 = f(t + c5 * h, tmp);
    axpy(tmp, y, h, {{a61, &k1}, {a62, &k2}, {a63, &k3}, {a64, &k4}, {a65, &k5}});
    k6 = f(t + h, tmp);
    State<N> ynew;
    axpy(ynew, y, h, {{b1, &k1}, {b3, &k3}, {b4, &k4}, {b5, &k5}, {b6, &k6}});
    k7 = f(t + h, ynew);

    double err = 0.0;
    for (std::size_t i = 0; i < N; ++i) {
      const double ei = h * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] +
                             e5 * k5[i] + e6 * k6[i] + e7 * k7[i]);
      const double sc =
          opt.atol + opt.rtol * std::max(std::fabs(y[i]), std::fabs(ynew[i]));
      err += (ei / sc) * (ei / sc);
    }
    err = std::sqrt(err / N);

    if (err <= 1.0) {
      t += h;
      y = ynew;
      k1 = k7;
      on_accept(t, y, k1);
      const double fac = 0.9 * std::pow(std::max(err, 1e-16), -0.2) *
                         std::pow(err_prev, 0.08);
      h *= std::min(5.0, std::max(0.2, fac));
      err_prev = std::max(err, 1e-16);
    } else {
      h *= std::max(0.2, 0.9 * std::pow(err, -0.2));
    }
  }
}

}  // namespace physvac::ode
