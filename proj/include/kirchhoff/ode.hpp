#pragma once

// Dormand-Prince 5(4) embedded pair for small fixed-size systems.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <utility>

namespace kirchhoff::ode {

template <std::size_t n>
using State = std::array<double, n>;

struct Tolerances {
  double atol = 1e-12;
  double rtol = 1e-10;
};

template <std::size_t n>
struct StepResult {
  State<n> y;
  double error;  // scaled error norm; accept when <= 1
};

/// One Dormand-Prince step of size h from (t, y).
template <std::size_t n, class Rhs>
StepResult<n> dopri5_step(const Rhs& rhs, double t, const State<n>& y, double h, const Tolerances& tol) {
  static constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
  static constexpr double a21 = 1.0 / 5;
  static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
  static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
  static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                          a54 = -212.0 / 729;
  static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                          a65 = -5103.0 / 18656;
  static constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784,
                          b6 = 11.0 / 84;
  static constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                          e6 = 22.0 / 525, e7 = -1.0 / 40;

  auto axpy = [&](std::initializer_list<std::pair<double, const State<n>*>> terms) {
    State<n> out = y;
    for (auto& [c, k] : terms)
      for (std::size_t i = 0; i < n; ++i) out[i] += h * c * (*k)[i];
    return out;
  };

  const State<n> k1 = rhs(t, y);
  const State<n> k2 = rhs(t + c2 * h, axpy({{a21, &k1}}));
  const State<n> k3 = rhs(t + c3 * h, axpy({{a31, &k1}, {a32, &k2}}));
  const State<n> k4 = rhs(t + c4 * h, axpy({{a41, &k1}, {a42, &k2}, {a43, &k3}}));
  const State<n> k5 = rhs(t + c5 * h, axpy({{a51, &k1}, {a52, &k2}, {a53, &k3}, {a54, &k4}}));
  const State<n> k6 = rhs(t + h, axpy({{a61, &k1}, {a62, &k2}, {a63, &k3}, {a64, &k4}, {a65, &k5}}));
  const State<n> y5 = axpy({{b1, &k1}, {b3, &k3}, {b4, &k4}, {b5, &k5}, {b6, &k6}});
  const State<n> k7 = rhs(t + h, y5);

  double err = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double e = h * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i] + e7 * k7[i]);
    const double scale = tol.atol + tol.rtol * std::max(std::abs(y[i]), std::abs(y5[i]));
    err = std::max(err, std::abs(e) / scale);
  }
  return {y5, err};
}

inline double next_step_factor(double err) {
  if (err == 0.0) return 5.0;
  return std::clamp(0.9 * std::pow(err, -0.2), 0.2, 5.0);
}

}  // namespace kirchhoff::ode
