#pragma once

// The 2D Moser sequence and the scan for max_t L~_m(t w_n) < 1/2.

#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <vector>

#include "kirchhoff/error.hpp"
#include "kirchhoff/nonlinearity.hpp"
#include "kirchhoff/radial.hpp"

namespace kirchhoff {

/// Minimizer r = sqrt(2/m) of e^{r^2 m/2} / (pi r^2); requires beta0 above
/// the minimum value e m / (2 pi).
inline double choose_r(double beta0, double m) {
  require(m > 0.0, "m must be positive");
  const double bound = std::numbers::e * m / (2.0 * std::numbers::pi);
  if (!(beta0 > bound))
    throw Error(ErrorKind::Infeasible,
                "beta0 = " + format_double(beta0) + " does not exceed e m / (2 pi) = " + format_double(bound));
  const double r = std::sqrt(2.0 / m);
  require(beta0 > std::exp(0.5 * r * r * m) / (std::numbers::pi * r * r), "radius fails the beta0 bound");
  return r;
}

struct MoserGridOptions {
  int plateau_intervals = 100;
  int log_intervals = 2000;
};

struct MoserProfile {
  long n = 2;
  double r = 1.0;
  double m = 1.0;
  RadialProfile profile;     // w~_n
  RadialProfile normalized;  // w_n = w~_n / |w~_n|
  std::size_t kink = 0;      // node index of rho = r/n
  double grad_sq = 0.0;
  double mass_sq = 0.0;
  double norm_sq = 0.0;      // grad_sq + m mass_sq of w~_n

  double d_n() const { return mass_sq * std::log(static_cast<double>(n)); }
};

/// mass_sq(w~_n) log n = r^2/4 - (r^2/n^2)(log n / 2 + 1/4), by s = r e^{-tau}.
inline double moser_mass_log_closed_form(long n, double r) {
  const double L = std::log(static_cast<double>(n));
  const double n2 = static_cast<double>(n) * static_cast<double>(n);
  return 0.25 * r * r - r * r / n2 * (0.5 * L + 0.25);
}

/// w~_n on a grid with `plateau_intervals` uniform cells on [0, r/n] and
/// `log_intervals` geometric cells on [r/n, r]. The stored derivative at the
/// kink is the plateau (left) value; norms are integrated piecewise.
inline MoserProfile moser_profile(long n, double r, double m, const MoserGridOptions& g = {}) {
  require(n >= 2, "Moser index must be >= 2");
  require(r > 0.0 && m > 0.0, "r and m must be positive");
  if (n > 100000000L) throw Error(ErrorKind::GridResolution, "n > 1e8 is not resolved by the Moser grid");
  require(g.plateau_intervals >= 2 && g.plateau_intervals % 2 == 0 && g.log_intervals >= 2 &&
              g.log_intervals % 2 == 0,
          "Moser grid needs even interval counts");

  const double L = std::log(static_cast<double>(n));
  const double a = r / static_cast<double>(n);
  const double plateau = std::sqrt(L / (2.0 * std::numbers::pi));
  const double slope = 1.0 / std::sqrt(2.0 * std::numbers::pi * L);

  MoserProfile mp;
  mp.n = n;
  mp.r = r;
  mp.m = m;
  RadialProfile& w = mp.profile;
  w.N = 2;
  for (int i = 0; i < g.plateau_intervals; ++i) {
    w.r.push_back(a * i / g.plateau_intervals);
    w.u.push_back(plateau);
    w.du.push_back(0.0);
  }
  mp.kink = w.r.size();
  for (int j = 0; j <= g.log_intervals; ++j) {
    const double rho = (j == g.log_intervals) ? r : a * std::exp(L * j / g.log_intervals);
    w.r.push_back(rho);
    w.u.push_back(j == 0 ? plateau : (j == g.log_intervals ? 0.0 : slope * std::log(r / rho)));
    w.du.push_back(j == 0 ? 0.0 : -slope / rho);
  }

  // Log piece: |w'|^2 rho = 1 / (2 pi L rho).
  std::vector<double> x(w.r.begin() + static_cast<long>(mp.kink), w.r.end());
  std::vector<double> gvals, mvals;
  for (std::size_t i = mp.kink; i < w.size(); ++i) {
    const double d = slope / w.r[i];
    gvals.push_back(d * d * w.r[i]);
    mvals.push_back(w.u[i] * w.u[i] * w.r[i]);
  }
  const double two_pi = 2.0 * std::numbers::pi;
  mp.grad_sq = two_pi * integrate_samples(x, gvals);
  mp.mass_sq = two_pi * (integrate_samples(x, mvals) + 0.5 * plateau * plateau * a * a);
  mp.norm_sq = mp.grad_sq + m * mp.mass_sq;

  mp.normalized = w;
  const double k = std::sqrt(mp.norm_sq);
  for (auto& v : mp.normalized.u) v /= k;
  for (auto& v : mp.normalized.du) v /= k;
  return mp;
}

/// int_{R^2} F(t w) dx on the Moser grid.
inline double moser_integral_F(const MoserProfile& mp, const NonlinearitySpec& spec, double t) {
  const RadialProfile& w = mp.normalized;
  std::vector<double> vals(w.size());
  for (std::size_t i = 0; i < w.size(); ++i) {
    const double v = eval_F(spec, t * w.u[i]) * w.r[i];
    if (!std::isfinite(v) || std::abs(v) > 1e300)
      throw Error(ErrorKind::Overflow, "F(t w_n) overflows for n = " + std::to_string(mp.n));
    vals[i] = v;
  }
  return 2.0 * std::numbers::pi * integrate_samples(w.r, vals);
}

/// L~_m(t w_n) = t^2/2 - int F(t w_n), using |w_n| = 1.
inline double moser_ray_energy(const MoserProfile& mp, const NonlinearitySpec& spec, double t) {
  return 0.5 * t * t - moser_integral_F(mp, spec, t);
}

struct RayMax {
  double t_star = 0.0;
  double value = 0.0;
};

/// Maximizes t -> L~_m(t w_n): 400-point log scan on [1e-3, t_overflow),
/// t_overflow at 4 pi (t max w_n)^2 = 700, then golden-section refinement.
inline RayMax max_energy_along_ray(const MoserProfile& mp, const NonlinearitySpec& spec) {
  require(spec.dimension() == 2, "Moser scan needs a 2D nonlinearity");
  const double wmax = mp.normalized.u.front();
  const double t_of = std::sqrt(700.0 / (4.0 * std::numbers::pi)) / wmax;
  const double t_lo = 1e-3, t_hi = t_of * (1.0 - 1e-9);
  constexpr int points = 400;
  std::vector<double> ts, vs;
  std::size_t best = 0;
  bool overflowed = false;
  for (int i = 0; i < points; ++i) {
    const double t = t_lo * std::pow(t_hi / t_lo, static_cast<double>(i) / (points - 1));
    double v;
    try {
      v = moser_ray_energy(mp, spec, t);
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::Overflow) throw;
      overflowed = true;  // the range guard ends the scan
      break;
    }
    ts.push_back(t);
    vs.push_back(v);
    if (v > vs[best]) best = ts.size() - 1;
  }
  if (best + 1 >= ts.size()) {
    if (overflowed || moser_integral_F(mp, spec, ts.back()) > 0.0)
      throw Error(ErrorKind::Overflow, "no maximum bracketed below the exponential range guard for n = " +
                                           std::to_string(mp.n));
    throw Error(ErrorKind::NoInteriorMax, "t^2/2 - int F(t w_n) is increasing up to t = " + format_double(t_hi));
  }
  double a = best == 0 ? 0.0 : ts[best - 1], b = ts[best + 1];
  const double phi = 0.5 * (std::sqrt(5.0) - 1.0);
  double c = b - phi * (b - a), d = a + phi * (b - a);
  double fc = moser_ray_energy(mp, spec, c), fd = moser_ray_energy(mp, spec, d);
  while (b - a > 1e-12 * b) {
    if (fc > fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - phi * (b - a);
      fc = moser_ray_energy(mp, spec, c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + phi * (b - a);
      fd = moser_ray_energy(mp, spec, d);
    }
  }
  const double t = 0.5 * (a + b);
  return {t, moser_ray_energy(mp, spec, t)};
}

struct CriticalityRow {
  long n = 0;
  double t_star = 0.0;
  double max_value = 0.0;
  double mass_log_n = 0.0;
};

struct CriticalityScan {
  std::optional<long> n;  // first n with max value < 1/2
  double r = 0.0;
  std::vector<CriticalityRow> rows;
};

/// n = 2, 4, 8, ... <= n_max with r = choose_r(beta0, m); stops at the first
/// n whose ray maximum drops below 1/2. beta0 defaults to +inf (the built-in
/// family has t f(t) e^{-4 pi t^2} = mu t^4 -> inf).
inline CriticalityScan criticality_scan(const NonlinearitySpec& spec, double m, long n_max = 1L << 20,
                                        double beta0 = std::numeric_limits<double>::infinity()) {
  require(spec.dimension() == 2, "Moser scan needs a 2D nonlinearity");
  require(n_max >= 2, "n_max must be >= 2");
  CriticalityScan out;
  out.r = choose_r(beta0, m);
  for (long n = 2; n <= n_max; n *= 2) {
    const MoserProfile mp = moser_profile(n, out.r, m);
    RayMax rm;
    try {
      rm = max_energy_along_ray(mp, spec);
    } catch (const Error& e) {
      if (e.kind() == ErrorKind::Overflow)
        throw Error(ErrorKind::Overflow, "criticality scan at n = " + std::to_string(n) + ": " + e.what());
      throw;
    }
    out.rows.push_back({n, rm.t_star, rm.value, mp.d_n()});
    if (rm.value < 0.5) {
      out.n = n;
      break;
    }
  }
  return out;
}

}  // namespace kirchhoff
