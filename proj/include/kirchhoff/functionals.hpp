#pragma once

// Energy functionals of the local and Kirchhoff problems, Pohozaev residuals,
// the minimization / mountain-pass levels and the critical existence margins.

#include <cmath>
#include <numbers>
#include <optional>
#include <vector>

#include "kirchhoff/error.hpp"
#include "kirchhoff/kirchhoff_coeff.hpp"
#include "kirchhoff/problem.hpp"
#include "kirchhoff/radial.hpp"

namespace kirchhoff {

/// int_{R^N} F(u) dx on the stored grid. Signals Overflow once the weighted
/// integrand leaves 1e300 (exponential families in 2D).
inline double integral_F(const RadialProfile& u, const NonlinearitySpec& spec) {
  std::vector<double> vals(u.size());
  for (std::size_t i = 0; i < u.size(); ++i) {
    const double v = eval_F(spec, u.u[i]) * std::pow(u.r[i], u.N - 1);
    if (!std::isfinite(v) || std::abs(v) > 1e300)
      throw Error(ErrorKind::Overflow, "F(u) r^{N-1} exceeds 1e300 at r = " + std::to_string(u.r[i]));
    vals[i] = v;
  }
  return sphere_area(u.N) * integrate_samples(u.r, vals);
}

/// G(u) = int (F(u) - m u^2 / 2).
inline double pohozaev_functional(const RadialProfile& u, const LocalProblem& prob) {
  const NormBundle n = h1_norms(u);
  return integral_F(u, prob.spec) - 0.5 * prob.m * n.mass_sq;
}

/// 1/2 int (|grad u|^2 + m u^2) - int F(u).
inline double local_energy(const RadialProfile& u, const LocalProblem& prob) {
  const NormBundle n = h1_norms(u);
  return 0.5 * (n.grad_sq + prob.m * n.mass_sq) - integral_F(u, prob.spec);
}

/// 1/2 M^(|grad u|^2) + m/2 int u^2 - int F(u).
inline double kirchhoff_energy(const RadialProfile& u, const LocalProblem& prob, const KirchhoffCoeff& c) {
  const NormBundle n = h1_norms(u);
  return 0.5 * eval_Mhat(c, n.grad_sq) + 0.5 * prob.m * n.mass_sq - integral_F(u, prob.spec);
}

struct PohozaevResidual {
  double value = 0.0;
  bool degenerate = false;  // u == 0: the relative residual is 0/0
};

/// N >= 3: |G(u) - (N-2)/(2N) |grad u|^2| relative to (N-2)/(2N) |grad u|^2.
/// N = 2: |G(u)| / |grad u|^2.
inline PohozaevResidual pohozaev_residual(const RadialProfile& u, const LocalProblem& prob) {
  const int N = u.N;
  const NormBundle n = h1_norms(u);
  if (n.grad_sq == 0.0 && n.mass_sq == 0.0) return {0.0, true};
  const double G = integral_F(u, prob.spec) - 0.5 * prob.m * n.mass_sq;
  if (N == 2) return {std::abs(G) / n.grad_sq, false};
  const double rhs = (N - 2.0) / (2.0 * N) * n.grad_sq;
  return {std::abs(G - rhs) / rhs, false};
}

/// b = (1/N) ((N-2)/(2N))^{(N-2)/2} (2A)^{N/2}; b = A for N = 2.
inline double mountain_pass_level(double A, int N) {
  require(A > 0.0, "minimization level must be positive");
  if (N == 2) return A;
  return std::pow((N - 2.0) / (2.0 * N), 0.5 * (N - 2.0)) * std::pow(2.0 * A, 0.5 * N) / N;
}

/// Inverse of mountain_pass_level: A = 1/2 (2N/(N-2))^{(N-2)/N} (N b)^{2/N}.
inline double minimization_level_from_energy(double b, int N) {
  require(b > 0.0, "energy must be positive");
  if (N == 2) return b;
  return 0.5 * std::pow(2.0 * N / (N - 2.0), (N - 2.0) / N) * std::pow(N * b, 2.0 / N);
}

inline double minimization_level(const GroundState& gs) {
  return minimization_level_from_energy(gs.energy, gs.profile.N);
}

namespace detail {

// |S^{N-1}| int_rho^inf of the Talenti integrands, by the binomial series in
// r^{-2} (valid for rho > 1). Returns {gradient part, critical-power part}.
inline std::array<double, 2> talenti_tails(int N, double rho) {
  require(rho > 1.0, "Talenti tail series needs rho > 1");
  double grad = 0.0, crit = 0.0;
  double binom = 1.0;  // binom(-N, k)
  const double x = 1.0 / (rho * rho);
  double xk = 1.0;
  for (int k = 0; k < 400; ++k) {
    const double tg = binom * std::pow(rho, 2.0 - N) * xk / (N - 2.0 + 2.0 * k);
    const double tc = binom * std::pow(rho, -1.0 * N) * xk / (N + 2.0 * k);
    grad += tg;
    crit += tc;
    if (std::abs(tg) < 1e-20 * std::abs(grad) && std::abs(tc) < 1e-20 * std::abs(crit)) break;
    binom *= -(N + k) / static_cast<double>(k + 1);
    xk *= x;
  }
  const double w = sphere_area(N);
  return {w * (N - 2.0) * (N - 2.0) * grad, w * crit};
}

}  // namespace detail

/// Aubin-Talenti profile W(r) = (1 + r^2)^{-(N-2)/2} sampled on `grid`.
inline RadialProfile talenti_profile(int N, std::span<const double> grid) {
  require(N >= 3, "Talenti profile needs N >= 3");
  RadialProfile w;
  w.N = N;
  w.r.assign(grid.begin(), grid.end());
  for (double r : grid) {
    w.u.push_back(std::pow(1.0 + r * r, -0.5 * (N - 2.0)));
    w.du.push_back(-(N - 2.0) * r * std::pow(1.0 + r * r, -0.5 * N));
  }
  return w;
}

/// Sobolev quotient |grad W_s|^2 / |W_s|_{2*}^2 of the dilated Talenti profile
/// W_s(r) = W(r/sigma), computed through rescale_profile on the sampled W plus
/// the analytic algebraic tail beyond the dilated grid.
inline double talenti_quotient(int N, double sigma, const GridOptions& grid = {}) {
  const auto base = talenti_profile(N, graded_grid(grid));
  const RadialProfile w = rescale_profile(base, sigma);
  const double two_star = 2.0 * N / (N - 2.0);
  const double grad_grid = integrate_profile(w, [](double, double, double du) { return du * du; });
  const double crit_grid = integrate_profile(w, [&](double, double u, double) { return std::pow(u, two_star); });
  const auto tails = detail::talenti_tails(N, w.r_max() / sigma);
  const double grad = grad_grid + std::pow(sigma, N - 2.0) * tails[0];
  const double crit = crit_grid + std::pow(sigma, 1.0 * N) * tails[1];
  return grad / std::pow(crit, 2.0 / two_star);
}

/// Best constant S of D^{1,2}(R^N) -> L^{2*}(R^N) from the Talenti quotient.
inline double sobolev_best_constant(int N, const GridOptions& grid = {}) {
  require(N >= 3, "Sobolev constant needs N >= 3");
  return talenti_quotient(N, 1.0, grid);
}

/// N >= 3: E - (1/N) S^{N/2}; N = 2: A - 1/2. Negative margins certify the
/// level sits below the compactness threshold.
inline double existence_margin(const GroundState& gs) {
  const int N = gs.profile.N;
  if (N == 2) return minimization_level(gs) - 0.5;
  const double S = sobolev_best_constant(N);
  return gs.energy - std::pow(S, 0.5 * N) / N;
}

struct EnergyReport {
  double local_energy = 0.0;
  double kirchhoff_energy = 0.0;
  double A_level = 0.0;
  double b_level = 0.0;
  std::optional<double> sobolev_S;
  double existence_margin = 0.0;
};

/// Assembles the energy levels of a local ground state; `kirchhoff_energy` is
/// the value of L_m at the lifted state (computed by the caller).
inline EnergyReport make_energy_report(const GroundState& gs, double kirchhoff_energy_value) {
  EnergyReport r;
  const int N = gs.profile.N;
  r.local_energy = gs.energy;
  r.kirchhoff_energy = kirchhoff_energy_value;
  r.b_level = gs.energy;
  r.A_level = minimization_level(gs);
  if (N >= 3) {
    r.sobolev_S = sobolev_best_constant(N);
    r.existence_margin = gs.energy - std::pow(*r.sobolev_S, 0.5 * N) / N;
  } else {
    r.existence_margin = r.A_level - 0.5;
  }
  return r;
}

}  // namespace kirchhoff
