#pragma once

// The dilation T carrying local ground states to Kirchhoff ground states,
// v(r) = u(r / t_u), its inverse u(r) = v(h_v r), and Kirchhoff residuals.

#include <cmath>
#include <vector>

#include "kirchhoff/error.hpp"
#include "kirchhoff/functionals.hpp"
#include "kirchhoff/kirchhoff_coeff.hpp"
#include "kirchhoff/problem.hpp"
#include "kirchhoff/radial.hpp"

namespace kirchhoff {

struct TuBracket {
  double t = 0.0;
  double lo = 0.0;  // g(lo) < 0
  double hi = 0.0;  // g(hi) >= 0
};

/// Smallest positive root of g(t) = t^2 - M(t^{N-2} grad_sq): geometric scan
/// (x1.5 from 1e-6) to the first sign change, then bisection to machine
/// precision (at least 1e-12 relative).
inline TuBracket solve_t_u_bracket(const KirchhoffCoeff& c, double grad_sq, int N) {
  require(N >= 3, "t_u is defined for N >= 3");
  require(grad_sq > 0.0 && std::isfinite(grad_sq), "grad_sq must be positive");
  auto g = [&](double t) {
    const double v = t * t - eval_M(c, std::pow(t, N - 2.0) * grad_sq);
    if (!std::isfinite(v)) throw Error(ErrorKind::NonFinite, "M is not finite at t = " + format_double(t));
    return v;
  };
  double lo = 1e-6;
  if (g(lo) >= 0.0) throw Error(ErrorKind::NoRoot, "g(1e-6) >= 0: M(0+) is not positive");
  double hi = lo;
  for (;;) {
    hi = lo * 1.5;
    if (hi > 1e6) throw Error(ErrorKind::NoRoot, "t^2 = M(t^{N-2} |grad u|^2) has no root below 1e6");
    if (g(hi) >= 0.0) break;
    lo = hi;
  }
  for (;;) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    (g(mid) < 0.0 ? lo : hi) = mid;
  }
  return {hi - lo <= 1e-12 * hi ? 0.5 * (lo + hi) : hi, lo, hi};
}

inline double solve_t_u(const KirchhoffCoeff& c, double grad_sq, int N) { return solve_t_u_bracket(c, grad_sq, N).t; }

/// max over nodes 0..K-1 of |M(grad_sq v) Delta v - m v + f(v)| / (1 + |f(v)|).
inline double kirchhoff_residual(const RadialProfile& v, const LocalProblem& prob, const KirchhoffCoeff& c) {
  v.validate();
  const NormBundle n = h1_norms(v);
  const double Mv = eval_M(c, n.grad_sq);
  const auto lap = radial_laplacian(v);
  double worst = 0.0;
  for (std::size_t i = 0; i < lap.size(); ++i) {
    const double f = eval_f(prob.spec, v.u[i]);
    worst = std::max(worst, std::abs(Mv * lap[i] - prob.m * v.u[i] + f) / (1.0 + std::abs(f)));
  }
  return worst;
}

/// Local-equation residual, the M == 1 case of kirchhoff_residual.
inline double local_residual(const RadialProfile& u, const LocalProblem& prob) {
  return kirchhoff_residual(u, prob, KirchhoffCoeff::constant(1.0));
}

struct LiftResult {
  RadialProfile v;
  double t_u = 1.0;  // dilation factor: t_u (N >= 3) or sqrt(M(grad_sq u)) (N = 2)
  double h_v = 1.0;  // sqrt(M(grad_sq v))
  double kirchhoff_residual = 0.0;
  double kirchhoff_energy = 0.0;
  double energy_identity_residual = 0.0;  // relative residual of L_m(v) = 1/2 [M^(t) - (1 - 2/N) M(t) t]
  double least_energy_residual = 0.0;     // N >= 3: relative residual of the least-energy formula for L~_m(u)
};

/// 1/2 [M^(t) - (1 - 2/N) M(t) t].
inline double kirchhoff_level(const KirchhoffCoeff& c, double t, int N) {
  return 0.5 * (eval_Mhat(c, t) - (1.0 - 2.0 / N) * eval_M(c, t) * t);
}

/// (1/N) [M(t) / t^{2/(N-2)}]^{(2-N)/2}, t = grad_sq(v).
inline double least_energy_formula(const KirchhoffCoeff& c, double t, int N) {
  require(N >= 3, "least-energy formula needs N >= 3");
  return std::pow(eval_M(c, t) / std::pow(t, 2.0 / (N - 2.0)), 0.5 * (2.0 - N)) / N;
}

/// v = u(. / t_u) on the dilated grid (no interpolation), with its residual
/// and energy identities.
inline LiftResult lift(const GroundState& u, const LocalProblem& prob, const KirchhoffCoeff& c) {
  const int N = u.profile.N;
  LiftResult L;
  if (N == 2) {
    L.t_u = std::sqrt(eval_M(c, u.norms.grad_sq));
  } else {
    L.t_u = c.is_unit() ? 1.0 : solve_t_u(c, u.norms.grad_sq, N);
  }
  L.v = rescale_profile(u.profile, L.t_u);
  const NormBundle nv = h1_norms(L.v);
  L.h_v = std::sqrt(eval_M(c, nv.grad_sq));
  L.kirchhoff_residual = kirchhoff_residual(L.v, prob, c);
  L.kirchhoff_energy = kirchhoff_energy(L.v, prob, c);
  const double level = kirchhoff_level(c, nv.grad_sq, N);
  L.energy_identity_residual = std::abs(L.kirchhoff_energy - level) / std::abs(level);
  if (N >= 3) {
    const double le = least_energy_formula(c, nv.grad_sq, N);
    L.least_energy_residual = std::abs(u.energy - le) / std::abs(le);
  }
  return L;
}

/// u(r) = v(h_v r), h_v = sqrt(M(grad_sq v)), for a Kirchhoff solution v
/// (residual <= `max_residual`).
inline RadialProfile project(const RadialProfile& v, const LocalProblem& prob, const KirchhoffCoeff& c,
                             double max_residual = 1e-5) {
  const double res = kirchhoff_residual(v, prob, c);
  if (!(res <= max_residual))
    throw Error(ErrorKind::ResidualTooLarge,
                "Kirchhoff residual " + format_double(res) + " exceeds " + format_double(max_residual));
  const double h = std::sqrt(eval_M(c, h1_norms(v).grad_sq));
  return rescale_profile(v, 1.0 / h);
}

}  // namespace kirchhoff
