#pragma once

// Ground states of -Delta u + m u = f(u) by radial shooting with bisection on
// u(0), and the finite-difference Newton oracle on the same problem.

#include <array>
#include <cmath>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "kirchhoff/error.hpp"
#include "kirchhoff/fd_newton.hpp"
#include "kirchhoff/functionals.hpp"
#include "kirchhoff/ode.hpp"
#include "kirchhoff/problem.hpp"
#include "kirchhoff/radial.hpp"

namespace kirchhoff {

enum class ShotKind { Overshoot, Undershoot, Decay };

inline const char* to_string(ShotKind k) {
  switch (k) {
    case ShotKind::Overshoot: return "overshoot";
    case ShotKind::Undershoot: return "undershoot";
    case ShotKind::Decay: return "decay";
  }
  return "?";
}

struct ShotOutcome {
  ShotKind kind = ShotKind::Decay;
  double radius = 0.0;  // where the event fired (R_max for an undecided orbit)
};

struct ShootingOptions {
  double s_min = 1e-4;
  std::optional<double> s_max;  // 50 for N >= 3, 3 for N = 2
  double scan_factor = 1.05;
  GridOptions grid;
  ode::Tolerances tol;
  double decay_radius = 20.0;
  double decay_level = 1e-8;
  double overshoot_level = 1e-14;
  double undershoot_slope = 1e-14;
  double undershoot_level = 1e-10;
  double separation = 1e-6;  // relative gap at which the bracket orbits part
  int max_bisections = 200;

  double resolved_s_max(int N) const { return s_max.value_or(N == 2 ? 3.0 : 50.0); }
};

/// D (u'' + (N-1)/r u') - V(r) u + f(u) = 0 with u'(0) = 0. The local
/// problem is D = 1, V = m.
struct RadialOde {
  int N = 3;
  const NonlinearitySpec* spec = nullptr;
  double diffusion = 1.0;
  std::function<double(double)> potential;  // empty: V = m
  double m = 1.0;

  double V(double r) const { return potential ? potential(r) : m; }
};

inline RadialOde local_ode(const LocalProblem& prob) {
  prob.validate();
  RadialOde ode;
  ode.N = prob.dimension();
  ode.spec = &prob.spec;
  ode.m = prob.m;
  return ode;
}

/// An orbit sampled at the grid nodes it reached.
struct Orbit {
  std::vector<double> r, u, du;
  ShotOutcome outcome;
};

/// Integrates the radial ODE from u(0) = s node to node over `grid`,
/// substepping only when a full interval is rejected, so the map s -> orbit
/// is smooth. With `stop_on_decay` false the Decay event is not armed and the
/// orbit runs until it over/undershoots or reaches the last node.
inline Orbit integrate_orbit(const RadialOde& eq, double s, const std::vector<double>& grid,
                             const ShootingOptions& opt = {}, bool stop_on_decay = true) {
  require(s > 0.0 && std::isfinite(s), "shoot height must be positive");
  require(eq.spec != nullptr && eq.diffusion > 0.0, "radial ODE needs a nonlinearity and D > 0");
  require(grid.size() >= 2 && grid.front() == 0.0, "shooting grid must start at 0");
  const int N = eq.N;
  const double D = eq.diffusion;
  const auto& spec = *eq.spec;

  // Steps with a non-finite error or state are rejected and shrunk rather
  // than reported.
  auto rhs = [&](double r, const ode::State<2>& y) -> ode::State<2> {
    return {y[1], (eq.V(r) * y[0] - eval_f(spec, y[0])) / D - (N - 1) / r * y[1]};
  };

  Orbit o;
  o.r.push_back(0.0);
  o.u.push_back(s);
  o.du.push_back(0.0);

  const double fs = eval_f(spec, s);
  if (!std::isfinite(fs)) throw Error(ErrorKind::Overflow, "f overflows at u = " + format_double(s));
  const double curv = (eq.V(0.0) * s - fs) / (N * D);  // u''(0)
  double r0 = 1e-6;
  if (curv != 0.0) r0 = std::min(r0, 1e-3 * std::sqrt(2.0 * s / std::abs(curv)));
  r0 = std::min(r0, 0.5 * grid[1]);

  double t = r0;
  ode::State<2> y{s + 0.5 * curv * r0 * r0, curv * r0};

  auto classify = [&](double r, const ode::State<2>& st) -> std::optional<ShotKind> {
    if (st[0] < -opt.overshoot_level) return ShotKind::Overshoot;
    if (st[1] > opt.undershoot_slope && st[0] > opt.undershoot_level) return ShotKind::Undershoot;
    if (stop_on_decay && r > opt.decay_radius && st[0] < opt.decay_level && st[0] > 0.0) {
      const double q = st[1] / st[0];
      const double k = std::sqrt(eq.V(r) / D);
      if (q >= -2.0 * k && q <= -0.5 * k) return ShotKind::Decay;
    }
    return std::nullopt;
  };

  bool overflowing = false;
  for (std::size_t i = 1; i < grid.size(); ++i) {
    const double target = grid[i];
    double h = target - t;
    while (t < target) {
      h = std::min(h, target - t);
      if (t + h == t || h < 1e-300) {
        if (overflowing)
          throw Error(ErrorKind::Overflow, "f overflows along the orbit near r = " + format_double(t));
        throw Error(ErrorKind::StepUnderflow, "step size underflow at r = " + format_double(t));
      }
      const auto step = ode::dopri5_step<2>(rhs, t, y, h, opt.tol);
      overflowing = !std::isfinite(step.error) || !std::isfinite(step.y[0]) || !std::isfinite(step.y[1]);
      if (overflowing) {
        h *= 0.2;
        continue;
      }
      if (step.error <= 1.0) {
        t = (target - (t + h) <= 1e-15 * target) ? target : t + h;
        y = step.y;
        if (t < target) {
          if (auto ev = classify(t, y)) {
            o.r.push_back(t);
            o.u.push_back(y[0]);
            o.du.push_back(y[1]);
            o.outcome = {*ev, t};
            return o;
          }
        }
      }
      h *= ode::next_step_factor(step.error);
    }
    t = target;
    o.r.push_back(t);
    o.u.push_back(y[0]);
    o.du.push_back(y[1]);
    if (auto ev = classify(t, y)) {
      o.outcome = {*ev, t};
      return o;
    }
  }
  o.outcome = {ShotKind::Decay, grid.back()};
  return o;
}

inline Orbit integrate_orbit(const LocalProblem& prob, double s, const std::vector<double>& grid,
                             const ShootingOptions& opt = {}, bool stop_on_decay = true) {
  return integrate_orbit(local_ode(prob), s, grid, opt, stop_on_decay);
}

/// Classifies the orbit with u(0) = s on the canonical graded grid.
inline ShotOutcome shoot(const LocalProblem& prob, double s, const ShootingOptions& opt = {}) {
  return integrate_orbit(prob, s, graded_grid(opt.grid), opt, true).outcome;
}

/// Energy, norms, Pohozaev residual and tail fit of a computed profile.
inline GroundState make_ground_state(const LocalProblem& prob, RadialProfile profile, SolverTag solver) {
  GroundState gs;
  gs.profile = std::move(profile);
  gs.norms = h1_norms(gs.profile);
  gs.energy = local_energy(gs.profile, prob);
  gs.pohozaev_residual = pohozaev_residual(gs.profile, prob).value;
  gs.shoot_height = gs.profile.u.front();
  gs.solver = solver;
  gs.decay = fit_exponential_decay(gs.profile, 0.5 * (gs.profile.N - 1));
  return gs;
}

/// Result of bracketing and bisecting the shooting map on one grid.
struct ShootingRun {
  double lo = 0.0, hi = 0.0;  // final Undershoot / Overshoot heights
  Orbit olo, ohi;
  std::vector<std::pair<double, double>> brackets;
  std::vector<std::pair<double, double>> bisection_history;
  RadialProfile core;    // bracket-orbit average on grid[0 .. separation)
  std::size_t separation = 0;
};

/// Scans s geometrically over [s_min, s_max] for Undershoot -> Overshoot
/// transitions, bisects the lowest one to machine precision and averages the
/// two bracket orbits up to the node where they part.
inline ShootingRun bracket_and_bisect(const RadialOde& eq, const std::vector<double>& grid,
                                      const ShootingOptions& opt = {}) {
  const double s_max = opt.resolved_s_max(eq.N);
  require(opt.s_min > 0.0 && s_max > opt.s_min && opt.scan_factor > 1.0, "invalid shooting scan range");
  ShootingRun run;
  std::optional<double> decay_hit;
  {
    double prev_s = 0.0;
    std::optional<ShotKind> prev;
    for (double s = opt.s_min; s <= s_max * (1.0 + 1e-12); s *= opt.scan_factor) {
      const ShotKind k = integrate_orbit(eq, s, grid, opt, false).outcome.kind;
      if (k == ShotKind::Decay && !decay_hit) decay_hit = s;
      if (prev == ShotKind::Undershoot && k == ShotKind::Overshoot) run.brackets.emplace_back(prev_s, s);
      prev = k;
      prev_s = s;
    }
  }
  if (run.brackets.empty() && !decay_hit)
    throw Error(ErrorKind::NoBracket, "no undershoot/overshoot transition for s in [" + format_double(opt.s_min) +
                                          ", " + format_double(s_max) + "]");

  double& lo = run.lo;
  double& hi = run.hi;
  if (decay_hit && (run.brackets.empty() || *decay_hit < run.brackets.front().first)) {
    lo = hi = *decay_hit;
    run.olo = run.ohi = integrate_orbit(eq, lo, grid, opt, false);
  } else {
    lo = run.brackets.front().first;
    hi = run.brackets.front().second;
    run.olo = integrate_orbit(eq, lo, grid, opt, false);
    run.ohi = integrate_orbit(eq, hi, grid, opt, false);
    run.bisection_history.emplace_back(lo, hi);
    for (int it = 0;; ++it) {
      const double mid = 0.5 * (lo + hi);
      if (mid <= lo || mid >= hi) break;
      if (it >= opt.max_bisections) {
        if (hi - lo <= 1e-12 * lo) break;
        throw Error(ErrorKind::Tolerance, "bisection stalled with bracket [" + format_double(lo) + ", " +
                                              format_double(hi) + "]");
      }
      Orbit om = integrate_orbit(eq, mid, grid, opt, false);
      if (om.outcome.kind == ShotKind::Undershoot) {
        lo = mid;
        run.olo = std::move(om);
      } else if (om.outcome.kind == ShotKind::Overshoot) {
        hi = mid;
        run.ohi = std::move(om);
      } else {  // reached the last node inside the decay envelope
        lo = hi = mid;
        run.olo = om;
        run.ohi = std::move(om);
        run.bisection_history.emplace_back(lo, hi);
        break;
      }
      run.bisection_history.emplace_back(lo, hi);
    }
    if (hi - lo > 1e-12 * lo)
      throw Error(ErrorKind::Tolerance, "bisection did not reach 1e-12 relative width: [" + format_double(lo) +
                                            ", " + format_double(hi) + "]");
  }

  const auto& olo = run.olo;
  const auto& ohi = run.ohi;
  const std::size_t common = std::min(olo.r.size(), ohi.r.size());
  RadialProfile& p = run.core;
  p.N = eq.N;
  p.r = grid;
  p.u.assign(grid.size(), 0.0);
  p.du.assign(grid.size(), 0.0);
  std::size_t sep = common;
  for (std::size_t i = 0; i < common; ++i) {
    // Orbits that stopped on an event between nodes end off-grid.
    if (olo.r[i] != grid[i] || ohi.r[i] != grid[i]) {
      sep = i;
      break;
    }
    const double u = 0.5 * (olo.u[i] + ohi.u[i]);
    const double du = 0.5 * (olo.du[i] + ohi.du[i]);
    if (std::abs(olo.u[i] - ohi.u[i]) > opt.separation * std::abs(u) || u <= 0.0 || (i > 0 && du >= 0.0)) {
      sep = i;
      break;
    }
    p.u[i] = u;
    p.du[i] = du;
  }
  if (sep < 2) throw Error(ErrorKind::Tolerance, "bracket orbits separate at the origin");
  run.separation = sep;
  return run;
}

namespace detail {

// r^{-nu} K_nu(sqrt(m) r) and its r-derivative, nu = (N-2)/2.
inline std::array<double, 2> far_field(int N, double m, double r) {
  const double nu = 0.5 * (N - 2);
  const double k = std::sqrt(m);
  const double p = std::pow(r, -nu);
  return {p * std::cyl_bessel_k(nu, k * r), -k * p * std::cyl_bessel_k(nu + 1.0, k * r)};
}

inline void attach_exp_tail(RadialProfile& p) {
  const double uR = p.u.back(), dR = p.du.back();
  if (uR > 0.0 && dR < 0.0) {
    const double c = -dR / uR;
    p.tail = ExpTail{uR * std::exp(c * p.r.back()), c};
  }
}

}  // namespace detail

/// Shooting ground state: the bracket-orbit average up to the separation
/// node, the linear far field A r^{-nu} K_nu(sqrt(m) r) beyond it.
inline GroundState find_ground_state(const LocalProblem& prob, const ShootingOptions& opt = {}) {
  const RadialOde eq = local_ode(prob);
  const int N = eq.N;
  const auto grid = graded_grid(opt.grid);
  ShootingRun run = bracket_and_bisect(eq, grid, opt);
  RadialProfile p = std::move(run.core);
  const std::size_t sep = run.separation;
  const std::size_t j = sep - 1;
  if (sep < grid.size()) {
    if (p.u[j] > 1e-5 * p.u[0])
      throw Error(ErrorKind::Tolerance, "orbits separate at r = " + format_double(grid[j]) +
                                            " before the far field is linear");
    const double A = p.u[j] / detail::far_field(N, prob.m, grid[j])[0];
    for (std::size_t i = sep; i < grid.size(); ++i) {
      const auto ff = detail::far_field(N, prob.m, grid[i]);
      p.u[i] = A * ff[0];
      p.du[i] = A * ff[1];
    }
  }
  detail::attach_exp_tail(p);

  GroundState out = make_ground_state(prob, std::move(p), SolverTag::Shooting);
  out.shoot_height = 0.5 * (run.lo + run.hi);
  out.brackets = std::move(run.brackets);
  out.bisection_history = std::move(run.bisection_history);
  out.match_radius = grid[j];
  return out;
}

/// Positive radial solution of a general radial ODE by shooting, continued
/// past the separation node with the WKB decay exp(-int sqrt(V/D)) r^{-(N-1)/2}.
/// Accurate up to the separation node; meant as a Newton starting point.
inline RadialProfile shooting_guess(const RadialOde& eq, const std::vector<double>& grid,
                                    const ShootingOptions& opt = {}) {
  ShootingRun run = bracket_and_bisect(eq, grid, opt);
  RadialProfile p = std::move(run.core);
  const double a = 0.5 * (eq.N - 1);
  for (std::size_t i = run.separation; i < grid.size(); ++i) {
    const double r0 = grid[i - 1], r1 = grid[i];
    const double k = std::sqrt(0.5 * (eq.V(r0) + eq.V(r1)) / eq.diffusion);
    p.u[i] = p.u[i - 1] * std::exp(-k * (r1 - r0)) * std::pow(r0 / r1, a);
    p.du[i] = -(k + a / r1) * p.u[i];
  }
  return p;
}

/// FD-Newton on the stretched grid over [0, R_max]; `init` is resampled onto it.
/// A solution that collapses to 0 is reported as NotGroundState.
inline FdSolution fd_newton_solve(const LocalProblem& prob, const RadialProfile& init,
                                  const FdNewtonOptions& opt = {}) {
  prob.validate();
  require(init.N == prob.dimension(), "initial profile dimension does not match the problem");
  RadialFdSystem sys;
  sys.N = prob.dimension();
  sys.grid = make_fd_grid(opt.nodes, opt.R_max, opt.stretch);
  sys.diffusion = 1.0;
  sys.potential.assign(sys.unknowns(), prob.m);
  sys.spec = &prob.spec;
  const RadialProfile r0 = resample(init, sys.grid.r);
  std::vector<double> u0(r0.u.begin(), r0.u.end() - 1);
  const bool trivial_init = detail::max_abs(u0) < 1e-8;
  FdSolution sol;
  try {
    sol = solve_radial_fd(sys, std::move(u0), opt);
  } catch (const Error& e) {
    if (trivial_init && e.kind() == ErrorKind::Diverged)
      throw Error(ErrorKind::NotGroundState, "Newton from the zero profile: " + std::string(e.what()));
    throw;
  }
  if (h1_norms(sol.profile).sup_norm < 1e-8)
    throw Error(ErrorKind::NotGroundState, "Newton converged to the trivial solution");
  return sol;
}

}  // namespace kirchhoff
