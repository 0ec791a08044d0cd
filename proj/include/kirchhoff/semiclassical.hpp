#pragma once

// Radial semiclassical Kirchhoff problem in the blown-up variable rho = x/eps:
//   -M(|grad w|^2) Delta w + V(eps rho) w = f_k(w),
// solved by a damped fixed point on theta = |grad w|^2 around FD-Newton.

#include <algorithm>
#include <cmath>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "kirchhoff/error.hpp"
#include "kirchhoff/fd_newton.hpp"
#include "kirchhoff/groundstate.hpp"
#include "kirchhoff/kirchhoff_coeff.hpp"
#include "kirchhoff/nonlinearity.hpp"
#include "kirchhoff/radial.hpp"
#include "kirchhoff/rescaling.hpp"

namespace kirchhoff {

struct PotentialSpec {
  double m = 1.0;
  std::function<double(double)> well;
  double O_radius = 1.0;
  double boundary_min = 1.5;
  std::string name = "custom";

  double operator()(double rho) const { return well(rho); }

  /// V(rho) = m + rho^2 / (1 + rho^2); O = B_1, min over the sphere m + 1/2.
  static PotentialSpec default_well(double m = 1.0, double O_radius = 1.0) {
    require(m > 0.0 && O_radius > 0.0, "well needs m > 0 and O_radius > 0");
    PotentialSpec p;
    p.m = m;
    p.well = [m](double rho) { return m + rho * rho / (1.0 + rho * rho); };
    p.O_radius = O_radius;
    p.boundary_min = m + O_radius * O_radius / (1.0 + O_radius * O_radius);
    p.name = "default_well";
    return p;
  }

  /// Sampled (V1)-(V2): V >= V0 > 0, V(0) = m = min over O, m < boundary_min.
  void validate() const {
    require(static_cast<bool>(well), "potential needs a well");
    require(std::abs(well(0.0) - m) <= 1e-12 * (1.0 + m), "V(0) must equal m");
    require(m < boundary_min, "V2 needs m < min over the boundary of O");
    require(std::abs(well(O_radius) - boundary_min) <= 1e-12 * (1.0 + boundary_min),
            "boundary_min must equal V on the boundary of O");
    for (int i = 0; i <= 4000; ++i) {
      const double rho = 1e-3 * std::pow(1e7, i / 4000.0);
      const double v = well(rho);
      require(std::isfinite(v) && v > 0.0, "V1 needs V > 0");
      if (rho < O_radius) require(v >= m - 1e-12, "m must be the infimum of V over O");
    }
  }
};

/// Everything fixed by the eps -> 0 limit: the local ground state, its
/// Kirchhoff lift U, the truncation level and the FD domain.
struct SemiclassicalSetup {
  PotentialSpec pot;
  NonlinearitySpec spec;    // untruncated
  NonlinearitySpec spec_k;  // f_k = min{f, k}
  KirchhoffCoeff coeff = KirchhoffCoeff::constant(1.0);
  GroundState local;        // ground state of -Delta u + m u = f(u)
  LiftResult limit;         // U = T(local)
  double kappa = 0.0;
  double k = 0.0;
  double theta_limit = 0.0;  // grad_sq(U)
};

struct SemiclassicalOptions {
  FdNewtonOptions newton;
  double damping = 0.5;
  double tol = 1e-10;
  int max_outer = 200;
  double kappa_factor = 1.1;
  double k_factor = 1.01;
  ShootingOptions shooting;  // fallback starting points for Newton
};

inline SemiclassicalSetup make_semiclassical_setup(const PotentialSpec& pot, const NonlinearitySpec& spec,
                                                   const KirchhoffCoeff& c, const SemiclassicalOptions& opt = {}) {
  pot.validate();
  require(!spec.truncated(), "the setup truncates the nonlinearity itself");
  SemiclassicalSetup s{pot, spec, spec, c, {}, {}, 0.0, 0.0, 0.0};
  const LocalProblem prob{spec, pot.m};
  s.local = find_ground_state(prob, opt.shooting);
  s.limit = lift(s.local, prob, c);
  s.kappa = opt.kappa_factor * s.local.shoot_height;
  s.k = opt.k_factor * max_f_on(spec, s.kappa);
  s.spec_k = truncate(spec, s.k);
  s.theta_limit = h1_norms(s.limit.v).grad_sq;
  return s;
}

struct SemiclassicalResult {
  double eps = 0.0;
  RadialProfile profile;  // w_eps(rho) = v_eps(eps rho)
  double spike_height = 0.0;
  double x_eps_dist = 0.0;
  double h1_dist_to_limit = 0.0;
  double sup_dist_to_limit = 0.0;
  double decay_C = 0.0;
  double decay_c = 0.0;
  double reference_rate = 0.0;  // window mean of sqrt(V(eps rho) / M(theta))
  DecayFit fit;
  double theta = 0.0;
  double coefficient = 0.0;  // M(theta)
  int outer_iterations = 0;
  int shooting_restarts = 0;
  std::vector<double> theta_history;
  std::optional<double> contraction;  // (|d_k| / |d_{k-10}|)^{1/10} over the last 10 updates
};

namespace detail {

// (|| w - U ||_{H^1}, sup |w - U|) on the nodes of U, onto which the (finer)
// FD solution is interpolated.
inline std::array<double, 2> distance_to(const RadialProfile& w, const RadialProfile& U) {
  RadialProfile d = resample(w, U.r);
  for (std::size_t i = 0; i < U.size(); ++i) {
    d.u[i] -= U.u[i];
    d.du[i] -= U.du[i];
  }
  d.du.front() = 0.0;
  d.tail.reset();
  const NormBundle n = h1_norms(d);
  return {std::sqrt(n.grad_sq + n.mass_sq), n.sup_norm};
}

}  // namespace detail

namespace detail {

inline bool positive_decreasing(std::span<const double> u) {
  for (std::size_t i = 0; i + 1 < u.size(); ++i)
    if (!(u[i] > 0.0) || u[i + 1] > u[i] * (1.0 + 1e-12)) return false;
  return true;
}

// Newton from the warm start; when it fails, or lands on something that is
// not a positive decreasing profile, restart from a shooting solution of the
// same radial ODE.
inline FdSolution solve_with_restart(const RadialFdSystem& sys, double eps, const SemiclassicalSetup& s,
                                     const std::vector<double>& warm, const SemiclassicalOptions& opt,
                                     int& restarts) {
  try {
    FdSolution sol = solve_radial_fd(sys, warm, opt.newton);
    if (positive_decreasing(std::span<const double>(sol.profile.u).first(sys.unknowns()))) return sol;
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::Diverged && e.kind() != ErrorKind::SingularJacobian) throw;
  }
  ++restarts;
  RadialOde eq;
  eq.N = sys.N;
  eq.spec = sys.spec;
  eq.diffusion = sys.diffusion;
  eq.potential = [&](double rho) { return s.pot(eps * rho); };
  const double sigma = std::sqrt(sys.diffusion);
  const double R = sys.grid.r.back();
  GridOptions g = opt.shooting.grid;
  g.h_core *= sigma;
  g.R_core *= sigma;
  g.h *= sigma;
  g.R1 = std::min(g.R1 * sigma, 0.5 * R);
  g.R_max = R;
  const RadialProfile guess = shooting_guess(eq, graded_grid(g), opt.shooting);
  const RadialProfile start = resample(guess, sys.grid.r);
  std::vector<double> w(start.u.begin(), start.u.end() - 1);
  FdSolution sol = solve_radial_fd(sys, w, opt.newton);
  if (!positive_decreasing(std::span<const double>(sol.profile.u).first(sys.unknowns())))
    throw Error(ErrorKind::NotGroundState, "Newton from the shooting guess left the positive decreasing cone");
  return sol;
}

}  // namespace detail

/// Least-squares decay fit of log(w rho^alpha) over the window w in [1e-8, 1e-3].
inline DecayFit decay_fit(const SemiclassicalResult& res, double algebraic_power = 0.0) {
  return fit_exponential_decay(res.profile, algebraic_power, 1e-8, 1e-3);
}

/// Solves the blown-up problem at `eps` (eps = 0 is the limit problem),
/// warm-started from `init`, and computes the diagnostics against U.
inline SemiclassicalResult solve_eps(const SemiclassicalSetup& s, double eps, const RadialProfile& init,
                                     const SemiclassicalOptions& opt = {}) {
  require(eps >= 0.0 && std::isfinite(eps), "eps must be nonnegative");
  const int N = s.spec.dimension();
  RadialFdSystem sys;
  sys.N = N;
  sys.grid = make_fd_grid(opt.newton.nodes, s.limit.v.r_max(), opt.newton.stretch);
  sys.spec = &s.spec_k;
  sys.potential.resize(sys.unknowns());
  for (std::size_t i = 0; i < sys.unknowns(); ++i) sys.potential[i] = s.pot(eps * sys.grid.r[i]);

  const RadialProfile start = resample(init, sys.grid.r);
  std::vector<double> w(start.u.begin(), start.u.end() - 1);
  SemiclassicalResult res;
  res.eps = eps;
  double theta = h1_norms(init).grad_sq;
  std::vector<double> deltas;
  FdSolution sol;
  for (int it = 0;; ++it) {
    if (it >= opt.max_outer)
      throw Error(ErrorKind::OuterDiverged, "theta fixed point did not converge in " + std::to_string(opt.max_outer) +
                                                " iterations at eps = " + format_double(eps));
    sys.diffusion = eval_M(s.coeff, theta);
    sol = detail::solve_with_restart(sys, eps, s, w, opt, res.shooting_restarts);
    w.assign(sol.profile.u.begin(), sol.profile.u.end() - 1);
    const double theta_new = h1_norms(sol.profile).grad_sq;
    res.theta_history.push_back(theta);
    deltas.push_back(std::abs(theta_new - theta));
    res.outer_iterations = it + 1;
    if (std::abs(theta_new - theta) <= opt.tol * (1.0 + theta)) {
      theta = theta_new;
      break;
    }
    theta += opt.damping * (theta_new - theta);
  }
  res.theta_history.push_back(theta);
  if (deltas.size() >= 11) {
    const double a = deltas.back(), b = deltas[deltas.size() - 11];
    if (b > 0.0) res.contraction = std::pow(a / b, 0.1);
  }
  if (h1_norms(sol.profile).sup_norm < 1e-8)
    throw Error(ErrorKind::NotGroundState, "solution collapsed to 0 at eps = " + format_double(eps));

  res.profile = std::move(sol.profile);
  res.theta = theta;
  res.coefficient = eval_M(s.coeff, theta);
  const auto peak = static_cast<std::size_t>(std::max_element(res.profile.u.begin(), res.profile.u.end()) -
                                             res.profile.u.begin());
  res.spike_height = res.profile.u[peak];
  res.x_eps_dist = eps * res.profile.r[peak];
  const auto dist = detail::distance_to(res.profile, s.limit.v);
  res.h1_dist_to_limit = dist[0];
  res.sup_dist_to_limit = dist[1];
  res.fit = decay_fit(res, 0.5 * (N - 1));
  res.decay_C = res.fit.C;
  res.decay_c = res.fit.c;
  double acc = 0.0;
  constexpr int samples = 200;
  for (int i = 0; i <= samples; ++i) {
    const double rho = res.fit.r_lo + (res.fit.r_hi - res.fit.r_lo) * i / samples;
    acc += std::sqrt(s.pot(eps * rho) / res.coefficient);
  }
  res.reference_rate = acc / (samples + 1);
  return res;
}

/// Residual of the unscaled v(x) = w(x / eps) in
/// -eps^2 M(eps^{2-N} |grad v|^2) Delta v + V v = f_k(v), normalized by 1 + |f|;
/// eps = 0 evaluates the blown-up equation with V = m.
inline double semiclassical_residual(const SemiclassicalSetup& s, const SemiclassicalResult& res) {
  const int N = res.profile.N;
  const double eps = res.eps;
  const RadialProfile v = eps > 0.0 ? rescale_profile(res.profile, eps) : res.profile;
  const double scale = eps > 0.0 ? eps : 1.0;
  const double theta = std::pow(scale, 2.0 - N) * h1_norms(v).grad_sq;
  const double D = scale * scale * eval_M(s.coeff, theta);
  const auto lap = radial_laplacian(v);
  double worst = 0.0;
  for (std::size_t i = 0; i < lap.size(); ++i) {
    const double V = eps > 0.0 ? s.pot(v.r[i]) : s.pot.m;
    const double f = eval_f(s.spec_k, v.u[i]);
    worst = std::max(worst, std::abs(D * lap[i] - V * v.u[i] + f) / (1.0 + std::abs(f)));
  }
  return worst;
}

struct SweepFailure {
  double eps = 0.0;
  std::string message;
};

struct SweepResult {
  std::vector<SemiclassicalResult> results;
  std::optional<SweepFailure> failure;
};

/// Solves each eps in order, warm-starting from the previous solution (the
/// first from U). Stops at the first failing eps and returns the prefix.
inline SweepResult continuation_sweep(const SemiclassicalSetup& s, const std::vector<double>& eps_list,
                                      const SemiclassicalOptions& opt = {}) {
  for (std::size_t i = 1; i < eps_list.size(); ++i)
    require(eps_list[i] < eps_list[i - 1], "eps list must be strictly descending");
  SweepResult out;
  const RadialProfile* init = &s.limit.v;
  for (double eps : eps_list) {
    try {
      out.results.push_back(solve_eps(s, eps, *init, opt));
      init = &out.results.back().profile;
    } catch (const Error& e) {
      out.failure = SweepFailure{eps, e.what()};
      break;
    }
  }
  return out;
}

struct ConcentrationRow {
  double eps = 0.0;
  double x_eps_dist = 0.0;
  double sup_dist = 0.0;
  double h1_dist = 0.0;
  double spike = 0.0;
  double coeff = 0.0;
  double decay_C = 0.0;
  double decay_c = 0.0;
  double reference_rate = 0.0;
};

struct ConcentrationTable {
  std::vector<ConcentrationRow> rows;
  bool h1_decreasing = true;   // along the sweep (eps descending)
  bool sup_decreasing = true;
  bool spike_below_kappa = true;
  std::vector<double> flagged_eps;  // rows that break a monotone trend
};

inline ConcentrationTable concentration_diagnostics(const std::vector<SemiclassicalResult>& results,
                                                    const SemiclassicalSetup& s) {
  require(!results.empty(), "no results to diagnose");
  ConcentrationTable t;
  for (const auto& r : results) {
    const auto dist = detail::distance_to(r.profile, s.limit.v);
    t.rows.push_back({r.eps, r.x_eps_dist, dist[1], dist[0], r.spike_height, r.coefficient, r.decay_C, r.decay_c,
                      r.reference_rate});
    t.spike_below_kappa = t.spike_below_kappa && r.spike_height < s.kappa;
  }
  for (std::size_t i = 1; i < t.rows.size(); ++i) {
    const bool h1 = t.rows[i].h1_dist < t.rows[i - 1].h1_dist;
    const bool sup = t.rows[i].sup_dist < t.rows[i - 1].sup_dist;
    t.h1_decreasing = t.h1_decreasing && h1;
    t.sup_decreasing = t.sup_decreasing && sup;
    if (!h1 || !sup) t.flagged_eps.push_back(t.rows[i].eps);
  }
  return t;
}

}  // namespace kirchhoff
