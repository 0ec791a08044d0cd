#pragma once

// Damped Newton solver for the fourth-order finite-difference discretization
// of  D (u'' + (N-1)/r u') - V(r) u + f(u) = 0  on a stretched radial grid with
// u'(0) = 0 (even extension) and u(R_max) = 0.

#include <lapacke.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <span>
#include <vector>

#include "kirchhoff/error.hpp"
#include "kirchhoff/nonlinearity.hpp"
#include "kirchhoff/radial.hpp"

namespace kirchhoff {

struct FdNewtonOptions {
  std::size_t nodes = 60001;
  double R_max = 60.0;
  double stretch = 5.5;  // r = R sinh(beta xi) / sinh(beta); 0 gives a uniform grid
  double tol = 1e-10;    // discrete max-norm residual
  int max_iter = 50;
  double armijo = 1e-4;
  double backtrack = 0.5;
  int max_backtracks = 30;
};

struct FdSolution {
  RadialProfile profile;
  int iterations = 0;
  double residual = 0.0;
};

/// Nodes r_i = g(xi_i) of a uniform computational grid xi_i = i dxi with an
/// odd map g, so the even extension of u in r is even in xi.
struct FdGrid {
  double dxi = 1.0;
  std::vector<double> r, g1, g2;  // g, g', g'' at the nodes

  std::size_t size() const { return r.size(); }
};

inline FdGrid make_fd_grid(std::size_t nodes, double R_max, double stretch) {
  require(nodes >= 5 && R_max > 0.0 && stretch >= 0.0, "invalid FD grid");
  FdGrid g;
  g.dxi = 1.0 / static_cast<double>(nodes - 1);
  g.r.resize(nodes);
  g.g1.resize(nodes);
  g.g2.resize(nodes);
  for (std::size_t i = 0; i < nodes; ++i) {
    const double xi = static_cast<double>(i) * g.dxi;
    if (stretch == 0.0) {
      g.r[i] = R_max * xi;
      g.g1[i] = R_max;
      g.g2[i] = 0.0;
    } else {
      const double b = stretch, sb = std::sinh(b);
      g.r[i] = R_max * std::sinh(b * xi) / sb;
      g.g1[i] = R_max * b * std::cosh(b * xi) / sb;
      g.g2[i] = R_max * b * b * std::sinh(b * xi) / sb;
    }
  }
  g.r.front() = 0.0;
  g.r.back() = R_max;
  return g;
}

/// The discrete operator on nodes 0..K-1 of `grid`; u_K = 0 is fixed.
struct RadialFdSystem {
  int N = 3;
  FdGrid grid;
  double diffusion = 1.0;
  std::vector<double> potential;  // V(r_i), i = 0..K-1
  const NonlinearitySpec* spec = nullptr;

  std::size_t unknowns() const { return grid.size() - 1; }

  // Coefficients of u_{i-2..i+2} in the discrete radial Laplacian at node i.
  std::array<double, 5> stencil(std::size_t i) const {
    const double h = grid.dxi;
    const std::array<double, 5> d2{-1.0, 16.0, -30.0, 16.0, -1.0};
    const std::array<double, 5> d1{1.0, -8.0, 0.0, 8.0, -1.0};
    const double g1 = grid.g1[i];
    std::array<double, 5> c{};
    if (i == 0) {  // N u_rr(0) = N u_xixi(0) / g'(0)^2
      for (int k = 0; k < 5; ++k) c[k] = N * d2[k] / (12.0 * h * h * g1 * g1);
      return c;
    }
    const double a = 1.0 / (12.0 * h * h * g1 * g1);
    const double b = (-grid.g2[i] / (g1 * g1 * g1) + (N - 1.0) / (grid.r[i] * g1)) / (12.0 * h);
    for (int k = 0; k < 5; ++k) c[k] = a * d2[k] + b * d1[k];
    return c;
  }

  double value(std::span<const double> u, long j) const {
    const long K = static_cast<long>(u.size());
    if (j < 0) j = -j;
    return j < K ? u[static_cast<std::size_t>(j)] : 0.0;
  }

  double laplacian(std::span<const double> u, std::size_t i) const {
    const auto c = stencil(i);
    double s = 0.0;
    for (int k = 0; k < 5; ++k) s += c[k] * value(u, static_cast<long>(i) + k - 2);
    return s;
  }

  std::vector<double> residual(std::span<const double> u) const {
    std::vector<double> F(u.size());
    for (std::size_t i = 0; i < u.size(); ++i)
      F[i] = diffusion * laplacian(u, i) - potential[i] * u[i] + eval_f(*spec, u[i]);
    return F;
  }

  // Roundoff level of the residual for a profile of size `umax`.
  double roundoff_floor(double umax) const {
    const double eps = std::numeric_limits<double>::epsilon();
    double worst = 0.0;
    for (std::size_t i = 0; i < unknowns(); ++i) {
      double row = potential[i];
      for (double c : stencil(i)) row += diffusion * std::abs(c);
      worst = std::max(worst, row);
    }
    return 4.0 * eps * umax * worst;
  }

  /// Solves J(u) x = rhs in place (banded LU with partial pivoting).
  void solve_jacobian(std::span<const double> u, std::vector<double>& rhs) const {
    const lapack_int n = static_cast<lapack_int>(u.size());
    constexpr lapack_int kl = 2, ku = 2, ldab = 2 * kl + ku + 1;
    std::vector<double> ab(static_cast<std::size_t>(ldab) * n, 0.0);
    auto add = [&](long i, long j, double v) {
      if (j < 0) j = -j;
      if (j >= n) return;
      ab[static_cast<std::size_t>(kl + ku + i - j + j * ldab)] += v;
    };
    for (long i = 0; i < n; ++i) {
      const auto c = stencil(static_cast<std::size_t>(i));
      for (int k = 0; k < 5; ++k) add(i, i + k - 2, diffusion * c[k]);
      add(i, i, -potential[static_cast<std::size_t>(i)] + eval_df(*spec, u[static_cast<std::size_t>(i)]));
    }
    std::vector<lapack_int> ipiv(static_cast<std::size_t>(n));
    const lapack_int info = LAPACKE_dgbsv(LAPACK_COL_MAJOR, n, kl, ku, 1, ab.data(), ldab, ipiv.data(), rhs.data(), n);
    if (info != 0) throw Error(ErrorKind::SingularJacobian, "banded LU failed with info = " + std::to_string(info));
  }
};

namespace detail {

inline double max_abs(std::span<const double> v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

inline double half_sq(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return 0.5 * s;
}

}  // namespace detail

/// Packs the nodal solution (plus the Dirichlet node) into a profile with
/// fourth-order derivatives.
inline RadialProfile fd_profile(const RadialFdSystem& sys, std::span<const double> u) {
  RadialProfile p;
  p.N = sys.N;
  const std::size_t K = u.size();
  p.r = sys.grid.r;
  p.u.resize(K + 1);
  p.du.resize(K + 1);
  for (std::size_t i = 0; i <= K; ++i) p.u[i] = i < K ? u[i] : 0.0;
  const double h = sys.grid.dxi;
  for (std::size_t i = 0; i <= K; ++i) {
    const long j = static_cast<long>(i);
    double dxi;
    if (i == 0) {
      dxi = 0.0;
    } else if (i + 2 <= K) {
      dxi = (-sys.value(u, j + 2) + 8.0 * sys.value(u, j + 1) - 8.0 * sys.value(u, j - 1) + sys.value(u, j - 2)) /
            (12.0 * h);
    } else {
      dxi = (3.0 * sys.value(u, j) - 4.0 * sys.value(u, j - 1) + sys.value(u, j - 2)) / (2.0 * h);
    }
    p.du[i] = dxi / sys.grid.g1[i];
  }
  return p;
}

/// Damped Newton with Armijo backtracking on 1/2 |F|^2. Converges when the
/// max-norm residual reaches `tol`, or reaches the roundoff floor right after
/// a correction below 1e-10 |u|.
inline FdSolution solve_radial_fd(const RadialFdSystem& sys, std::vector<double> u, const FdNewtonOptions& opt) {
  require(u.size() == sys.unknowns(), "initial guess does not match the grid");
  std::vector<double> F = sys.residual(u);
  double res = detail::max_abs(F);
  double last_step = std::numeric_limits<double>::infinity();
  int it = 0;
  for (;; ++it) {
    const double umax = detail::max_abs(u);
    if (res <= opt.tol || (res <= sys.roundoff_floor(umax) && last_step <= 1e-10 * std::max(umax, 1e-300)))
      break;
    if (it >= opt.max_iter)
      throw Error(ErrorKind::Diverged, "Newton did not converge in " + std::to_string(opt.max_iter) +
                                           " iterations (residual " + format_double(res) + ")");
    std::vector<double> delta(F.size());
    for (std::size_t i = 0; i < F.size(); ++i) delta[i] = -F[i];
    sys.solve_jacobian(u, delta);

    const double phi0 = detail::half_sq(F);
    double alpha = 1.0;
    std::vector<double> trial(u.size());
    std::vector<double> Ft;
    int backtracks = 0;
    for (;;) {
      for (std::size_t i = 0; i < u.size(); ++i) trial[i] = u[i] + alpha * delta[i];
      Ft = sys.residual(trial);
      const double phi = detail::half_sq(Ft);
      if (std::isfinite(phi) && phi <= (1.0 - 2.0 * opt.armijo * alpha) * phi0) break;
      // At the roundoff floor the merit cannot decrease; accept a negligible step.
      if (std::isfinite(phi) && detail::max_abs(Ft) <= sys.roundoff_floor(detail::max_abs(trial)) &&
          alpha * detail::max_abs(delta) <= 1e-10 * detail::max_abs(u))
        break;
      if (++backtracks > opt.max_backtracks)
        throw Error(ErrorKind::Diverged, "line search failed " + std::to_string(opt.max_backtracks) + " times");
      alpha *= opt.backtrack;
    }
    last_step = alpha * detail::max_abs(delta);
    u.swap(trial);
    F.swap(Ft);
    res = detail::max_abs(F);
  }
  return {fd_profile(sys, u), it, res};
}

}  // namespace kirchhoff
