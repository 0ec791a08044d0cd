#pragma once

// Radial profiles on graded grids, quadrature over R^N for radial integrands,
// H^1 norms, dilations and resampling.

#include <boost/math/special_functions/gamma.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <functional>
#include <istream>
#include <limits>
#include <numbers>
#include <optional>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "kirchhoff/error.hpp"

namespace kirchhoff {

/// Surface area of the unit sphere S^{N-1}: 2 pi (N = 2), 4 pi (N = 3).
inline double sphere_area(int N) {
  return 2.0 * std::pow(std::numbers::pi, 0.5 * N) / std::tgamma(0.5 * N);
}

struct GridOptions {
  double h_core = 1e-4;  // uniform step on [0, R_core]
  double R_core = 0.1;
  double h = 1e-3;       // uniform step up to R1
  double R1 = 10.0;
  double R_max = 60.0;
  double growth = 1.01;  // step ratio on [R1, R_max]
};

inline std::vector<double> uniform_grid(double h, double R_max) {
  require(h > 0.0 && R_max > h, "uniform grid needs 0 < h < R_max");
  const auto n = static_cast<std::size_t>(std::llround(R_max / h));
  std::vector<double> r(n + 1);
  for (std::size_t i = 0; i <= n; ++i) r[i] = static_cast<double>(i) * h;
  r.back() = R_max;
  return r;
}

/// Uniform h_core on [0, R_core], steps proportional to r until they reach h,
/// uniform h up to R1, then geometric growth to R_max. h_core = h gives the
/// plain uniform-then-geometric grid.
inline std::vector<double> graded_grid(const GridOptions& o = {}) {
  require(o.h_core > 0.0 && o.h_core <= o.h && o.R_core > o.h_core && o.R1 > o.R_core && o.R_max >= o.R1 &&
              o.growth >= 1.0,
          "invalid grid options");
  std::vector<double> r = uniform_grid(o.h_core, o.R_core);
  const double rate = o.h_core / o.R_core;
  double step = o.h_core;
  while (step < o.h) {
    step = std::min(o.h, r.back() * rate);
    r.push_back(r.back() + step);
  }
  const double x0 = r.back();
  for (std::size_t k = 1; r.back() < o.R1 - 0.5 * o.h; ++k) r.push_back(x0 + static_cast<double>(k) * o.h);
  while (r.back() < o.R_max) {
    step *= o.growth;
    const double next = r.back() + step;
    if (next >= o.R_max - 0.5 * step) {
      r.push_back(o.R_max);
      break;
    }
    r.push_back(next);
  }
  return r;
}

/// u(r) ~ C exp(-c r) beyond the last grid node.
struct ExpTail {
  double C = 0.0;
  double c = 1.0;
};

struct RadialProfile {
  int N = 3;
  std::vector<double> r;
  std::vector<double> u;
  std::vector<double> du;
  std::optional<ExpTail> tail;

  std::size_t size() const noexcept { return r.size(); }
  double r_max() const { return r.back(); }

  void validate() const {
    require(N >= 2, "profile dimension must be >= 2");
    require(r.size() >= 3, "profile needs at least 3 nodes");
    require(u.size() == r.size(), "profile values do not match grid");
    if (du.size() != r.size()) throw Error(ErrorKind::InvalidArgument, "profile is missing derivatives");
    require(r.front() == 0.0, "profile grid must start at r = 0");
    for (std::size_t i = 1; i < r.size(); ++i) require(r[i] > r[i - 1], "grid must be strictly increasing");
    require(std::abs(du.front()) <= 1e-8 * (1.0 + std::abs(u.front())), "u'(0) must vanish");
    if (tail) require(tail->c > 0.0, "tail rate must be positive");
  }
};

struct NormBundle {
  double grad_sq = 0.0;
  double mass_sq = 0.0;
  double sup_norm = 0.0;
};

/// Composite Simpson rule for samples on an arbitrary increasing grid; an odd
/// leftover interval is closed with the quadratic through its last 3 nodes.
inline double integrate_samples(std::span<const double> x, std::span<const double> f) {
  require(x.size() == f.size(), "sample size mismatch");
  const std::size_t n = x.size();
  if (n < 2) return 0.0;
  if (n == 2) return 0.5 * (x[1] - x[0]) * (f[0] + f[1]);
  double sum = 0.0;
  std::size_t i = 0;
  for (; i + 2 < n; i += 2) {
    const double h0 = x[i + 1] - x[i];
    const double h1 = x[i + 2] - x[i + 1];
    const double H = h0 + h1;
    sum += H / 6.0 * ((2.0 - h1 / h0) * f[i] + H * H / (h0 * h1) * f[i + 1] + (2.0 - h0 / h1) * f[i + 2]);
  }
  if (i + 1 < n) {
    const double h0 = x[i] - x[i - 1];
    const double h1 = x[i + 1] - x[i];
    sum += -h1 * h1 * h1 / (6.0 * h0 * (h0 + h1)) * f[i - 1] + (h1 * h1 / (6.0 * h0) + 0.5 * h1) * f[i] +
           h1 * (2.0 * h1 + 3.0 * h0) / (6.0 * (h0 + h1)) * f[i + 1];
  }
  return sum;
}

/// int_{R^N} g(|x|) dx = |S^{N-1}| int g(r) r^{N-1} dr, composite Simpson with
/// the midpoint of every grid cell.
inline double integrate_radial(const std::function<double(double)>& g, int N, std::span<const double> grid) {
  require(N >= 2, "dimension must be >= 2");
  require(grid.size() >= 2, "grid needs at least 2 nodes");
  auto w = [&](double r) {
    const double v = g(r);
    if (!std::isfinite(v)) throw Error(ErrorKind::NonFinite, "integrand is not finite at r = " + std::to_string(r));
    return v * std::pow(r, N - 1);
  };
  double sum = 0.0;
  double left = w(grid[0]);
  for (std::size_t i = 0; i + 1 < grid.size(); ++i) {
    const double a = grid[i];
    const double b = grid[i + 1];
    const double right = w(b);
    sum += (b - a) / 6.0 * (left + 4.0 * w(0.5 * (a + b)) + right);
    left = right;
  }
  return sphere_area(N) * sum;
}

/// |S^{N-1}| int_0^{r_K} g(r_i, u_i, u'_i) r^{N-1} dr on the stored grid.
template <class G>
double integrate_profile(const RadialProfile& p, G&& g) {
  std::vector<double> vals(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double v = g(p.r[i], p.u[i], p.du[i]);
    if (!std::isfinite(v)) throw Error(ErrorKind::NonFinite, "integrand is not finite at r = " + std::to_string(p.r[i]));
    vals[i] = v * std::pow(p.r[i], p.N - 1);
  }
  return sphere_area(p.N) * integrate_samples(p.r, vals);
}

namespace detail {

// |S^{N-1}| int_R^inf exp(-2 c r) r^{N-1} dr
inline double exp_tail_moment(int N, double c, double R) {
  return sphere_area(N) * boost::math::tgamma(static_cast<double>(N), 2.0 * c * R) / std::pow(2.0 * c, N);
}

}  // namespace detail

inline NormBundle h1_norms(const RadialProfile& p) {
  p.validate();
  NormBundle n;
  n.grad_sq = integrate_profile(p, [](double, double, double du) { return du * du; });
  n.mass_sq = integrate_profile(p, [](double, double u, double) { return u * u; });
  for (double v : p.u) n.sup_norm = std::max(n.sup_norm, std::abs(v));
  if (p.tail && p.tail->C != 0.0) {
    const double m = p.tail->C * p.tail->C * detail::exp_tail_moment(p.N, p.tail->c, p.r_max());
    n.mass_sq += m;
    n.grad_sq += p.tail->c * p.tail->c * m;
  }
  return n;
}

/// v(r) = u(r / sigma) on the dilated grid sigma * r_i.
inline RadialProfile rescale_profile(const RadialProfile& p, double sigma) {
  require(sigma > 0.0 && std::isfinite(sigma), "dilation factor must be positive");
  RadialProfile v = p;
  for (auto& r : v.r) r *= sigma;
  for (auto& d : v.du) d /= sigma;
  if (v.tail) v.tail->c /= sigma;
  return v;
}

/// (u, u') at radius `x`: cubic Hermite inside the grid, tail model (or 0) beyond.
inline std::array<double, 2> evaluate(const RadialProfile& p, double x) {
  if (x <= p.r.front()) return {p.u.front(), 0.0};
  if (x >= p.r.back()) {
    if (x == p.r.back()) return {p.u.back(), p.du.back()};
    if (!p.tail) return {0.0, 0.0};
    const double v = p.tail->C * std::exp(-p.tail->c * x);
    return {v, -p.tail->c * v};
  }
  const auto it = std::upper_bound(p.r.begin(), p.r.end(), x);
  const std::size_t j = static_cast<std::size_t>(it - p.r.begin());
  const std::size_t i = j - 1;
  const double h = p.r[j] - p.r[i];
  const double t = (x - p.r[i]) / h;
  const double t2 = t * t;
  const double t3 = t2 * t;
  const double h00 = 2 * t3 - 3 * t2 + 1, h10 = t3 - 2 * t2 + t, h01 = -2 * t3 + 3 * t2, h11 = t3 - t2;
  const double d00 = 6 * t2 - 6 * t, d10 = 3 * t2 - 4 * t + 1, d01 = -6 * t2 + 6 * t, d11 = 3 * t2 - 2 * t;
  const double u = h00 * p.u[i] + h10 * h * p.du[i] + h01 * p.u[j] + h11 * h * p.du[j];
  const double du = (d00 * p.u[i] + d01 * p.u[j]) / h + d10 * p.du[i] + d11 * p.du[j];
  return {u, du};
}

/// Cubic Hermite resampling onto `grid`.
inline RadialProfile resample(const RadialProfile& p, std::span<const double> grid) {
  RadialProfile out;
  out.N = p.N;
  out.tail = p.tail;
  out.r.assign(grid.begin(), grid.end());
  out.u.resize(grid.size());
  out.du.resize(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const auto [u, du] = evaluate(p, grid[i]);
    out.u[i] = u;
    out.du[i] = du;
  }
  out.du.front() = 0.0;
  return out;
}

namespace detail {

// Second derivative at x = 0 of the quintic matching (u, u') at x = a < 0,
// x = 0 and x = b > 0.
inline double quintic_second_derivative(double a, double um, double dm, double u0, double d0, double b,
                                        double up, double dp) {
  const double s = std::max(-a, b);
  const double A = a / s, B = b / s;
  const double c0 = u0, c1 = d0 * s;
  double M[4][5] = {
      {A * A, A * A * A, A * A * A * A, A * A * A * A * A, um - c0 - c1 * A},
      {2 * A, 3 * A * A, 4 * A * A * A, 5 * A * A * A * A, dm * s - c1},
      {B * B, B * B * B, B * B * B * B, B * B * B * B * B, up - c0 - c1 * B},
      {2 * B, 3 * B * B, 4 * B * B * B, 5 * B * B * B * B, dp * s - c1},
  };
  for (int col = 0; col < 4; ++col) {
    int piv = col;
    for (int r = col + 1; r < 4; ++r)
      if (std::abs(M[r][col]) > std::abs(M[piv][col])) piv = r;
    for (int k = 0; k < 5; ++k) std::swap(M[col][k], M[piv][k]);
    for (int r = col + 1; r < 4; ++r) {
      const double f = M[r][col] / M[col][col];
      for (int k = col; k < 5; ++k) M[r][k] -= f * M[col][k];
    }
  }
  double c[4];
  for (int r = 3; r >= 0; --r) {
    double acc = M[r][4];
    for (int k = r + 1; k < 4; ++k) acc -= M[r][k] * c[k];
    c[r] = acc / M[r][r];
  }
  return 2.0 * c[0] / (s * s);
}

}  // namespace detail

/// Radial Laplacian u'' + (N-1)/r u' at nodes 0..K-1 (N u''(0) at the origin),
/// from the quintic Hermite interpolant of the stored (u, u') samples.
inline std::vector<double> radial_laplacian(const RadialProfile& p) {
  const std::size_t K = p.size();
  std::vector<double> lap(K - 1);
  for (std::size_t i = 0; i + 1 < K; ++i) {
    double a, um, dm;
    if (i == 0) {  // even extension u(-r) = u(r)
      a = -p.r[1];
      um = p.u[1];
      dm = -p.du[1];
    } else {
      a = p.r[i - 1] - p.r[i];
      um = p.u[i - 1];
      dm = p.du[i - 1];
    }
    const double upp = detail::quintic_second_derivative(a, um, dm, p.u[i], p.du[i], p.r[i + 1] - p.r[i],
                                                         p.u[i + 1], p.du[i + 1]);
    lap[i] = (i == 0) ? p.N * upp : upp + (p.N - 1) / p.r[i] * p.du[i];
  }
  return lap;
}

struct DecayFit {
  double C = 0.0;
  double c = 0.0;
  double r_lo = 0.0;
  double r_hi = 0.0;
  std::size_t points = 0;
};

/// Least-squares fit of log(u r^alpha) = log C - c r over the nodes past the
/// maximum where u lies in [lo, hi]. alpha = 0 is a pure exponential;
/// alpha = (N-1)/2 removes the algebraic factor of the radial far field.
inline DecayFit fit_exponential_decay(const RadialProfile& p, double alpha = 0.0, double lo = 1e-8,
                                      double hi = 1e-3) {
  const auto peak = static_cast<std::size_t>(std::max_element(p.u.begin(), p.u.end()) - p.u.begin());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  DecayFit fit;
  for (std::size_t i = peak; i < p.size(); ++i) {
    const double u = p.u[i];
    if (!(u >= lo && u <= hi) || p.r[i] <= 0.0) continue;
    const double x = p.r[i];
    const double y = std::log(u) + alpha * std::log(x);
    if (fit.points == 0) fit.r_lo = x;
    fit.r_hi = x;
    ++fit.points;
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  if (fit.points < 3 || fit.r_hi - fit.r_lo <= 0.0)
    throw Error(ErrorKind::WindowEmpty, "no decay window with u in [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
  const double n = static_cast<double>(fit.points);
  const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  const double intercept = (sy - slope * sx) / n;
  fit.c = -slope;
  fit.C = std::exp(intercept);
  return fit;
}

inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

/// CSV with header `r,u,dudr` and an optional trailing `# tail C=.. c=..` line.
inline void write_profile_csv(std::ostream& os, const RadialProfile& p) {
  os << "r,u,dudr\n";
  for (std::size_t i = 0; i < p.size(); ++i)
    os << format_double(p.r[i]) << ',' << format_double(p.u[i]) << ',' << format_double(p.du[i]) << '\n';
  if (p.tail) os << "# tail C=" << format_double(p.tail->C) << " c=" << format_double(p.tail->c) << '\n';
}

inline RadialProfile read_profile_csv(std::istream& is, int N) {
  RadialProfile p;
  p.N = N;
  std::string line;
  if (!std::getline(is, line) || line.rfind("r,u,dudr", 0) != 0)
    throw Error(ErrorKind::Parse, "profile CSV must start with header r,u,dudr");
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    if (line[0] == '#') {
      double C = 0, c = 0;
      if (std::sscanf(line.c_str(), "# tail C=%lf c=%lf", &C, &c) == 2) p.tail = ExpTail{C, c};
      continue;
    }
    double r, u, du;
    if (std::sscanf(line.c_str(), "%lf,%lf,%lf", &r, &u, &du) != 3)
      throw Error(ErrorKind::Parse, "malformed profile line: " + line);
    p.r.push_back(r);
    p.u.push_back(u);
    p.du.push_back(du);
  }
  p.validate();
  return p;
}

}  // namespace kirchhoff
