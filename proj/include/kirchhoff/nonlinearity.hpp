#pragma once

// Nonlinear source terms f(t) of critical growth, their primitives F, the
// sampled growth-hypothesis checks and the truncation f_k = min{f, k}.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <optional>
#include <string>
#include <type_traits>
#include <utility>
#include <variant>
#include <vector>

#include "kirchhoff/error.hpp"

namespace kirchhoff {

/// f(t) = t^{(N+2)/(N-2)} + lambda t^{p-1}, N >= 3.
struct CriticalSobolev {
  double lambda = 1.0;
  double p = 5.0;
};

/// f(t) = mu t^3 exp(4 pi t^2), N = 2.
struct CriticalExponential {
  double mu = 1.0;
};

/// User-supplied f with its primitive. `df` is optional (central differences
/// are used when absent); `lambda`/`p` optionally witness the N >= 3 lower
/// bound f(t) >= t^{(N+2)/(N-2)} + lambda t^{p-1}.
struct CustomNonlinearity {
  std::function<double(double)> f;
  std::function<double(double)> F;
  std::function<double(double)> df;
  std::optional<double> lambda;
  std::optional<double> p;
  std::string name = "custom";
};

using NonlinearityFamily = std::variant<CriticalSobolev, CriticalExponential, CustomNonlinearity>;

class NonlinearitySpec;
inline double eval_f(const NonlinearitySpec& spec, double t);
inline double eval_F(const NonlinearitySpec& spec, double t);
inline double eval_df(const NonlinearitySpec& spec, double t);
inline NonlinearitySpec truncate(const NonlinearitySpec& spec, double k);

class NonlinearitySpec {
 public:
  static NonlinearitySpec critical_sobolev(int N, double lambda, double p) {
    require(N >= 3, "critical_sobolev needs N >= 3");
    require(lambda > 0.0 && std::isfinite(lambda), "lambda must be positive");
    const double crit = 2.0 * N / (N - 2.0);
    require(p > 2.0 && p < crit, "p must lie in (2, 2N/(N-2))");
    NonlinearitySpec s;
    s.N_ = N;
    s.family_ = CriticalSobolev{lambda, p};
    s.large_lambda_regime_ = (N == 3 && p <= 4.0);
    return s;
  }

  static NonlinearitySpec critical_exponential(double mu) {
    require(mu > 0.0 && std::isfinite(mu), "mu must be positive");
    NonlinearitySpec s;
    s.N_ = 2;
    s.family_ = CriticalExponential{mu};
    return s;
  }

  static NonlinearitySpec custom(int N, CustomNonlinearity c) {
    require(N >= 2, "dimension must be >= 2");
    require(static_cast<bool>(c.f) && static_cast<bool>(c.F), "custom nonlinearity needs f and F");
    NonlinearitySpec s;
    s.N_ = N;
    s.family_ = std::move(c);
    return s;
  }

  int dimension() const noexcept { return N_; }
  const NonlinearityFamily& family() const noexcept { return family_; }

  /// p in (2, 4] with N = 3: existence needs lambda "large enough", which is
  /// decided downstream by the mountain-pass margin, not here.
  bool large_lambda_regime() const noexcept { return large_lambda_regime_; }

  bool truncated() const noexcept { return truncation_.has_value(); }
  std::optional<double> truncation_level() const {
    return truncation_ ? std::optional<double>(truncation_->level) : std::nullopt;
  }
  /// Smallest t_k with f(t_k) = k; +inf if f never reaches k.
  double truncation_crossing() const {
    return truncation_ ? truncation_->crossing : std::numeric_limits<double>::infinity();
  }

  NonlinearitySpec untruncated() const {
    NonlinearitySpec s = *this;
    s.truncation_.reset();
    return s;
  }

  std::string family_name() const {
    if (std::holds_alternative<CriticalSobolev>(family_)) return "critical_sobolev";
    if (std::holds_alternative<CriticalExponential>(family_)) return "critical_exponential";
    return std::get<CustomNonlinearity>(family_).name;
  }

 private:
  friend NonlinearitySpec truncate(const NonlinearitySpec& spec, double k);
  friend double eval_f(const NonlinearitySpec& spec, double t);
  friend double eval_F(const NonlinearitySpec& spec, double t);
  friend double eval_df(const NonlinearitySpec& spec, double t);

  struct Truncation {
    double level;
    double crossing;
    double F_at_crossing;
  };

  int N_ = 3;
  NonlinearityFamily family_ = CriticalSobolev{};
  bool large_lambda_regime_ = false;
  std::optional<Truncation> truncation_;
};

namespace detail {

inline double critical_exponent(int N) { return (N + 2.0) / (N - 2.0); }

// e^x (x - 1) + 1 without cancellation for small x.
inline double exp_primitive_kernel(double x) {
  if (x < 0.5) {
    double term = x;  // x^k / k! at k = 1
    double sum = 0.0;
    for (int k = 2; k < 40; ++k) {
      term *= x / k;
      const double add = term * (k - 1);
      sum += add;
      if (add < 1e-18 * sum) break;
    }
    return sum;
  }
  return std::exp(x) * (x - 1.0) + 1.0;
}

inline double raw_f(const NonlinearityFamily& fam, int N, double t) {
  if (!(t > 0.0)) return 0.0;
  return std::visit(
      [&](const auto& f) -> double {
        using T = std::decay_t<decltype(f)>;
        if constexpr (std::is_same_v<T, CriticalSobolev>) {
          return std::pow(t, critical_exponent(N)) + f.lambda * std::pow(t, f.p - 1.0);
        } else if constexpr (std::is_same_v<T, CriticalExponential>) {
          return f.mu * t * t * t * std::exp(4.0 * std::numbers::pi * t * t);
        } else {
          return f.f(t);
        }
      },
      fam);
}

inline double raw_F(const NonlinearityFamily& fam, int N, double t) {
  if (!(t > 0.0)) return 0.0;
  return std::visit(
      [&](const auto& f) -> double {
        using T = std::decay_t<decltype(f)>;
        if constexpr (std::is_same_v<T, CriticalSobolev>) {
          const double q1 = critical_exponent(N) + 1.0;
          return std::pow(t, q1) / q1 + f.lambda * std::pow(t, f.p) / f.p;
        } else if constexpr (std::is_same_v<T, CriticalExponential>) {
          constexpr double pi = std::numbers::pi;
          return f.mu * exp_primitive_kernel(4.0 * pi * t * t) / (32.0 * pi * pi);
        } else {
          return f.F(t);
        }
      },
      fam);
}

inline double raw_df(const NonlinearityFamily& fam, int N, double t) {
  if (!(t > 0.0)) return 0.0;
  return std::visit(
      [&](const auto& f) -> double {
        using T = std::decay_t<decltype(f)>;
        if constexpr (std::is_same_v<T, CriticalSobolev>) {
          const double q = critical_exponent(N);
          return q * std::pow(t, q - 1.0) + f.lambda * (f.p - 1.0) * std::pow(t, f.p - 2.0);
        } else if constexpr (std::is_same_v<T, CriticalExponential>) {
          constexpr double pi = std::numbers::pi;
          return f.mu * std::exp(4.0 * pi * t * t) * (3.0 * t * t + 8.0 * pi * t * t * t * t);
        } else {
          if (f.df) return f.df(t);
          const double h = 1e-6 * std::max(1.0, t);
          return (f.f(t + h) - f.f(std::max(t - h, 0.0))) / (t + h - std::max(t - h, 0.0));
        }
      },
      fam);
}

}  // namespace detail

inline double eval_f(const NonlinearitySpec& spec, double t) {
  if (!(t > 0.0)) return 0.0;
  const double v = detail::raw_f(spec.family_, spec.N_, t);
  if (spec.truncation_) return std::min(v, spec.truncation_->level);
  return v;
}

inline double eval_F(const NonlinearitySpec& spec, double t) {
  if (!(t > 0.0)) return 0.0;
  if (spec.truncation_ && t > spec.truncation_->crossing) {
    const auto& tr = *spec.truncation_;
    return tr.F_at_crossing + tr.level * (t - tr.crossing);
  }
  return detail::raw_F(spec.family_, spec.N_, t);
}

/// f'(t); zero where the truncation clamp is active.
inline double eval_df(const NonlinearitySpec& spec, double t) {
  if (!(t > 0.0)) return 0.0;
  if (spec.truncation_ && t > spec.truncation_->crossing) return 0.0;
  return detail::raw_df(spec.family_, spec.N_, t);
}

/// Returns the spec with truncation level k; truncating an already truncated
/// spec keeps the smaller level.
inline NonlinearitySpec truncate(const NonlinearitySpec& spec, double k) {
  require(k > 0.0 && std::isfinite(k), "truncation level must be positive");
  if (spec.truncation_ && spec.truncation_->level <= k) return spec;

  NonlinearitySpec out = spec.untruncated();
  auto f = [&](double t) { return detail::raw_f(out.family_, out.N_, t); };

  // Scan upward from 0 (f need not be monotone), then bisect the first crossing.
  double lo = 0.0;
  double hi = std::numeric_limits<double>::infinity();
  double t = 0.0;
  while (t < 1e8) {
    const double step = std::max(1e-3, 1e-3 * t);
    const double next = t + step;
    const double v = f(next);
    if (!std::isfinite(v) || v >= k) {
      lo = t;
      hi = next;
      break;
    }
    t = next;
  }
  double crossing = std::numeric_limits<double>::infinity();
  if (std::isfinite(hi)) {
    while (hi - lo > 1e-12 * std::max(1.0, hi)) {
      const double mid = 0.5 * (lo + hi);
      const double v = f(mid);
      if (!std::isfinite(v) || v >= k)
        hi = mid;
      else
        lo = mid;
    }
    crossing = hi;
  }
  out.truncation_ = NonlinearitySpec::Truncation{
      k, crossing,
      std::isfinite(crossing) ? detail::raw_F(out.family_, out.N_, crossing) : 0.0};
  return out;
}

/// max of f on [0, kappa] by a dense scan (f need not be monotone).
inline double max_f_on(const NonlinearitySpec& spec, double kappa, int samples = 100000) {
  double best = 0.0;
  for (int i = 0; i <= samples; ++i) best = std::max(best, eval_f(spec, kappa * i / samples));
  return best;
}

/// Sampled evidence for one limit check: (t, ratio) pairs.
struct GrowthEvidence {
  std::string check;
  std::vector<std::pair<double, double>> samples;
  std::string note;
};

struct GrowthReport {
  bool passes_F1 = false;
  bool passes_F2 = false;
  bool passes_F3 = false;
  bool large_lambda_regime = false;
  std::vector<GrowthEvidence> details;

  bool all() const { return passes_F1 && passes_F2 && passes_F3; }
};

namespace detail {

inline bool nonincreasing(const std::vector<std::pair<double, double>>& s) {
  for (std::size_t i = 1; i < s.size(); ++i)
    if (!(s[i].second <= s[i - 1].second * (1.0 + 1e-12) + 1e-300)) return false;
  return true;
}

inline bool strictly_increasing(const std::vector<std::pair<double, double>>& s) {
  for (std::size_t i = 1; i < s.size(); ++i)
    if (!(s[i].second > s[i - 1].second)) return false;
  return true;
}

inline bool strictly_decreasing(const std::vector<std::pair<double, double>>& s) {
  for (std::size_t i = 1; i < s.size(); ++i)
    if (!(s[i].second < s[i - 1].second)) return false;
  return true;
}

}  // namespace detail

/// Checks the growth hypotheses on geometric sample sequences standing in for
/// the limits t -> 0+ and t -> infinity.
inline GrowthReport validate_growth(const NonlinearitySpec& spec, double m) {
  const int N = spec.dimension();
  require(N >= 2, "dimension must be >= 2");
  require(!spec.truncated(), "validate_growth expects an untruncated spec");
  require(m > 0.0, "m must be positive");

  GrowthReport rep;
  rep.large_lambda_regime = spec.large_lambda_regime();

  // F1: f(t)/t -> 0 as t -> 0+.
  {
    GrowthEvidence ev{"F1", {}, "f(t)/t on t = 1e-2 ... 1e-6"};
    for (int e = 2; e <= 6; ++e) {
      const double t = std::pow(10.0, -e);
      ev.samples.emplace_back(t, eval_f(spec, t) / t);
    }
    bool finite = true;
    for (auto& [t, r] : ev.samples) finite = finite && std::isfinite(r) && r >= 0.0;
    rep.passes_F1 = finite && detail::nonincreasing(ev.samples) &&
                    ev.samples.back().second <= 0.5 * ev.samples.front().second;
    rep.details.push_back(std::move(ev));
  }

  if (N >= 3) {
    // F2: f(t)/t^{(N+2)/(N-2)} -> 1.
    const double q = detail::critical_exponent(N);
    GrowthEvidence ev{"F2", {}, "f(t)/t^{(N+2)/(N-2)} on t = 1e1 ... 1e4"};
    for (int e = 1; e <= 4; ++e) {
      const double t = std::pow(10.0, e);
      ev.samples.emplace_back(t, eval_f(spec, t) / std::pow(t, q));
    }
    std::vector<std::pair<double, double>> gap;
    for (auto& [t, r] : ev.samples) gap.emplace_back(t, std::abs(r - 1.0));
    const double last = ev.samples.back().second;
    rep.passes_F2 = std::isfinite(last) && detail::nonincreasing(gap) && last >= 0.5 && last <= 2.0;
    rep.details.push_back(std::move(ev));

    // F3: lower bound t^{(N+2)/(N-2)} + lambda t^{p-1} with admissible (p, lambda).
    std::optional<double> lambda, p;
    if (auto* cs = std::get_if<CriticalSobolev>(&spec.family())) {
      lambda = cs->lambda;
      p = cs->p;
    } else if (auto* cu = std::get_if<CustomNonlinearity>(&spec.family())) {
      lambda = cu->lambda;
      p = cu->p;
    }
    GrowthEvidence ev3{"F3", {}, ""};
    if (!lambda || !p) {
      ev3.note = "no (lambda, p) lower-bound witness supplied";
      rep.passes_F3 = false;
    } else {
      const double crit = 2.0 * N / (N - 2.0);
      bool admissible = *lambda > 0.0 && *p < crit;
      if (N >= 4) {
        admissible = admissible && *p > 2.0;
        ev3.note = "case p in (2, 2*)";
      } else if (*p > 4.0) {
        ev3.note = "case p in (4, 2*)";
      } else {
        admissible = admissible && *p > 2.0;
        rep.large_lambda_regime = true;
        ev3.note = "case p in (2, 4]: lambda must be large; see existence margin";
      }
      bool bound = true;
      for (int i = 0; i <= 60; ++i) {
        const double t = std::pow(10.0, -3.0 + 0.1 * i);
        const double lower = std::pow(t, q) + *lambda * std::pow(t, *p - 1.0);
        const double ratio = eval_f(spec, t) / lower;
        ev3.samples.emplace_back(t, ratio);
        bound = bound && ratio >= 1.0 - 1e-12;
      }
      rep.passes_F3 = admissible && bound;
    }
    rep.details.push_back(std::move(ev3));
  } else {
    // N = 2. exp(4 pi t^2) leaves double range near t = 7.5, so the t -> inf
    // surrogate samples t in [1.5, 7] and works with log-ratios.
    constexpr double pi = std::numbers::pi;
    std::vector<double> ts;
    for (double t = 1.5; t <= 7.0 + 1e-12; t += 0.5) ts.push_back(t);

    GrowthEvidence above{"F2(alpha=6pi)", {}, "log f(t) - alpha t^2 must decrease to -inf"};
    GrowthEvidence below{"F2(alpha=2pi)", {}, "log f(t) - alpha t^2 must increase to +inf"};
    bool finite = true;
    for (double t : ts) {
      const double lf = std::log(eval_f(spec, t));
      finite = finite && std::isfinite(lf);
      above.samples.emplace_back(t, lf - 6.0 * pi * t * t);
      below.samples.emplace_back(t, lf - 2.0 * pi * t * t);
    }
    rep.passes_F2 = finite && detail::strictly_decreasing(above.samples) &&
                    detail::strictly_increasing(below.samples);
    rep.details.push_back(std::move(above));
    rep.details.push_back(std::move(below));

    // F3 (liminf reading): t f(t)/exp(4 pi t^2) >= beta_0 > e m/(2 pi).
    const double threshold = std::numbers::e * m / (2.0 * pi);
    GrowthEvidence ev3{"F3", {}, ""};
    for (double t : ts) {
      const double lr = std::log(t * eval_f(spec, t)) - 4.0 * pi * t * t;
      ev3.samples.emplace_back(t, std::exp(lr));
    }
    const double first = ev3.samples.front().second;
    const double last = ev3.samples.back().second;
    const bool unbounded = detail::strictly_increasing(ev3.samples) && last >= 2.0 * first;
    rep.passes_F3 = std::isfinite(last) && (last > threshold || unbounded);
    ev3.note = unbounded ? "ratio grows without bound; beta_0 may be taken arbitrarily large"
                         : "ratio bounded; compared against e m/(2 pi)";
    rep.details.push_back(std::move(ev3));
  }
  return rep;
}

}  // namespace kirchhoff
