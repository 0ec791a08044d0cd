#pragma once

// Kirchhoff coefficient M(t), its primitive M^(t) = int_0^t M, and the sampled
// checks of the structural hypotheses M1..M5.

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "kirchhoff/error.hpp"

namespace kirchhoff {

/// M(t) = a + b t.
struct AffineCoeff {
  double a = 1.0;
  double b = 0.0;
};

struct ConstantCoeff {
  double a = 1.0;
};

/// User-supplied M. When `Mhat` is empty the primitive is obtained by
/// adaptive quadrature and memoized per t.
struct CustomCoeff {
  std::function<double(double)> M;
  std::function<double(double)> Mhat;
  std::string name = "custom";
};

using CoeffFamily = std::variant<AffineCoeff, ConstantCoeff, CustomCoeff>;

class KirchhoffCoeff {
 public:
  static KirchhoffCoeff affine(double a, double b) {
    require(a > 0.0 && std::isfinite(a), "affine coefficient needs a > 0");
    require(b >= 0.0 && std::isfinite(b), "affine coefficient needs b >= 0");
    return KirchhoffCoeff(AffineCoeff{a, b});
  }
  static KirchhoffCoeff constant(double a) {
    require(a > 0.0 && std::isfinite(a), "constant coefficient needs a > 0");
    return KirchhoffCoeff(ConstantCoeff{a});
  }
  static KirchhoffCoeff custom(std::function<double(double)> M,
                               std::function<double(double)> Mhat = {}, std::string name = "custom") {
    require(static_cast<bool>(M), "custom coefficient needs M");
    return KirchhoffCoeff(CustomCoeff{std::move(M), std::move(Mhat), std::move(name)});
  }

  const CoeffFamily& family() const noexcept { return family_; }

  /// True when M is identically 1 (the map T is then the identity).
  bool is_unit() const {
    if (auto* c = std::get_if<ConstantCoeff>(&family_)) return c->a == 1.0;
    if (auto* a = std::get_if<AffineCoeff>(&family_)) return a->a == 1.0 && a->b == 0.0;
    return false;
  }

  bool is_constant() const {
    if (std::holds_alternative<ConstantCoeff>(family_)) return true;
    if (auto* a = std::get_if<AffineCoeff>(&family_)) return a->b == 0.0;
    return false;
  }

  std::string family_name() const {
    if (std::holds_alternative<AffineCoeff>(family_)) return "affine";
    if (std::holds_alternative<ConstantCoeff>(family_)) return "constant";
    return std::get<CustomCoeff>(family_).name;
  }

 private:
  friend double eval_Mhat(const KirchhoffCoeff& c, double t);

  struct QuadratureCache {
    std::mutex mutex;
    std::map<double, double> values;
  };

  explicit KirchhoffCoeff(CoeffFamily f)
      : family_(std::move(f)), cache_(std::make_shared<QuadratureCache>()) {}

  CoeffFamily family_;
  std::shared_ptr<QuadratureCache> cache_;
};

inline double eval_M(const KirchhoffCoeff& c, double t) {
  require(t >= 0.0, "M is defined for t >= 0");
  return std::visit(
      [&](const auto& f) -> double {
        using T = std::decay_t<decltype(f)>;
        if constexpr (std::is_same_v<T, AffineCoeff>) {
          return f.a + f.b * t;
        } else if constexpr (std::is_same_v<T, ConstantCoeff>) {
          return f.a;
        } else {
          return f.M(t);
        }
      },
      c.family());
}

inline double eval_Mhat(const KirchhoffCoeff& c, double t) {
  require(t >= 0.0, "M^ is defined for t >= 0");
  if (t == 0.0) return 0.0;
  if (auto* a = std::get_if<AffineCoeff>(&c.family_)) return a->a * t + 0.5 * a->b * t * t;
  if (auto* k = std::get_if<ConstantCoeff>(&c.family_)) return k->a * t;
  const auto& cu = std::get<CustomCoeff>(c.family_);
  if (cu.Mhat) return cu.Mhat(t);

  {
    std::lock_guard lock(c.cache_->mutex);
    if (auto it = c.cache_->values.find(t); it != c.cache_->values.end()) return it->second;
  }
  double err = 0.0;
  const double v = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(
      cu.M, 0.0, t, 20, 1e-14, &err);
  if (!std::isfinite(v)) throw Error(ErrorKind::NonFinite, "quadrature of M is not finite");
  std::lock_guard lock(c.cache_->mutex);
  c.cache_->values.emplace(t, v);
  return v;
}

struct CoeffReport {
  std::map<std::string, bool> passes;
  std::map<std::string, std::vector<std::pair<double, double>>> evidence;

  bool all() const {
    for (auto& [k, v] : passes)
      if (!v) return false;
    return true;
  }
  std::vector<std::string> failed() const {
    std::vector<std::string> out;
    for (auto& [k, v] : passes)
      if (!v) out.push_back(k);
    return out;
  }
};

/// Sampling grid for the coefficient checks: 10 points per decade on [1e-4, 1e6].
inline std::vector<double> coeff_sample_grid() {
  std::vector<double> t;
  for (int i = 0; i <= 100; ++i) t.push_back(std::pow(10.0, -4.0 + 0.1 * i));
  return t;
}

/// Estimate of m0 = inf M over the sampling grid (exact for affine/constant).
inline double coeff_infimum(const KirchhoffCoeff& c) {
  if (auto* a = std::get_if<AffineCoeff>(&c.family())) return a->a;
  if (auto* k = std::get_if<ConstantCoeff>(&c.family())) return k->a;
  double lo = eval_M(c, 0.0);
  for (double t : coeff_sample_grid()) lo = std::min(lo, eval_M(c, t));
  return lo;
}

/// N = 2 needs only M1; N >= 3 checks M1..M5. Trends are judged on the upper
/// half of the grid (t >= 10).
inline CoeffReport validate_M(const KirchhoffCoeff& c, int N) {
  require(N >= 2, "dimension must be >= 2");
  CoeffReport rep;
  const auto grid = coeff_sample_grid();

  {
    auto& ev = rep.evidence["M1"];
    bool ok = true;
    for (double t : grid) {
      const double v = eval_M(c, t);
      ev.emplace_back(t, v);
      ok = ok && std::isfinite(v) && v > 0.0;
    }
    rep.passes["M1"] = ok;
  }
  if (N == 2) return rep;

  const double power = 2.0 / (N - 2.0);
  const std::size_t tail_start = 50;  // t = 10

  {
    auto& ev = rep.evidence["M2"];
    for (double t : grid) ev.emplace_back(t, eval_Mhat(c, t) - (1.0 - 2.0 / N) * t * eval_M(c, t));
    bool ok = true;
    for (std::size_t i = tail_start + 1; i < ev.size(); ++i)
      ok = ok && ev[i].second >= ev[i - 1].second * (1.0 - 1e-12);
    const double start = ev[tail_start].second;
    ok = ok && start > 0.0 && ev.back().second >= 2.0 * start;
    rep.passes["M2"] = ok;
  }

  std::vector<std::pair<double, double>> ratio;
  for (double t : grid) ratio.emplace_back(t, eval_M(c, t) / std::pow(t, power));

  {
    bool ok = true;
    for (std::size_t i = tail_start + 1; i < ratio.size(); ++i)
      ok = ok && ratio[i].second <= ratio[i - 1].second * (1.0 + 1e-12);
    ok = ok && ratio.back().second <= 0.5 * ratio[tail_start].second;
    rep.passes["M3"] = ok;
    rep.evidence["M3"] = ratio;
  }
  {
    auto& ev = rep.evidence["M4"];
    bool ok = true;
    for (std::size_t i = 0; i < grid.size(); ++i) {
      ev.emplace_back(grid[i], eval_M(c, grid[i]));
      if (i > 0) ok = ok && ev[i].second >= ev[i - 1].second * (1.0 - 1e-12);
    }
    rep.passes["M4"] = ok;
  }
  {
    bool ok = true;
    for (std::size_t i = 1; i < ratio.size(); ++i)
      ok = ok && ratio[i].second <= ratio[i - 1].second * (1.0 + 1e-12);
    rep.passes["M5"] = ok;
    rep.evidence["M5"] = ratio;
  }
  return rep;
}

}  // namespace kirchhoff
