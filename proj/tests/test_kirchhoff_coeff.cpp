#include <catch_amalgamated.hpp>

#include <cmath>

#include "kirchhoff/kirchhoff_coeff.hpp"

using namespace kirchhoff;
using Catch::Approx;

namespace {

KirchhoffCoeff one_plus_t_squared() {
  return KirchhoffCoeff::custom([](double t) { return 1.0 + t * t; });
}

}  // namespace

TEST_CASE("eval_M on the built-in families") {
  CHECK(eval_M(KirchhoffCoeff::affine(1.0, 0.5), 4.0) == 3.0);
  CHECK(eval_M(KirchhoffCoeff::constant(1.0), 123.0) == 1.0);
  CHECK(eval_M(KirchhoffCoeff::affine(2.0, 0.0), 10.0) == 2.0);
  CHECK_THROWS_AS(eval_M(KirchhoffCoeff::affine(1.0, 0.5), -1.0), Error);
  CHECK_THROWS_AS(eval_Mhat(KirchhoffCoeff::affine(1.0, 0.5), -1.0), Error);
}

TEST_CASE("eval_Mhat closed forms and quadrature") {
  CHECK(eval_Mhat(KirchhoffCoeff::affine(1.0, 0.5), 4.0) == 8.0);
  for (const auto& c : {KirchhoffCoeff::affine(1.0, 0.5), KirchhoffCoeff::constant(3.0), one_plus_t_squared()})
    CHECK(eval_Mhat(c, 0.0) == 0.0);
  // exact antiderivative t + t^3/3
  CHECK(std::abs(eval_Mhat(one_plus_t_squared(), 1.0) - 4.0 / 3.0) <= 1e-10);
  CHECK(std::abs(eval_Mhat(one_plus_t_squared(), 2.5) - (2.5 + 2.5 * 2.5 * 2.5 / 3.0)) <= 1e-9);
  // memoized value is returned unchanged
  const auto c = one_plus_t_squared();
  CHECK(eval_Mhat(c, 0.7) == eval_Mhat(c, 0.7));
}

TEST_CASE("Mhat' = M by central differences") {
  for (const auto& c : {KirchhoffCoeff::affine(1.0, 0.5), KirchhoffCoeff::affine(0.3, 2.0), one_plus_t_squared(),
                        KirchhoffCoeff::constant(2.0)}) {
    for (double t : {0.01, 0.1, 0.5, 1.0, 3.0, 10.0}) {
      const double h = 1e-4 * t;
      const double fd = (eval_Mhat(c, t + h) - eval_Mhat(c, t - h)) / (2.0 * h);
      CHECK(fd == Approx(eval_M(c, t)).epsilon(1e-6));
    }
  }
}

TEST_CASE("Mhat is nondecreasing on the sampling grid") {
  for (const auto& c : {KirchhoffCoeff::affine(1.0, 0.5), one_plus_t_squared()}) {
    double prev = 0.0;
    for (double t : coeff_sample_grid()) {
      if (t > 1e3) break;
      const double v = eval_Mhat(c, t);
      CHECK(v >= prev);
      prev = v;
    }
  }
}

TEST_CASE("Affine a = 1, b = 0.5 passes M1-M5 for N = 3") {
  const auto rep = validate_M(KirchhoffCoeff::affine(1.0, 0.5), 3);
  REQUIRE(rep.passes.size() == 5);
  CHECK(rep.all());
  CHECK(rep.failed().empty());
  CHECK(rep.evidence.at("M3").size() == coeff_sample_grid().size());
}

TEST_CASE("Affine passes M1-M5 over a 10 x 10 (a, b) sweep, N = 3") {
  for (int i = 0; i < 10; ++i) {
    for (int j = 0; j < 10; ++j) {
      const double a = 0.1 * std::pow(100.0, i / 9.0);  // [0.1, 10]
      const double b = j == 0 ? 0.0 : 0.01 * std::pow(1000.0, (j - 1) / 8.0);  // 0 and [0.01, 10]
      const auto rep = validate_M(KirchhoffCoeff::affine(a, b), 3);
      INFO("a = " << a << ", b = " << b);
      CHECK(rep.all());
    }
  }
}

TEST_CASE("M(t) = 1 + t^2 with N = 3 fails M3") {
  const auto rep = validate_M(one_plus_t_squared(), 3);
  CHECK_FALSE(rep.all());
  CHECK_FALSE(rep.passes.at("M3"));
  // M(t)/t^2 = 1 + 1/t^2 decreases to 1: nonincreasing, so M5 holds; the
  // failure is the limit, which is 1 rather than 0.
  CHECK(rep.passes.at("M5"));
  CHECK(rep.evidence.at("M3").back().second == Approx(1.0).epsilon(1e-10));
}

TEST_CASE("M5 fails for a coefficient with M/t^2 increasing somewhere") {
  // M(t) = 1 + t^3 / (1 + t): M/t^2 -> 1 from below for large t
  const auto c = KirchhoffCoeff::custom([](double t) { return 1.0 + t * t * t / (1.0 + t); });
  const auto rep = validate_M(c, 3);
  CHECK_FALSE(rep.passes.at("M5"));
  CHECK_FALSE(rep.passes.at("M3"));
}

TEST_CASE("N = 2 only requires M1") {
  const auto rep = validate_M(KirchhoffCoeff::affine(1.0, 1.0), 2);
  CHECK(rep.passes.size() == 1);
  CHECK(rep.passes.at("M1"));
  CHECK(rep.all());
  CHECK_THROWS_AS(validate_M(KirchhoffCoeff::affine(1.0, 1.0), 1), Error);
}

TEST_CASE("M1 fails when M is not positive") {
  const auto c = KirchhoffCoeff::custom([](double t) { return 1.0 - t; });
  const auto rep = validate_M(c, 2);
  CHECK_FALSE(rep.passes.at("M1"));
}

TEST_CASE("coefficient infimum") {
  CHECK(coeff_infimum(KirchhoffCoeff::affine(1.5, 0.5)) == 1.5);
  CHECK(coeff_infimum(KirchhoffCoeff::constant(0.25)) == 0.25);
  CHECK(coeff_infimum(one_plus_t_squared()) == 1.0);
}

TEST_CASE("invalid coefficients are rejected") {
  CHECK_THROWS_AS(KirchhoffCoeff::affine(0.0, 1.0), Error);
  CHECK_THROWS_AS(KirchhoffCoeff::affine(1.0, -0.1), Error);
  CHECK_THROWS_AS(KirchhoffCoeff::constant(-1.0), Error);
  CHECK(KirchhoffCoeff::constant(1.0).is_unit());
  CHECK(KirchhoffCoeff::affine(1.0, 0.0).is_unit());
  CHECK_FALSE(KirchhoffCoeff::affine(1.0, 0.5).is_unit());
}

TEST_CASE("equal levels of Mhat - (1 - 2/N) M t force equal M / t^(2/(N-2))") {
  // Under M5 the level g is strictly increasing wherever the ratio strictly
  // decreases, so g(t1) = g(t2) with t1 < t2 can only happen on a flat ratio.
  auto g = [](const KirchhoffCoeff& c, double t, int N) { return eval_Mhat(c, t) - (1.0 - 2.0 / N) * eval_M(c, t) * t; };
  const auto grid = coeff_sample_grid();
  for (int N : {3, 4}) {
    for (double b : {0.0, 0.5, 2.0}) {
      const auto c = KirchhoffCoeff::affine(1.0, b);
      INFO("N = " << N << ", b = " << b);
      for (std::size_t i = 1; i < grid.size(); ++i) REQUIRE(g(c, grid[i], N) > g(c, grid[i - 1], N));
    }
  }
  // M(t) = t^2 with N = 3: flat ratio and g identically 0
  const auto flat = KirchhoffCoeff::custom([](double t) { return t * t; });
  for (double t : {0.5, 2.0, 30.0}) {
    CHECK(std::abs(g(flat, t, 3)) <= 1e-10 * t * t * t);
    CHECK(eval_M(flat, t) / (t * t) == Approx(1.0).epsilon(1e-15));
  }
}
