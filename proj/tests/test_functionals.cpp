#include <catch_amalgamated.hpp>

#include <cmath>
#include <numbers>

#include "kirchhoff/functionals.hpp"
#include "kirchhoff/groundstate.hpp"

using namespace kirchhoff;
using Catch::Approx;

namespace {

constexpr double pi = std::numbers::pi;

LocalProblem sobolev_problem() { return {NonlinearitySpec::critical_sobolev(3, 1.0, 5.0), 1.0}; }
LocalProblem exponential_problem() { return {NonlinearitySpec::critical_exponential(1.0), 1.0}; }

const GroundState& gs3() {
  static const GroundState g = find_ground_state(sobolev_problem());
  return g;
}
const GroundState& gs2() {
  static const GroundState g = find_ground_state(exponential_problem());
  return g;
}

RadialProfile gauss(int N, double amp) {
  RadialProfile p;
  p.N = N;
  p.r = graded_grid();
  for (double r : p.r) {
    p.u.push_back(amp * std::exp(-r * r));
    p.du.push_back(-2.0 * amp * r * std::exp(-r * r));
  }
  return p;
}

RadialProfile axpy(const RadialProfile& u, double h, const RadialProfile& phi) {
  RadialProfile out = u;
  for (std::size_t i = 0; i < u.size(); ++i) {
    out.u[i] += h * phi.u[i];
    out.du[i] += h * phi.du[i];
  }
  return out;
}

// Bump supported on the stored grid of `u`, so the tail model is unaffected.
RadialProfile bump_on(const RadialProfile& u) {
  RadialProfile phi = u;
  phi.tail.reset();
  for (std::size_t i = 0; i < u.size(); ++i) {
    const double r = u.r[i];
    phi.u[i] = std::exp(-r * r / 4.0);
    phi.du[i] = -0.5 * r * std::exp(-r * r / 4.0);
  }
  return phi;
}

// <E'(u), phi> = int grad u . grad phi + m u phi - f(u) phi
double first_variation(const RadialProfile& u, const RadialProfile& phi, const LocalProblem& prob) {
  RadialProfile w = u;
  for (std::size_t i = 0; i < u.size(); ++i) {
    w.u[i] = u.du[i] * phi.du[i] + prob.m * u.u[i] * phi.u[i] - eval_f(prob.spec, u.u[i]) * phi.u[i];
  }
  return integrate_profile(w, [](double, double v, double) { return v; });
}

}  // namespace

TEST_CASE("energies of the zero profile vanish") {
  RadialProfile z = gauss(3, 0.0);
  const auto prob = sobolev_problem();
  CHECK(local_energy(z, prob) == 0.0);
  CHECK(kirchhoff_energy(z, prob, KirchhoffCoeff::affine(1.0, 0.5)) == 0.0);
  CHECK(integral_F(z, prob.spec) == 0.0);
}

TEST_CASE("Kirchhoff energy with M = 1 is the local energy") {
  const auto prob = sobolev_problem();
  const auto u = gauss(3, 0.8);
  CHECK(kirchhoff_energy(u, prob, KirchhoffCoeff::constant(1.0)) == Approx(local_energy(u, prob)).epsilon(1e-14));
  // M = a scales only the gradient term
  const auto n = h1_norms(u);
  CHECK(kirchhoff_energy(u, prob, KirchhoffCoeff::constant(2.0)) ==
        Approx(local_energy(u, prob) + 0.5 * n.grad_sq).epsilon(1e-12));
}

TEST_CASE("local energy of a Gaussian against closed forms") {
  // F(t) = t^6/6 + t^5/5 with lambda = 1, p = 5; exp(-r^2) in R^3
  const auto prob = sobolev_problem();
  const auto u = gauss(3, 1.0);
  const double grad = 3.0 * std::pow(pi / 2.0, 1.5);
  const double mass = std::pow(pi / 2.0, 1.5);
  const double F = std::pow(pi / 6.0, 1.5) / 6.0 + std::pow(pi / 5.0, 1.5) / 5.0;
  CHECK(std::abs(local_energy(u, prob) - (0.5 * (grad + mass) - F)) <= 1e-8);
  CHECK(std::abs(pohozaev_functional(u, prob) - (F - 0.5 * mass)) <= 1e-8);
}

TEST_CASE("Pohozaev residual of a non-solution is positive") {
  const auto prob = exponential_problem();
  const auto res = pohozaev_residual(gauss(2, 0.5), prob);
  CHECK_FALSE(res.degenerate);
  CHECK(res.value > 1e-3);
}

TEST_CASE("Pohozaev residual of the zero profile is flagged degenerate") {
  const auto res = pohozaev_residual(gauss(3, 0.0), sobolev_problem());
  CHECK(res.degenerate);
  CHECK(res.value == 0.0);
}

TEST_CASE("integral_F overflow is reported for huge exponential arguments") {
  try {
    integral_F(gauss(2, 20.0), NonlinearitySpec::critical_exponential(1.0));
    FAIL("expected an exception");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Overflow);
  }
}

TEST_CASE("mountain-pass level and minimization level") {
  // N = 3: b = (1/3) (1/6)^{1/2} (2A)^{3/2}
  for (double A : {0.1, 1.0, 7.5}) {
    CHECK(mountain_pass_level(A, 3) == Approx(std::sqrt(1.0 / 6.0) * std::pow(2.0 * A, 1.5) / 3.0).epsilon(1e-14));
    CHECK(mountain_pass_level(A, 2) == A);
  }
  // N = 4: b = (1/4) (1/4) (2A)^2 = A^2 / 4
  CHECK(mountain_pass_level(2.0, 4) == Approx(1.0).epsilon(1e-14));
  CHECK_THROWS_AS(mountain_pass_level(0.0, 3), Error);
  CHECK_THROWS_AS(minimization_level_from_energy(-1.0, 3), Error);
}

TEST_CASE("minimization level round trip") {
  for (int N : {2, 3, 4, 5}) {
    for (double b : {1e-3, 0.2, 1.0, 4.0637, 50.0}) {
      const double A = minimization_level_from_energy(b, N);
      CHECK(std::abs(mountain_pass_level(A, N) - b) <= 1e-12 * b);
    }
  }
}

TEST_CASE("Talenti quotient is dilation invariant") {
  for (int N : {3, 4}) {
    const double s1 = talenti_quotient(N, 1.0);
    for (double sigma : {0.5, 2.0}) {
      INFO("N = " << N << ", sigma = " << sigma);
      CHECK(std::abs(talenti_quotient(N, sigma) - s1) <= 1e-8 * s1);
    }
  }
}

TEST_CASE("Sobolev best constant against its closed form") {
  // S = N (N - 2) / 4 |S^N|^{2/N}
  for (int N : {3, 4}) {
    const double closed = N * (N - 2.0) / 4.0 * std::pow(sphere_area(N + 1), 2.0 / N);
    CHECK(sobolev_best_constant(N) == Approx(closed).epsilon(1e-8));
  }
  CHECK(sobolev_best_constant(3) == Approx(3.0 * std::pow(pi / 2.0, 4.0 / 3.0)).epsilon(1e-8));
}

TEST_CASE("ground-state energy identities") {
  const auto& g3 = gs3();
  CHECK(std::abs(g3.energy - g3.norms.grad_sq / 3.0) <= 1e-6 * g3.energy);
  const auto& g2 = gs2();
  CHECK(std::abs(g2.energy - 0.5 * g2.norms.grad_sq) <= 1e-6 * g2.energy);
}

TEST_CASE("existence margins are negative for the default problems") {
  const double m3 = existence_margin(gs3());
  const double m2 = existence_margin(gs2());
  CHECK(m3 < 0.0);
  CHECK(m2 < 0.0);
  const auto rep = make_energy_report(gs3(), 1.0);
  REQUIRE(rep.sobolev_S);
  CHECK(rep.existence_margin == Approx(m3).epsilon(1e-12));
  CHECK(rep.b_level == gs3().energy);
  CHECK(rep.A_level == Approx(minimization_level(gs3())).epsilon(1e-15));
  CHECK_FALSE(make_energy_report(gs2(), 1.0).sobolev_S);
}

TEST_CASE("first variation matches finite differences of the energy") {
  for (const auto& [prob, amp] : {std::pair{sobolev_problem(), 0.9}, std::pair{exponential_problem(), 0.4}}) {
    const auto u = gauss(prob.dimension(), amp);
    const auto phi = bump_on(u);
    const double h = 1e-5;
    const double fd = (local_energy(axpy(u, h, phi), prob) - local_energy(axpy(u, -h, phi), prob)) / (2.0 * h);
    const double exact = first_variation(u, phi, prob);
    CHECK(fd == Approx(exact).epsilon(1e-6));
    CHECK(std::abs(exact) > 1e-3);
  }
}

TEST_CASE("ground states are critical points") {
  for (const GroundState* g : {&gs3(), &gs2()}) {
    const LocalProblem prob = g->profile.N == 3 ? sobolev_problem() : exponential_problem();
    const auto phi = bump_on(g->profile);
    const double scale = h1_norms(phi).grad_sq + h1_norms(phi).mass_sq;
    CHECK(std::abs(first_variation(g->profile, phi, prob)) <= 1e-6 * scale);
  }
}
