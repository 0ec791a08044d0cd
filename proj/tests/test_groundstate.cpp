#include <catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>

#include "kirchhoff/groundstate.hpp"
#include "kirchhoff/rescaling.hpp"

using namespace kirchhoff;
using Catch::Approx;

namespace {

LocalProblem sobolev_problem(double m = 1.0) { return {NonlinearitySpec::critical_sobolev(3, 1.0, 5.0), m}; }
LocalProblem exponential_problem() { return {NonlinearitySpec::critical_exponential(1.0), 1.0}; }

const GroundState& gs3() {
  static const GroundState g = find_ground_state(sobolev_problem());
  return g;
}
const GroundState& gs2() {
  static const GroundState g = find_ground_state(exponential_problem());
  return g;
}

double sup_diff_on(const RadialProfile& a, const RadialProfile& b) {
  const RadialProfile bb = resample(b, a.r);
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, std::abs(a.u[i] - bb.u[i]));
  return d;
}

}  // namespace

TEST_CASE("shooting classifies small and large heights") {
  const auto prob = sobolev_problem();
  CHECK(shoot(prob, 1e-3).kind == ShotKind::Undershoot);
  CHECK(shoot(prob, 10.0).kind == ShotKind::Overshoot);
  CHECK(shoot(exponential_problem(), 1e-3).kind == ShotKind::Undershoot);
  CHECK(shoot(exponential_problem(), 2.0).kind == ShotKind::Overshoot);
}

TEST_CASE("shooting at the ground-state height decays for m = 1/4") {
  const auto prob = sobolev_problem(0.25);
  const auto g = find_ground_state(prob);
  const auto out = shoot(prob, g.shoot_height);
  CHECK(out.kind == ShotKind::Decay);
}

TEST_CASE("ground states satisfy the Pohozaev identity") {
  CHECK(gs3().pohozaev_residual <= 1e-6);
  CHECK(gs2().pohozaev_residual <= 1e-6);
}

TEST_CASE("ground states are positive and radially decreasing") {
  for (const GroundState* g : {&gs3(), &gs2()}) {
    const auto& u = g->profile.u;
    CHECK(u.front() == Approx(g->shoot_height).epsilon(1e-10));
    for (std::size_t i = 1; i < u.size(); ++i) {
      REQUIRE(u[i] > 0.0);
      REQUIRE(u[i] <= u[i - 1]);
    }
  }
}

TEST_CASE("ground states solve the radial equation pointwise") {
  CHECK(local_residual(gs3().profile, sobolev_problem()) <= 1e-6);
  CHECK(local_residual(gs2().profile, exponential_problem()) <= 1e-6);
}

TEST_CASE("shooting and FD-Newton agree in sup norm") {
  for (const auto& [g, prob] : {std::pair{&gs3(), sobolev_problem()}, std::pair{&gs2(), exponential_problem()}}) {
    const auto sol = fd_newton_solve(prob, g->profile);
    INFO("N = " << prob.dimension() << ", residual = " << sol.residual);
    CHECK(sup_diff_on(g->profile, sol.profile) <= 1e-5);
    const auto fd_gs = make_ground_state(prob, sol.profile, SolverTag::FdNewton);
    CHECK(fd_gs.energy == Approx(g->energy).epsilon(1e-5));
  }
}

TEST_CASE("FD-Newton started at its own solution stops within two iterations") {
  const auto prob = sobolev_problem();
  const auto sol = fd_newton_solve(prob, gs3().profile);
  const auto again = fd_newton_solve(prob, sol.profile);
  CHECK(again.iterations <= 2);
  CHECK(sup_diff_on(sol.profile, again.profile) <= 1e-10 * gs3().shoot_height);
}

TEST_CASE("FD-Newton from the zero profile is not a ground state") {
  const auto prob = sobolev_problem();
  RadialProfile z = gs3().profile;
  std::fill(z.u.begin(), z.u.end(), 0.0);
  std::fill(z.du.begin(), z.du.end(), 0.0);
  z.tail.reset();
  FdNewtonOptions opt;
  opt.nodes = 2001;
  try {
    fd_newton_solve(prob, z, opt);
    FAIL("expected an exception");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::NotGroundState);
  }
}

TEST_CASE("bisection brackets are nested and shrink to machine precision") {
  for (const GroundState* g : {&gs3(), &gs2()}) {
    const auto& h = g->bisection_history;
    REQUIRE(h.size() >= 2);
    for (std::size_t i = 1; i < h.size(); ++i) {
      CHECK(h[i].first >= h[i - 1].first);
      CHECK(h[i].second <= h[i - 1].second);
      CHECK(h[i].first <= h[i].second);
    }
    CHECK(h.back().second - h.back().first <= 1e-12 * h.back().first);
    REQUIRE_FALSE(g->brackets.empty());
    CHECK(g->brackets.front() == h.front());
    CHECK(g->shoot_height >= h.back().first);
    CHECK(g->shoot_height <= h.back().second);
  }
}

TEST_CASE("the fitted decay rate matches sqrt(m)") {
  for (double m : {0.25, 1.0, 2.0}) {
    const auto g = find_ground_state(sobolev_problem(m));
    INFO("m = " << m);
    CHECK(std::abs(g.decay.c - std::sqrt(m)) <= 0.05 * std::sqrt(m));
  }
  CHECK(std::abs(gs2().decay.c - 1.0) <= 0.05);
}

TEST_CASE("truncation above the spike leaves the ground state unchanged") {
  const auto base = sobolev_problem();
  const double kappa = 1.1 * gs3().shoot_height;
  const double k = 1.01 * max_f_on(base.spec, kappa);
  const LocalProblem trunc{truncate(base.spec, k), base.m};
  const auto g = find_ground_state(trunc);
  CHECK(sup_diff_on(gs3().profile, g.profile) <= 1e-8);
  CHECK(g.energy == Approx(gs3().energy).epsilon(1e-10));
}

TEST_CASE("an empty scan range reports NoBracket") {
  ShootingOptions opt;
  opt.s_min = 1e-4;
  opt.s_max = 1e-3;
  try {
    find_ground_state(sobolev_problem(), opt);
    FAIL("expected an exception");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::NoBracket);
  }
}

TEST_CASE("FD-Newton rejects mismatched dimensions") {
  CHECK_THROWS_AS(fd_newton_solve(exponential_problem(), gs3().profile), Error);
}
