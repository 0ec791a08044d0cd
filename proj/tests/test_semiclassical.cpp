#include <catch_amalgamated.hpp>

#include <cmath>

#include "kirchhoff/semiclassical.hpp"

using namespace kirchhoff;
using Catch::Approx;

namespace {

NonlinearitySpec sobolev() { return NonlinearitySpec::critical_sobolev(3, 1.0, 5.0); }

const SemiclassicalSetup& setup() {
  static const SemiclassicalSetup s =
      make_semiclassical_setup(PotentialSpec::default_well(), sobolev(), KirchhoffCoeff::affine(1.0, 0.5));
  return s;
}

const SweepResult& sweep() {
  static const SweepResult r = continuation_sweep(setup(), {0.5, 0.2, 0.1, 0.05});
  return r;
}

}  // namespace

TEST_CASE("default well satisfies the potential hypotheses") {
  const auto p = PotentialSpec::default_well();
  CHECK_NOTHROW(p.validate());
  CHECK(p(0.0) == 1.0);
  CHECK(p.boundary_min == Approx(1.5).epsilon(1e-15));
  CHECK(p(1e6) == Approx(2.0).epsilon(1e-10));
  CHECK_THROWS_AS(PotentialSpec::default_well(0.0), Error);
}

TEST_CASE("potential validation rejects broken wells") {
  PotentialSpec off = PotentialSpec::default_well();
  off.well = [](double rho) { return 1.2 + rho * rho; };
  CHECK_THROWS_AS(off.validate(), Error);

  PotentialSpec flat = PotentialSpec::default_well();
  flat.well = [](double) { return 1.0; };
  flat.boundary_min = 1.0;
  CHECK_THROWS_AS(flat.validate(), Error);

  PotentialSpec negative = PotentialSpec::default_well();
  negative.well = [](double rho) { return rho < 10.0 ? 1.0 + 0.5 * rho * rho / (1.0 + rho * rho) : -1.0; };
  negative.boundary_min = 1.25;
  CHECK_THROWS_AS(negative.validate(), Error);
}

TEST_CASE("setup truncates above the limit spike") {
  const auto& s = setup();
  CHECK(s.kappa == Approx(1.1 * s.local.shoot_height).epsilon(1e-15));
  CHECK(s.k > max_f_on(s.spec, s.kappa));
  CHECK(s.limit.kirchhoff_residual <= 1e-6);
  CHECK(s.theta_limit == Approx(h1_norms(s.limit.v).grad_sq).epsilon(1e-15));
  CHECK_THROWS_AS(make_semiclassical_setup(PotentialSpec::default_well(), truncate(sobolev(), 10.0),
                                           KirchhoffCoeff::affine(1.0, 0.5)),
                  Error);
}

TEST_CASE("eps = 0 reproduces the Kirchhoff ground state") {
  const auto& s = setup();
  const auto r = solve_eps(s, 0.0, s.limit.v);
  CHECK(r.h1_dist_to_limit <= 1e-8);
  CHECK(r.sup_dist_to_limit <= 1e-8);
  CHECK(r.x_eps_dist == 0.0);
  CHECK(r.coefficient == Approx(eval_M(s.coeff, s.theta_limit)).epsilon(1e-8));
}

TEST_CASE("eps = 0 with M = 1 reproduces the local ground state") {
  const auto s = make_semiclassical_setup(PotentialSpec::default_well(), sobolev(), KirchhoffCoeff::constant(1.0));
  CHECK(s.limit.t_u == 1.0);
  const auto r = solve_eps(s, 0.0, s.limit.v);
  CHECK(r.coefficient == 1.0);
  CHECK(r.h1_dist_to_limit <= 1e-8);
  CHECK(r.theta == Approx(s.local.norms.grad_sq).epsilon(1e-8));
}

TEST_CASE("semiclassical residual at eps = 0.1") {
  const auto& s = setup();
  const auto r = solve_eps(s, 0.1, s.limit.v);
  CHECK(semiclassical_residual(s, r) <= 1e-6);
}

TEST_CASE("continuation sweep concentrates at the well") {
  const auto& s = setup();
  const auto& sw = sweep();
  REQUIRE_FALSE(sw.failure);
  REQUIRE(sw.results.size() == 4);
  const auto table = concentration_diagnostics(sw.results, s);
  CHECK(table.h1_decreasing);
  CHECK(table.flagged_eps.empty());
  const double m0 = coeff_infimum(s.coeff);
  const double upper = 10.0 * eval_M(s.coeff, s.theta_limit);
  for (const auto& row : table.rows) {
    INFO("eps = " << row.eps);
    CHECK(row.x_eps_dist == 0.0);
    CHECK(row.decay_c > 0.0);
    CHECK(std::abs(row.decay_c - row.reference_rate) <= 0.1 * row.reference_rate);
    CHECK(row.coeff >= m0);
    CHECK(row.coeff <= upper);
  }
  for (std::size_t i = 1; i < table.rows.size(); ++i) CHECK(table.rows[i].h1_dist < table.rows[i - 1].h1_dist);
}

TEST_CASE("small-eps spikes lie between the limit spike and kappa") {
  const auto& s = setup();
  const double limit_spike = s.limit.v.u.front();
  for (const auto& r : sweep().results) {
    if (r.eps > 0.1) continue;  // larger eps solve the truncated problem with f_k active
    INFO("eps = " << r.eps);
    CHECK(r.spike_height >= limit_spike);
    CHECK(r.spike_height < s.kappa);
  }
}

TEST_CASE("truncation is inert on sub-kappa solutions") {
  const auto& s = setup();
  const auto& last = sweep().results.back();
  REQUIRE(last.spike_height < s.kappa);
  SemiclassicalSetup plain = s;
  plain.spec_k = s.spec;
  const auto again = solve_eps(plain, last.eps, last.profile);
  double d = 0.0;
  for (std::size_t i = 0; i < last.profile.size(); ++i) d = std::max(d, std::abs(again.profile.u[i] - last.profile.u[i]));
  CHECK(d <= 1e-8);
}

TEST_CASE("the theta iteration contracts") {
  for (const auto& r : sweep().results) {
    INFO("eps = " << r.eps);
    CHECK(r.outer_iterations >= 1);
    if (r.contraction) CHECK(*r.contraction < 1.0);
    CHECK(r.theta_history.back() == r.theta);
  }
}

TEST_CASE("degenerate sweeps") {
  const auto& s = setup();
  const auto single = continuation_sweep(s, {0.0});
  REQUIRE(single.results.size() == 1);
  CHECK_FALSE(single.failure);
  CHECK(single.results[0].h1_dist_to_limit <= 1e-8);

  const auto empty = continuation_sweep(s, {});
  CHECK(empty.results.empty());
  CHECK_FALSE(empty.failure);

  CHECK_THROWS_AS(continuation_sweep(s, {0.1, 0.2}), Error);
  CHECK_THROWS_AS(continuation_sweep(s, {0.1, 0.1}), Error);
  CHECK_THROWS_AS(solve_eps(s, -0.1, s.limit.v), Error);
  CHECK_THROWS_AS(concentration_diagnostics({}, s), Error);
}

TEST_CASE("decay_fit on a synthetic far field") {
  SemiclassicalResult r;
  r.profile.N = 3;
  r.profile.r = graded_grid();
  for (double rho : r.profile.r) {
    const double v = rho > 0.0 ? 3.0 * std::exp(-1.2 * rho) / rho : 1e3;
    r.profile.u.push_back(v);
    r.profile.du.push_back(0.0);
  }
  const auto fit = decay_fit(r, 1.0);
  CHECK(fit.c == Approx(1.2).epsilon(1e-6));
  CHECK(fit.C == Approx(3.0).epsilon(1e-6));
  const auto plain = decay_fit(r);
  CHECK(plain.c > 1.2);
}
