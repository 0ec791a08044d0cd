#pragma once

#include <utility>
#include <vector>

#include "kirchhoff/error.hpp"
#include "kirchhoff/nonlinearity.hpp"
#include "kirchhoff/radial.hpp"

namespace kirchhoff {

/// The local limit problem -Delta u + m u = f(u) in R^N.
struct LocalProblem {
  NonlinearitySpec spec;
  double m = 1.0;

  int dimension() const noexcept { return spec.dimension(); }
  void validate() const { require(m > 0.0 && std::isfinite(m), "m must be positive"); }
};

enum class SolverTag { Shooting, FdNewton };

inline const char* to_string(SolverTag t) { return t == SolverTag::Shooting ? "shooting" : "fd_newton"; }

/// A positive, radially decreasing ground state of the local problem.
struct GroundState {
  RadialProfile profile;
  double energy = 0.0;
  NormBundle norms;
  double pohozaev_residual = 0.0;
  double shoot_height = 0.0;
  SolverTag solver = SolverTag::Shooting;

  // Provenance of the shooting run.
  std::vector<std::pair<double, double>> brackets;           // every (Undershoot, Overshoot) pair found
  std::vector<std::pair<double, double>> bisection_history;  // nested brackets, outermost first
  double match_radius = 0.0;  // orbit is replaced by the linear far field beyond this radius
  DecayFit decay;
};

}  // namespace kirchhoff
