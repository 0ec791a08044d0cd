#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace kirchhoff {

enum class ErrorKind {
  InvalidArgument,
  NonFinite,
  StepUnderflow,
  Overflow,
  NoBracket,
  Tolerance,
  Diverged,
  SingularJacobian,
  NotGroundState,
  NoRoot,
  ResidualTooLarge,
  Infeasible,
  NoInteriorMax,
  WindowEmpty,
  OuterDiverged,
  GridResolution,
  Parse,
};

inline std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::NonFinite: return "NonFinite";
    case ErrorKind::StepUnderflow: return "StepUnderflow";
    case ErrorKind::Overflow: return "Overflow";
    case ErrorKind::NoBracket: return "NoBracket";
    case ErrorKind::Tolerance: return "Tolerance";
    case ErrorKind::Diverged: return "Diverged";
    case ErrorKind::SingularJacobian: return "SingularJacobian";
    case ErrorKind::NotGroundState: return "NotGroundState";
    case ErrorKind::NoRoot: return "NoRoot";
    case ErrorKind::ResidualTooLarge: return "ResidualTooLarge";
    case ErrorKind::Infeasible: return "Infeasible";
    case ErrorKind::NoInteriorMax: return "NoInteriorMax";
    case ErrorKind::WindowEmpty: return "WindowEmpty";
    case ErrorKind::OuterDiverged: return "OuterDiverged";
    case ErrorKind::GridResolution: return "GridResolution";
    case ErrorKind::Parse: return "Parse";
  }
  return "Unknown";
}

/// Every failure raised by the library carries a machine-readable kind.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

inline void require(bool condition, const std::string& what) {
  if (!condition) throw Error(ErrorKind::InvalidArgument, what);
}

}  // namespace kirchhoff
