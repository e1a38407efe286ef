#pragma once

#include <stdexcept>
#include <string>

namespace bresse {

enum class ErrorKind {
  InvalidArgument,
  EmptyDampingIntersection,
  NonmonotoneDamping,
  TooCoarse,
  LengthMismatch,
  SingularForm,
  NewtonDiverged,
  ConstraintViolation,
  NonpositiveEnergy,
  EmptyStationarySet,
  GridMismatch,
  SingularJacobian,
  AssumptionViolated,
  OutOfDomain,
  Infeasible,
  EmptyWindow,
  ParseError,
  ValidationError,
};

inline const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::EmptyDampingIntersection: return "EmptyDampingIntersection";
    case ErrorKind::NonmonotoneDamping: return "NonmonotoneDamping";
    case ErrorKind::TooCoarse: return "TooCoarse";
    case ErrorKind::LengthMismatch: return "LengthMismatch";
    case ErrorKind::SingularForm: return "SingularForm";
    case ErrorKind::NewtonDiverged: return "NewtonDiverged";
    case ErrorKind::ConstraintViolation: return "ConstraintViolation";
    case ErrorKind::NonpositiveEnergy: return "NonpositiveEnergy";
    case ErrorKind::EmptyStationarySet: return "EmptyStationarySet";
    case ErrorKind::GridMismatch: return "GridMismatch";
    case ErrorKind::SingularJacobian: return "SingularJacobian";
    case ErrorKind::AssumptionViolated: return "AssumptionViolated";
    case ErrorKind::OutOfDomain: return "OutOfDomain";
    case ErrorKind::Infeasible: return "Infeasible";
    case ErrorKind::EmptyWindow: return "EmptyWindow";
    case ErrorKind::ParseError: return "ParseError";
    case ErrorKind::ValidationError: return "ValidationError";
  }
  return "Unknown";
}

/// Single exception type for the library; `kind()` discriminates.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& message) {
  throw Error(kind, message);
}

inline void require(bool condition, const std::string& message) {
  if (!condition) fail(ErrorKind::InvalidArgument, message);
}

}  // namespace bresse
