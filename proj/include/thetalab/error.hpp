#pragma once

#include <stdexcept>
#include <string>

namespace thetalab {

enum class ErrorKind {
  NonConvergent,
  ToleranceUnreachable,
  ScaleOverflow,
  DegenerateInput,
  DegreeTooLarge,
  NonConvergence,
  Diverged,
  SingularJacobian,
  LabelAmbiguity,
  PathCollision,
  StepUnderflow,
  DegenerateSingularity,
  MatchFailure,
  NoMatchInWindow,
  PrecisionExhausted,
  LeftWindow,
  HypothesisFailed,
  Usage,
  Internal,
};

inline const char* error_kind_name(ErrorKind k) {
  switch (k) {
    case ErrorKind::NonConvergent: return "NonConvergent";
    case ErrorKind::ToleranceUnreachable: return "ToleranceUnreachable";
    case ErrorKind::ScaleOverflow: return "ScaleOverflow";
    case ErrorKind::DegenerateInput: return "DegenerateInput";
    case ErrorKind::DegreeTooLarge: return "DegreeTooLarge";
    case ErrorKind::NonConvergence: return "NonConvergence";
    case ErrorKind::Diverged: return "Diverged";
    case ErrorKind::SingularJacobian: return "SingularJacobian";
    case ErrorKind::LabelAmbiguity: return "LabelAmbiguity";
    case ErrorKind::PathCollision: return "PathCollision";
    case ErrorKind::StepUnderflow: return "StepUnderflow";
    case ErrorKind::DegenerateSingularity: return "DegenerateSingularity";
    case ErrorKind::MatchFailure: return "MatchFailure";
    case ErrorKind::NoMatchInWindow: return "NoMatchInWindow";
    case ErrorKind::PrecisionExhausted: return "PrecisionExhausted";
    case ErrorKind::LeftWindow: return "LeftWindow";
    case ErrorKind::HypothesisFailed: return "HypothesisFailed";
    case ErrorKind::Usage: return "Usage";
    case ErrorKind::Internal: return "Internal";
  }
  return "Unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& msg)
      : std::runtime_error(std::string(error_kind_name(kind)) + ": " + msg), kind_(kind) {}

  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace thetalab
