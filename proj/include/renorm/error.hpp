#pragma once

#include <optional>
#include <stdexcept>
#include <string>

namespace renorm {

enum class ErrorCode {
  IdentityMap,
  PoleAt,
  DegenerateBreak,
  OutOfDomain,
  DomainMismatch,
  SizeOne,
  NonMonotone,
  DiscontinuousAtBreak,
  RationalSuspected,
  NotDisjoint,
  SingularityCollision,
  NonTerminating,
  NotCircular,
  PrecisionFloor,
  DegenerateTriple,
  NonHyperbolicLoop,
  NormalisationAmbiguity,
  NotOnSlice,
  NoRealFixedPoint,
  OrderViolation,
  InadmissibleMove,
  SpecInvalid,
};

const char* to_string(ErrorCode code);

// Single exception type for the library; the code identifies the failure.
// `step` carries the induction step index for tower failures.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what, std::optional<long> step = {})
      : std::runtime_error(std::string(to_string(code)) + ": " + what),
        code_(code),
        step_(step) {}

  ErrorCode code() const noexcept { return code_; }
  std::optional<long> step() const noexcept { return step_; }

 private:
  ErrorCode code_;
  std::optional<long> step_;
};

inline const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::IdentityMap: return "IdentityMap";
    case ErrorCode::PoleAt: return "PoleAt";
    case ErrorCode::DegenerateBreak: return "DegenerateBreak";
    case ErrorCode::OutOfDomain: return "OutOfDomain";
    case ErrorCode::DomainMismatch: return "DomainMismatch";
    case ErrorCode::SizeOne: return "SizeOne";
    case ErrorCode::NonMonotone: return "NonMonotone";
    case ErrorCode::DiscontinuousAtBreak: return "DiscontinuousAtBreak";
    case ErrorCode::RationalSuspected: return "RationalSuspected";
    case ErrorCode::NotDisjoint: return "NotDisjoint";
    case ErrorCode::SingularityCollision: return "SingularityCollision";
    case ErrorCode::NonTerminating: return "NonTerminating";
    case ErrorCode::NotCircular: return "NotCircular";
    case ErrorCode::PrecisionFloor: return "PrecisionFloor";
    case ErrorCode::DegenerateTriple: return "DegenerateTriple";
    case ErrorCode::NonHyperbolicLoop: return "NonHyperbolicLoop";
    case ErrorCode::NormalisationAmbiguity: return "NormalisationAmbiguity";
    case ErrorCode::NotOnSlice: return "NotOnSlice";
    case ErrorCode::NoRealFixedPoint: return "NoRealFixedPoint";
    case ErrorCode::OrderViolation: return "OrderViolation";
    case ErrorCode::InadmissibleMove: return "InadmissibleMove";
    case ErrorCode::SpecInvalid: return "SpecInvalid";
  }
  return "Unknown";
}

}  // namespace renorm
