#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace slab {

enum class ErrorCode {
  ZeroFrequency,
  ZeroPosition,
  DegenerateGradient,
  OptimizerStall,
  CurvatureUnchecked,
  InvalidSize,
  SingularAtOrigin,
  NonFiniteMultiplier,
  NonFiniteSymbol,
  CutoffLeakage,
  OutOfSector,
  StructureViolation,
  MassEscape,
  LowFrequencyMass,
  BandExceeded,
  ExponentViolation,
  ConfigInvalid,
};

std::string_view to_string(ErrorCode code);

/// Every failure raised by the library carries one of the codes above; the
/// message names the operation that failed.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

inline std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::ZeroFrequency: return "ZeroFrequency";
    case ErrorCode::ZeroPosition: return "ZeroPosition";
    case ErrorCode::DegenerateGradient: return "DegenerateGradient";
    case ErrorCode::OptimizerStall: return "OptimizerStall";
    case ErrorCode::CurvatureUnchecked: return "CurvatureUnchecked";
    case ErrorCode::InvalidSize: return "InvalidSize";
    case ErrorCode::SingularAtOrigin: return "SingularAtOrigin";
    case ErrorCode::NonFiniteMultiplier: return "NonFiniteMultiplier";
    case ErrorCode::NonFiniteSymbol: return "NonFiniteSymbol";
    case ErrorCode::CutoffLeakage: return "CutoffLeakage";
    case ErrorCode::OutOfSector: return "OutOfSector";
    case ErrorCode::StructureViolation: return "StructureViolation";
    case ErrorCode::MassEscape: return "MassEscape";
    case ErrorCode::LowFrequencyMass: return "LowFrequencyMass";
    case ErrorCode::BandExceeded: return "BandExceeded";
    case ErrorCode::ExponentViolation: return "ExponentViolation";
    case ErrorCode::ConfigInvalid: return "ConfigInvalid";
  }
  return "Unknown";
}

}  // namespace slab
