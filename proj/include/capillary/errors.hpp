#pragma once

#include <stdexcept>
#include <string>

namespace capillary {

enum class ErrorCode {
  AmbiguousProjection,
  NonClosedBoundary,
  SelfIntersectingWall,
  DegenerateStar,
  NonTangentVariation,
  MeshDegenerated,
  NoConvergence,
  NotMinimal,
  NoWitness,
  GridMismatch,
  InfeasibleConstraint,
  TooLarge,
  TrivialSweepout,
  WidthCollapse,
  BadMu,
  OutOfScale,
  ConfigParse,
  InvalidArgument,
};

inline const char* errorName(ErrorCode c) {
  switch (c) {
    case ErrorCode::AmbiguousProjection: return "AmbiguousProjection";
    case ErrorCode::NonClosedBoundary: return "NonClosedBoundary";
    case ErrorCode::SelfIntersectingWall: return "SelfIntersectingWall";
    case ErrorCode::DegenerateStar: return "DegenerateStar";
    case ErrorCode::NonTangentVariation: return "NonTangentVariation";
    case ErrorCode::MeshDegenerated: return "MeshDegenerated";
    case ErrorCode::NoConvergence: return "NoConvergence";
    case ErrorCode::NotMinimal: return "NotMinimal";
    case ErrorCode::NoWitness: return "NoWitness";
    case ErrorCode::GridMismatch: return "GridMismatch";
    case ErrorCode::InfeasibleConstraint: return "InfeasibleConstraint";
    case ErrorCode::TooLarge: return "TooLarge";
    case ErrorCode::TrivialSweepout: return "TrivialSweepout";
    case ErrorCode::WidthCollapse: return "WidthCollapse";
    case ErrorCode::BadMu: return "BadMu";
    case ErrorCode::OutOfScale: return "OutOfScale";
    case ErrorCode::ConfigParse: return "ConfigParse";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
  }
  return "Unknown";
}

// Validation errors are caller mistakes; everything else is numerical.
inline bool isValidationError(ErrorCode c) {
  return c == ErrorCode::ConfigParse || c == ErrorCode::InvalidArgument ||
         c == ErrorCode::BadMu || c == ErrorCode::OutOfScale ||
         c == ErrorCode::GridMismatch || c == ErrorCode::TooLarge ||
         c == ErrorCode::InfeasibleConstraint;
}

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(errorName(code)) + ": " + what), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

inline void require(bool ok, const std::string& what) {
  if (!ok) throw Error(ErrorCode::InvalidArgument, what);
}

}  // namespace capillary
