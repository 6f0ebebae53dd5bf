#pragma once

#include <stdexcept>
#include <string>

namespace fov {

enum class ErrorCode {
  InvalidArgument,
  DimensionMismatch,
  NonFiniteEntry,
  NotHermitian,
  ZeroVector,
  NonOrthonormalBasis,
  EmptySet,
  NonConvergence,
  PointNotOnBoundary,
  PointNotOnSupportLine,
  DegenerateCut,
  CollinearGenerators,
  TargetOutsideRange,
  RankDeficit,
  WitnessNotFound,
  ArcNotOnBoundary,
  NoReduction,
  IoError,
};

const char* to_string(ErrorCode code);

class Error : public std::runtime_error {
public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

private:
  ErrorCode code_;
};

}  // namespace fov
