#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace fhr {

enum class ErrorKind {
  Config,
  Io,
  Divergence,
  StepUnderflow,
  TooFewCrossings,
  UnknownLabel,
  TooFewRegions,
  LostInBackground,
  ZeroRow,
  NotIrreducible,
  NoCycle,
  NotConverged,
  InsufficientData,
  IncompleteReduction,
  NoCandidate,
  MismatchedParameters,
  MissingMeasure,
};

std::string_view to_string(ErrorKind kind);

// Every recoverable failure in the library is reported through this type so
// callers (sweep rows, the CLI error JSON) can dispatch on kind().
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace fhr
