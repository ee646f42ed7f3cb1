#include "fhr/error.hpp"

namespace fhr {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Config: return "ConfigError";
    case ErrorKind::Io: return "IoError";
    case ErrorKind::Divergence: return "Divergence";
    case ErrorKind::StepUnderflow: return "StepUnderflow";
    case ErrorKind::TooFewCrossings: return "TooFewCrossings";
    case ErrorKind::UnknownLabel: return "UnknownLabel";
    case ErrorKind::TooFewRegions: return "TooFewRegions";
    case ErrorKind::LostInBackground: return "LostInBackground";
    case ErrorKind::ZeroRow: return "ZeroRow";
    case ErrorKind::NotIrreducible: return "NotIrreducible";
    case ErrorKind::NoCycle: return "NoCycle";
    case ErrorKind::NotConverged: return "NotConverged";
    case ErrorKind::InsufficientData: return "InsufficientData";
    case ErrorKind::IncompleteReduction: return "IncompleteReduction";
    case ErrorKind::NoCandidate: return "NoCandidate";
    case ErrorKind::MismatchedParameters: return "MismatchedParameters";
    case ErrorKind::MissingMeasure: return "MissingMeasure";
  }
  return "Unknown";
}

}  // namespace fhr
