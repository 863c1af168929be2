#include "herdtrack/error.hpp"

namespace herdtrack {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::NotFound: return "not-found";
    case ErrorCode::Format: return "format";
    case ErrorCode::MissingArtifact: return "missing-artifact";
    case ErrorCode::DegenerateInput: return "degenerate-input";
    case ErrorCode::DegenerateGeometry: return "degenerate-geometry";
    case ErrorCode::Selection: return "selection";
    case ErrorCode::Propagation: return "propagation";
    case ErrorCode::Flag: return "flag";
    case ErrorCode::DegenerateTraining: return "degenerate-training";
    case ErrorCode::Contract: return "contract";
    case ErrorCode::Argument: return "argument";
    case ErrorCode::Deserialization: return "deserialization";
    case ErrorCode::Incompatible: return "incompatible";
    case ErrorCode::Config: return "config";
    case ErrorCode::Alignment: return "alignment";
    case ErrorCode::Conflict: return "conflict";
    case ErrorCode::Io: return "io";
  }
  return "unknown";
}

}  // namespace herdtrack
