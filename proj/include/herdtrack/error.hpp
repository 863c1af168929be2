#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace herdtrack {

enum class ErrorCode {
  NotFound,
  Format,
  MissingArtifact,
  DegenerateInput,
  DegenerateGeometry,
  Selection,
  Propagation,
  Flag,
  DegenerateTraining,
  Contract,
  Argument,
  Deserialization,
  Incompatible,
  Config,
  Alignment,
  Conflict,
  Io,
};

std::string_view to_string(ErrorCode code) noexcept;

/// Every failure raised by the library carries a code so callers (the CLI,
/// the review service) can map it to an exit status or an HTTP problem.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace herdtrack
