#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace fraudaware {

enum class ErrorCode {
  Config,
  Domain,
  ContractViolation,
  Validation,
  InsufficientFunds,
  InsufficientShares,
  StockDelisted,
  Telemetry,
  Schema,
  NotFound,
  PoolValidation,
  NoModel,
};

std::string_view to_string(ErrorCode code);

/// Base for every error raised by the library. The code is stable and
/// machine-readable; the message is for humans.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

/// Unmatched Start/End events in a session log.
class TelemetryError : public Error {
 public:
  TelemetryError(const std::string& message, std::vector<std::uint64_t> orphan_ids)
      : Error(ErrorCode::Telemetry, message), orphan_ids_(std::move(orphan_ids)) {}

  const std::vector<std::uint64_t>& orphan_ids() const noexcept { return orphan_ids_; }

 private:
  std::vector<std::uint64_t> orphan_ids_;
};

}  // namespace fraudaware
