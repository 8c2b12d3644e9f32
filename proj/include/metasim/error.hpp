#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace metasim {

enum class ErrorCode {
  SchedulingInPast,
  EventBudgetExhausted,
  InvalidDelayModel,
  ProtocolViolation,
  DelayUnderMatch,
  InterfaceMismatch,
  FieldOverflow,
  MalformedPacket,
  BadLoadIndex,
  DiscoveryIncomplete,
  DestOutOfRange,
  UnmatchedDelivery,
  WorkloadMismatch,
  SchemaError,
  StateBudgetExhausted,
};

std::string_view to_string(ErrorCode code);

// Every recoverable failure in the library is reported as an Error carrying a
// machine-checkable code; the message is for humans only.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code), detail_(what) {}

  ErrorCode code() const noexcept { return code_; }
  // The message without the code prefix.
  const std::string& detail() const noexcept { return detail_; }

 private:
  ErrorCode code_;
  std::string detail_;
};

}  // namespace metasim
