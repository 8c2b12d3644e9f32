#include "metasim/error.hpp"

namespace metasim {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::SchedulingInPast: return "SchedulingInPast";
    case ErrorCode::EventBudgetExhausted: return "EventBudgetExhausted";
    case ErrorCode::InvalidDelayModel: return "InvalidDelayModel";
    case ErrorCode::ProtocolViolation: return "ProtocolViolation";
    case ErrorCode::DelayUnderMatch: return "DelayUnderMatch";
    case ErrorCode::InterfaceMismatch: return "InterfaceMismatch";
    case ErrorCode::FieldOverflow: return "FieldOverflow";
    case ErrorCode::MalformedPacket: return "MalformedPacket";
    case ErrorCode::BadLoadIndex: return "BadLoadIndex";
    case ErrorCode::DiscoveryIncomplete: return "DiscoveryIncomplete";
    case ErrorCode::DestOutOfRange: return "DestOutOfRange";
    case ErrorCode::UnmatchedDelivery: return "UnmatchedDelivery";
    case ErrorCode::WorkloadMismatch: return "WorkloadMismatch";
    case ErrorCode::SchemaError: return "SchemaError";
    case ErrorCode::StateBudgetExhausted: return "StateBudgetExhausted";
  }
  return "Unknown";
}

}  // namespace metasim
