#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "metasim/sim/kernel.hpp"

namespace metasim::async {

using sim::Duration;
using sim::SimTime;
using Word = std::uint64_t;

enum class Protocol : std::uint8_t { FourPhase, TwoPhase };

// ---------------------------------------------------------------------------
// Gates

// Output follows the inputs when they all agree, otherwise holds prev_output.
// Precondition: inputs non-empty.
bool muller_c_step(std::span<const bool> inputs, bool prev_output);

// Transparent when enabled, opaque hold otherwise.
constexpr Word latch_step(bool enable, Word data_in, Word stored) {
  return enable ? data_in : stored;
}

// Delay element on the request path. Construction fails with DelayUnderMatch
// when it is shorter than the data path it is meant to cover.
class MatchedDelay {
 public:
  MatchedDelay(Duration delay, Duration data_path_worst_case);

  Duration delay() const noexcept { return delay_; }
  sim::Event apply(const sim::Event& req) const;

 private:
  Duration delay_;
};

// ---------------------------------------------------------------------------
// Handshake controllers. Each step returns the next state and the wire
// actions the controller performs in response.

enum class WireOp : std::uint8_t {
  DriveData,
  RaiseReq,
  LowerReq,
  ToggleReq,
  RaiseAck,
  LowerAck,
  ToggleAck,
  Latch,
  CycleDone,
};

struct WireOps {
  std::array<WireOp, 3> ops{};
  std::uint8_t size = 0;

  void push(WireOp op) { ops[size++] = op; }
  bool contains(WireOp op) const;
  auto begin() const { return ops.begin(); }
  auto end() const { return ops.begin() + size; }
};

// Sender side of the return-to-zero protocol: req+ (data valid), ack+,
// req-, ack-. The data-valid step is the DriveData action of Idle -> ReqHigh.
struct FourPhaseSenderState {
  enum class Phase : std::uint8_t { Idle, ReqHigh, ReqLow } phase = Phase::Idle;
  friend bool operator==(const FourPhaseSenderState&, const FourPhaseSenderState&) = default;
};

struct FourPhaseReceiverState {
  enum class Phase : std::uint8_t { Idle, AckHigh } phase = Phase::Idle;
  friend bool operator==(const FourPhaseReceiverState&, const FourPhaseReceiverState&) = default;
};

template <class State>
struct Step {
  State next;
  WireOps ops;
};

// Throws ProtocolViolation when ack is high while the sender is idle.
Step<FourPhaseSenderState> four_phase_sender_step(FourPhaseSenderState s, bool ack_level,
                                                  bool data_ready);

// Latches exactly once per cycle, on req high while can_accept. With
// can_accept false the receiver holds and withholds ack (backpressure).
Step<FourPhaseReceiverState> four_phase_receiver_step(FourPhaseReceiverState s, bool req_level,
                                                      bool can_accept);

// Transition signalling: every req toggle is one item, every ack toggle one
// acceptance. `pending` means a req toggle is outstanding.
struct TwoPhaseEndpointState {
  bool req_parity = false;
  bool ack_parity = false;
  bool pending = false;
  friend bool operator==(const TwoPhaseEndpointState&, const TwoPhaseEndpointState&) = default;
};

// Sender issuing a new item. ProtocolViolation if the previous toggle has not
// been acknowledged yet.
Step<TwoPhaseEndpointState> two_phase_send(TwoPhaseEndpointState s);

// Sender observing the peer. An ack toggle with nothing outstanding is a
// ProtocolViolation.
Step<TwoPhaseEndpointState> two_phase_sender_step(TwoPhaseEndpointState s, bool ack_toggled);

// Receiver observing the peer. A second req toggle before this side has
// acknowledged the first is a ProtocolViolation.
Step<TwoPhaseEndpointState> two_phase_receiver_step(TwoPhaseEndpointState s, bool req_toggled,
                                                    bool can_accept);

// ---------------------------------------------------------------------------
// Arbitration

enum class Grant : std::uint8_t { None, A, B };

struct MutexState {
  bool req_a = false;
  bool req_b = false;
  Grant grant = Grant::None;
  Grant last_granted = Grant::None;
  friend bool operator==(const MutexState&, const MutexState&) = default;
};

// Two-way mutual exclusion. A grant is held until its request falls; on
// contention the side that was not granted last wins.
MutexState mutex_grant(MutexState s, bool req_a, bool req_b);

// N-way generalisation used at router outputs: rotating priority starting
// after the last winner. For two requesters it reduces to mutex_grant.
class RoundRobinArbiter {
 public:
  explicit RoundRobinArbiter(unsigned inputs = 5) : inputs_(inputs) {}

  // `requests` is a bitmask; returns the winner or nullopt.
  std::optional<unsigned> pick(std::uint32_t requests);
  std::optional<unsigned> last() const { return last_; }

  friend bool operator==(const RoundRobinArbiter&, const RoundRobinArbiter&) = default;

 private:
  unsigned inputs_;
  std::optional<unsigned> last_;
};

// ---------------------------------------------------------------------------
// Bundling constraint checker

struct TraceEntry {
  enum class Kind : std::uint8_t { Data, Req, Latch } kind;
  std::uint32_t bit = 0;  // data bit index for Kind::Data
  SimTime time = 0;
};

struct BundlingViolation {
  std::uint32_t data_bit;
  SimTime data_time;
  SimTime req_time;
  SimTime latch_time;
  friend bool operator==(const BundlingViolation&, const BundlingViolation&) = default;
};

// Reports every data change inside [req - setup_margin, latch] for each
// latched item. `Req` entries are the data-carrying request edges.
// Precondition: trace is time ordered.
std::vector<BundlingViolation> bundling_check(std::span<const TraceEntry> trace,
                                              Duration setup_margin);

}  // namespace metasim::async
