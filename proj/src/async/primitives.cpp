#include "metasim/async/primitives.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

#include "metasim/error.hpp"

namespace metasim::async {

bool muller_c_step(std::span<const bool> inputs, bool prev_output) {
  if (inputs.empty()) throw std::invalid_argument("muller_c_step: no inputs");
  const bool first = inputs.front();
  for (bool v : inputs) {
    if (v != first) return prev_output;
  }
  return first;
}

MatchedDelay::MatchedDelay(Duration delay, Duration data_path_worst_case) : delay_(delay) {
  if (delay < data_path_worst_case) {
    throw Error(ErrorCode::DelayUnderMatch,
                "matched delay " + std::to_string(delay) + " ps < data path worst case " +
                    std::to_string(data_path_worst_case) + " ps");
  }
}

sim::Event MatchedDelay::apply(const sim::Event& req) const {
  sim::Event out = req;
  out.time += delay_;
  return out;
}

bool WireOps::contains(WireOp op) const { return std::find(begin(), end(), op) != end(); }

Step<FourPhaseSenderState> four_phase_sender_step(FourPhaseSenderState s, bool ack_level,
                                                  bool data_ready) {
  using P = FourPhaseSenderState::Phase;
  Step<FourPhaseSenderState> r{s, {}};
  switch (s.phase) {
    case P::Idle:
      if (ack_level) {
        throw Error(ErrorCode::ProtocolViolation, "four-phase: ack high while sender idle");
      }
      if (data_ready) {
        r.next.phase = P::ReqHigh;
        r.ops.push(WireOp::DriveData);
        r.ops.push(WireOp::RaiseReq);
      }
      break;
    case P::ReqHigh:
      if (ack_level) {
        r.next.phase = P::ReqLow;
        r.ops.push(WireOp::LowerReq);
      }
      break;
    case P::ReqLow:
      if (!ack_level) {
        r.next.phase = P::Idle;
        r.ops.push(WireOp::CycleDone);
      }
      break;
  }
  return r;
}

Step<FourPhaseReceiverState> four_phase_receiver_step(FourPhaseReceiverState s, bool req_level,
                                                      bool can_accept) {
  using P = FourPhaseReceiverState::Phase;
  Step<FourPhaseReceiverState> r{s, {}};
  switch (s.phase) {
    case P::Idle:
      if (req_level && can_accept) {
        r.next.phase = P::AckHigh;
        r.ops.push(WireOp::Latch);
        r.ops.push(WireOp::RaiseAck);
      }
      break;
    case P::AckHigh:
      if (!req_level) {
        r.next.phase = P::Idle;
        r.ops.push(WireOp::LowerAck);
      }
      break;
  }
  return r;
}

Step<TwoPhaseEndpointState> two_phase_send(TwoPhaseEndpointState s) {
  if (s.pending) {
    throw Error(ErrorCode::ProtocolViolation, "two-phase: req toggled twice without ack");
  }
  Step<TwoPhaseEndpointState> r{s, {}};
  r.next.req_parity = !s.req_parity;
  r.next.pending = true;
  r.ops.push(WireOp::DriveData);
  r.ops.push(WireOp::ToggleReq);
  return r;
}

Step<TwoPhaseEndpointState> two_phase_sender_step(TwoPhaseEndpointState s, bool ack_toggled) {
  Step<TwoPhaseEndpointState> r{s, {}};
  if (!ack_toggled) return r;
  if (!s.pending) {
    throw Error(ErrorCode::ProtocolViolation, "two-phase: ack toggled with no request outstanding");
  }
  r.next.ack_parity = !s.ack_parity;
  r.next.pending = false;
  r.ops.push(WireOp::CycleDone);
  return r;
}

Step<TwoPhaseEndpointState> two_phase_receiver_step(TwoPhaseEndpointState s, bool req_toggled,
                                                    bool can_accept) {
  Step<TwoPhaseEndpointState> r{s, {}};
  if (req_toggled) {
    if (s.pending) {
      throw Error(ErrorCode::ProtocolViolation, "two-phase: req toggled twice without ack");
    }
    r.next.req_parity = !s.req_parity;
    r.next.pending = true;
  }
  if (r.next.pending && can_accept) {
    r.next.pending = false;
    r.next.ack_parity = !r.next.ack_parity;
    r.ops.push(WireOp::Latch);
    r.ops.push(WireOp::ToggleAck);
  }
  return r;
}

MutexState mutex_grant(MutexState s, bool req_a, bool req_b) {
  s.req_a = req_a;
  s.req_b = req_b;
  if (s.grant == Grant::A && !req_a) s.grant = Grant::None;
  if (s.grant == Grant::B && !req_b) s.grant = Grant::None;
  if (s.grant == Grant::None) {
    if (req_a && req_b) {
      s.grant = s.last_granted == Grant::A ? Grant::B : Grant::A;
    } else if (req_a) {
      s.grant = Grant::A;
    } else if (req_b) {
      s.grant = Grant::B;
    }
    if (s.grant != Grant::None) s.last_granted = s.grant;
  }
  return s;
}

std::optional<unsigned> RoundRobinArbiter::pick(std::uint32_t requests) {
  if (requests == 0) return std::nullopt;
  const unsigned start = last_ ? (*last_ + 1) % inputs_ : 0;
  for (unsigned i = 0; i < inputs_; ++i) {
    const unsigned idx = (start + i) % inputs_;
    if (requests & (1u << idx)) {
      last_ = idx;
      return idx;
    }
  }
  return std::nullopt;
}

std::vector<BundlingViolation> bundling_check(std::span<const TraceEntry> trace,
                                              Duration setup_margin) {
  std::vector<const TraceEntry*> data;
  for (const auto& e : trace) {
    if (e.kind == TraceEntry::Kind::Data) data.push_back(&e);
  }
  std::vector<BundlingViolation> out;
  std::optional<SimTime> req_time;
  for (const auto& e : trace) {
    if (e.kind == TraceEntry::Kind::Req) {
      req_time = e.time;
    } else if (e.kind == TraceEntry::Kind::Latch && req_time) {
      const SimTime lo = *req_time >= setup_margin ? *req_time - setup_margin : 0;
      auto it = std::lower_bound(data.begin(), data.end(), lo,
                                 [](const TraceEntry* d, SimTime t) { return d->time < t; });
      for (; it != data.end() && (*it)->time <= e.time; ++it) {
        out.push_back({(*it)->bit, (*it)->time, *req_time, e.time});
      }
      req_time.reset();
    }
  }
  return out;
}

}  // namespace metasim::async
