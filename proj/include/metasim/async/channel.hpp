#pragma once

#include <cstdint>
#include <vector>

#include "metasim/async/primitives.hpp"
#include "metasim/metrics/ledger.hpp"
#include "metasim/sim/delay.hpp"
#include "metasim/sim/kernel.hpp"

namespace metasim::async {

using ChannelId = std::uint32_t;
inline constexpr ChannelId kNoChannel = ~ChannelId{0};

// How a driver turns an emitted transition into a firing time.
enum class DelayKind : std::uint8_t {
  Wire,     // control wire: the simulation's wire model
  Data,     // data line: the channel's data-path model
  Matched,  // request edge: channel matched delay + control wire
};

struct Emission {
  sim::ElementId target;
  sim::Action action;
  DelayKind kind;
  ChannelId channel;
  // Under untimed exploration the request may not overtake the data bus it is
  // bundled with. Set only when the matched delay covers the data path.
  bool after_bus = false;
};

struct Notification {
  enum class Kind : std::uint8_t { Latched, SendDone } kind;
  ChannelId channel;
  Word word = 0;
};

// Everything a model step needs from its driver. Emissions are scheduled by
// the driver after the step; notifications are drained by the model.
struct StepContext {
  sim::SimTime now = 0;
  std::vector<Emission>* emissions = nullptr;
  std::vector<Notification>* notes = nullptr;
  metrics::TransitionLedger* ledger = nullptr;
};

struct ChannelConfig {
  Protocol protocol = Protocol::FourPhase;
  unsigned width = 16;
  sim::DelayModel data_delay = sim::DelayModel::fixed(1);
  // 0 selects data_delay.worst_case() + setup_margin.
  Duration matched_delay = 0;
  Duration setup_margin = 10;
  // Fault injection: skip the DelayUnderMatch construction check.
  bool allow_under_match = false;
};

struct Channel {
  ChannelConfig cfg;
  sim::ElementId req = 0;
  sim::ElementId ack = 0;
  sim::ElementId data0 = 0;

  FourPhaseSenderState tx4;
  FourPhaseReceiverState rx4;
  TwoPhaseEndpointState tx2;
  TwoPhaseEndpointState rx2;

  Word driven = 0;  // sender-side view of the data lines
  bool tx_busy = false;
  bool rx_ready = true;
  bool bus_pending = false;     // bus-granularity mode only
  bool bundling_fault = false;  // req observed while its data was in flight

  std::uint64_t items_sent = 0;
  std::uint64_t items_latched = 0;
  std::vector<TraceEntry> trace;

  Duration matched() const { return cfg.matched_delay; }
  bool matched_covers_data() const { return cfg.matched_delay >= cfg.data_delay.worst_case(); }
};

// A set of bundled-data channels and the wires they own. Value type: models
// built on top of it can be copied wholesale by the exhaustive explorer.
class ChannelNetwork {
 public:
  // Per-bit mode schedules one event per toggling data wire (needed for the
  // ledger and timed bundling checks). Bus mode schedules one event per word,
  // which keeps untimed state spaces small.
  void set_bus_mode(bool on) { bus_mode_ = on; }
  void set_record_traces(bool on) { record_traces_ = on; }
  bool bus_mode() const { return bus_mode_; }

  // Throws DelayUnderMatch unless cfg.allow_under_match.
  ChannelId add_channel(ChannelConfig cfg);

  // Sender side: start transferring one word. Precondition: !busy(ch).
  void send(ChannelId ch, Word word, StepContext& ctx);
  bool busy(ChannelId ch) const { return channels_[ch].tx_busy; }

  // Receiver side: flow control. Becoming ready with a request already waiting
  // latches it immediately.
  void set_rx_ready(ChannelId ch, bool ready, StepContext& ctx);

  // Applies a SetLevel or SetBus event. Returns false for events that do not
  // belong to this network.
  bool on_event(const sim::Event& ev, StepContext& ctx);

  const Channel& channel(ChannelId ch) const { return channels_[ch]; }
  std::size_t channel_count() const { return channels_.size(); }
  std::size_t wire_count() const { return levels_.size(); }
  bool level(sim::ElementId wire) const { return levels_[wire] != 0; }

  // Timed check over the recorded traces; empty unless traces were on.
  std::vector<BundlingViolation> bundling_violations() const;
  // Bus mode only: a request fired while its word was still in flight.
  bool any_bundling_fault() const;
  // True when no channel is mid-handshake.
  bool idle() const;

  std::uint64_t fingerprint() const;

 private:
  enum class Role : std::uint8_t { Req, Ack, Data };
  struct WireInfo {
    ChannelId channel;
    Role role;
    std::uint16_t bit;
  };

  sim::ElementId add_wire(ChannelId ch, Role role, std::uint16_t bit);
  void emit(StepContext& ctx, sim::ElementId target, sim::Action action, DelayKind kind,
            ChannelId ch, bool after_bus = false);
  bool apply_level(sim::ElementId wire, bool value, StepContext& ctx);
  void drive_data(ChannelId ch, Word word, StepContext& ctx);
  void receiver_ops(ChannelId ch, const WireOps& ops, StepContext& ctx);
  Word read_data(const Channel& c) const;

  std::vector<std::uint8_t> levels_;
  std::vector<WireInfo> wires_;
  std::vector<Channel> channels_;
  bool bus_mode_ = false;
  bool record_traces_ = false;
};

}  // namespace metasim::async
