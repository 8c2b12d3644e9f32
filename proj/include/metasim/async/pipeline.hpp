#pragma once

#include <cstdint>
#include <deque>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "metasim/async/channel.hpp"

namespace metasim::async {

struct StageDescriptor {
  unsigned width = 8;
  Protocol protocol = Protocol::FourPhase;
  // Function block on the stage's output data path.
  sim::DelayModel function_delay = sim::DelayModel::fixed(1);
  // 0 selects function_delay.worst_case() + setup_margin.
  Duration matched_delay = 0;
  bool allow_under_match = false;
};

// source -> ch0 -> stage0 -> ch1 -> ... -> stage(n-1) -> ch(n) -> sink
// Every stage holds at most one item and forwards it unchanged.
class Pipeline {
 public:
  ChannelNetwork& network() { return net_; }
  const ChannelNetwork& network() const { return net_; }

  void push(Word item) { source_.push_back(item); injected_.push_back(item); }
  // Starts the source sending; call once the items are queued.
  void start(StepContext& ctx);
  void handle(const sim::Event& ev, StepContext& ctx);

  std::size_t stage_count() const { return stages_.size(); }
  const std::vector<Word>& injected() const { return injected_; }
  const std::vector<Word>& delivered() const { return delivered_; }

  bool delivery_complete() const { return delivered_.size() == injected_.size(); }
  // Nothing buffered and no handshake in progress.
  bool drained() const;
  bool quiescent() const { return drained(); }
  bool bundling_fault() const { return net_.any_bundling_fault(); }

  std::uint64_t fingerprint() const;
  std::string outcome() const;

 private:
  friend Pipeline compose_pipeline(std::span<const StageDescriptor>, Protocol,
                                   const sim::DelayModel&, Duration);

  void drain(StepContext& ctx);
  void pump_source(StepContext& ctx);

  ChannelNetwork net_;
  std::vector<ChannelId> channels_;         // n + 1 channels
  std::vector<std::optional<Word>> stages_;  // one slot per stage
  std::deque<Word> source_;
  std::vector<Word> injected_;
  std::vector<Word> delivered_;
};

// Throws InterfaceMismatch when adjacent stages disagree on width or
// protocol (the source/sink side uses `protocol` and stage 0's width), and
// DelayUnderMatch for an under-matched stage unless it opts out.
Pipeline compose_pipeline(std::span<const StageDescriptor> stages, Protocol protocol,
                          const sim::DelayModel& wire, Duration setup_margin = 10);

}  // namespace metasim::async
