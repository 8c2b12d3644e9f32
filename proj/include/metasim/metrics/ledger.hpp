#pragma once

#include <array>
#include <cstdint>
#include <string_view>
#include <vector>

#include "metasim/sim/kernel.hpp"

namespace metasim::metrics {

using sim::Duration;
using sim::SimTime;

enum class WireClass : std::uint8_t { Data, Handshake, Clock };
inline constexpr std::size_t kWireClassCount = 3;

std::string_view to_string(WireClass c);

struct TransitionRecord {
  std::uint32_t wire;
  WireClass cls;
  SimTime time;
};

// A transition pattern that repeats every `interval` for `repetitions` times:
// one transition per offset per repetition, at start + r*interval + offset.
// The clock tree is stored this way; a 16x16 tree over 1 ms would otherwise
// be ~10^8 individual records.
struct PeriodicTransitions {
  WireClass cls = WireClass::Clock;
  SimTime start = 0;
  Duration interval = 1;
  std::uint64_t repetitions = 0;
  std::vector<Duration> offsets;  // sorted ascending

  std::uint64_t count() const { return repetitions * offsets.size(); }
};

// Append-only log of every executed wire transition in one run. `origin`
// marks where the measured phase starts (e.g. after discovery).
class TransitionLedger {
 public:
  void append(std::uint32_t wire, WireClass cls, SimTime time) {
    records_.push_back({wire, cls, time});
    ++class_counts_[static_cast<std::size_t>(cls)];
  }
  void note_suppressed() { ++suppressed_; }
  void add_periodic(PeriodicTransitions p);

  // Drops everything recorded so far and starts a new measured phase.
  void reset(SimTime origin);

  // Restores time order when a producer appended groups out of order.
  void sort_by_time();

  SimTime origin() const noexcept { return origin_; }
  const std::vector<TransitionRecord>& records() const noexcept { return records_; }
  const std::vector<PeriodicTransitions>& periodic() const noexcept { return periodic_; }
  std::uint64_t suppressed() const noexcept { return suppressed_; }

  std::uint64_t count() const;
  std::uint64_t count(WireClass cls) const { return class_counts_[static_cast<std::size_t>(cls)]; }

  // Latest transition time, or origin() when empty.
  SimTime last_time() const;

 private:
  std::vector<TransitionRecord> records_;
  std::vector<PeriodicTransitions> periodic_;
  std::array<std::uint64_t, kWireClassCount> class_counts_{};
  std::uint64_t suppressed_ = 0;
  SimTime origin_ = 0;
};

}  // namespace metasim::metrics
