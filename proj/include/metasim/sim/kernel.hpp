#pragma once

#include <cstdint>
#include <queue>
#include <vector>

#include "metasim/error.hpp"

namespace metasim::sim {

// Integer picoseconds everywhere. Floating point never enters event ordering.
using SimTime = std::uint64_t;
using Duration = std::uint64_t;
using ElementId = std::uint32_t;

inline constexpr std::uint64_t kDefaultMaxEvents = 100'000'000;

enum class ActionKind : std::uint8_t {
  SetLevel,  // target is a wire, value is the new level (0/1)
  SetBus,    // target is a channel, value is the whole data word
  Poke,      // target/value interpreted by the model (timed injections)
};

struct Action {
  ActionKind kind = ActionKind::SetLevel;
  std::uint64_t value = 0;

  friend bool operator==(const Action&, const Action&) = default;
};

struct Event {
  SimTime time = 0;
  std::uint64_t seq = 0;
  ElementId target = 0;
  Action action;

  friend bool operator==(const Event&, const Event&) = default;
};

// Min-heap on (time, seq). The sequence number is assigned at insertion, so
// simultaneous events dequeue in the order they were scheduled.
class EventQueue {
 public:
  SimTime now() const noexcept { return now_; }
  bool empty() const noexcept { return heap_.empty(); }
  std::size_t size() const noexcept { return heap_.size(); }
  const Event& top() const { return heap_.top(); }

  // Throws SchedulingInPast if time < now().
  Event schedule(SimTime time, ElementId target, Action action);

  // Removes the head and advances now() to its timestamp.
  Event pop();

 private:
  struct Later {
    bool operator()(const Event& a, const Event& b) const noexcept {
      if (a.time != b.time) return a.time > b.time;
      return a.seq > b.seq;
    }
  };

  std::priority_queue<Event, std::vector<Event>, Later> heap_;
  SimTime now_ = 0;
  std::uint64_t next_seq_ = 1;
};

struct RunStats {
  SimTime final_time = 0;
  std::uint64_t events = 0;
};

// Dequeues and dispatches until the queue drains. Throws EventBudgetExhausted
// when max_events have been processed and work is still pending, which is how
// oscillating or livelocked circuits surface.
template <class Handler>
RunStats run_to_quiescence(EventQueue& queue, std::uint64_t max_events, Handler&& handler) {
  if (max_events == 0) {
    throw Error(ErrorCode::EventBudgetExhausted, "max_events must be positive");
  }
  RunStats stats{queue.now(), 0};
  while (!queue.empty()) {
    if (stats.events == max_events) {
      throw Error(ErrorCode::EventBudgetExhausted,
                  "budget of " + std::to_string(max_events) + " events spent at t=" +
                      std::to_string(queue.now()) + " ps with " +
                      std::to_string(queue.size()) + " pending");
    }
    const Event ev = queue.pop();
    handler(ev);
    ++stats.events;
  }
  stats.final_time = queue.now();
  return stats;
}

}  // namespace metasim::sim
