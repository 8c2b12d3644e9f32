#include "metasim/sim/kernel.hpp"

#include <string>

namespace metasim::sim {

Event EventQueue::schedule(SimTime time, ElementId target, Action action) {
  if (time < now_) {
    throw Error(ErrorCode::SchedulingInPast,
                "event at " + std::to_string(time) + " ps scheduled when now=" +
                    std::to_string(now_) + " ps");
  }
  const Event ev{time, next_seq_++, target, action};
  heap_.push(ev);
  return ev;
}

Event EventQueue::pop() {
  Event ev = heap_.top();
  heap_.pop();
  now_ = ev.time;
  return ev;
}

}  // namespace metasim::sim
