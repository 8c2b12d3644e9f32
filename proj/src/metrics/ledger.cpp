#include "metasim/metrics/ledger.hpp"

#include <algorithm>

namespace metasim::metrics {

std::string_view to_string(WireClass c) {
  switch (c) {
    case WireClass::Data: return "data";
    case WireClass::Handshake: return "handshake";
    case WireClass::Clock: return "clock";
  }
  return "?";
}

void TransitionLedger::add_periodic(PeriodicTransitions p) {
  std::sort(p.offsets.begin(), p.offsets.end());
  class_counts_[static_cast<std::size_t>(p.cls)] += p.count();
  periodic_.push_back(std::move(p));
}

void TransitionLedger::reset(SimTime origin) {
  records_.clear();
  periodic_.clear();
  class_counts_ = {};
  suppressed_ = 0;
  origin_ = origin;
}

void TransitionLedger::sort_by_time() {
  std::stable_sort(records_.begin(), records_.end(),
                   [](const TransitionRecord& a, const TransitionRecord& b) { return a.time < b.time; });
}

std::uint64_t TransitionLedger::count() const {
  std::uint64_t n = 0;
  for (auto c : class_counts_) n += c;
  return n;
}

SimTime TransitionLedger::last_time() const {
  SimTime t = origin_;
  for (const auto& r : records_) t = std::max(t, r.time);
  for (const auto& p : periodic_) {
    if (p.repetitions == 0 || p.offsets.empty()) continue;
    t = std::max(t, p.start + (p.repetitions - 1) * p.interval + p.offsets.back());
  }
  return t;
}

}  // namespace metasim::metrics
