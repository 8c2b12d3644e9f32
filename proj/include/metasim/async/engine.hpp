#pragma once

#include <utility>
#include <vector>

#include "metasim/async/channel.hpp"
#include "metasim/metrics/ledger.hpp"
#include "metasim/sim/delay.hpp"
#include "metasim/sim/kernel.hpp"

namespace metasim::async {

// A model is a copyable value exposing
//   ChannelNetwork& network();
//   void handle(const sim::Event&, StepContext&);
// Simulation owns the clockwork around it: the event queue, the seeded delay
// sampling and the transition ledger.
template <class Model>
class Simulation {
 public:
  Simulation(Model model, sim::DelayModel wire, std::uint64_t seed)
      : model_(std::move(model)), wire_(std::move(wire)), rng_(seed) {}

  Model& model() { return model_; }
  const Model& model() const { return model_; }
  sim::EventQueue& queue() { return queue_; }
  metrics::TransitionLedger& ledger() { return ledger_; }
  const metrics::TransitionLedger& ledger() const { return ledger_; }
  sim::SimTime now() const { return queue_.now(); }
  const sim::DelayModel& wire_model() const { return wire_; }

  void record_events(bool on) { record_events_ = on; }
  const std::vector<sim::Event>& event_trace() const { return event_trace_; }

  // Runs f(model, ctx) at the current time and schedules what it emitted.
  template <class F>
  void act(F&& f) {
    StepContext ctx = context();
    f(model_, ctx);
    commit();
  }

  void poke(sim::SimTime at, sim::ElementId target, std::uint64_t value) {
    queue_.schedule(at, target, sim::Action{sim::ActionKind::Poke, value});
  }

  sim::RunStats run(std::uint64_t max_events = sim::kDefaultMaxEvents) {
    return sim::run_to_quiescence(queue_, max_events, [this](const sim::Event& ev) {
      if (record_events_) event_trace_.push_back(ev);
      StepContext ctx = context();
      model_.handle(ev, ctx);
      commit();
    });
  }

 private:
  StepContext context() {
    emissions_.clear();
    notes_.clear();
    return StepContext{queue_.now(), &emissions_, &notes_, &ledger_};
  }

  void commit() {
    const ChannelNetwork& net = model_.network();
    for (const Emission& e : emissions_) {
      sim::Duration d = 0;
      switch (e.kind) {
        case DelayKind::Wire: d = wire_.sample(rng_); break;
        case DelayKind::Data: d = net.channel(e.channel).cfg.data_delay.sample(rng_); break;
        case DelayKind::Matched: d = net.channel(e.channel).matched() + wire_.sample(rng_); break;
      }
      queue_.schedule(queue_.now() + d, e.target, e.action);
    }
    emissions_.clear();
  }

  Model model_;
  sim::DelayModel wire_;
  sim::Rng rng_;
  sim::EventQueue queue_;
  metrics::TransitionLedger ledger_;
  std::vector<Emission> emissions_;
  std::vector<Notification> notes_;
  bool record_events_ = false;
  std::vector<sim::Event> event_trace_;
};

}  // namespace metasim::async
