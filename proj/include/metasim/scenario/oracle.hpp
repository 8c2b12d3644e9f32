#pragma once

#include <algorithm>
#include <cstdint>
#include <set>
#include <span>
#include <string>
#include <tuple>
#include <unordered_set>
#include <vector>

#include "json.hpp"
#include "metasim/async/channel.hpp"
#include "metasim/async/pipeline.hpp"
#include "metasim/error.hpp"
#include "metasim/hash.hpp"
#include "metasim/noc/fabric.hpp"

namespace metasim::scenario {

struct OracleOptions {
  std::uint64_t max_states = 10'000'000;
};

struct Verdict {
  bool deadlock_free = true;
  bool bundling_clean = true;
  bool delivery_complete = true;
  std::uint64_t states_explored = 0;
  std::uint64_t terminal_states = 0;
  std::set<std::string> outcomes;

  bool ok() const { return deadlock_free && bundling_clean && delivery_complete; }
};

nlohmann::ordered_json to_json(const Verdict& v);

// Untimed exploration of every order in which pending wire events can fire.
// Data words move as single bus events; a request that is matched against
// its data may not fire while that data is still in flight, an under-matched
// one may, which is how bundling faults show up.
//
// Model needs: network(), handle(ev, ctx), fingerprint(), outcome(),
// quiescent(), delivery_complete(). `init(model, ctx)` seeds the first events.
template <class Model, class Init>
Verdict explore(Model model, Init&& init, const OracleOptions& opt = {}) {
  struct Pending {
    sim::ElementId target;
    sim::Action action;
    async::ChannelId channel;
    bool after_bus;
    auto key() const { return std::tuple(target, action.kind, action.value, channel, after_bus); }
  };
  struct State {
    Model model;
    std::vector<Pending> pending;
  };

  std::vector<async::Emission> emissions;
  std::vector<async::Notification> notes;
  async::StepContext ctx{0, &emissions, &notes, nullptr};
  auto absorb = [&](std::vector<Pending>& into) {
    for (const auto& e : emissions) into.push_back({e.target, e.action, e.channel, e.after_bus});
    emissions.clear();
    notes.clear();
  };
  auto fingerprint = [](const State& s) {
    std::vector<std::tuple<sim::ElementId, sim::ActionKind, std::uint64_t, async::ChannelId, bool>> keys;
    for (const auto& p : s.pending) keys.push_back(p.key());
    std::sort(keys.begin(), keys.end());
    Hasher h;
    h.add(s.model.fingerprint());
    for (const auto& [t, k, v, c, a] : keys) {
      h.add(t);
      h.add(static_cast<std::uint64_t>(k) << 1 | a);
      h.add(v);
      h.add(c);
    }
    return h.value();
  };

  model.network().set_bus_mode(true);
  State root{std::move(model), {}};
  init(root.model, ctx);
  absorb(root.pending);

  Verdict v;
  std::unordered_set<std::uint64_t> seen;
  std::vector<State> stack;
  seen.insert(fingerprint(root));
  stack.push_back(std::move(root));
  while (!stack.empty()) {
    State s = std::move(stack.back());
    stack.pop_back();
    ++v.states_explored;
    if (s.model.network().any_bundling_fault()) v.bundling_clean = false;

    bool any = false;
    for (std::size_t i = 0; i < s.pending.size(); ++i) {
      const Pending& p = s.pending[i];
      if (p.after_bus && s.model.network().channel(p.channel).bus_pending) continue;
      bool dup = false;
      for (std::size_t k = 0; k < i && !dup; ++k) dup = s.pending[k].key() == p.key();
      any = true;
      if (dup) continue;
      State n{s.model, s.pending};
      n.pending.erase(n.pending.begin() + static_cast<std::ptrdiff_t>(i));
      n.model.handle(sim::Event{0, 0, p.target, p.action}, ctx);
      absorb(n.pending);
      if (seen.insert(fingerprint(n)).second) {
        if (seen.size() > opt.max_states) {
          throw Error(ErrorCode::StateBudgetExhausted,
                      "more than " + std::to_string(opt.max_states) + " distinct states");
        }
        stack.push_back(std::move(n));
      }
    }
    if (!any) {
      ++v.terminal_states;
      if (!s.pending.empty() || !s.model.quiescent()) v.deadlock_free = false;
      if (!s.model.delivery_complete()) v.delivery_complete = false;
      v.outcomes.insert(s.model.outcome());
    }
  }
  return v;
}

// Pipeline of `stages` carrying `items`, explored from the first send.
Verdict pipeline_oracle(std::span<const async::StageDescriptor> stages, async::Protocol protocol,
                        const std::vector<async::Word>& items, const OracleOptions& opt = {});

struct FabricOracleInput {
  noc::FabricConfig config;
  std::vector<noc::Command> commands;  // injected together, in order; times ignored
  sim::DelayModel wire = sim::DelayModel::uniform(1, 100);
  std::uint64_t discovery_seed = 0;
};

// Instances up to 2x2 with at most 3 commands. Discovery runs timed, the
// workload phase is explored exhaustively with the whole packet as one bus
// word (buffers hold whole packets, so word count only multiplies the
// interleavings). config.bus_width is ignored here.
Verdict fabric_oracle(const FabricOracleInput& in, const OracleOptions& opt = {});

// The same workload phase under timed simulation with one delay seed.
std::string fabric_timed_outcome(const FabricOracleInput& in, std::uint64_t seed);

}  // namespace metasim::scenario
