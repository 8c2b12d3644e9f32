#include "metasim/scenario/oracle.hpp"

#include <stdexcept>

#include "metasim/async/engine.hpp"

namespace metasim::scenario {

nlohmann::ordered_json to_json(const Verdict& v) {
  nlohmann::ordered_json j;
  j["deadlock_free"] = v.deadlock_free;
  j["bundling_clean"] = v.bundling_clean;
  j["delivery_complete"] = v.delivery_complete;
  j["states_explored"] = v.states_explored;
  j["terminal_states"] = v.terminal_states;
  j["distinct_outcomes"] = v.outcomes.size();
  return j;
}

Verdict pipeline_oracle(std::span<const async::StageDescriptor> stages, async::Protocol protocol,
                        const std::vector<async::Word>& items, const OracleOptions& opt) {
  async::Pipeline p = async::compose_pipeline(stages, protocol, sim::DelayModel::fixed(1));
  for (auto w : items) p.push(w);
  return explore(std::move(p), [](async::Pipeline& m, async::StepContext& ctx) { m.start(ctx); }, opt);
}

namespace {

using Sim = async::Simulation<noc::Fabric>;

Sim after_discovery(const FabricOracleInput& in, std::uint64_t seed) {
  if (in.config.width > 2 || in.config.height > 2 || in.commands.size() > 3) {
    throw std::invalid_argument("oracle instances are limited to 2x2 grids and 3 commands");
  }
  Sim sim(noc::Fabric(in.config), in.wire, seed);
  sim.act([](noc::Fabric& f, async::StepContext& ctx) { f.start_discovery(ctx); });
  sim.run();
  sim.model().check_discovery();
  return sim;
}

void inject_all(noc::Fabric& f, const std::vector<noc::Command>& cmds, async::StepContext& ctx) {
  for (const auto& c : cmds) f.inject(c, ctx);
}

}  // namespace

Verdict fabric_oracle(const FabricOracleInput& in, const OracleOptions& opt) {
  FabricOracleInput one_word = in;
  one_word.config.bus_width = noc::kPacketBits;
  Sim sim = after_discovery(one_word, in.discovery_seed);
  return explore(
      sim.model(), [&](noc::Fabric& f, async::StepContext& ctx) { inject_all(f, in.commands, ctx); }, opt);
}

std::string fabric_timed_outcome(const FabricOracleInput& in, std::uint64_t seed) {
  Sim sim = after_discovery(in, seed);
  sim.act([&](noc::Fabric& f, async::StepContext& ctx) { inject_all(f, in.commands, ctx); });
  sim.run();
  return sim.model().outcome();
}

}  // namespace metasim::scenario
