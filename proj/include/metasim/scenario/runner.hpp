#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <vector>

#include "json.hpp"
#include "metasim/metrics/metrics.hpp"
#include "metasim/scenario/scenario.hpp"

namespace metasim::scenario {

struct FabricRun {
  metrics::RunReport report;
  std::vector<std::uint16_t> registers;  // node-major (y, then x), then load
  sim::SimTime discovery_end = 0;        // async only
  std::uint64_t events = 0;              // kernel events, or clock cycles for sync
};

struct DiscoveryResult {
  bool complete = false;
  std::size_t nodes = 0;
  std::size_t assigned = 0;  // nodes whose address equals their grid position
  std::size_t announcements = 0;
  noc::Coord extent;  // max assigned coordinate + 1 on each axis
  sim::SimTime end = 0;
  std::uint64_t events = 0;
};

// Timed discovery only; reports instead of throwing when incomplete.
DiscoveryResult run_discovery(const Scenario& s, std::uint64_t seed);

// Discovery, then `workload` with its times offset by the end of discovery.
// Metrics cover the workload phase. Throws DiscoveryIncomplete and
// EventBudgetExhausted.
FabricRun run_async(const Scenario& s, const std::vector<noc::Command>& workload, std::uint64_t seed);
FabricRun run_sync(const Scenario& s, const std::vector<noc::Command>& workload, std::uint64_t seed);

struct ScenarioResult {
  std::uint64_t seed = 0;
  FabricRun async_run;
  std::optional<FabricRun> sync_run;
  std::optional<metrics::Comparison> comparison;
};

// Async run, plus the clocked run and a comparison when the scenario has a
// sync section or `force_sync` is set.
ScenarioResult run_scenario(const Scenario& s, std::uint64_t seed, bool force_sync = false);

// Independent seeds in parallel; results come back in the order of `seeds`.
std::vector<ScenarioResult> run_seeds(const Scenario& s, const std::vector<std::uint64_t>& seeds,
                                      bool force_sync = false, unsigned threads = 0);

nlohmann::ordered_json to_json(const DiscoveryResult& d);
nlohmann::ordered_json report_json(const Scenario& s, const ScenarioResult& r);

enum class OutputFormat { Json, Csv };
// json: report.json. csv: summary.csv plus <fabric>_histogram.csv (nonzero bins).
std::vector<std::filesystem::path> write_outputs(const Scenario& s, const ScenarioResult& r,
                                                 const std::filesystem::path& dir, OutputFormat fmt);

}  // namespace metasim::scenario
