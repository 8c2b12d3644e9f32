#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "metasim/async/primitives.hpp"
#include "metasim/metrics/metrics.hpp"
#include "metasim/noc/fabric.hpp"
#include "metasim/sim/delay.hpp"
#include "metasim/sync/baseline.hpp"

namespace metasim::scenario {

struct DelaySpec {
  enum class Kind : std::uint8_t { Fixed, Uniform, Scaled } kind = Kind::Uniform;
  sim::Duration ps = 50;       // fixed
  sim::Duration min_ps = 10;   // uniform
  sim::Duration max_ps = 100;  // uniform
  double factor = 1.0;         // scaled
  std::vector<DelaySpec> base; // scaled: exactly one element

  sim::DelayModel model() const;
  friend bool operator==(const DelaySpec&, const DelaySpec&) = default;
};

struct SyncSpec {
  sim::Duration period_ps = 10'000;
  sim::Duration skew_per_level_ps = 10;
  sim::Duration setup_ps = 100;
  sim::Duration hold_ps = 100;
  sim::Duration hop_delay_ps = 1000;
  friend bool operator==(const SyncSpec&, const SyncSpec&) = default;
};

// Commands drawn from the run seed on top of the explicit workload.
struct RandomCommands {
  std::uint32_t count = 0;
  sim::SimTime t_max_ps = 0;     // injection times uniform in [0, t_max]
  double report_fraction = 0.0;  // share of REPORT commands
  friend bool operator==(const RandomCommands&, const RandomCommands&) = default;
};

struct MetricsSpec {
  sim::Duration bin_width_ps = 100;
  double c_eff_f = 10e-15;
  double vdd = 1.0;
  friend bool operator==(const MetricsSpec&, const MetricsSpec&) = default;
};

struct Scenario {
  unsigned width = 2;
  unsigned height = 2;
  unsigned loads_per_node = noc::kDefaultLoadsPerNode;
  async::Protocol protocol = async::Protocol::FourPhase;
  DelaySpec delay;
  sim::Duration setup_margin_ps = 10;
  unsigned bus_width = noc::kDefaultBusWidth;
  sim::SimTime duration_ps = 0;  // minimum measured window after discovery
  std::optional<SyncSpec> sync;
  std::vector<noc::Command> workload;
  std::optional<RandomCommands> random_commands;
  std::uint64_t seed = 1;
  std::uint64_t max_events = sim::kDefaultMaxEvents;
  MetricsSpec metrics;
  std::string output_dir = "out";

  friend bool operator==(const Scenario&, const Scenario&) = default;

  noc::FabricConfig fabric_config() const;
  sync::SyncConfig sync_config(std::uint64_t seed) const;
  metrics::EnergyParams energy_params() const { return {metrics.c_eff_f, metrics.vdd}; }
  // Explicit workload plus the seeded random commands, stably sorted by time.
  std::vector<noc::Command> expand_workload(std::uint64_t seed) const;
};

// Throws SchemaError whose message starts with the JSON path of the first
// offending field, e.g. "workload[0].dest: ...".
Scenario parse_scenario(const std::string& text);
Scenario parse_scenario_json(const nlohmann::json& j);
nlohmann::ordered_json to_json(const Scenario& s);
std::string serialize(const Scenario& s);

std::string_view to_string(async::Protocol p);

}  // namespace metasim::scenario
