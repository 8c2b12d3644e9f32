// metasim: scenario front end. Exit codes: 0 ok, 2 schema/usage, 3 simulation
// error, 4 oracle property failure.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"
#include "metasim/error.hpp"
#include "metasim/noc/packet.hpp"
#include "metasim/scenario/oracle.hpp"
#include "metasim/scenario/runner.hpp"
#include "metasim/scenario/scenario.hpp"

namespace ms = metasim;
namespace sc = metasim::scenario;

namespace {

constexpr int kExitSchema = 2;
constexpr int kExitSimulation = 3;
constexpr int kExitOracle = 4;

struct Loaded {
  sc::Scenario scenario;
  std::uint64_t seed;
};

std::uint64_t parse_seed(const std::string& text, const char* what) {
  std::size_t used = 0;
  std::uint64_t v = 0;
  try {
    v = std::stoull(text, &used, 0);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != text.size() || text.front() == '-') {
    throw ms::Error(ms::ErrorCode::SchemaError, std::string(what) + ": not an unsigned integer: " + text);
  }
  return v;
}

// --seed beats the file's seed, which beats METASIM_SEED.
Loaded load(const std::string& path, const std::optional<std::string>& seed_flag) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ms::Error(ms::ErrorCode::SchemaError, "cannot read " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  Loaded l{sc::parse_scenario(ss.str()), 0};
  const bool file_has_seed = nlohmann::json::parse(ss.str()).contains("seed");
  if (seed_flag) {
    l.seed = parse_seed(*seed_flag, "--seed");
  } else if (file_has_seed) {
    l.seed = l.scenario.seed;
  } else if (const char* env = std::getenv("METASIM_SEED"); env && *env) {
    l.seed = parse_seed(env, "METASIM_SEED");
  } else {
    l.seed = l.scenario.seed;
  }
  return l;
}

sc::OutputFormat format_of(const std::string& f) { return f == "csv" ? sc::OutputFormat::Csv : sc::OutputFormat::Json; }

void print_written(const std::vector<std::filesystem::path>& files) {
  for (const auto& f : files) std::cout << f.string() << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Discrete-event simulator for an asynchronous metasurface control network"};
  app.require_subcommand(1);

  std::string scenario_path, out_dir, format = "json";
  std::optional<std::string> seed;
  unsigned sweep = 1, threads = 0;
  std::uint64_t max_states = 10'000'000;
  double freq = 0;

  auto common = [&](CLI::App* sub, bool outputs) {
    sub->add_option("--scenario", scenario_path, "scenario JSON file")->required()->check(CLI::ExistingFile);
    sub->add_option("--seed", seed, "run seed (overrides the file and METASIM_SEED)");
    if (outputs) {
      sub->add_option("--out", out_dir, "output directory (default: the scenario's outputs.dir)");
      sub->add_option("--format", format, "report format")->check(CLI::IsMember({"json", "csv"}));
    }
  };

  auto* run = app.add_subcommand("run", "discovery, then the workload; writes reports");
  common(run, true);
  run->add_option("--sweep", sweep, "run this many consecutive seeds in parallel")->check(CLI::Range(1u, 100000u));
  run->add_option("--threads", threads, "worker threads for --sweep (0: all cores)");

  auto* discover = app.add_subcommand("discover", "address discovery only; prints a JSON summary");
  common(discover, false);

  auto* compare = app.add_subcommand("compare", "paired async and clocked runs plus the comparison");
  common(compare, true);

  auto* oracle = app.add_subcommand("oracle", "exhaustive check of a grid up to 2x2 with up to 3 commands");
  common(oracle, false);
  oracle->add_option("--max-states", max_states, "state budget");

  auto* size = app.add_subcommand("size", "grid dimensions for a carrier frequency");
  size->add_option("--freq-hz", freq, "carrier frequency in Hz")->required()->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitSchema;
  }

  try {
    if (*size) {
      const auto g = ms::noc::size_grid(freq);
      nlohmann::ordered_json j;
      j["frequency_hz"] = freq;
      j["wavelength_m"] = g.wavelength_m;
      j["max_atom_pitch_m"] = g.max_atom_pitch_m;
      j["min_atoms_per_side"] = g.min_atoms_per_side;
      std::cout << j.dump(2) << '\n';
      return 0;
    }

    const Loaded l = load(scenario_path, seed);
    const sc::Scenario& s = l.scenario;
    const std::filesystem::path out = out_dir.empty() ? s.output_dir : out_dir;

    if (*discover) {
      const auto d = sc::run_discovery(s, l.seed);
      std::cout << sc::to_json(d).dump(2) << '\n';
      if (!d.complete) {
        std::cerr << "discovery incomplete: " << d.assigned << " of " << d.nodes << " nodes addressed\n";
        return kExitSimulation;
      }
      return 0;
    }

    if (*run) {
      if (sweep == 1) {
        print_written(sc::write_outputs(s, sc::run_scenario(s, l.seed), out, format_of(format)));
        return 0;
      }
      std::vector<std::uint64_t> seeds;
      for (unsigned i = 0; i < sweep; ++i) seeds.push_back(l.seed + i);
      const auto results = sc::run_seeds(s, seeds, false, threads);
      for (const auto& r : results) {
        print_written(sc::write_outputs(s, r, out / ("seed_" + std::to_string(r.seed)), format_of(format)));
      }
      return 0;
    }

    if (*compare) {
      const auto r = sc::run_scenario(s, l.seed, true);
      sc::write_outputs(s, r, out, format_of(format));
      std::cout << ms::metrics::to_json(*r.comparison).dump(2) << '\n';
      return 0;
    }

    if (*oracle) {
      sc::FabricOracleInput in;
      in.config = s.fabric_config();
      in.wire = s.delay.model();
      in.discovery_seed = l.seed;
      in.commands = s.workload;
      const auto v = sc::fabric_oracle(in, {max_states});
      std::cout << sc::to_json(v).dump(2) << '\n';
      return v.ok() ? 0 : kExitOracle;
    }
  } catch (const ms::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return e.code() == ms::ErrorCode::SchemaError ? kExitSchema : kExitSimulation;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitSchema;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitSimulation;
  }
  return 0;
}
