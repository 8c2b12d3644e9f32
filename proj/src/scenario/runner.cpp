#include "metasim/scenario/runner.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <fstream>
#include <sstream>
#include <thread>

#include "metasim/async/engine.hpp"
#include "metasim/error.hpp"
#include "metasim/noc/fabric.hpp"
#include "metasim/sync/baseline.hpp"

namespace metasim::scenario {

namespace {

using Sim = async::Simulation<noc::Fabric>;

Sim discovered(const Scenario& s, std::uint64_t seed, sim::RunStats& stats) {
  Sim sim(noc::Fabric(s.fabric_config()), s.delay.model(), seed);
  sim.act([](noc::Fabric& f, async::StepContext& ctx) { f.start_discovery(ctx); });
  stats = sim.run(s.max_events);
  return sim;
}

template <class F>
std::vector<std::uint16_t> registers(unsigned w, unsigned h, unsigned loads, F&& get) {
  std::vector<std::uint16_t> out;
  out.reserve(std::size_t{w} * h * loads);
  for (std::uint32_t y = 0; y < h; ++y)
    for (std::uint32_t x = 0; x < w; ++x)
      for (unsigned l = 0; l < loads; ++l) out.push_back(get(noc::Coord{x, y}, l).pack());
  return out;
}

}  // namespace

DiscoveryResult run_discovery(const Scenario& s, std::uint64_t seed) {
  sim::RunStats stats;
  Sim sim = discovered(s, seed, stats);
  const noc::Fabric& f = sim.model();
  DiscoveryResult d;
  d.nodes = std::size_t{s.width} * s.height;
  d.end = stats.final_time;
  d.events = stats.events;
  for (std::uint32_t y = 0; y < s.height; ++y)
    for (std::uint32_t x = 0; x < s.width; ++x) {
      const auto a = f.assigned({x, y});
      if (!a) continue;
      d.assigned += *a == noc::Coord{x, y};
      d.extent.x = std::max(d.extent.x, a->x + 1);
      d.extent.y = std::max(d.extent.y, a->y + 1);
    }
  for (const auto& p : f.gateway_received()) d.announcements += p.opcode == noc::Opcode::Announce;
  d.complete = f.discovery_complete();
  return d;
}

FabricRun run_async(const Scenario& s, const std::vector<noc::Command>& workload, std::uint64_t seed) {
  sim::RunStats first;
  Sim sim = discovered(s, seed, first);
  sim.model().check_discovery();
  const sim::SimTime origin = sim.now();
  sim.ledger().reset(origin);
  for (const auto& c : workload) sim.poke(origin + c.at, noc::Fabric::kCommandPoke, sim.model().schedule(c));
  const auto second = sim.run(s.max_events);

  const noc::Fabric& f = sim.model();
  FabricRun out;
  out.discovery_end = origin;
  out.events = first.events + second.events;
  out.report = metrics::make_report("async", sim.ledger(), f.injections(), f.deliveries(), sim.ledger().last_time(),
                                    s.energy_params(), s.metrics.bin_width_ps);
  out.registers = registers(s.width, s.height, s.loads_per_node,
                            [&](noc::Coord c, unsigned l) { return f.load_state(c, l); });
  return out;
}

FabricRun run_sync(const Scenario& s, const std::vector<noc::Command>& workload, std::uint64_t seed) {
  sync::SyncFabric f(s.sync_config(seed));
  for (const auto& c : workload) f.schedule(c);
  f.run(s.duration_ps, s.max_events);
  FabricRun out;
  out.events = f.cycles();
  out.report = metrics::make_report("sync", f.ledger(), f.injections(), f.deliveries(), f.end_time(),
                                    s.energy_params(), s.metrics.bin_width_ps);
  out.registers = registers(s.width, s.height, s.loads_per_node,
                            [&](noc::Coord c, unsigned l) { return f.load_state(c, l); });
  return out;
}

ScenarioResult run_scenario(const Scenario& s, std::uint64_t seed, bool force_sync) {
  const auto workload = s.expand_workload(seed);
  ScenarioResult r;
  r.seed = seed;
  r.async_run = run_async(s, workload, seed);
  if (s.sync || force_sync) {
    r.sync_run = run_sync(s, workload, seed);
    r.comparison = metrics::compare_reports(r.async_run.report, r.sync_run->report);
  }
  return r;
}

std::vector<ScenarioResult> run_seeds(const Scenario& s, const std::vector<std::uint64_t>& seeds, bool force_sync,
                                      unsigned threads) {
  std::vector<ScenarioResult> out(seeds.size());
  std::vector<std::exception_ptr> errors(seeds.size());
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = std::min<unsigned>(threads, static_cast<unsigned>(std::max<std::size_t>(1, seeds.size())));
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i; (i = next.fetch_add(1)) < seeds.size();) {
      try {
        out[i] = run_scenario(s, seeds[i], force_sync);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  for (unsigned t = 1; t < threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return out;
}

nlohmann::ordered_json to_json(const DiscoveryResult& d) {
  nlohmann::ordered_json j;
  j["complete"] = d.complete;
  j["nodes"] = d.nodes;
  j["assigned"] = d.assigned;
  j["announcements"] = d.announcements;
  j["extent"] = {d.extent.x, d.extent.y};
  j["end_ps"] = d.end;
  j["events"] = d.events;
  return j;
}

nlohmann::ordered_json report_json(const Scenario& s, const ScenarioResult& r) {
  Scenario echo = s;
  echo.seed = r.seed;
  nlohmann::ordered_json j;
  j["scenario"] = to_json(echo);
  j["seed"] = r.seed;
  auto a = metrics::to_json(r.async_run.report);
  a["discovery_end_ps"] = r.async_run.discovery_end;
  a["events"] = r.async_run.events;
  j["async"] = a;
  if (r.sync_run) {
    auto y = metrics::to_json(r.sync_run->report);
    y["cycles"] = r.sync_run->events;
    j["sync"] = y;
  }
  if (r.comparison) j["comparison"] = metrics::to_json(*r.comparison);
  return j;
}

namespace {

void write_file(const std::filesystem::path& p, const std::string& text) {
  std::ofstream os(p, std::ios::binary);
  if (!os) throw std::runtime_error("cannot write " + p.string());
  os << text;
}

std::string sparse_csv(const metrics::EmissionHistogram& h) {
  std::ostringstream os;
  os << "bin_start_ps,count\n";
  for (std::size_t i = 0; i < h.counts.size(); ++i) {
    if (h.counts[i]) os << h.origin + i * h.bin_width << ',' << h.counts[i] << '\n';
  }
  return os.str();
}

void summary_row(std::ostream& os, const metrics::RunReport& r) {
  os << r.fabric << ',' << r.energy.total_j << ',' << r.energy.of(metrics::WireClass::Data) << ','
     << r.energy.of(metrics::WireClass::Handshake) << ',' << r.energy.of(metrics::WireClass::Clock) << ','
     << r.idle_energy_j << ',' << r.histogram.peak_to_average << ',' << r.latency.min << ',' << r.latency.mean << ','
     << r.latency.max << ',' << r.injected << ',' << r.delivered << ',' << r.clock_power_share << '\n';
}

}  // namespace

std::vector<std::filesystem::path> write_outputs(const Scenario& s, const ScenarioResult& r,
                                                 const std::filesystem::path& dir, OutputFormat fmt) {
  std::filesystem::create_directories(dir);
  std::vector<std::filesystem::path> written;
  if (fmt == OutputFormat::Json) {
    written.push_back(dir / "report.json");
    write_file(written.back(), report_json(s, r).dump(2) + "\n");
    return written;
  }
  std::ostringstream os;
  os.precision(17);
  os << "fabric,energy_total_j,energy_data_j,energy_handshake_j,energy_clock_j,idle_energy_j,peak_to_average,"
        "latency_min_ps,latency_mean_ps,latency_max_ps,injected,delivered,clock_power_share\n";
  summary_row(os, r.async_run.report);
  if (r.sync_run) summary_row(os, r.sync_run->report);
  written.push_back(dir / "summary.csv");
  write_file(written.back(), os.str());
  written.push_back(dir / "async_histogram.csv");
  write_file(written.back(), sparse_csv(r.async_run.report.histogram));
  if (r.sync_run) {
    written.push_back(dir / "sync_histogram.csv");
    write_file(written.back(), sparse_csv(r.sync_run->report.histogram));
  }
  return written;
}

}  // namespace metasim::scenario
