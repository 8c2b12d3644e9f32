#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "metasim/error.hpp"
#include "metasim/scenario/runner.hpp"
#include "metasim/scenario/scenario.hpp"

using namespace metasim;
using namespace metasim::scenario;

namespace {

std::string schema_error(const std::string& text) {
  try {
    parse_scenario(text);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::SchemaError) return e.detail();
    return std::string("wrong code: ") + e.what();
  }
  return "no error";
}

bool starts_with(const std::string& s, const std::string& prefix) { return s.rfind(prefix, 0) == 0; }

DelaySpec random_delay(sim::Rng& rng, int depth) {
  DelaySpec d;
  switch (depth < 2 ? rng.uniform(0, 2) : rng.uniform(0, 1)) {
    case 0:
      d.kind = DelaySpec::Kind::Fixed;
      d.ps = rng.uniform(1, 500);
      break;
    case 1:
      d.kind = DelaySpec::Kind::Uniform;
      d.min_ps = rng.uniform(1, 50);
      d.max_ps = d.min_ps + rng.uniform(0, 200);
      break;
    default:
      d.kind = DelaySpec::Kind::Scaled;
      d.factor = 0.25 + rng.unit() * 4;
      d.base.push_back(random_delay(rng, depth + 1));
  }
  return d;
}

Scenario random_scenario(sim::Rng& rng) {
  Scenario s;
  s.width = static_cast<unsigned>(rng.uniform(1, 64));
  s.height = static_cast<unsigned>(rng.uniform(1, 64));
  s.loads_per_node = static_cast<unsigned>(rng.uniform(1, 16));
  s.protocol = rng.coin() ? async::Protocol::TwoPhase : async::Protocol::FourPhase;
  s.delay = random_delay(rng, 0);
  s.setup_margin_ps = rng.uniform(1, 40);
  const unsigned widths[] = {1, 2, 4, 8, 16, 32, 64};
  s.bus_width = widths[rng.uniform(0, 6)];
  s.duration_ps = rng.uniform(0, 1'000'000'000);
  if (rng.coin()) {
    SyncSpec y;
    y.period_ps = rng.uniform(2, 100'000);
    y.skew_per_level_ps = rng.uniform(0, 100);
    y.setup_ps = rng.uniform(1, 500);
    y.hold_ps = rng.uniform(1, 500);
    y.hop_delay_ps = rng.uniform(1, 5000);
    s.sync = y;
  }
  for (auto n = rng.uniform(0, 6); n > 0; --n) {
    noc::Command c;
    c.at = rng.uniform(0, 1'000'000);
    c.node = {static_cast<std::uint32_t>(rng.uniform(0, s.width - 1)),
              static_cast<std::uint32_t>(rng.uniform(0, s.height - 1))};
    c.op = rng.coin() ? noc::Opcode::Report : noc::Opcode::SetImpedance;
    c.load = c.op == noc::Opcode::SetImpedance ? static_cast<std::uint32_t>(rng.uniform(0, s.loads_per_node - 1)) : 0;
    c.payload = static_cast<std::uint32_t>(rng.uniform(0, 0xFFFF));
    s.workload.push_back(c);
  }
  if (rng.coin()) s.random_commands = RandomCommands{static_cast<std::uint32_t>(rng.uniform(0, 500)),
                                                     rng.uniform(0, 1'000'000), rng.unit()};
  s.seed = rng.next();
  s.max_events = rng.uniform(1, 1'000'000'000);
  s.metrics.bin_width_ps = rng.uniform(1, 10'000);
  s.metrics.c_eff_f = 1e-15 * (1 + rng.unit() * 50);
  s.metrics.vdd = 0.3 + rng.unit();
  s.output_dir = "out" + std::to_string(rng.uniform(0, 99));
  return s;
}

}  // namespace

TEST_CASE("minimal scenario takes the documented defaults") {
  const Scenario s = parse_scenario(R"({"grid": {"width": 4, "height": 3}})");
  CHECK(s.width == 4);
  CHECK(s.height == 3);
  CHECK(s.loads_per_node == 4);
  CHECK(s.protocol == async::Protocol::FourPhase);
  CHECK(s.delay.kind == DelaySpec::Kind::Uniform);
  CHECK(s.delay.min_ps == 10);
  CHECK(s.delay.max_ps == 100);
  CHECK(s.bus_width == 16);
  CHECK_FALSE(s.sync.has_value());
  CHECK(s.workload.empty());
  CHECK(s.seed == 1);
  CHECK(s.max_events == 100'000'000);
  CHECK(s.metrics.bin_width_ps == 100);
  CHECK(s.output_dir == "out");
}

TEST_CASE("workload entries") {
  const Scenario s = parse_scenario(R"({
    "grid": {"width": 4, "height": 4},
    "workload": [
      {"t_ps": 500, "opcode": "SET_IMPEDANCE", "dest": [3, 1], "load_index": 2, "payload": {"r": 171, "x": 205}},
      {"t_ps": 100, "opcode": "REPORT", "dest": [0, 2], "payload": 66}
    ]})");
  REQUIRE(s.workload.size() == 2);
  CHECK(s.workload[0].node == noc::Coord{3, 1});
  CHECK(s.workload[0].payload == 0xABCD);
  CHECK(s.workload[1].op == noc::Opcode::Report);
  const auto w = s.expand_workload(1);
  CHECK(w[0].at == 100);
  CHECK(w[1].at == 500);
}

TEST_CASE("schema errors name the offending field") {
  const std::string bad_dest =
      R"({"grid": {"width": 2, "height": 2}, "workload": [{"opcode": "SET_IMPEDANCE", "dest": [5, 0]}]})";
  const auto msg = schema_error(bad_dest);
  CHECK(starts_with(msg, "workload[0].dest:"));
  CHECK(msg.find("(5,0)") != std::string::npos);

  CHECK(starts_with(schema_error(R"({"grid": {"width": 2}})"), "grid.height:"));
  CHECK(starts_with(schema_error(R"({"grid": {"width": 0, "height": 2}})"), "grid.width:"));
  CHECK(starts_with(schema_error(R"({"grid": {"width": 2, "height": 2}, "colour": 1})"), "colour:"));
  CHECK(starts_with(schema_error(R"({"grid": {"width": 2, "height": 2}, "protocol": "3p"})"), "protocol:"));
  CHECK(starts_with(schema_error(R"({"grid": {"width": 2, "height": 2}, "bus_width": 24})"), "bus_width:"));
  CHECK(starts_with(schema_error(R"({"grid": {"width": 2, "height": 2}, "delay": {"kind": "uniform", "min_ps": 9, "max_ps": 3}})"),
                    "delay.max_ps:"));
  CHECK(starts_with(schema_error(R"({"grid": {"width": 2, "height": 2}, "delay": {"kind": "scaled"}})"),
                    "delay.base:"));
  CHECK(starts_with(
      schema_error(R"({"grid": {"width": 2, "height": 2}, "workload": [{"dest": [1, 1], "load_index": 4}]})"),
      "workload[0].load_index:"));
  CHECK(starts_with(
      schema_error(R"({"grid": {"width": 2, "height": 2}, "workload": [{"dest": [1, 1], "payload": {"r": 256}}]})"),
      "workload[0].payload.r:"));
  CHECK(starts_with(schema_error(R"({"grid": {"width": 2, "height": 2}, "seed": -1})"), "seed:"));
  CHECK(starts_with(schema_error("{not json"), "$:"));
  CHECK(starts_with(schema_error("[1, 2]"), "$:"));
}

TEST_CASE("serialize then parse is the identity") {
  sim::Rng rng(99);
  for (int i = 0; i < 500; ++i) {
    const Scenario s = random_scenario(rng);
    const std::string text = serialize(s);
    CAPTURE(text);
    const Scenario back = parse_scenario(text);
    CHECK(back == s);
    CHECK(serialize(back) == text);
  }
}

TEST_CASE("random commands are seeded and sorted") {
  Scenario s;
  s.width = 8;
  s.height = 8;
  s.random_commands = RandomCommands{200, 50'000, 0.25};
  const auto a = s.expand_workload(7);
  CHECK(a.size() == 200);
  CHECK(a == s.expand_workload(7));
  CHECK(a != s.expand_workload(8));
  CHECK(std::is_sorted(a.begin(), a.end(), [](auto& x, auto& y) { return x.at < y.at; }));
  std::size_t reports = 0;
  for (const auto& c : a) {
    CHECK(c.node.x < 8);
    CHECK(c.node.y < 8);
    reports += c.op == noc::Opcode::Report;
  }
  CHECK(reports > 20);
  CHECK(reports < 80);
}

TEST_CASE("runs are reproducible and deliver everything") {
  Scenario s = parse_scenario(R"({
    "grid": {"width": 8, "height": 8},
    "random_commands": {"count": 100, "t_max_ps": 200000, "report_fraction": 0.2},
    "sync": {}
  })");
  const auto a = run_scenario(s, 7);
  CHECK(a.async_run.report.injected == 100);
  CHECK(a.async_run.report.delivered == 100);
  REQUIRE(a.sync_run.has_value());
  CHECK(a.sync_run->report.delivered == 100);
  CHECK(a.async_run.registers == a.sync_run->registers);

  const auto b = run_scenario(s, 7);
  CHECK(report_json(s, a).dump() == report_json(s, b).dump());
  const auto c = run_scenario(s, 8);
  CHECK(report_json(s, a).dump() != report_json(s, c).dump());

  const auto batch = run_seeds(s, {8, 7}, false, 2);
  REQUIRE(batch.size() == 2);
  CHECK(batch[1].seed == 7);
  CHECK(report_json(s, batch[1]).dump() == report_json(s, a).dump());
  CHECK(report_json(s, batch[0]).dump() == report_json(s, c).dump());
}

TEST_CASE("discovery report") {
  Scenario s;
  s.width = 5;
  s.height = 3;
  const auto d = run_discovery(s, 3);
  CHECK(d.complete);
  CHECK(d.nodes == 15);
  CHECK(d.assigned == 15);
  CHECK(d.announcements == 15);
  CHECK(d.extent == noc::Coord{5, 3});
  CHECK(to_json(d)["complete"] == true);
}

TEST_CASE("output files") {
  Scenario s = parse_scenario(R"({"grid": {"width": 2, "height": 2}, "sync": {},
    "workload": [{"dest": [1, 1], "payload": 5}]})");
  const auto r = run_scenario(s, 1);
  const auto dir = std::filesystem::temp_directory_path() / "metasim_test_outputs";
  std::filesystem::remove_all(dir);

  const auto js = write_outputs(s, r, dir / "j", OutputFormat::Json);
  REQUIRE(js.size() == 1);
  std::ifstream in(js[0]);
  const auto j = nlohmann::json::parse(in);
  CHECK(j["seed"] == 1);
  CHECK(parse_scenario_json(j["scenario"]) == s);
  CHECK(j.contains("comparison"));

  const auto cs = write_outputs(s, r, dir / "c", OutputFormat::Csv);
  CHECK(cs.size() == 3);
  std::ifstream sum(dir / "c" / "summary.csv");
  std::stringstream ss;
  ss << sum.rdbuf();
  const std::string text = ss.str();
  CHECK(starts_with(text, "fabric,energy_total_j,"));
  CHECK(text.find("\nasync,") != std::string::npos);
  CHECK(text.find("\nsync,") != std::string::npos);
  std::filesystem::remove_all(dir);
}
