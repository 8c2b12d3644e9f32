#include "metasim/scenario/scenario.hpp"

#include <algorithm>
#include <initializer_list>
#include <limits>

#include "metasim/error.hpp"

namespace metasim::scenario {

using nlohmann::json;

std::string_view to_string(async::Protocol p) {
  return p == async::Protocol::FourPhase ? "four_phase" : "two_phase";
}

sim::DelayModel DelaySpec::model() const {
  switch (kind) {
    case Kind::Fixed: return sim::DelayModel::fixed(ps);
    case Kind::Uniform: return sim::DelayModel::uniform(min_ps, max_ps);
    case Kind::Scaled:
      if (base.size() != 1) throw Error(ErrorCode::InvalidDelayModel, "scaled delay needs one base model");
      return sim::DelayModel::scaled(base.front().model(), factor);
  }
  return sim::DelayModel::fixed(1);
}

noc::FabricConfig Scenario::fabric_config() const {
  noc::FabricConfig c;
  c.width = width;
  c.height = height;
  c.loads_per_node = loads_per_node;
  c.protocol = protocol;
  c.bus_width = bus_width;
  c.data_delay = delay.model();
  c.setup_margin = setup_margin_ps;
  return c;
}

sync::SyncConfig Scenario::sync_config(std::uint64_t run_seed) const {
  const SyncSpec s = sync.value_or(SyncSpec{});
  sync::SyncConfig c;
  c.width = width;
  c.height = height;
  c.loads_per_node = loads_per_node;
  c.period = s.period_ps;
  c.skew_per_level = s.skew_per_level_ps;
  c.timing = {s.setup_ps, s.hold_ps, s.hop_delay_ps};
  c.seed = run_seed;
  return c;
}

std::vector<noc::Command> Scenario::expand_workload(std::uint64_t run_seed) const {
  std::vector<noc::Command> out = workload;
  if (random_commands && random_commands->count > 0) {
    // A stream separate from the delay sampling of the same seed.
    sim::Rng rng(run_seed ^ 0x5eed'c0de'0000'0001ULL);
    const auto& r = *random_commands;
    for (std::uint32_t i = 0; i < r.count; ++i) {
      noc::Command c;
      c.at = r.t_max_ps ? static_cast<sim::SimTime>(rng.uniform(0, r.t_max_ps)) : 0;
      c.node = {static_cast<std::uint32_t>(rng.uniform(0, width - 1)),
                static_cast<std::uint32_t>(rng.uniform(0, height - 1))};
      if (rng.unit() < r.report_fraction) {
        c.op = noc::Opcode::Report;
        c.payload = static_cast<std::uint32_t>(rng.uniform(0, 0xFFFF));
      } else {
        c.op = noc::Opcode::SetImpedance;
        c.load = static_cast<std::uint32_t>(rng.uniform(0, loads_per_node - 1));
        c.payload = static_cast<std::uint32_t>(rng.uniform(0, 0xFFFF));
      }
      out.push_back(c);
    }
  }
  std::stable_sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.at < b.at; });
  return out;
}

namespace {

[[noreturn]] void fail(const std::string& path, const std::string& what) {
  throw Error(ErrorCode::SchemaError, (path.empty() ? std::string("$") : path) + ": " + what);
}

std::string join(const std::string& path, const std::string& key) {
  return path.empty() ? key : path + "." + key;
}

void only_keys(const json& obj, const std::string& path, std::initializer_list<const char*> keys) {
  if (!obj.is_object()) fail(path, "expected an object");
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    if (std::none_of(keys.begin(), keys.end(), [&](const char* k) { return it.key() == k; })) {
      fail(join(path, it.key()), "unknown field");
    }
  }
}

std::uint64_t get_uint(const json& obj, const std::string& path, const char* key, std::uint64_t def,
                       std::uint64_t lo = 0, std::uint64_t hi = std::numeric_limits<std::int64_t>::max()) {
  if (!obj.contains(key)) return def;
  const json& v = obj.at(key);
  const std::string p = join(path, key);
  if (!v.is_number_integer()) fail(p, "expected a non-negative integer");
  if (v.is_number_unsigned()) {
    const auto u = v.get<std::uint64_t>();
    if (u < lo || u > hi) fail(p, "must be in [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
    return u;
  }
  const auto s = v.get<std::int64_t>();
  if (s < 0 || static_cast<std::uint64_t>(s) < lo || static_cast<std::uint64_t>(s) > hi) {
    fail(p, "must be in [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
  }
  return static_cast<std::uint64_t>(s);
}

double get_double(const json& obj, const std::string& path, const char* key, double def, bool positive) {
  if (!obj.contains(key)) return def;
  const json& v = obj.at(key);
  if (!v.is_number()) fail(join(path, key), "expected a number");
  const double d = v.get<double>();
  if (positive ? !(d > 0.0) : !(d >= 0.0)) fail(join(path, key), positive ? "must be positive" : "must be >= 0");
  return d;
}

std::string get_string(const json& obj, const std::string& path, const char* key, const std::string& def) {
  if (!obj.contains(key)) return def;
  const json& v = obj.at(key);
  if (!v.is_string()) fail(join(path, key), "expected a string");
  return v.get<std::string>();
}

DelaySpec parse_delay(const json& j, const std::string& path) {
  only_keys(j, path, {"kind", "ps", "min_ps", "max_ps", "factor", "base"});
  DelaySpec d;
  const std::string kind = get_string(j, path, "kind", "uniform");
  if (kind == "fixed") {
    d.kind = DelaySpec::Kind::Fixed;
    d.ps = get_uint(j, path, "ps", d.ps, 1);
  } else if (kind == "uniform") {
    d.kind = DelaySpec::Kind::Uniform;
    d.min_ps = get_uint(j, path, "min_ps", d.min_ps, 1);
    d.max_ps = get_uint(j, path, "max_ps", d.max_ps, 1);
    if (d.max_ps < d.min_ps) fail(join(path, "max_ps"), "must be >= min_ps");
  } else if (kind == "scaled") {
    d.kind = DelaySpec::Kind::Scaled;
    d.factor = get_double(j, path, "factor", 1.0, true);
    if (!j.contains("base")) fail(join(path, "base"), "required for a scaled delay");
    d.base.push_back(parse_delay(j.at("base"), join(path, "base")));
  } else {
    fail(join(path, "kind"), "expected fixed, uniform or scaled");
  }
  try {
    d.model();
  } catch (const Error& e) {
    fail(path, e.what());
  }
  return d;
}

json delay_json(const DelaySpec& d) {
  json j;
  switch (d.kind) {
    case DelaySpec::Kind::Fixed:
      j = {{"kind", "fixed"}, {"ps", d.ps}};
      break;
    case DelaySpec::Kind::Uniform:
      j = {{"kind", "uniform"}, {"min_ps", d.min_ps}, {"max_ps", d.max_ps}};
      break;
    case DelaySpec::Kind::Scaled:
      j = {{"kind", "scaled"}, {"factor", d.factor}, {"base", delay_json(d.base.at(0))}};
      break;
  }
  return j;
}

noc::Coord parse_coord(const json& v, const std::string& path) {
  if (!v.is_array() || v.size() != 2 || !v[0].is_number_integer() || !v[1].is_number_integer() ||
      v[0].get<std::int64_t>() < 0 || v[1].get<std::int64_t>() < 0) {
    fail(path, "expected [x, y] with non-negative integers");
  }
  return {static_cast<std::uint32_t>(std::min<std::int64_t>(v[0].get<std::int64_t>(), 0xFFFFFFFF)),
          static_cast<std::uint32_t>(std::min<std::int64_t>(v[1].get<std::int64_t>(), 0xFFFFFFFF))};
}

noc::Command parse_command(const json& j, const std::string& path, const Scenario& s) {
  only_keys(j, path, {"t_ps", "opcode", "dest", "load_index", "payload"});
  noc::Command c;
  c.at = get_uint(j, path, "t_ps", 0);
  const std::string op = get_string(j, path, "opcode", "SET_IMPEDANCE");
  const auto parsed = noc::opcode_from_string(op);
  if (!parsed || (*parsed != noc::Opcode::SetImpedance && *parsed != noc::Opcode::Report)) {
    fail(join(path, "opcode"), "expected SET_IMPEDANCE or REPORT");
  }
  c.op = *parsed;
  if (!j.contains("dest")) fail(join(path, "dest"), "required");
  c.node = parse_coord(j.at("dest"), join(path, "dest"));
  if (c.node.x >= s.width || c.node.y >= s.height) {
    fail(join(path, "dest"), "node " + noc::to_string(c.node) + " is outside the " + std::to_string(s.width) +
                                 "x" + std::to_string(s.height) + " grid");
  }
  if (c.op == noc::Opcode::SetImpedance) {
    c.load = static_cast<std::uint32_t>(get_uint(j, path, "load_index", 0, 0, s.loads_per_node - 1));
  } else if (j.contains("load_index") && get_uint(j, path, "load_index", 0) != 0) {
    fail(join(path, "load_index"), "REPORT carries no load index");
  }
  if (j.contains("payload") && j.at("payload").is_object()) {
    const json& p = j.at("payload");
    const std::string pp = join(path, "payload");
    only_keys(p, pp, {"r", "x"});
    const auto r = get_uint(p, pp, "r", 0, 0, 255);
    const auto x = get_uint(p, pp, "x", 0, 0, 255);
    c.payload = static_cast<std::uint32_t>(r << 8 | x);
  } else {
    c.payload = static_cast<std::uint32_t>(get_uint(j, path, "payload", 0, 0, 0xFFFF));
  }
  return c;
}

}  // namespace

Scenario parse_scenario(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::SchemaError, std::string("$: not valid JSON (") + e.what() + ")");
  }
  return parse_scenario_json(j);
}

Scenario parse_scenario_json(const json& j) {
  only_keys(j, "", {"grid", "protocol", "delay", "setup_margin_ps", "bus_width", "duration_ps", "sync", "workload",
                    "random_commands", "seed", "max_events", "metrics", "outputs"});
  Scenario s;
  if (!j.contains("grid")) fail("grid", "required");
  {
    const json& g = j.at("grid");
    only_keys(g, "grid", {"width", "height", "loads_per_node"});
    if (!g.contains("width")) fail("grid.width", "required");
    if (!g.contains("height")) fail("grid.height", "required");
    s.width = static_cast<unsigned>(get_uint(g, "grid", "width", 0, 1, noc::kMaxGridSide));
    s.height = static_cast<unsigned>(get_uint(g, "grid", "height", 0, 1, noc::kMaxGridSide));
    s.loads_per_node = static_cast<unsigned>(get_uint(g, "grid", "loads_per_node", s.loads_per_node, 1, 16));
  }
  const std::string proto = get_string(j, "", "protocol", "four_phase");
  if (proto == "four_phase") {
    s.protocol = async::Protocol::FourPhase;
  } else if (proto == "two_phase") {
    s.protocol = async::Protocol::TwoPhase;
  } else {
    fail("protocol", "expected four_phase or two_phase");
  }
  if (j.contains("delay")) s.delay = parse_delay(j.at("delay"), "delay");
  s.setup_margin_ps = get_uint(j, "", "setup_margin_ps", s.setup_margin_ps, 1);
  s.bus_width = static_cast<unsigned>(get_uint(j, "", "bus_width", s.bus_width, 1, 64));
  if (64 % s.bus_width != 0) fail("bus_width", "must divide 64");
  s.duration_ps = get_uint(j, "", "duration_ps", s.duration_ps);
  if (j.contains("sync")) {
    const json& y = j.at("sync");
    only_keys(y, "sync", {"period_ps", "skew_per_level_ps", "setup_ps", "hold_ps", "hop_delay_ps"});
    SyncSpec sp;
    sp.period_ps = get_uint(y, "sync", "period_ps", sp.period_ps, 2);
    sp.skew_per_level_ps = get_uint(y, "sync", "skew_per_level_ps", sp.skew_per_level_ps);
    sp.setup_ps = get_uint(y, "sync", "setup_ps", sp.setup_ps, 1);
    sp.hold_ps = get_uint(y, "sync", "hold_ps", sp.hold_ps, 1);
    sp.hop_delay_ps = get_uint(y, "sync", "hop_delay_ps", sp.hop_delay_ps, 1);
    s.sync = sp;
  }
  if (j.contains("workload")) {
    const json& w = j.at("workload");
    if (!w.is_array()) fail("workload", "expected an array");
    for (std::size_t i = 0; i < w.size(); ++i) {
      s.workload.push_back(parse_command(w[i], "workload[" + std::to_string(i) + "]", s));
    }
  }
  if (j.contains("random_commands")) {
    const json& r = j.at("random_commands");
    only_keys(r, "random_commands", {"count", "t_max_ps", "report_fraction"});
    RandomCommands rc;
    rc.count = static_cast<std::uint32_t>(get_uint(r, "random_commands", "count", 0, 0, 10'000'000));
    rc.t_max_ps = get_uint(r, "random_commands", "t_max_ps", 0);
    rc.report_fraction = get_double(r, "random_commands", "report_fraction", 0.0, false);
    if (rc.report_fraction > 1.0) fail("random_commands.report_fraction", "must be in [0, 1]");
    s.random_commands = rc;
  }
  s.seed = get_uint(j, "", "seed", s.seed, 0, std::numeric_limits<std::uint64_t>::max());
  s.max_events = get_uint(j, "", "max_events", s.max_events, 1);
  if (j.contains("metrics")) {
    const json& m = j.at("metrics");
    only_keys(m, "metrics", {"bin_width_ps", "c_eff_f", "vdd"});
    s.metrics.bin_width_ps = get_uint(m, "metrics", "bin_width_ps", s.metrics.bin_width_ps, 1);
    s.metrics.c_eff_f = get_double(m, "metrics", "c_eff_f", s.metrics.c_eff_f, true);
    s.metrics.vdd = get_double(m, "metrics", "vdd", s.metrics.vdd, true);
  }
  if (j.contains("outputs")) {
    const json& o = j.at("outputs");
    only_keys(o, "outputs", {"dir"});
    s.output_dir = get_string(o, "outputs", "dir", s.output_dir);
  }
  return s;
}

nlohmann::ordered_json to_json(const Scenario& s) {
  nlohmann::ordered_json j;
  j["grid"] = {{"width", s.width}, {"height", s.height}, {"loads_per_node", s.loads_per_node}};
  j["protocol"] = to_string(s.protocol);
  j["delay"] = delay_json(s.delay);
  j["setup_margin_ps"] = s.setup_margin_ps;
  j["bus_width"] = s.bus_width;
  j["duration_ps"] = s.duration_ps;
  if (s.sync) {
    j["sync"] = {{"period_ps", s.sync->period_ps},
                 {"skew_per_level_ps", s.sync->skew_per_level_ps},
                 {"setup_ps", s.sync->setup_ps},
                 {"hold_ps", s.sync->hold_ps},
                 {"hop_delay_ps", s.sync->hop_delay_ps}};
  }
  auto w = nlohmann::ordered_json::array();
  for (const auto& c : s.workload) {
    nlohmann::ordered_json e;
    e["t_ps"] = c.at;
    e["opcode"] = noc::to_string(c.op);
    e["dest"] = {c.node.x, c.node.y};
    if (c.op == noc::Opcode::SetImpedance) e["load_index"] = c.load;
    e["payload"] = c.payload;
    w.push_back(e);
  }
  j["workload"] = w;
  if (s.random_commands) {
    j["random_commands"] = {{"count", s.random_commands->count},
                            {"t_max_ps", s.random_commands->t_max_ps},
                            {"report_fraction", s.random_commands->report_fraction}};
  }
  j["seed"] = s.seed;
  j["max_events"] = s.max_events;
  j["metrics"] = {{"bin_width_ps", s.metrics.bin_width_ps}, {"c_eff_f", s.metrics.c_eff_f}, {"vdd", s.metrics.vdd}};
  j["outputs"] = {{"dir", s.output_dir}};
  return j;
}

std::string serialize(const Scenario& s) { return to_json(s).dump(2) + "\n"; }

}  // namespace metasim::scenario
