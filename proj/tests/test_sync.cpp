#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cstdlib>
#include <map>

#include "metasim/error.hpp"
#include "metasim/metrics/metrics.hpp"
#include "metasim/sim/delay.hpp"
#include "metasim/sync/baseline.hpp"

using namespace metasim;
using namespace metasim::sync;
using metrics::WireClass;
using noc::Opcode;

TEST_CASE("clock tree shape and bounds") {
  const auto t = build_clock_tree(2, 2, 10'000, 10, 3);
  CHECK(t.levels == 2);
  CHECK(t.wire_count() == 6);
  for (std::uint32_t y = 0; y < 2; ++y)
    for (std::uint32_t x = 0; x < 2; ++x) CHECK(std::llabs(t.leaf_skew({x, y})) <= 20);

  const auto one = build_clock_tree(1, 1, 10'000, 10, 3);
  CHECK(one.levels == 0);
  CHECK(one.wire_count() == 1);

  for (auto [w, h] : {std::pair{3u, 3u}, {5u, 2u}, {16u, 16u}, {7u, 1u}}) {
    const auto tr = build_clock_tree(w, h, 10'000, 5, 1);
    unsigned lv = 0;
    while ((1u << lv) < w * h) ++lv;
    CHECK(tr.levels == lv);
    CHECK(tr.wire_count() == 2 * std::size_t{w} * h - 2);
  }
}

TEST_CASE("zero skew per level gives a skew-free tree") {
  const auto t = build_clock_tree(9, 4, 10'000, 0, 77);
  for (std::uint32_t y = 0; y < 4; ++y)
    for (std::uint32_t x = 0; x < 9; ++x) CHECK(t.leaf_skew({x, y}) == 0);
  CHECK(t.insertion == 0);
}

TEST_CASE("seeded skew maps are reproducible") {
  const auto a = build_clock_tree(16, 16, 10'000, 5, 42);
  const auto b = build_clock_tree(16, 16, 10'000, 5, 42);
  const auto c = build_clock_tree(16, 16, 10'000, 5, 43);
  bool differs = false;
  for (std::uint32_t y = 0; y < 16; ++y)
    for (std::uint32_t x = 0; x < 16; ++x) {
      REQUIRE(a.leaf_skew({x, y}) == b.leaf_skew({x, y}));
      differs |= a.leaf_skew({x, y}) != c.leaf_skew({x, y});
      REQUIRE(a.arrival({x, y}) <= 2 * a.insertion);
    }
  CHECK(differs);
}

TEST_CASE("timing inequalities") {
  TimingParams p{50, 50, 1000};
  CHECK(check_timing(build_clock_tree(4, 4, 10'000, 0, 1), p).empty());
  CHECK(check_timing(build_clock_tree(4, 4, 10'000, 0, 1), p, TimingMode::WorstCase).empty());

  // two nodes whose capture clock lags the launch clock by 1.2 ns
  auto t = build_clock_tree(2, 1, 10'000, 0, 1);
  t.nodes[t.leaf_of[1]].skew = 1200;
  const auto v = check_timing(t, {50, 300, 1000});
  REQUIRE(v.size() == 1);
  CHECK(v[0].kind == TimingViolation::Kind::Hold);
  CHECK(v[0].from == noc::Coord{0, 0});
  CHECK(v[0].to == noc::Coord{1, 0});
  CHECK(v[0].margin == 500);  // 0.3 + 1.2 - 1.0 ns

  // a short period turns the same pair into a setup problem in the other direction
  auto s = build_clock_tree(2, 1, 1'500, 0, 1);
  s.nodes[s.leaf_of[1]].skew = 600;
  const auto w = check_timing(s, {100, 50, 1000});
  REQUIRE(w.size() == 1);
  CHECK(w[0].kind == TimingViolation::Kind::Setup);
  CHECK(w[0].from == noc::Coord{1, 0});
  CHECK(w[0].margin == 200);  // 1000 + 100 - (1500 - 600)
}

TEST_CASE("worst-case bound covers every sampled skew") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto t = build_clock_tree(12, 9, 10'000, 20, seed);
    for (std::uint32_t y = 0; y < 9; ++y)
      for (std::uint32_t x = 0; x + 1 < 12; ++x) {
        const auto d = std::llabs(t.leaf_skew({x, y}) - t.leaf_skew({x + 1, y}));
        REQUIRE(d <= t.unshared_skew_bound({x, y}, {x + 1, y}));
      }
  }
}

TEST_CASE("idle grid burns only clock") {
  SyncConfig cfg;
  cfg.width = 4;
  cfg.height = 4;
  SyncFabric f(cfg);
  f.run(100 * cfg.period);
  CHECK(f.cycles() == 100);
  CHECK(f.ledger().count(WireClass::Data) == 0);
  const auto e = metrics::energy(f.ledger());
  CHECK(e.transitions == 200 * f.tree().wire_count());
  CHECK(e.of(WireClass::Clock) == doctest::Approx(e.total_j));
  CHECK(e.total_j > 0.0);
}

TEST_CASE("one packet takes one cycle per register transfer") {
  for (auto [x, y] : {std::pair{0u, 0u}, {7u, 7u}, {3u, 5u}}) {
    SyncConfig cfg;
    cfg.width = 8;
    cfg.height = 8;
    SyncFabric f(cfg);
    f.schedule({0, Opcode::SetImpedance, {x, y}, 1, 0x0102});
    std::uint64_t ticks = 0;
    while (f.deliveries().empty()) {
      f.clock_tick();
      ++ticks;
    }
    // gateway ingress, x + y mesh links, then the local write
    CHECK(ticks == x + y + 2);
    CHECK(f.load_state({x, y}, 1).pack() == 0x0102);
  }
}

TEST_CASE("reports travel back to the gateway") {
  SyncConfig cfg;
  cfg.width = 5;
  cfg.height = 3;
  SyncFabric f(cfg);
  f.schedule({0, Opcode::Report, {4, 2}, 0, 9});
  f.run(0);
  REQUIRE(f.deliveries().size() == 1);
  CHECK(f.deliveries()[0].packet.src == noc::Coord{4, 2});
  CHECK(f.cycles() == 4 + 2 + 2);
}

TEST_CASE("random workload lands in order with contention") {
  SyncConfig cfg;
  cfg.width = 6;
  cfg.height = 6;
  SyncFabric f(cfg);
  sim::Rng rng(8);
  std::map<std::pair<std::uint32_t, std::uint32_t>, std::vector<std::uint32_t>> expect;
  std::vector<noc::Command> cmds;
  for (int i = 0; i < 200; ++i) {
    noc::Command c;
    c.at = static_cast<SimTime>(rng.uniform(0, 50'000));
    if (rng.uniform(0, 3) == 0) {
      c.op = Opcode::Report;
      c.node = {static_cast<std::uint32_t>(rng.uniform(0, 5)), static_cast<std::uint32_t>(rng.uniform(0, 5))};
      c.payload = static_cast<std::uint32_t>(i);
    } else {
      c.node = {static_cast<std::uint32_t>(rng.uniform(0, 5)), static_cast<std::uint32_t>(rng.uniform(0, 5))};
      c.load = static_cast<std::uint32_t>(rng.uniform(0, 3));
      c.payload = static_cast<std::uint32_t>(rng.uniform(0, 0xFFFF));
    }
    cmds.push_back(c);
  }
  std::stable_sort(cmds.begin(), cmds.end(), [](auto& a, auto& b) { return a.at < b.at; });
  for (const auto& c : cmds) {
    f.schedule(c);
    if (c.op == Opcode::SetImpedance) expect[{c.node.x, c.node.y}].push_back(c.load << 16 | c.payload);
  }
  f.run(0);
  CHECK(f.deliveries().size() == cmds.size());
  CHECK_NOTHROW(metrics::latency_report(f.injections(), f.deliveries()));
  for (auto& [k, v] : expect) {
    std::vector<std::uint32_t> got;
    for (const auto& a : f.audit({k.first, k.second})) got.push_back(a.load << 16 | a.code.pack());
    CHECK(got == v);
  }
}

TEST_CASE("bad commands are rejected") {
  SyncFabric f(SyncConfig{});
  try {
    f.schedule({0, Opcode::SetImpedance, {0, 2}, 0, 0});
    FAIL("expected DestOutOfRange");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::DestOutOfRange);
  }
}
