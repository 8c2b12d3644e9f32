#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <deque>
#include <utility>
#include <vector>

#include "metasim/async/channel.hpp"
#include "metasim/async/engine.hpp"
#include "metasim/error.hpp"

using namespace metasim;
using namespace metasim::async;
using metrics::WireClass;

namespace {

// A source that sends the next word whenever the previous handshake closes
// and a sink that is always ready.
struct OneChannel {
  ChannelNetwork net;
  ChannelId ch = 0;
  std::deque<Word> pending;
  std::vector<std::pair<sim::SimTime, Word>> latched;
  std::vector<sim::SimTime> done;

  ChannelNetwork& network() { return net; }
  const ChannelNetwork& network() const { return net; }

  void pump(StepContext& ctx) {
    if (!pending.empty() && !net.busy(ch)) {
      net.send(ch, pending.front(), ctx);
      pending.pop_front();
    }
  }
  void drain(StepContext& ctx) {
    for (std::size_t i = 0; i < ctx.notes->size(); ++i) {
      const auto n = (*ctx.notes)[i];
      if (n.kind == Notification::Kind::Latched) {
        latched.emplace_back(ctx.now, n.word);
      } else {
        done.push_back(ctx.now);
        pump(ctx);
      }
    }
    ctx.notes->clear();
  }
  void handle(const sim::Event& ev, StepContext& ctx) {
    net.on_event(ev, ctx);
    drain(ctx);
  }
};

OneChannel make(Protocol p, unsigned width, sim::DelayModel data) {
  OneChannel m;
  ChannelConfig cfg;
  cfg.protocol = p;
  cfg.width = width;
  cfg.data_delay = std::move(data);
  m.ch = m.net.add_channel(cfg);
  return m;
}

Simulation<OneChannel> run(OneChannel m, const std::vector<Word>& words, sim::DelayModel wire,
                           std::uint64_t seed = 1) {
  for (Word w : words) m.pending.push_back(w);
  Simulation<OneChannel> s(std::move(m), std::move(wire), seed);
  s.act([](OneChannel& mm, StepContext& ctx) { mm.pump(ctx); });
  s.run();
  return s;
}

std::uint64_t count_wire(const metrics::TransitionLedger& l, sim::ElementId w) {
  std::uint64_t n = 0;
  for (const auto& r : l.records()) n += r.wire == w;
  return n;
}

}  // namespace

TEST_CASE("hand-traced four-phase transfer") {
  // data 20 ps, margin 10 -> matched 30; every control wire 5 ps.
  auto s = run(make(Protocol::FourPhase, 8, sim::DelayModel::fixed(20)), {0xA5},
               sim::DelayModel::fixed(5));
  const auto& m = s.model();
  REQUIRE(m.latched.size() == 1);
  CHECK(m.latched[0].first == 35);  // req rises at 30 + 5
  CHECK(m.latched[0].second == 0xA5);
  REQUIRE(m.done.size() == 1);
  CHECK(m.done[0] == 50);  // ack+ 40, req- 45, ack- 50
  CHECK(s.now() == 50);
  CHECK(m.net.idle());
}

TEST_CASE("hand-traced two-phase transfer") {
  auto s = run(make(Protocol::TwoPhase, 8, sim::DelayModel::fixed(20)), {0x3C, 0x3C},
               sim::DelayModel::fixed(5));
  const auto& m = s.model();
  REQUIRE(m.latched.size() == 2);
  CHECK(m.latched[0].first == 35);
  CHECK(m.done[0] == 40);
  // second word is identical: no data toggles, so req goes out immediately
  CHECK(m.latched[1].first == 40 + 35);
  CHECK(m.done[1] == 80);
}

TEST_CASE("control edge counts per protocol") {
  const std::vector<Word> words{1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
  const auto n = words.size();
  for (auto p : {Protocol::FourPhase, Protocol::TwoPhase}) {
    CAPTURE(static_cast<int>(p));
    auto s = run(make(p, 16, sim::DelayModel::uniform(5, 40)), words, sim::DelayModel::uniform(2, 9), 7);
    const auto& c = s.model().net.channel(0);
    const std::uint64_t per_wire = p == Protocol::FourPhase ? 2 * n : n;
    CHECK(count_wire(s.ledger(), c.req) == per_wire);
    CHECK(count_wire(s.ledger(), c.ack) == per_wire);
    CHECK(s.ledger().count(WireClass::Handshake) == 2 * per_wire);
    std::vector<Word> got;
    for (auto& [t, w] : s.model().latched) got.push_back(w);
    CHECK(got == words);
  }
}

TEST_CASE("ledger holds exactly the level changes") {
  const std::vector<Word> words{0x00FF, 0xFF00, 0xFF00, 0x0F0F};
  auto s = run(make(Protocol::FourPhase, 16, sim::DelayModel::uniform(5, 40)), words,
               sim::DelayModel::uniform(2, 9), 3);
  // data toggles = popcount of successive differences from an all-zero bus
  std::uint64_t data = 0;
  Word prev = 0;
  for (Word w : words) {
    data += static_cast<std::uint64_t>(__builtin_popcountll(prev ^ w));
    prev = w;
  }
  CHECK(s.ledger().count(WireClass::Data) == data);
  CHECK(s.ledger().count(WireClass::Handshake) == 4 * words.size());
  CHECK(s.ledger().count() == data + 4 * words.size());
  for (const auto& r : s.ledger().records()) CHECK(r.time <= s.now());
}

TEST_CASE("under-matched channel is rejected at construction") {
  ChannelNetwork net;
  ChannelConfig cfg;
  cfg.data_delay = sim::DelayModel::uniform(10, 100);
  cfg.matched_delay = 50;
  try {
    net.add_channel(cfg);
    FAIL("expected DelayUnderMatch");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::DelayUnderMatch);
  }
  cfg.allow_under_match = true;
  CHECK_NOTHROW(net.add_channel(cfg));
}

TEST_CASE("timed bundling check") {
  for (bool under : {false, true}) {
    CAPTURE(under);
    OneChannel m;
    ChannelConfig cfg;
    cfg.width = 8;
    cfg.data_delay = sim::DelayModel::uniform(10, 100);
    if (under) {
      cfg.matched_delay = 15;
      cfg.allow_under_match = true;
    }
    m.ch = m.net.add_channel(cfg);
    m.net.set_record_traces(true);
    std::vector<Word> words;
    for (Word w = 1; w <= 50; ++w) words.push_back(w * 37 & 0xFF);
    auto s = run(std::move(m), words, sim::DelayModel::fixed(3), 11);
    CHECK(s.model().latched.size() == words.size());
    CHECK(s.model().net.bundling_violations().empty() == !under);
  }
}

TEST_CASE("bus mode collapses a word into one event") {
  auto m = make(Protocol::FourPhase, 16, sim::DelayModel::fixed(20));
  m.net.set_bus_mode(true);
  Simulation<OneChannel> s(std::move(m), sim::DelayModel::fixed(5), 1);
  s.record_events(true);
  s.act([](OneChannel& mm, StepContext& ctx) {
    mm.pending.push_back(0xFFFF);
    mm.pump(ctx);
  });
  s.run();
  CHECK(s.model().latched.at(0).second == 0xFFFF);
  std::size_t bus = 0;
  for (const auto& e : s.event_trace()) bus += e.action.kind == sim::ActionKind::SetBus;
  CHECK(bus == 1);
  CHECK(s.ledger().count(WireClass::Data) == 16);
  CHECK_FALSE(s.model().net.any_bundling_fault());
}
