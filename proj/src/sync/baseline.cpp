#include "metasim/sync/baseline.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <stdexcept>

#include "metasim/error.hpp"
#include "metasim/sim/delay.hpp"

namespace metasim::sync {

using noc::Opcode;
using noc::Packet;
using noc::Port;

namespace {

struct Region {
  unsigned x0, y0, x1, y1;  // half-open
  double cx() const { return (x0 + x1 - 1) / 2.0; }
  double cy() const { return (y0 + y1 - 1) / 2.0; }
};

void grow(ClockTree& t, std::uint32_t self, Region r, sim::Rng& rng) {
  const unsigned w = r.x1 - r.x0, h = r.y1 - r.y0;
  if (w == 1 && h == 1) {
    t.nodes[self].leaf = true;
    t.leaf_of[r.y0 * t.width + r.x0] = self;
    t.levels = std::max(t.levels, t.nodes[self].depth);
    return;
  }
  Region a = r, b = r;
  if (w >= h) {
    a.x1 = b.x0 = r.x0 + w / 2;
  } else {
    a.y1 = b.y0 = r.y0 + h / 2;
  }
  for (const Region& c : {a, b}) {
    const double len = std::abs(c.cx() - r.cx()) + std::abs(c.cy() - r.cy());
    ClockTree::Node n;
    n.parent = static_cast<std::int32_t>(self);
    n.depth = t.nodes[self].depth + 1;
    n.contrib = std::llround(static_cast<double>(t.skew_per_level) * std::max(1.0, len));
    const std::int64_t sign = rng.coin() ? 1 : -1;
    n.skew = t.nodes[self].skew + sign * n.contrib;
    n.weight = t.nodes[self].weight + n.contrib;
    t.nodes.push_back(n);
    grow(t, static_cast<std::uint32_t>(t.nodes.size() - 1), c, rng);
  }
}

}  // namespace

ClockTree build_clock_tree(unsigned width, unsigned height, Duration period, Duration skew_per_level,
                           std::uint64_t seed) {
  if (period == 0) throw std::invalid_argument("clock period must be positive");
  if (width == 0 || height == 0) throw std::invalid_argument("empty grid");
  ClockTree t;
  t.width = width;
  t.height = height;
  t.period = period;
  t.skew_per_level = skew_per_level;
  t.leaf_of.assign(std::size_t{width} * height, 0);
  t.nodes.reserve(2 * std::size_t{width} * height);
  t.nodes.push_back({});
  sim::Rng rng(seed);
  grow(t, 0, Region{0, 0, width, height}, rng);
  std::int64_t worst = 0;
  for (const auto& n : t.nodes) worst = std::max(worst, n.weight);
  t.insertion = static_cast<Duration>(worst);
  return t;
}

std::int64_t ClockTree::unshared_skew_bound(Coord a, Coord b) const {
  std::uint32_t i = leaf_of[a.y * width + a.x];
  std::uint32_t j = leaf_of[b.y * width + b.x];
  const std::int64_t wi = nodes[i].weight, wj = nodes[j].weight;
  while (i != j) {
    if (nodes[i].depth >= nodes[j].depth) {
      i = static_cast<std::uint32_t>(nodes[i].parent);
    } else {
      j = static_cast<std::uint32_t>(nodes[j].parent);
    }
  }
  return wi + wj - 2 * nodes[i].weight;
}

void TimingParams::validate() const {
  if (setup == 0 || hold == 0 || hop_data_delay == 0) {
    throw std::invalid_argument("setup, hold and hop delay must be positive");
  }
}

std::vector<TimingViolation> check_timing(const ClockTree& tree, const TimingParams& params, TimingMode mode) {
  params.validate();
  std::vector<TimingViolation> out;
  const auto period = static_cast<std::int64_t>(tree.period);
  const auto hop = static_cast<std::int64_t>(params.hop_data_delay);
  const auto setup = static_cast<std::int64_t>(params.setup);
  const auto hold = static_cast<std::int64_t>(params.hold);
  auto check = [&](Coord from, Coord to) {
    std::int64_t late, early;  // capture edge shift against setup and hold
    if (mode == TimingMode::Sampled) {
      late = early = tree.leaf_skew(to) - tree.leaf_skew(from);
    } else {
      const auto b = tree.unshared_skew_bound(from, to);
      late = -b;
      early = b;
    }
    if (hop + setup > period + late) {
      out.push_back({TimingViolation::Kind::Setup, from, to, hop + setup - period - late});
    }
    if (hop < hold + early) {
      out.push_back({TimingViolation::Kind::Hold, from, to, hold + early - hop});
    }
  };
  for (std::uint32_t y = 0; y < tree.height; ++y) {
    for (std::uint32_t x = 0; x < tree.width; ++x) {
      if (x + 1 < tree.width) {
        check({x, y}, {x + 1, y});
        check({x + 1, y}, {x, y});
      }
      if (y + 1 < tree.height) {
        check({x, y}, {x, y + 1});
        check({x, y + 1}, {x, y});
      }
    }
  }
  return out;
}

SyncFabric::SyncFabric(SyncConfig cfg)
    : cfg_(std::move(cfg)),
      tree_(build_clock_tree(cfg_.width, cfg_.height, cfg_.period, cfg_.skew_per_level, cfg_.seed)) {
  if (cfg_.width > noc::kMaxGridSide || cfg_.height > noc::kMaxGridSide) {
    throw std::invalid_argument("grid sides must be in [1, 1024]");
  }
  if (cfg_.loads_per_node == 0 || cfg_.loads_per_node > (1u << noc::kLoadBits)) {
    throw std::invalid_argument("loads_per_node must be in [1, 16]");
  }
  if (cfg_.period < 2) throw std::invalid_argument("clock period must be at least 2 ps");
  nodes_.resize(std::size_t{cfg_.width} * cfg_.height);
  for (std::uint32_t y = 0; y < cfg_.height; ++y) {
    for (std::uint32_t x = 0; x < cfg_.width; ++x) {
      Node& n = nodes_[index({x, y})];
      n.pos = {x, y};
      n.loads.assign(cfg_.loads_per_node, noc::ImpedanceCode{});
    }
  }
}

void SyncFabric::schedule(const noc::Command& c) {
  noc::command_packet(c, cfg_.width, cfg_.height, cfg_.loads_per_node);
  if (cycle_ > 0 && c.at < now()) throw Error(ErrorCode::SchedulingInPast, "command before current cycle");
  auto it = std::upper_bound(pending_.begin() + static_cast<std::ptrdiff_t>(next_pending_), pending_.end(), c,
                             [](const noc::Command& a, const noc::Command& b) { return a.at < b.at; });
  pending_.insert(it, c);
}

void SyncFabric::write(Node& n, Port p, const Packet& pkt, SimTime t) {
  Reg& r = n.in[static_cast<unsigned>(p)];
  const std::uint64_t bits = noc::encode_packet(pkt, 64)[0];
  const std::uint64_t diff = r.bits ^ bits;
  const auto base = static_cast<std::uint32_t>((index(n.pos) * noc::kPortCount + static_cast<unsigned>(p)) * 65);
  for (unsigned b = 0; b < 64; ++b) {
    if ((diff >> b) & 1) ledger_.append(base + b, metrics::WireClass::Data, t);
  }
  ledger_.append(base + 64, metrics::WireClass::Data, t);  // valid rises
  r.bits = bits;
  r.pkt = pkt;
}

void SyncFabric::clear(Node& n, Port p, SimTime t) {
  Reg& r = n.in[static_cast<unsigned>(p)];
  const auto base = static_cast<std::uint32_t>((index(n.pos) * noc::kPortCount + static_cast<unsigned>(p)) * 65);
  ledger_.append(base + 64, metrics::WireClass::Data, t);  // valid falls
  r.pkt.reset();
}

void SyncFabric::clock_tick() {
  if (clock_booked_) throw std::logic_error("fabric already finished");
  const SimTime edge = now();
  while (next_pending_ < pending_.size() && pending_[next_pending_].at <= edge) {
    const noc::Command& c = pending_[next_pending_++];
    const Packet p = noc::command_packet(c, cfg_.width, cfg_.height, cfg_.loads_per_node);
    injections_.push_back({c.at, p});
    if (c.op == Opcode::Report) {
      nodes_[index(c.node)].core_queue.push_back(p);
    } else {
      gateway_queue_.push_back(p);
    }
    ++in_flight_;
  }

  struct Move {
    std::uint32_t node;
    Port from;
    Port out;
  };
  std::vector<Move> moves;
  for (std::uint32_t i = 0; i < nodes_.size(); ++i) {
    Node& n = nodes_[i];
    std::array<std::uint32_t, noc::kPortCount> want{};
    for (unsigned p = 0; p < noc::kPortCount; ++p) {
      if (!n.in[p].pkt) continue;
      const Port o = noc::route_packet(*n.in[p].pkt, static_cast<Port>(p), n.pos, std::nullopt);
      want[static_cast<unsigned>(o)] |= 1u << p;
    }
    for (unsigned o = 0; o < noc::kPortCount; ++o) {
      if (!want[o]) continue;
      const Port op = static_cast<Port>(o);
      bool free = true;
      if (op == Port::Local || (op == Port::West && n.pos == Coord{0, 0})) {
        free = true;  // core and gateway always accept
      } else {
        Coord nb = n.pos;
        switch (op) {
          case Port::North: ++nb.y; break;
          case Port::East: ++nb.x; break;
          case Port::South: --nb.y; break;
          case Port::West: --nb.x; break;
          case Port::Local: break;
        }
        if (nb.x >= cfg_.width || nb.y >= cfg_.height) {
          throw Error(ErrorCode::DestOutOfRange, "packet routed off the grid at " + noc::to_string(n.pos));
        }
        free = !nodes_[index(nb)].in[static_cast<unsigned>(noc::opposite(op))].pkt.has_value();
      }
      if (!free) continue;
      moves.push_back({i, static_cast<Port>(*n.arb[o].pick(want[o])), op});
    }
  }
  // Sources the injectors may fill: only registers empty before the edge.
  const bool gw_free = !nodes_[0].in[static_cast<unsigned>(Port::West)].pkt.has_value();
  std::vector<bool> core_free(nodes_.size());
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    core_free[i] = !nodes_[i].in[static_cast<unsigned>(Port::Local)].pkt.has_value();
  }

  for (const Move& m : moves) {
    Node& n = nodes_[m.node];
    const Packet pkt = *n.in[static_cast<unsigned>(m.from)].pkt;
    const SimTime t = edge + tree_.arrival(n.pos);
    clear(n, m.from, t);
    if (m.out == Port::Local) {
      const auto code = pkt.impedance();
      n.loads.at(pkt.load_index) = code;
      n.audit.push_back({t, pkt.load_index, code});
      deliveries_.push_back({t, pkt});
      --in_flight_;
    } else if (m.out == Port::West && n.pos == Coord{0, 0}) {
      deliveries_.push_back({t, pkt});
      --in_flight_;
    } else {
      Coord nb = n.pos;
      switch (m.out) {
        case Port::North: ++nb.y; break;
        case Port::East: ++nb.x; break;
        case Port::South: --nb.y; break;
        case Port::West: --nb.x; break;
        case Port::Local: break;
      }
      Node& dst = nodes_[index(nb)];
      write(dst, noc::opposite(m.out), pkt, edge + tree_.arrival(nb));
    }
  }
  if (gw_free && !gateway_queue_.empty()) {
    write(nodes_[0], Port::West, gateway_queue_.front(), edge + tree_.arrival({0, 0}));
    gateway_queue_.pop_front();
  }
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    Node& n = nodes_[i];
    if (core_free[i] && !n.core_queue.empty()) {
      write(n, Port::Local, n.core_queue.front(), edge + tree_.arrival(n.pos));
      n.core_queue.pop_front();
    }
  }
  ++cycle_;
}

bool SyncFabric::quiescent() const { return in_flight_ == 0 && next_pending_ == pending_.size(); }

void SyncFabric::run(SimTime duration, std::uint64_t max_cycles) {
  while (!quiescent() || now() < duration) {
    if (cycle_ >= max_cycles) {
      throw Error(ErrorCode::EventBudgetExhausted,
                  "sync fabric still busy after " + std::to_string(cycle_) + " cycles");
    }
    clock_tick();
  }
  book_clock();
}

void SyncFabric::book_clock() {
  if (clock_booked_) return;
  clock_booked_ = true;
  metrics::PeriodicTransitions p;
  p.cls = metrics::WireClass::Clock;
  p.start = 0;
  p.interval = cfg_.period / 2;
  p.repetitions = 2 * cycle_;
  if (tree_.nodes.size() == 1) {
    p.offsets.push_back(tree_.insertion);
  } else {
    for (std::size_t i = 1; i < tree_.nodes.size(); ++i) {
      p.offsets.push_back(static_cast<Duration>(static_cast<std::int64_t>(tree_.insertion) + tree_.nodes[i].skew));
    }
  }
  ledger_.add_periodic(std::move(p));
  ledger_.sort_by_time();
}

}  // namespace metasim::sync
