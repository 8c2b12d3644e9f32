#pragma once

#include <array>
#include <cstdint>
#include <deque>
#include <optional>
#include <vector>

#include "metasim/async/primitives.hpp"
#include "metasim/metrics/ledger.hpp"
#include "metasim/noc/fabric.hpp"
#include "metasim/noc/packet.hpp"

namespace metasim::sync {

using noc::Coord;
using sim::Duration;
using sim::SimTime;

// Binary clock tree over the grid by recursive bisection of the longer side.
// Every edge adds a seeded +/- contribution of skew_per_level scaled by the
// length of the segment it spans (in node pitches, at least 1), so long
// top-level segments of a big tree carry more skew than short leaf stubs.
struct ClockTree {
  struct Node {
    std::int32_t parent = -1;
    std::uint32_t depth = 0;
    std::int64_t contrib = 0;  // magnitude of this edge's skew, ps
    std::int64_t skew = 0;     // signed skew accumulated from the root
    std::int64_t weight = 0;   // sum of contrib magnitudes from the root
    bool leaf = false;
  };

  unsigned width = 0;
  unsigned height = 0;
  Duration period = 0;
  Duration skew_per_level = 0;
  unsigned levels = 0;
  Duration insertion = 0;  // common delay so every arrival is non-negative
  std::vector<Node> nodes;              // nodes[0] is the root
  std::vector<std::uint32_t> leaf_of;   // grid index -> tree node

  std::int64_t leaf_skew(Coord c) const { return nodes[leaf_of[c.y * width + c.x]].skew; }
  // Clock arrival relative to the ideal edge.
  Duration arrival(Coord c) const { return static_cast<Duration>(static_cast<std::int64_t>(insertion) + leaf_skew(c)); }
  // One wire per tree edge, plus the stub of a single-node tree.
  std::size_t wire_count() const { return nodes.size() == 1 ? 1 : nodes.size() - 1; }
  // Worst-case skew between two leaves: every edge below their common
  // ancestor may push either way.
  std::int64_t unshared_skew_bound(Coord a, Coord b) const;
};

ClockTree build_clock_tree(unsigned width, unsigned height, Duration period, Duration skew_per_level,
                           std::uint64_t seed);

struct TimingParams {
  Duration setup = 100;
  Duration hold = 100;
  Duration hop_data_delay = 1000;
  void validate() const;
};

enum class TimingMode : std::uint8_t {
  Sampled,    // uses the seeded leaf skews: d = skew_to - skew_from
  WorstCase,  // uses the unshared-path bound for each pair
};

struct TimingViolation {
  enum class Kind : std::uint8_t { Setup, Hold } kind;
  Coord from;
  Coord to;
  std::int64_t margin;  // ps by which the constraint is missed (> 0)
};

// Checks every directed pair of mesh neighbours (from launches, to captures).
std::vector<TimingViolation> check_timing(const ClockTree& tree, const TimingParams& params,
                                          TimingMode mode = TimingMode::Sampled);

struct SyncConfig {
  unsigned width = 2;
  unsigned height = 2;
  unsigned loads_per_node = noc::kDefaultLoadsPerNode;
  Duration period = 10'000;
  Duration skew_per_level = 10;
  TimingParams timing;
  std::uint64_t seed = 1;
};

// Clocked mesh with the asynchronous fabric's routing function. Every
// register transfer happens at a clock edge; a packet advances one register
// per cycle and only into a register that was empty when the edge arrived.
// Addresses are preset, there is no discovery phase.
class SyncFabric {
 public:
  explicit SyncFabric(SyncConfig cfg);

  const SyncConfig& config() const { return cfg_; }
  const ClockTree& tree() const { return tree_; }

  // Validates and queues a command; its `at` is relative to time 0.
  void schedule(const noc::Command& c);

  // One clock edge: admit due commands, move packets, log data transitions.
  void clock_tick();
  std::uint64_t cycles() const { return cycle_; }
  SimTime now() const { return cycle_ * cfg_.period; }
  bool quiescent() const;

  // Ticks until every command is delivered and at least `duration` has
  // elapsed, then books the clock tree's transitions for all elapsed periods.
  void run(SimTime duration, std::uint64_t max_cycles = 100'000'000);
  SimTime end_time() const { return now(); }

  const metrics::TransitionLedger& ledger() const { return ledger_; }
  const std::vector<noc::PacketRecord>& injections() const { return injections_; }
  const std::vector<noc::PacketRecord>& deliveries() const { return deliveries_; }
  const std::vector<noc::AuditEntry>& audit(Coord c) const { return nodes_[index(c)].audit; }
  noc::ImpedanceCode load_state(Coord c, unsigned load) const { return nodes_[index(c)].loads.at(load); }

 private:
  struct Reg {
    std::optional<noc::Packet> pkt;
    std::uint64_t bits = 0;  // last value written
  };
  struct Node {
    Coord pos;
    std::array<Reg, noc::kPortCount> in;
    std::array<async::RoundRobinArbiter, noc::kPortCount> arb;
    std::deque<noc::Packet> core_queue;
    std::vector<noc::ImpedanceCode> loads;
    std::vector<noc::AuditEntry> audit;
  };

  std::size_t index(Coord c) const { return std::size_t{c.y} * cfg_.width + c.x; }
  void write(Node& n, noc::Port p, const noc::Packet& pkt, SimTime t);
  void clear(Node& n, noc::Port p, SimTime t);
  void book_clock();

  SyncConfig cfg_;
  ClockTree tree_;
  std::vector<Node> nodes_;
  std::deque<noc::Packet> gateway_queue_;
  std::vector<noc::Command> pending_;  // sorted by time, stable
  std::size_t next_pending_ = 0;
  std::uint64_t cycle_ = 0;
  std::uint64_t in_flight_ = 0;
  bool clock_booked_ = false;
  metrics::TransitionLedger ledger_;
  std::vector<noc::PacketRecord> injections_;
  std::vector<noc::PacketRecord> deliveries_;
};

}  // namespace metasim::sync
