#pragma once

#include <array>
#include <cstdint>
#include <deque>
#include <optional>
#include <string>
#include <vector>

#include "metasim/async/channel.hpp"
#include "metasim/noc/packet.hpp"

namespace metasim::noc {

using async::ChannelId;
using async::kNoChannel;
using async::StepContext;

struct FabricConfig {
  unsigned width = 2;
  unsigned height = 2;
  unsigned loads_per_node = kDefaultLoadsPerNode;
  async::Protocol protocol = async::Protocol::FourPhase;
  unsigned bus_width = kDefaultBusWidth;
  sim::DelayModel data_delay = sim::DelayModel::fixed(10);
  sim::Duration matched_delay = 0;  // 0: data worst case + setup margin
  sim::Duration setup_margin = 10;
  // Links removed from the mesh, named by one end; both directions go.
  std::vector<std::pair<Coord, Port>> severed;
};

// A workload item. SET_IMPEDANCE enters at the gateway and targets `node`;
// REPORT is raised by the core at `node` with `payload` as its event code.
struct Command {
  sim::SimTime at = 0;
  Opcode op = Opcode::SetImpedance;
  Coord node;
  std::uint32_t load = 0;
  std::uint32_t payload = 0;

  friend bool operator==(const Command&, const Command&) = default;
};

struct AuditEntry {
  sim::SimTime time = 0;
  std::uint32_t load = 0;
  ImpedanceCode code;
};

// Builds the packet a command puts on the fabric. Throws DestOutOfRange and
// BadLoadIndex for commands that cannot be addressed.
Packet command_packet(const Command& c, unsigned width, unsigned height, unsigned loads_per_node);

// Asynchronous 2D mesh: one router per node with five one-packet input
// buffers, a core behind each Local port and the gateway on the West side of
// (0,0). Packets travel as bus-width words, one handshake per word.
class Fabric {
 public:
  // Poke target for scheduled commands; the value indexes commands().
  static constexpr sim::ElementId kCommandPoke = 0xFFFFFF00u;

  explicit Fabric(FabricConfig cfg);

  async::ChannelNetwork& network() { return net_; }
  const async::ChannelNetwork& network() const { return net_; }
  const FabricConfig& config() const { return cfg_; }

  void handle(const sim::Event& ev, StepContext& ctx);

  // Gateway issues the first DISCOVER.
  void start_discovery(StepContext& ctx);
  bool discovery_complete() const;
  // Throws DiscoveryIncomplete naming the first unassigned or silent node.
  void check_discovery() const;

  // Validates and stores a command, returning the poke value for it.
  std::size_t schedule(const Command& c);
  const std::vector<Command>& commands() const { return commands_; }
  void inject(const Command& c, StepContext& ctx);
  void gateway_inject(const Packet& p, StepContext& ctx);
  void node_report(Coord node, std::uint32_t code, StepContext& ctx);

  const std::vector<PacketRecord>& injections() const { return injections_; }
  const std::vector<PacketRecord>& deliveries() const { return deliveries_; }
  const std::vector<Packet>& gateway_received() const { return gateway_.received; }

  std::optional<Coord> assigned(Coord node) const { return nodes_[index(node)].coord; }
  std::optional<Port> parent(Coord node) const { return nodes_[index(node)].parent; }
  const std::vector<AuditEntry>& audit(Coord node) const { return nodes_[index(node)].audit; }
  ImpedanceCode load_state(Coord node, unsigned load) const { return nodes_[index(node)].loads.at(load); }

  // Nothing buffered, queued or mid-handshake.
  bool quiescent() const;
  bool delivery_complete() const { return deliveries_.size() == injections_.size(); }

  std::uint64_t fingerprint() const;
  // Interleaving-independent summary: load registers, per-node audit
  // sequences and the gateway's collection as a sorted multiset.
  std::string outcome() const;

 private:
  struct Input {
    ChannelId ch = kNoChannel;
    std::vector<Word> words;
    std::optional<Packet> pkt;
    Port out = Port::Local;
    bool waiting = false;
  };
  struct Output {
    ChannelId ch = kNoChannel;
    bool busy = false;
    Port source = Port::Local;
    std::deque<Word> words;
  };
  struct Node {
    Coord pos;
    std::optional<Coord> coord;
    std::optional<Port> parent;
    std::array<Input, kPortCount> in;
    std::array<Output, kPortCount> out;
    async::RoundRobinArbiter arb{kPortCount};
    // core
    ChannelId core_rx = kNoChannel;
    ChannelId core_tx = kNoChannel;
    std::vector<Word> rx_words;
    std::deque<Word> tx_words;
    std::vector<ImpedanceCode> loads;
    std::vector<AuditEntry> audit;
    bool announced = false;
  };
  struct Gateway {
    ChannelId tx = kNoChannel;
    ChannelId rx = kNoChannel;
    std::deque<Word> tx_words;
    std::vector<Word> rx_words;
    std::vector<Packet> received;
    std::vector<bool> announced;
  };
  enum class EndKind : std::uint8_t { RouterIn, RouterOut, Core, Gateway };
  struct End {
    EndKind kind;
    std::uint32_t node;
    Port port;
  };

  std::size_t index(Coord c) const;
  bool linked(Coord c, Port p) const;
  ChannelId add(End tx, End rx);
  void queue_words(std::deque<Word>& q, ChannelId ch, const Packet& p, StepContext& ctx);
  void pump(std::deque<Word>& q, ChannelId ch, StepContext& ctx);
  void drain(StepContext& ctx);
  void on_latched(const End& e, Word w, StepContext& ctx);
  void on_send_done(const End& e, StepContext& ctx);
  void try_grant(Node& n, Port o, StepContext& ctx);
  void core_receive(Node& n, const Packet& p, StepContext& ctx);

  FabricConfig cfg_;
  unsigned words_ = 0;
  async::ChannelNetwork net_;
  std::vector<Node> nodes_;
  Gateway gateway_;
  std::vector<End> tx_end_;
  std::vector<End> rx_end_;
  std::vector<Command> commands_;
  std::vector<PacketRecord> injections_;
  std::vector<PacketRecord> deliveries_;
};

}  // namespace metasim::noc
