#include "metasim/noc/fabric.hpp"

#include <algorithm>
#include <sstream>
#include <stdexcept>

#include "metasim/error.hpp"
#include "metasim/hash.hpp"

namespace metasim::noc {

using async::Notification;

namespace {

std::optional<Coord> neighbour(Coord c, Port p, unsigned w, unsigned h) {
  switch (p) {
    case Port::North: if (c.y + 1 < h) return Coord{c.x, c.y + 1}; break;
    case Port::East: if (c.x + 1 < w) return Coord{c.x + 1, c.y}; break;
    case Port::South: if (c.y > 0) return Coord{c.x, c.y - 1}; break;
    case Port::West: if (c.x > 0) return Coord{c.x - 1, c.y}; break;
    case Port::Local: break;
  }
  return std::nullopt;
}

constexpr std::array kLinkPorts{Port::North, Port::East, Port::South, Port::West};

}  // namespace

Packet command_packet(const Command& c, unsigned width, unsigned height, unsigned loads_per_node) {
  if (c.node.x >= width || c.node.y >= height) {
    throw Error(ErrorCode::DestOutOfRange, "node " + to_string(c.node) + " outside " +
                                               std::to_string(width) + "x" + std::to_string(height));
  }
  Packet p;
  p.opcode = c.op;
  p.payload = c.payload;
  if (c.op == Opcode::SetImpedance) {
    if (c.load >= loads_per_node) {
      throw Error(ErrorCode::BadLoadIndex, "load " + std::to_string(c.load) + " at node " +
                                               to_string(c.node) + " (node has " +
                                               std::to_string(loads_per_node) + ")");
    }
    p.dest = c.node;
    p.load_index = c.load;
  } else if (c.op == Opcode::Report) {
    p.src = c.node;
  } else {
    throw std::invalid_argument("workload commands are SET_IMPEDANCE or REPORT");
  }
  if (p.payload >> (2 * kCodeBits)) {
    throw Error(ErrorCode::FieldOverflow, "payload " + std::to_string(p.payload) + " exceeds 16 bits");
  }
  return p;
}

Fabric::Fabric(FabricConfig cfg) : cfg_(std::move(cfg)) {
  if (cfg_.width == 0 || cfg_.height == 0 || cfg_.width > kMaxGridSide || cfg_.height > kMaxGridSide) {
    throw std::invalid_argument("grid sides must be in [1, 1024]");
  }
  if (cfg_.loads_per_node == 0 || cfg_.loads_per_node > (1u << kLoadBits)) {
    throw std::invalid_argument("loads_per_node must be in [1, 16]");
  }
  words_ = words_per_packet(cfg_.bus_width);

  nodes_.resize(std::size_t{cfg_.width} * cfg_.height);
  for (unsigned y = 0; y < cfg_.height; ++y) {
    for (unsigned x = 0; x < cfg_.width; ++x) {
      Node& n = nodes_[index({x, y})];
      n.pos = {x, y};
      n.loads.assign(cfg_.loads_per_node, ImpedanceCode{});
    }
  }
  for (std::uint32_t i = 0; i < nodes_.size(); ++i) {
    Node& n = nodes_[i];
    for (Port p : kLinkPorts) {
      if (!linked(n.pos, p)) continue;
      const auto j = static_cast<std::uint32_t>(index(*neighbour(n.pos, p, cfg_.width, cfg_.height)));
      const ChannelId ch = add({EndKind::RouterOut, i, p}, {EndKind::RouterIn, j, opposite(p)});
      nodes_[i].out[static_cast<unsigned>(p)].ch = ch;
      nodes_[j].in[static_cast<unsigned>(opposite(p))].ch = ch;
    }
    const ChannelId down = add({EndKind::RouterOut, i, Port::Local}, {EndKind::Core, i, Port::Local});
    nodes_[i].out[static_cast<unsigned>(Port::Local)].ch = down;
    nodes_[i].core_rx = down;
    const ChannelId up = add({EndKind::Core, i, Port::Local}, {EndKind::RouterIn, i, Port::Local});
    nodes_[i].in[static_cast<unsigned>(Port::Local)].ch = up;
    nodes_[i].core_tx = up;
  }
  gateway_.tx = add({EndKind::Gateway, 0, Port::East}, {EndKind::RouterIn, 0, Port::West});
  nodes_[0].in[static_cast<unsigned>(Port::West)].ch = gateway_.tx;
  gateway_.rx = add({EndKind::RouterOut, 0, Port::West}, {EndKind::Gateway, 0, Port::East});
  nodes_[0].out[static_cast<unsigned>(Port::West)].ch = gateway_.rx;
  gateway_.announced.assign(nodes_.size(), false);
}

std::size_t Fabric::index(Coord c) const {
  if (c.x >= cfg_.width || c.y >= cfg_.height) {
    throw Error(ErrorCode::DestOutOfRange, "node " + to_string(c) + " outside the grid");
  }
  return std::size_t{c.y} * cfg_.width + c.x;
}

bool Fabric::linked(Coord c, Port p) const {
  const auto nb = neighbour(c, p, cfg_.width, cfg_.height);
  if (!nb) return false;
  for (const auto& [sc, sp] : cfg_.severed) {
    if ((sc == c && sp == p) || (sc == *nb && sp == opposite(p))) return false;
  }
  return true;
}

ChannelId Fabric::add(End tx, End rx) {
  async::ChannelConfig cc;
  cc.protocol = cfg_.protocol;
  cc.width = cfg_.bus_width;
  cc.data_delay = cfg_.data_delay;
  cc.matched_delay = cfg_.matched_delay;
  cc.setup_margin = cfg_.setup_margin;
  const ChannelId ch = net_.add_channel(cc);
  tx_end_.push_back(tx);
  rx_end_.push_back(rx);
  return ch;
}

void Fabric::pump(std::deque<Word>& q, ChannelId ch, StepContext& ctx) {
  if (!q.empty() && !net_.busy(ch)) {
    const Word w = q.front();
    q.pop_front();
    net_.send(ch, w, ctx);
  }
}

void Fabric::queue_words(std::deque<Word>& q, ChannelId ch, const Packet& p, StepContext& ctx) {
  for (Word w : encode_packet(p, cfg_.bus_width)) q.push_back(w);
  pump(q, ch, ctx);
}

void Fabric::start_discovery(StepContext& ctx) {
  Packet d;
  d.opcode = Opcode::Discover;
  queue_words(gateway_.tx_words, gateway_.tx, d, ctx);
  drain(ctx);
}

bool Fabric::discovery_complete() const {
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    if (!nodes_[i].coord || !gateway_.announced[i]) return false;
  }
  return true;
}

void Fabric::check_discovery() const {
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    if (!nodes_[i].coord) {
      throw Error(ErrorCode::DiscoveryIncomplete, "node " + to_string(nodes_[i].pos) + " never addressed");
    }
  }
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    if (!gateway_.announced[i]) {
      throw Error(ErrorCode::DiscoveryIncomplete,
                  "no ANNOUNCE from " + to_string(nodes_[i].pos) + " reached the gateway");
    }
  }
}

std::size_t Fabric::schedule(const Command& c) {
  command_packet(c, cfg_.width, cfg_.height, cfg_.loads_per_node);
  commands_.push_back(c);
  return commands_.size() - 1;
}

void Fabric::inject(const Command& c, StepContext& ctx) {
  if (c.op == Opcode::Report) {
    command_packet(c, cfg_.width, cfg_.height, cfg_.loads_per_node);
    node_report(c.node, c.payload, ctx);
  } else {
    gateway_inject(command_packet(c, cfg_.width, cfg_.height, cfg_.loads_per_node), ctx);
  }
}

void Fabric::gateway_inject(const Packet& p, StepContext& ctx) {
  if (p.dest.x >= cfg_.width || p.dest.y >= cfg_.height) {
    throw Error(ErrorCode::DestOutOfRange, "dest " + to_string(p.dest) + " outside the grid");
  }
  if (p.opcode == Opcode::SetImpedance && p.load_index >= cfg_.loads_per_node) {
    throw Error(ErrorCode::BadLoadIndex, "load " + std::to_string(p.load_index));
  }
  injections_.push_back({ctx.now, p});
  queue_words(gateway_.tx_words, gateway_.tx, p, ctx);
  drain(ctx);
}

void Fabric::node_report(Coord node, std::uint32_t code, StepContext& ctx) {
  Node& n = nodes_[index(node)];
  if (!n.coord) throw Error(ErrorCode::DiscoveryIncomplete, "REPORT from unaddressed node " + to_string(node));
  Packet p;
  p.opcode = Opcode::Report;
  p.src = *n.coord;
  p.payload = code;
  injections_.push_back({ctx.now, p});
  queue_words(n.tx_words, n.core_tx, p, ctx);
  drain(ctx);
}

void Fabric::handle(const sim::Event& ev, StepContext& ctx) {
  if (ev.action.kind == sim::ActionKind::Poke && ev.target == kCommandPoke) {
    inject(commands_.at(ev.action.value), ctx);
    return;
  }
  net_.on_event(ev, ctx);
  drain(ctx);
}

void Fabric::drain(StepContext& ctx) {
  auto& notes = *ctx.notes;
  for (std::size_t i = 0; i < notes.size(); ++i) {
    const Notification n = notes[i];
    if (n.kind == Notification::Kind::Latched) {
      on_latched(rx_end_[n.channel], n.word, ctx);
    } else {
      on_send_done(tx_end_[n.channel], ctx);
    }
  }
  notes.clear();
}

void Fabric::on_latched(const End& e, Word w, StepContext& ctx) {
  switch (e.kind) {
    case EndKind::RouterIn: {
      Node& n = nodes_[e.node];
      Input& in = n.in[static_cast<unsigned>(e.port)];
      in.words.push_back(w);
      if (in.words.size() < words_) return;
      const Packet p = decode_packet(in.words, cfg_.bus_width);
      in.words.clear();
      net_.set_rx_ready(in.ch, false, ctx);
      if (!n.coord && !(p.opcode == Opcode::Discover && e.port != Port::Local)) {
        throw Error(ErrorCode::DiscoveryIncomplete,
                    std::string(to_string(p.opcode)) + " reached unaddressed node " + to_string(n.pos));
      }
      in.pkt = p;
      in.out = route_packet(p, e.port, n.coord.value_or(Coord{}), n.parent);
      in.waiting = true;
      try_grant(n, in.out, ctx);
      return;
    }
    case EndKind::Core: {
      Node& n = nodes_[e.node];
      n.rx_words.push_back(w);
      if (n.rx_words.size() < words_) return;
      const Packet p = decode_packet(n.rx_words, cfg_.bus_width);
      n.rx_words.clear();
      core_receive(n, p, ctx);
      return;
    }
    case EndKind::Gateway: {
      gateway_.rx_words.push_back(w);
      if (gateway_.rx_words.size() < words_) return;
      const Packet p = decode_packet(gateway_.rx_words, cfg_.bus_width);
      gateway_.rx_words.clear();
      gateway_.received.push_back(p);
      if (p.opcode == Opcode::Announce) {
        if (p.src.x < cfg_.width && p.src.y < cfg_.height) gateway_.announced[index(p.src)] = true;
      } else if (p.opcode == Opcode::Report) {
        deliveries_.push_back({ctx.now, p});
      }
      return;
    }
    case EndKind::RouterOut:
      break;
  }
  throw std::logic_error("latch at a sending end");
}

void Fabric::on_send_done(const End& e, StepContext& ctx) {
  switch (e.kind) {
    case EndKind::RouterOut: {
      Node& n = nodes_[e.node];
      Output& out = n.out[static_cast<unsigned>(e.port)];
      if (!out.words.empty()) {
        pump(out.words, out.ch, ctx);
        return;
      }
      Input& src = n.in[static_cast<unsigned>(out.source)];
      src.pkt.reset();
      out.busy = false;
      net_.set_rx_ready(src.ch, true, ctx);
      try_grant(n, e.port, ctx);
      return;
    }
    case EndKind::Core: {
      Node& n = nodes_[e.node];
      pump(n.tx_words, n.core_tx, ctx);
      return;
    }
    case EndKind::Gateway:
      pump(gateway_.tx_words, gateway_.tx, ctx);
      return;
    case EndKind::RouterIn:
      break;
  }
  throw std::logic_error("send completion at a receiving end");
}

void Fabric::try_grant(Node& n, Port o, StepContext& ctx) {
  Output& out = n.out[static_cast<unsigned>(o)];
  if (out.busy) return;
  std::uint32_t mask = 0;
  for (unsigned i = 0; i < kPortCount; ++i) {
    const Input& in = n.in[i];
    if (in.pkt && in.waiting && in.out == o) mask |= 1u << i;
  }
  if (mask == 0) return;
  if (out.ch == kNoChannel) {
    throw Error(ErrorCode::DestOutOfRange, "packet at " + to_string(n.pos) + " routed to missing port " +
                                               std::string(to_string(o)));
  }
  const unsigned winner = *n.arb.pick(mask);
  Input& in = n.in[winner];
  in.waiting = false;
  out.busy = true;
  out.source = static_cast<Port>(winner);
  for (Word w : encode_packet(*in.pkt, cfg_.bus_width)) out.words.push_back(w);
  pump(out.words, out.ch, ctx);
}

void Fabric::core_receive(Node& n, const Packet& p, StepContext& ctx) {
  switch (p.opcode) {
    case Opcode::Discover: {
      if (n.coord) return;  // already addressed by another neighbour
      n.coord = p.dest;
      n.parent = n.out[static_cast<unsigned>(Port::Local)].source;
      for (Port q : {Port::East, Port::North}) {
        if (!linked(n.pos, q)) continue;
        Packet d;
        d.opcode = Opcode::Discover;
        d.src = *n.coord;
        d.dest = q == Port::East ? Coord{n.coord->x + 1, n.coord->y} : Coord{n.coord->x, n.coord->y + 1};
        queue_words(n.tx_words, n.core_tx, d, ctx);
      }
      Packet a;
      a.opcode = Opcode::Announce;
      a.src = *n.coord;
      queue_words(n.tx_words, n.core_tx, a, ctx);
      n.announced = true;
      return;
    }
    case Opcode::SetImpedance: {
      const ImpedanceCode code = p.impedance();
      n.loads.at(p.load_index) = code;
      n.audit.push_back({ctx.now, p.load_index, code});
      deliveries_.push_back({ctx.now, p});
      return;
    }
    case Opcode::Announce:
    case Opcode::Report:
      break;
  }
  throw Error(ErrorCode::MalformedPacket,
              std::string(to_string(p.opcode)) + " delivered to the core at " + to_string(n.pos));
}

bool Fabric::quiescent() const {
  if (!net_.idle() || !gateway_.tx_words.empty() || !gateway_.rx_words.empty()) return false;
  for (const Node& n : nodes_) {
    if (!n.tx_words.empty() || !n.rx_words.empty()) return false;
    for (const auto& in : n.in) {
      if (in.pkt || !in.words.empty()) return false;
    }
    for (const auto& out : n.out) {
      if (out.busy) return false;
    }
  }
  return true;
}

std::uint64_t Fabric::fingerprint() const {
  Hasher h;
  h.add(net_.fingerprint());
  auto add_packet = [&](const Packet& p) {
    for (Word w : encode_packet(p, 64)) h.add(w);
  };
  for (const Node& n : nodes_) {
    h.add(n.coord ? (std::uint64_t{n.coord->x} << 16 | n.coord->y) + 1 : 0);
    h.add(n.parent ? static_cast<std::uint64_t>(*n.parent) + 1 : 0);
    for (const auto& in : n.in) {
      h.add(in.words.size());
      for (Word w : in.words) h.add(w);
      if (in.pkt) add_packet(*in.pkt);
      h.add(static_cast<std::uint64_t>(in.out) << 1 | in.waiting);
    }
    for (const auto& out : n.out) {
      h.add(static_cast<std::uint64_t>(out.source) << 1 | out.busy);
      h.add(out.words.size());
      for (Word w : out.words) h.add(w);
    }
    h.add(n.arb.last() ? *n.arb.last() + 1 : 0);
    h.add(n.rx_words.size());
    for (Word w : n.rx_words) h.add(w);
    h.add(n.tx_words.size());
    for (Word w : n.tx_words) h.add(w);
    for (const auto& c : n.loads) h.add(c.pack());
    h.add(n.audit.size());
  }
  h.add(gateway_.tx_words.size());
  for (Word w : gateway_.tx_words) h.add(w);
  for (Word w : gateway_.rx_words) h.add(w);
  for (const Packet& p : gateway_.received) add_packet(p);
  return h.value();
}

std::string Fabric::outcome() const {
  std::ostringstream os;
  for (const Node& n : nodes_) {
    os << to_string(n.pos) << " loads";
    for (const auto& c : n.loads) os << ' ' << c.pack();
    os << " audit";
    for (const auto& a : n.audit) os << ' ' << a.load << ':' << a.code.pack();
    os << '\n';
  }
  std::vector<std::uint64_t> got;
  for (const Packet& p : gateway_.received) {
    const auto w = encode_packet(p, 64);
    got.push_back(w[0]);
  }
  std::sort(got.begin(), got.end());
  os << "gateway";
  for (auto g : got) os << ' ' << std::hex << g << std::dec;
  os << '\n';
  return os.str();
}

}  // namespace metasim::noc
