#include "metasim/noc/packet.hpp"

#include <stdexcept>

#include "metasim/error.hpp"

namespace metasim::noc {

std::string to_string(Coord c) {
  return "(" + std::to_string(c.x) + "," + std::to_string(c.y) + ")";
}

std::string_view to_string(Opcode op) {
  switch (op) {
    case Opcode::SetImpedance: return "SET_IMPEDANCE";
    case Opcode::Report: return "REPORT";
    case Opcode::Discover: return "DISCOVER";
    case Opcode::Announce: return "ANNOUNCE";
  }
  return "?";
}

std::optional<Opcode> opcode_from_string(std::string_view s) {
  for (auto op : {Opcode::SetImpedance, Opcode::Report, Opcode::Discover, Opcode::Announce}) {
    if (to_string(op) == s) return op;
  }
  return std::nullopt;
}

Packet make_set_impedance(Coord dest, std::uint32_t load, ImpedanceCode code) {
  return Packet{Opcode::SetImpedance, dest, Coord{0, 0}, load, code.pack()};
}

unsigned words_per_packet(unsigned bus_width) {
  if (bus_width == 0 || bus_width > kPacketBits || kPacketBits % bus_width != 0) {
    throw std::invalid_argument("bus width must divide 64");
  }
  return kPacketBits / bus_width;
}

namespace {

void check_field(std::uint64_t v, unsigned bits, const char* name) {
  if (v >> bits) {
    throw Error(ErrorCode::FieldOverflow,
                std::string(name) + "=" + std::to_string(v) + " exceeds " + std::to_string(bits) +
                    " bits");
  }
}

}  // namespace

std::vector<Word> encode_packet(const Packet& p, unsigned bus_width) {
  const unsigned n = words_per_packet(bus_width);
  check_field(static_cast<std::uint64_t>(p.opcode), kOpcodeBits, "opcode");
  check_field(p.load_index, kLoadBits, "load_index");
  check_field(p.dest.x, kCoordBits, "dest.x");
  check_field(p.dest.y, kCoordBits, "dest.y");
  check_field(p.src.x, kCoordBits, "src.x");
  check_field(p.src.y, kCoordBits, "src.y");
  check_field(p.payload, 2 * kCodeBits, "payload");

  std::uint64_t frame = 0;
  auto put = [&](std::uint64_t v, unsigned bits) { frame = frame << bits | v; };
  put(static_cast<std::uint64_t>(p.opcode), kOpcodeBits);
  put(p.load_index, kLoadBits);
  put(p.dest.x, kCoordBits);
  put(p.dest.y, kCoordBits);
  put(p.src.x, kCoordBits);
  put(p.src.y, kCoordBits);
  put(p.payload, 2 * kCodeBits);

  std::vector<Word> words(n);
  const Word mask = bus_width == 64 ? ~Word{0} : (Word{1} << bus_width) - 1;
  for (unsigned i = 0; i < n; ++i) {
    words[i] = (frame >> (kPacketBits - bus_width * (i + 1))) & mask;
  }
  return words;
}

Packet decode_packet(std::span<const Word> words, unsigned bus_width) {
  const unsigned n = words_per_packet(bus_width);
  if (words.size() != n) {
    throw Error(ErrorCode::MalformedPacket, "expected " + std::to_string(n) + " words, got " +
                                                std::to_string(words.size()));
  }
  std::uint64_t frame = 0;
  for (Word w : words) {
    if (bus_width < 64 && (w >> bus_width)) {
      throw Error(ErrorCode::MalformedPacket, "word wider than the bus");
    }
    frame = bus_width == 64 ? w : (frame << bus_width | w);
  }
  unsigned shift = kPacketBits;
  auto take = [&](unsigned bits) {
    shift -= bits;
    return static_cast<std::uint32_t>((frame >> shift) & ((std::uint64_t{1} << bits) - 1));
  };
  Packet p;
  const auto op = take(kOpcodeBits);
  if (op < 1 || op > 4) throw Error(ErrorCode::MalformedPacket, "unknown opcode " + std::to_string(op));
  p.opcode = static_cast<Opcode>(op);
  p.load_index = take(kLoadBits);
  p.dest.x = take(kCoordBits);
  p.dest.y = take(kCoordBits);
  p.src.x = take(kCoordBits);
  p.src.y = take(kCoordBits);
  p.payload = take(2 * kCodeBits);
  return p;
}

std::string_view to_string(Port p) {
  switch (p) {
    case Port::North: return "N";
    case Port::East: return "E";
    case Port::South: return "S";
    case Port::West: return "W";
    case Port::Local: return "L";
  }
  return "?";
}

Port opposite(Port p) {
  switch (p) {
    case Port::North: return Port::South;
    case Port::East: return Port::West;
    case Port::South: return Port::North;
    case Port::West: return Port::East;
    case Port::Local: return Port::Local;
  }
  return Port::Local;
}

Port route_port(Coord here, Coord dest) {
  if (dest.x > here.x) return Port::East;
  if (dest.x < here.x) return Port::West;
  if (dest.y > here.y) return Port::North;
  if (dest.y < here.y) return Port::South;
  return Port::Local;
}

Port route_packet(const Packet& p, Port arrival, Coord here, std::optional<Port> parent) {
  switch (p.opcode) {
    case Opcode::Discover:
      return arrival == Port::Local ? route_port(here, p.dest) : Port::Local;
    case Opcode::Announce:
      if (!parent) throw std::logic_error("ANNOUNCE at a node without a discovery parent");
      return *parent;
    case Opcode::Report: {
      const Port toward = route_port(here, Coord{0, 0});
      return toward == Port::Local ? Port::West : toward;
    }
    case Opcode::SetImpedance:
      return route_port(here, p.dest);
  }
  return Port::Local;
}

GridSizing size_grid(double frequency_hz) {
  if (!(frequency_hz > 0.0)) throw std::invalid_argument("frequency must be positive");
  constexpr unsigned kAtomsPerWavelength = 5;
  constexpr unsigned kWavelengthsPerSide = 5;
  const double lambda = kSpeedOfLight / frequency_hz;
  return {lambda, lambda / kAtomsPerWavelength, kAtomsPerWavelength * kWavelengthsPerSide};
}

}  // namespace metasim::noc
