#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "metasim/async/primitives.hpp"
#include "metasim/sim/kernel.hpp"

namespace metasim::noc {

using async::Word;

inline constexpr unsigned kCoordBits = 10;
inline constexpr unsigned kMaxGridSide = 1u << kCoordBits;
inline constexpr unsigned kOpcodeBits = 4;
inline constexpr unsigned kLoadBits = 4;
inline constexpr unsigned kCodeBits = 8;  // resistance and reactance each
inline constexpr unsigned kPacketBits = 64;
inline constexpr unsigned kDefaultBusWidth = 16;
inline constexpr unsigned kDefaultLoadsPerNode = 4;

struct Coord {
  std::uint32_t x = 0;
  std::uint32_t y = 0;

  friend bool operator==(const Coord&, const Coord&) = default;
  friend auto operator<=>(const Coord&, const Coord&) = default;
};

std::string to_string(Coord c);

struct ImpedanceCode {
  std::uint32_t resistance = 0;
  std::uint32_t reactance = 0;

  std::uint16_t pack() const { return static_cast<std::uint16_t>(resistance << 8 | reactance); }
  static ImpedanceCode unpack(std::uint16_t v) { return {std::uint32_t{v} >> 8u, std::uint32_t{v} & 0xFFu}; }

  friend bool operator==(const ImpedanceCode&, const ImpedanceCode&) = default;
};

enum class Opcode : std::uint8_t {
  SetImpedance = 1,
  Report = 2,
  Discover = 3,
  Announce = 4,
};

std::string_view to_string(Opcode op);
std::optional<Opcode> opcode_from_string(std::string_view s);

// One addressed unit on the fabric. `payload` is the packed impedance code
// for SET_IMPEDANCE and an opaque event code for REPORT. DISCOVER carries the
// coordinate being handed out in `dest`.
struct Packet {
  Opcode opcode = Opcode::SetImpedance;
  Coord dest;
  Coord src;
  std::uint32_t load_index = 0;
  std::uint32_t payload = 0;

  ImpedanceCode impedance() const { return ImpedanceCode::unpack(static_cast<std::uint16_t>(payload)); }

  friend bool operator==(const Packet&, const Packet&) = default;
};

// Packet as first seen by the fabric (injection) or by its consumer (delivery).
struct PacketRecord {
  sim::SimTime time = 0;
  Packet packet;
};

Packet make_set_impedance(Coord dest, std::uint32_t load, ImpedanceCode code);

// Field layout (MSB first) of the 64-bit frame, split big-endian into
// bus-width words; see FORMAT.md. Throws FieldOverflow when a field exceeds its
// width and std::invalid_argument for a bus width that does not divide 64.
std::vector<Word> encode_packet(const Packet& p, unsigned bus_width = kDefaultBusWidth);
// Throws MalformedPacket on a short/long word list or an unknown opcode.
Packet decode_packet(std::span<const Word> words, unsigned bus_width = kDefaultBusWidth);
unsigned words_per_packet(unsigned bus_width);

enum class Port : std::uint8_t { North = 0, East = 1, South = 2, West = 3, Local = 4 };
inline constexpr unsigned kPortCount = 5;

std::string_view to_string(Port p);
Port opposite(Port p);

// Dimension-order routing: correct x first, then y. North is +y, East is +x.
Port route_port(Coord here, Coord dest);

// Output port for a packet at a router. Shared by the asynchronous and the
// clocked fabric so both realise the same routing function.
//   DISCOVER: neighbour-scoped. Arriving from outside it goes to the node
//             core; issued by the core it leaves towards its carried coord.
//   ANNOUNCE: retraces the discovery tree via the recorded parent port.
//   REPORT:   dimension-order towards the gateway corner, then out West.
//   SET_IMPEDANCE: dimension-order to dest, Local on arrival.
Port route_packet(const Packet& p, Port arrival, Coord here, std::optional<Port> parent);

// Grid sizing for a carrier frequency: at least 5 meta-atoms per wavelength
// and at least 5x5 wavelengths per tile.
struct GridSizing {
  double wavelength_m;
  double max_atom_pitch_m;
  unsigned min_atoms_per_side;
};
inline constexpr double kSpeedOfLight = 3.0e8;  // m/s, as used for the 12.5 cm / 5 mm figures
GridSizing size_grid(double frequency_hz);

}  // namespace metasim::noc
