#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <vector>

#include "metasim/error.hpp"
#include "metasim/noc/packet.hpp"
#include "metasim/sim/delay.hpp"

using namespace metasim;
using namespace metasim::noc;

namespace {

ErrorCode code_of(auto&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an Error");
  return ErrorCode::SchemaError;
}

struct Golden {
  Packet p;
  std::vector<Word> words;
};

// Frozen wire format; FORMAT.md lists the same vectors.
const std::vector<Golden> kGolden = {
    {{Opcode::SetImpedance, {3, 5}, {0, 0}, 2, 0xABCD}, {0x1200, 0xC050, 0x0000, 0xABCD}},
    {{Opcode::Report, {0, 0}, {1023, 7}, 0, 0x0042}, {0x2000, 0x000F, 0xFC07, 0x0042}},
    {{Opcode::Discover, {1, 0}, {0, 0}, 0, 0}, {0x3000, 0x4000, 0x0000, 0x0000}},
    {{Opcode::Announce, {0, 0}, {1023, 1023}, 0, 0}, {0x4000, 0x000F, 0xFFFF, 0x0000}},
    {{Opcode::SetImpedance, {1023, 1023}, {1023, 1023}, 15, 0xFFFF}, {0x1FFF, 0xFFFF, 0xFFFF, 0xFFFF}},
};

}  // namespace

TEST_CASE("golden vectors") {
  for (const auto& g : kGolden) {
    CHECK(encode_packet(g.p) == g.words);
    CHECK(decode_packet(g.words) == g.p);
  }
  CHECK(encode_packet(kGolden[0].p, 64) == std::vector<Word>{0x1200C0500000ABCDull});
  CHECK(encode_packet(kGolden[0].p, 32) == std::vector<Word>{0x1200C050u, 0x0000ABCDu});
}

TEST_CASE("round trip over random packets and bus widths") {
  sim::Rng rng(77);
  for (int i = 0; i < 20'000; ++i) {
    Packet p;
    p.opcode = static_cast<Opcode>(rng.uniform(1, 4));
    p.dest = {static_cast<std::uint32_t>(rng.uniform(0, 1023)), static_cast<std::uint32_t>(rng.uniform(0, 1023))};
    p.src = {static_cast<std::uint32_t>(rng.uniform(0, 1023)), static_cast<std::uint32_t>(rng.uniform(0, 1023))};
    p.load_index = static_cast<std::uint32_t>(rng.uniform(0, 15));
    p.payload = static_cast<std::uint32_t>(rng.uniform(0, 0xFFFF));
    for (unsigned w : {8u, 16u, 32u, 64u}) {
      const auto words = encode_packet(p, w);
      REQUIRE(words.size() == 64 / w);
      REQUIRE(decode_packet(words, w) == p);
    }
  }
}

TEST_CASE("field overflow and malformed input") {
  Packet p;
  p.dest = {1024, 0};
  CHECK(code_of([&] { encode_packet(p); }) == ErrorCode::FieldOverflow);
  p.dest = {0, 0};
  p.load_index = 16;
  CHECK(code_of([&] { encode_packet(p); }) == ErrorCode::FieldOverflow);
  p.load_index = 0;
  p.payload = 0x10000;
  CHECK(code_of([&] { encode_packet(p); }) == ErrorCode::FieldOverflow);

  const std::vector<Word> three{0x1200, 0, 0};
  CHECK(code_of([&] { decode_packet(three); }) == ErrorCode::MalformedPacket);
  const std::vector<Word> bad_op{0x0000, 0, 0, 0};
  CHECK(code_of([&] { decode_packet(bad_op); }) == ErrorCode::MalformedPacket);
  const std::vector<Word> wide{0x1FFFF, 0, 0, 0};
  CHECK(code_of([&] { decode_packet(wide); }) == ErrorCode::MalformedPacket);
  CHECK_THROWS_AS(encode_packet(Packet{}, 12), std::invalid_argument);
}

TEST_CASE("impedance code packing") {
  const ImpedanceCode c{0x12, 0x34};
  CHECK(c.pack() == 0x1234);
  CHECK(ImpedanceCode::unpack(0x1234) == c);
  CHECK(make_set_impedance({2, 1}, 3, c).payload == 0x1234);
}

TEST_CASE("dimension-order routing") {
  CHECK(route_port({1, 1}, {3, 0}) == Port::East);
  CHECK(route_port({3, 1}, {3, 0}) == Port::South);
  CHECK(route_port({3, 0}, {3, 0}) == Port::Local);
  CHECK(route_port({2, 2}, {0, 5}) == Port::West);
  CHECK(route_port({0, 2}, {0, 5}) == Port::North);

  // walk every pair on a 6x5 grid: x settles before y and the path is minimal
  for (std::uint32_t sx = 0; sx < 6; ++sx)
    for (std::uint32_t sy = 0; sy < 5; ++sy)
      for (std::uint32_t dx = 0; dx < 6; ++dx)
        for (std::uint32_t dy = 0; dy < 5; ++dy) {
          Coord c{sx, sy};
          unsigned hops = 0;
          bool turned = false;
          for (Port p; (p = route_port(c, {dx, dy})) != Port::Local; ++hops) {
            if (p == Port::North || p == Port::South) turned = true;
            else REQUIRE_FALSE(turned);
            if (p == Port::East) ++c.x;
            if (p == Port::West) --c.x;
            if (p == Port::North) ++c.y;
            if (p == Port::South) --c.y;
          }
          REQUIRE(c == Coord{dx, dy});
          REQUIRE(hops == (sx > dx ? sx - dx : dx - sx) + (sy > dy ? sy - dy : dy - sy));
        }
}

TEST_CASE("per-opcode routing") {
  Packet d{Opcode::Discover, {2, 1}, {1, 1}, 0, 0};
  CHECK(route_packet(d, Port::Local, {1, 1}, Port::West) == Port::East);
  CHECK(route_packet(d, Port::West, {2, 1}, std::nullopt) == Port::Local);
  Packet a{Opcode::Announce, {0, 0}, {2, 1}, 0, 0};
  CHECK(route_packet(a, Port::Local, {2, 1}, Port::South) == Port::South);
  CHECK_THROWS(route_packet(a, Port::Local, {2, 1}, std::nullopt));
  Packet r{Opcode::Report, {0, 0}, {2, 1}, 0, 7};
  CHECK(route_packet(r, Port::Local, {2, 1}, Port::South) == Port::West);
  CHECK(route_packet(r, Port::East, {0, 1}, Port::South) == Port::South);
  CHECK(route_packet(r, Port::North, {0, 0}, Port::West) == Port::West);
  Packet s = make_set_impedance({2, 1}, 0, {});
  CHECK(route_packet(s, Port::West, {0, 0}, Port::West) == Port::East);
  CHECK(route_packet(s, Port::West, {2, 1}, Port::West) == Port::Local);
}

TEST_CASE("grid sizing") {
  const auto wifi = size_grid(2.4e9);
  CHECK(wifi.wavelength_m == doctest::Approx(0.125).epsilon(1e-12));
  CHECK(wifi.max_atom_pitch_m == doctest::Approx(0.025).epsilon(1e-12));
  CHECK(wifi.min_atoms_per_side == 25);
  const auto mmw = size_grid(60e9);
  CHECK(mmw.wavelength_m == doctest::Approx(0.005).epsilon(1e-12));
  CHECK(mmw.max_atom_pitch_m == doctest::Approx(0.001).epsilon(1e-12));
  CHECK_THROWS_AS(size_grid(0.0), std::invalid_argument);
}

TEST_CASE("opcode names") {
  for (auto op : {Opcode::SetImpedance, Opcode::Report, Opcode::Discover, Opcode::Announce}) {
    CHECK(opcode_from_string(to_string(op)) == op);
  }
  CHECK_FALSE(opcode_from_string("NOP").has_value());
}
