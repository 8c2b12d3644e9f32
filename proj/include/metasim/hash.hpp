#pragma once

#include <cstdint>

namespace metasim {

// Order-sensitive 64-bit state fingerprinting (splitmix finaliser).
class Hasher {
 public:
  void add(std::uint64_t v) {
    h_ ^= mix(v + 0x9e3779b97f4a7c15ULL + (h_ << 6) + (h_ >> 2));
  }
  std::uint64_t value() const { return mix(h_); }

  static std::uint64_t mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

 private:
  std::uint64_t h_ = 0xcbf29ce484222325ULL;
};

}  // namespace metasim
