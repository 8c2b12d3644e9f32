#pragma once

#include <cstdint>
#include <memory>
#include <random>
#include <string>
#include <variant>

#include "metasim/sim/kernel.hpp"

namespace metasim::sim {

// Seeded stream. mt19937_64's output sequence is fixed by the standard, and
// the range reduction below is our own, so traces are reproducible across
// standard libraries (std::uniform_int_distribution is not).
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0) : engine_(seed), seed_(seed) {}

  std::uint64_t seed() const noexcept { return seed_; }
  std::uint64_t next() { return engine_(); }

  // Uniform integer in [lo, hi], rejection sampled.
  std::uint64_t uniform(std::uint64_t lo, std::uint64_t hi);

  // Uniform double in [0, 1).
  double unit() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  bool coin() { return (next() >> 63) != 0; }

 private:
  std::mt19937_64 engine_;
  std::uint64_t seed_;
};

class DelayModel {
 public:
  enum class Kind { Fixed, UniformJitter, Scaled };

  // All factories throw InvalidDelayModel on a model that could sample 0 ps
  // or has lo > hi / factor <= 0.
  static DelayModel fixed(Duration d);
  static DelayModel uniform(Duration lo, Duration hi);
  static DelayModel scaled(const DelayModel& base, double factor);

  DelayModel() : DelayModel(fixed(1)) {}

  Kind kind() const noexcept { return static_cast<Kind>(v_.index()); }

  Duration sample(Rng& rng) const;
  Duration worst_case() const;
  Duration best_case() const;

  // Accessors for serialization; valid for the matching kind only.
  Duration fixed_delay() const { return std::get<Fixed>(v_).d; }
  Duration lo() const { return std::get<Uniform>(v_).lo; }
  Duration hi() const { return std::get<Uniform>(v_).hi; }
  const DelayModel& base() const { return *std::get<Scaled>(v_).base; }
  double factor() const { return std::get<Scaled>(v_).factor; }

  std::string describe() const;

  friend bool operator==(const DelayModel& a, const DelayModel& b);

 private:
  struct Fixed {
    Duration d;
  };
  struct Uniform {
    Duration lo, hi;
  };
  struct Scaled {
    std::shared_ptr<const DelayModel> base;
    double factor;
  };

  explicit DelayModel(std::variant<Fixed, Uniform, Scaled> v) : v_(std::move(v)) {}

  static Duration scale(Duration d, double factor);

  std::variant<Fixed, Uniform, Scaled> v_;
};

}  // namespace metasim::sim
