#include "metasim/sim/delay.hpp"

#include <cmath>
#include <limits>
#include <sstream>

namespace metasim::sim {

std::uint64_t Rng::uniform(std::uint64_t lo, std::uint64_t hi) {
  if (lo >= hi) return lo;
  const std::uint64_t range = hi - lo + 1;
  if (range == 0) return next();  // full 64-bit span
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                              std::numeric_limits<std::uint64_t>::max() % range;
  std::uint64_t r;
  do {
    r = next();
  } while (r >= limit);
  return lo + r % range;
}

DelayModel DelayModel::fixed(Duration d) {
  if (d == 0) throw Error(ErrorCode::InvalidDelayModel, "fixed delay must be >= 1 ps");
  return DelayModel(Fixed{d});
}

DelayModel DelayModel::uniform(Duration lo, Duration hi) {
  if (lo == 0) throw Error(ErrorCode::InvalidDelayModel, "jitter lower bound must be >= 1 ps");
  if (lo > hi) throw Error(ErrorCode::InvalidDelayModel, "jitter lo > hi");
  return DelayModel(Uniform{lo, hi});
}

DelayModel DelayModel::scaled(const DelayModel& base, double factor) {
  if (!(factor > 0.0) || !std::isfinite(factor)) {
    throw Error(ErrorCode::InvalidDelayModel, "scale factor must be positive");
  }
  return DelayModel(Scaled{std::make_shared<const DelayModel>(base), factor});
}

Duration DelayModel::scale(Duration d, double factor) {
  const double v = std::round(factor * static_cast<double>(d));
  return v < 1.0 ? 1 : static_cast<Duration>(v);
}

Duration DelayModel::sample(Rng& rng) const {
  switch (v_.index()) {
    case 0: return std::get<Fixed>(v_).d;
    case 1: {
      const auto& u = std::get<Uniform>(v_);
      return rng.uniform(u.lo, u.hi);
    }
    default: {
      const auto& s = std::get<Scaled>(v_);
      return scale(s.base->sample(rng), s.factor);
    }
  }
}

Duration DelayModel::worst_case() const {
  switch (v_.index()) {
    case 0: return std::get<Fixed>(v_).d;
    case 1: return std::get<Uniform>(v_).hi;
    default: {
      const auto& s = std::get<Scaled>(v_);
      return scale(s.base->worst_case(), s.factor);
    }
  }
}

Duration DelayModel::best_case() const {
  switch (v_.index()) {
    case 0: return std::get<Fixed>(v_).d;
    case 1: return std::get<Uniform>(v_).lo;
    default: {
      const auto& s = std::get<Scaled>(v_);
      return scale(s.base->best_case(), s.factor);
    }
  }
}

std::string DelayModel::describe() const {
  std::ostringstream os;
  switch (v_.index()) {
    case 0: os << "Fixed(" << fixed_delay() << ")"; break;
    case 1: os << "UniformJitter(" << lo() << "," << hi() << ")"; break;
    default: os << "Scaled(" << base().describe() << "," << factor() << ")"; break;
  }
  return os.str();
}

bool operator==(const DelayModel& a, const DelayModel& b) {
  if (a.v_.index() != b.v_.index()) return false;
  switch (a.v_.index()) {
    case 0: return a.fixed_delay() == b.fixed_delay();
    case 1: return a.lo() == b.lo() && a.hi() == b.hi();
    default: return a.factor() == b.factor() && a.base() == b.base();
  }
}

}  // namespace metasim::sim
