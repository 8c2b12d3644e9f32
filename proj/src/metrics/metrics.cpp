#include "metasim/metrics/metrics.hpp"

#include <algorithm>
#include <map>
#include <sstream>
#include <stdexcept>
#include <tuple>

#include "metasim/error.hpp"

namespace metasim::metrics {

void EnergyParams::validate() const {
  if (!(c_eff > 0.0) || !(vdd > 0.0)) throw std::invalid_argument("c_eff and vdd must be positive");
}

EnergyBreakdown energy(const TransitionLedger& ledger, const EnergyParams& params) {
  params.validate();
  const double e = params.per_transition();
  EnergyBreakdown out;
  std::array<std::uint64_t, kWireClassCount> n{};
  for (std::size_t c = 0; c < kWireClassCount; ++c) n[c] = ledger.count(static_cast<WireClass>(c));
  for (std::size_t c = 0; c < kWireClassCount; ++c) {
    out.by_class_j[c] = static_cast<double>(n[c]) * e;
    out.transitions += n[c];
  }
  out.total_j = static_cast<double>(out.transitions) * e;
  return out;
}

std::uint64_t EmissionHistogram::total() const {
  std::uint64_t t = 0;
  for (auto c : counts) t += c;
  return t;
}

std::string EmissionHistogram::to_csv() const {
  std::ostringstream os;
  os << "bin_start_ps,count\n";
  for (std::size_t i = 0; i < counts.size(); ++i) {
    os << origin + i * bin_width << ',' << counts[i] << '\n';
  }
  return os.str();
}

EmissionHistogram emission_profile(const TransitionLedger& ledger, Duration bin_width, SimTime run_end) {
  if (bin_width == 0) throw std::invalid_argument("bin width must be positive");
  EmissionHistogram h;
  h.bin_width = bin_width;
  h.origin = ledger.origin();
  run_end = std::max({run_end, ledger.last_time(), h.origin});
  h.counts.assign((run_end - h.origin) / bin_width + 1, 0);
  auto bin = [&](SimTime t) { return (t - h.origin) / bin_width; };
  for (const auto& r : ledger.records()) {
    if (r.time >= h.origin) ++h.counts[bin(r.time)];
  }
  for (const auto& p : ledger.periodic()) {
    for (std::uint64_t k = 0; k < p.repetitions; ++k) {
      const SimTime base = p.start + k * p.interval;
      for (Duration o : p.offsets) {
        if (base + o >= h.origin) ++h.counts[bin(base + o)];
      }
    }
  }
  const std::uint64_t total = h.total();
  if (total == 0) {
    h.peak_to_average = 1.0;
  } else {
    const auto peak = *std::max_element(h.counts.begin(), h.counts.end());
    h.peak_to_average = static_cast<double>(peak) * static_cast<double>(h.counts.size()) /
                        static_cast<double>(total);
  }
  return h;
}

EmissionHistogram emission_profile(const TransitionLedger& ledger, Duration bin_width) {
  return emission_profile(ledger, bin_width, ledger.last_time());
}

namespace {

using Key = std::tuple<int, std::uint32_t, std::uint32_t, std::uint32_t, std::uint32_t, std::uint32_t,
                       std::uint32_t>;

Key key_of(const noc::Packet& p) {
  return {static_cast<int>(p.opcode), p.dest.x, p.dest.y, p.src.x, p.src.y, p.load_index, p.payload};
}

std::vector<Interval> merged(std::vector<Interval> v) {
  std::sort(v.begin(), v.end(), [](auto& a, auto& b) { return a.begin < b.begin; });
  std::vector<Interval> out;
  for (const auto& i : v) {
    if (!out.empty() && i.begin <= out.back().end) {
      out.back().end = std::max(out.back().end, i.end);
    } else {
      out.push_back(i);
    }
  }
  return out;
}

// Number of k in [0, n) with lo <= base + k*step <= hi.
std::uint64_t hits(SimTime base, Duration step, std::uint64_t n, SimTime lo, SimTime hi) {
  if (n == 0 || hi < base) return 0;
  const SimTime last = base + (n - 1) * step;
  if (lo > last) return 0;
  const std::uint64_t k0 = lo <= base ? 0 : (lo - base + step - 1) / step;
  const std::uint64_t k1 = std::min<std::uint64_t>(n - 1, (hi - base) / step);
  return k1 >= k0 ? k1 - k0 + 1 : 0;
}

}  // namespace

LatencyReport latency_report(const std::vector<noc::PacketRecord>& injections,
                             const std::vector<noc::PacketRecord>& deliveries) {
  std::map<Key, std::vector<SimTime>> open;
  std::map<Key, std::size_t> next;
  for (const auto& i : injections) open[key_of(i.packet)].push_back(i.time);

  LatencyReport rep;
  double sum = 0.0;
  for (const auto& d : deliveries) {
    const Key k = key_of(d.packet);
    auto it = open.find(k);
    std::size_t& idx = next[k];
    if (it == open.end() || idx >= it->second.size() || it->second[idx] > d.time) {
      throw Error(ErrorCode::UnmatchedDelivery,
                  std::string(noc::to_string(d.packet.opcode)) + " for " + noc::to_string(d.packet.dest) +
                      " delivered at " + std::to_string(d.time) + " ps has no matching injection");
    }
    const SimTime t0 = it->second[idx++];
    const double lat = static_cast<double>(d.time - t0);
    rep.in_flight.push_back({t0, d.time});
    if (rep.stats.count == 0) {
      rep.stats.min = rep.stats.max = lat;
    } else {
      rep.stats.min = std::min(rep.stats.min, lat);
      rep.stats.max = std::max(rep.stats.max, lat);
    }
    ++rep.stats.count;
    sum += lat;
  }
  if (rep.stats.count) rep.stats.mean = sum / static_cast<double>(rep.stats.count);
  return rep;
}

double idle_energy(const TransitionLedger& ledger, const std::vector<Interval>& in_flight,
                   const EnergyParams& params) {
  const auto busy = merged(in_flight);
  auto inside = [&](SimTime t) {
    auto it = std::upper_bound(busy.begin(), busy.end(), t, [](SimTime v, const Interval& i) { return v < i.begin; });
    return it != busy.begin() && t <= std::prev(it)->end;
  };
  std::uint64_t total = 0, active = 0;
  for (const auto& r : ledger.records()) {
    ++total;
    active += inside(r.time);
  }
  for (const auto& p : ledger.periodic()) {
    total += p.count();
    for (const auto& i : busy) {
      for (Duration o : p.offsets) active += hits(p.start + o, p.interval, p.repetitions, i.begin, i.end);
    }
  }
  params.validate();
  return static_cast<double>(total - active) * params.per_transition();
}

RunReport make_report(std::string fabric, const TransitionLedger& ledger,
                      const std::vector<noc::PacketRecord>& injections,
                      const std::vector<noc::PacketRecord>& deliveries, SimTime run_end,
                      const EnergyParams& params, Duration bin_width) {
  RunReport r;
  r.fabric = std::move(fabric);
  r.energy = energy(ledger, params);
  const auto lat = latency_report(injections, deliveries);
  r.latency = lat.stats;
  r.idle_energy_j = idle_energy(ledger, lat.in_flight, params);
  r.histogram = emission_profile(ledger, bin_width, run_end);
  r.injected = injections.size();
  r.delivered = deliveries.size();
  r.clock_power_share = r.energy.total_j > 0.0 ? r.energy.of(WireClass::Clock) / r.energy.total_j : 0.0;
  r.origin = ledger.origin();
  r.run_end = std::max(run_end, ledger.last_time());
  for (const auto& i : injections) r.workload.push_back(i.packet);
  return r;
}

namespace {

nlohmann::ordered_json latency_json(const LatencyStats& s) {
  return {{"count", s.count}, {"min", s.min}, {"mean", s.mean}, {"max", s.max}};
}

double ratio(double a, double b) {
  if (a == 0.0 && b == 0.0) return 1.0;
  return a / b;
}

}  // namespace

nlohmann::ordered_json to_json(const RunReport& r) {
  nlohmann::ordered_json j;
  j["fabric"] = r.fabric;
  j["energy_total_j"] = r.energy.total_j;
  j["energy_by_class"] = {{"data", r.energy.of(WireClass::Data)},
                          {"handshake", r.energy.of(WireClass::Handshake)},
                          {"clock", r.energy.of(WireClass::Clock)}};
  j["idle_energy_j"] = r.idle_energy_j;
  j["transitions"] = r.energy.transitions;
  j["peak_to_average"] = r.histogram.peak_to_average;
  j["bin_width_ps"] = r.histogram.bin_width;
  j["latency"] = latency_json(r.latency);
  j["packets"] = {{"injected", r.injected}, {"delivered", r.delivered}};
  j["clock_power_share"] = r.clock_power_share;
  j["origin_ps"] = r.origin;
  j["run_end_ps"] = r.run_end;
  return j;
}

Comparison compare_reports(const RunReport& first, const RunReport& second) {
  if (first.workload != second.workload) {
    throw Error(ErrorCode::WorkloadMismatch,
                "runs injected different packets (" + std::to_string(first.workload.size()) + " vs " +
                    std::to_string(second.workload.size()) + ")");
  }
  Comparison c;
  c.energy_first_j = first.energy.total_j;
  c.energy_second_j = second.energy.total_j;
  c.energy_ratio = ratio(c.energy_first_j, c.energy_second_j);
  c.idle_energy_first_j = first.idle_energy_j;
  c.idle_energy_second_j = second.idle_energy_j;
  c.peak_to_average_first = first.histogram.peak_to_average;
  c.peak_to_average_second = second.histogram.peak_to_average;
  c.peak_to_average_ratio = ratio(c.peak_to_average_second, c.peak_to_average_first);
  c.latency_first = first.latency;
  c.latency_second = second.latency;
  c.latency_ratio = ratio(first.latency.mean, second.latency.mean);
  c.clock_power_share_second = second.clock_power_share;
  return c;
}

nlohmann::ordered_json to_json(const Comparison& c) {
  nlohmann::ordered_json j;
  j["energy_ratio"] = c.energy_ratio;
  j["energy_j"] = {c.energy_first_j, c.energy_second_j};
  j["idle_energy_j"] = {c.idle_energy_first_j, c.idle_energy_second_j};
  j["peak_to_average"] = {c.peak_to_average_first, c.peak_to_average_second};
  j["peak_to_average_ratio"] = c.peak_to_average_ratio;
  j["latency"] = {latency_json(c.latency_first), latency_json(c.latency_second)};
  j["latency_ratio"] = c.latency_ratio;
  j["clock_power_share"] = c.clock_power_share_second;
  return j;
}

}  // namespace metasim::metrics
