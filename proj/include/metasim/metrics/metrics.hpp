#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "metasim/metrics/ledger.hpp"
#include "metasim/noc/packet.hpp"

namespace metasim::metrics {

struct EnergyParams {
  double c_eff = 10e-15;  // F per transition
  double vdd = 1.0;       // V

  double per_transition() const { return 0.5 * c_eff * vdd * vdd; }
  void validate() const;
};

struct EnergyBreakdown {
  double total_j = 0.0;
  std::array<double, kWireClassCount> by_class_j{};
  std::uint64_t transitions = 0;

  double of(WireClass c) const { return by_class_j[static_cast<std::size_t>(c)]; }
};

EnergyBreakdown energy(const TransitionLedger& ledger, const EnergyParams& params = {});

struct EmissionHistogram {
  Duration bin_width = 100;
  SimTime origin = 0;
  std::vector<std::uint32_t> counts;
  double peak_to_average = 1.0;

  std::uint64_t total() const;
  std::string to_csv() const;
};

// Bins every transition in [ledger.origin(), run_end] by bin_width. The
// average is over all bins of that span, so idle stretches count against
// concentration. An empty ledger has ratio 1.
EmissionHistogram emission_profile(const TransitionLedger& ledger, Duration bin_width, SimTime run_end);
EmissionHistogram emission_profile(const TransitionLedger& ledger, Duration bin_width = 100);

struct LatencyStats {
  std::uint64_t count = 0;
  double min = 0.0;
  double mean = 0.0;
  double max = 0.0;
};

struct Interval {
  SimTime begin;
  SimTime end;
};

struct LatencyReport {
  LatencyStats stats;
  std::vector<Interval> in_flight;  // one per matched packet
};

// Pairs deliveries with injections of the same packet in FIFO order. Throws
// UnmatchedDelivery for a delivery with no earlier injection left to match.
LatencyReport latency_report(const std::vector<noc::PacketRecord>& injections,
                             const std::vector<noc::PacketRecord>& deliveries);

// Energy of transitions outside every in-flight interval.
double idle_energy(const TransitionLedger& ledger, const std::vector<Interval>& in_flight,
                   const EnergyParams& params = {});

struct RunReport {
  std::string fabric;  // "async" or "sync"
  EnergyBreakdown energy;
  double idle_energy_j = 0.0;
  EmissionHistogram histogram;
  LatencyStats latency;
  std::uint64_t injected = 0;
  std::uint64_t delivered = 0;
  double clock_power_share = 0.0;
  SimTime origin = 0;
  SimTime run_end = 0;
  std::vector<noc::Packet> workload;  // injected packets in injection order
};

RunReport make_report(std::string fabric, const TransitionLedger& ledger,
                      const std::vector<noc::PacketRecord>& injections,
                      const std::vector<noc::PacketRecord>& deliveries, SimTime run_end,
                      const EnergyParams& params = {}, Duration bin_width = 100);

nlohmann::ordered_json to_json(const RunReport& r);

struct Comparison {
  double energy_ratio = 1.0;  // first / second, 0/0 = 1
  double energy_first_j = 0.0;
  double energy_second_j = 0.0;
  double idle_energy_first_j = 0.0;
  double idle_energy_second_j = 0.0;
  double peak_to_average_first = 1.0;
  double peak_to_average_second = 1.0;
  double peak_to_average_ratio = 1.0;  // second / first
  LatencyStats latency_first;
  LatencyStats latency_second;
  double latency_ratio = 1.0;  // mean first / mean second
  double clock_power_share_second = 0.0;
};

// Usually (async, sync). Throws WorkloadMismatch unless both runs injected
// the same packets in the same order.
Comparison compare_reports(const RunReport& first, const RunReport& second);

nlohmann::ordered_json to_json(const Comparison& c);

}  // namespace metasim::metrics
