#include "saath/types.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace saath {

double FlowState::current_rate(Micros delta) const {
  return static_cast<double>(current_budget) * static_cast<double>(kMicrosPerSecond) /
         static_cast<double>(delta);
}

Bytes CoFlow::total_size() const {
  return std::accumulate(flows.begin(), flows.end(), Bytes{0},
                         [](Bytes acc, const FlowState& f) { return acc + f.spec.size_bytes; });
}

Bytes CoFlow::total_sent() const {
  return std::accumulate(flows.begin(), flows.end(), Bytes{0},
                         [](Bytes acc, const FlowState& f) { return acc + f.bytes_sent; });
}

Bytes CoFlow::total_attained() const {
  return std::accumulate(flows.begin(), flows.end(), Bytes{0},
                         [](Bytes acc, const FlowState& f) { return acc + f.bytes_attained; });
}

Bytes CoFlow::remaining_bytes() const { return total_size() - total_sent(); }

Bytes CoFlow::max_flow_attained() const {
  Bytes m = 0;
  for (const auto& f : flows) m = std::max(m, f.bytes_attained);
  return m;
}

std::size_t CoFlow::unfinished_count() const {
  return static_cast<std::size_t>(
      std::count_if(flows.begin(), flows.end(), [](const FlowState& f) { return !f.finished(); }));
}

void QueueConfig::validate() const {
  if (K < 1) throw ConfigError("queue count K must be >= 1, got " + std::to_string(K));
  if (S <= 0) throw ConfigError("starting threshold S must be > 0 bytes");
  if (!(E > 1.0) || !std::isfinite(E)) throw ConfigError("growth factor E must be > 1");
}

std::vector<QueueRange> derive_thresholds(const QueueConfig& config) {
  config.validate();
  // Keep finite thresholds well clear of the sentinel so products with a
  // coflow width cannot overflow 128-bit intermediates either.
  constexpr long double kMaxThreshold = static_cast<long double>(1LL << 62);

  std::vector<QueueRange> ranges(static_cast<std::size_t>(config.K));
  Bytes lo = 0;
  for (int q = 0; q < config.K; ++q) {
    auto& r = ranges[static_cast<std::size_t>(q)];
    r.lo = lo;
    if (q == config.K - 1) {
      r.hi = kInfiniteBytes;
      break;
    }
    const long double hi = std::round(static_cast<long double>(config.S) *
                                      std::pow(static_cast<long double>(config.E), q));
    if (hi >= kMaxThreshold) {
      throw ConfigError("queue threshold " + std::to_string(q) + " overflows; reduce K, S or E");
    }
    r.hi = static_cast<Bytes>(hi);
    if (r.hi <= r.lo) {
      throw ConfigError("queue thresholds must be strictly increasing (S too small for E?)");
    }
    lo = r.hi;
  }
  return ranges;
}

Bytes per_interval_budget(Bytes rate_bps, Micros delta) {
  const auto wide = static_cast<__int128>(rate_bps) * delta / kMicrosPerSecond;
  return static_cast<Bytes>(wide);
}

const char* to_string(Origin origin) {
  switch (origin) {
    case Origin::AllOrNone: return "ALL_OR_NONE";
    case Origin::WorkConservation: return "WORK_CONSERVATION";
  }
  return "?";
}

const ScheduleEntry* Schedule::find(FlowId flow_id) const {
  for (const auto& e : entries) {
    if (e.flow_id == flow_id) return &e;
  }
  return nullptr;
}

void SimConfig::validate() const {
  if (delta <= 0) throw ConfigError("delta must be > 0");
  queues.validate();
  if (!(deadline_factor >= 1.0)) throw ConfigError("deadline factor d must be >= 1");
  if (!(arrival_scale > 0.0)) throw ConfigError("arrival scale A must be > 0");
  if (port_count < 0) throw ConfigError("port count must be >= 0");
  if (port_rate <= 0) throw ConfigError("port rate must be > 0");
  if (per_interval_budget(port_rate, delta) <= 0) {
    throw ConfigError("port rate too small to carry a byte per interval");
  }
  if (producer_rate <= 0) throw ConfigError("producer rate must be > 0");
  if (max_intervals <= 0) throw ConfigError("max intervals must be > 0");
}

}  // namespace saath
