#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace saath {

using Bytes = std::int64_t;
using Micros = std::int64_t;  // simulation time, integer microseconds
using CoflowId = std::int64_t;
using FlowId = std::int64_t;
using PortId = std::int32_t;

inline constexpr Micros kMicrosPerSecond = 1'000'000;
inline constexpr Micros kMicrosPerMilli = 1'000;
inline constexpr Bytes kBytesPerMB = 1'000'000;
inline constexpr Bytes kInfiniteBytes = std::numeric_limits<Bytes>::max();
inline constexpr Micros kNever = std::numeric_limits<Micros>::max();

/// 1 Gbps expressed in bytes per second.
inline constexpr Bytes kGigabitBytesPerSecond = 125'000'000;

class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class SimError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

constexpr Micros millis(double ms) {
  return static_cast<Micros>(ms * static_cast<double>(kMicrosPerMilli) + (ms >= 0 ? 0.5 : -0.5));
}

constexpr double to_seconds(Micros t) {
  return static_cast<double>(t) / static_cast<double>(kMicrosPerSecond);
}

constexpr double to_millis(Micros t) {
  return static_cast<double>(t) / static_cast<double>(kMicrosPerMilli);
}

struct FlowSpec {
  FlowId flow_id = 0;
  CoflowId coflow_id = 0;
  PortId src_port = 0;  // mapper machine, consumes egress
  PortId dst_port = 0;  // reducer machine, consumes ingress
  Bytes size_bytes = 1;

  friend bool operator==(const FlowSpec&, const FlowSpec&) = default;
};

struct FlowState {
  FlowSpec spec;
  Bytes bytes_sent = 0;
  // Bytes produced so far by the upstream task. Equal to the size unless
  // availability is pipelined.
  Bytes available_bytes = 0;
  // Cumulative bytes put on the wire, including bytes lost to restarts.
  // This is the attained service that queue placement is based on.
  Bytes bytes_attained = 0;
  // Rate granted for the current interval, as a per-interval byte budget.
  Bytes current_budget = 0;
  std::optional<Micros> finish_time;
  std::optional<Bytes> rate_cap;  // bytes/second, straggler injection
  Micros production_start = 0;

  bool finished() const { return finish_time.has_value(); }
  Bytes remaining() const { return spec.size_bytes - bytes_sent; }
  Bytes unread() const { return available_bytes - bytes_sent; }
  double current_rate(Micros delta) const;  // bytes/second
};

struct QueueTransition {
  Micros time = 0;
  int queue = 0;
  friend bool operator==(const QueueTransition&, const QueueTransition&) = default;
};

struct CoFlow {
  CoflowId coflow_id = 0;
  Micros arrival_time = 0;
  std::vector<FlowState> flows;  // ascending flow_id
  std::vector<CoflowId> parents;

  // Scheduler state.
  int queue_index = 0;
  std::optional<Micros> deadline;
  Micros queue_entry_time = 0;
  bool deadline_counted = false;  // expiry of the current deadline already recorded
  int deadline_expiries = 0;
  std::vector<QueueTransition> queue_history;
  bool requeue_pending = false;  // a restart happened since the last schedule
  bool estimate_mode = false;    // queue derived from remaining-length estimate

  // Lifecycle.
  bool arrived = false;
  bool registered = false;  // false until arrival and all parents complete
  Micros start_time = 0;    // max(arrival, last parent completion); CCT origin
  std::optional<Micros> completion_time;
  std::size_t slot = 0;     // index in the engine's coflow table

  std::size_t width() const { return flows.size(); }
  Bytes total_size() const;
  Bytes total_sent() const;
  Bytes total_attained() const;
  Bytes remaining_bytes() const;
  // m_c: largest attained byte count over the coflow's flows.
  Bytes max_flow_attained() const;
  std::size_t unfinished_count() const;
  bool finished() const { return completion_time.has_value(); }
  std::optional<Micros> cct() const {
    if (!completion_time) return std::nullopt;
    return *completion_time - start_time;
  }
};

/// Exponentially spaced multi-level queue thresholds.
struct QueueConfig {
  int K = 10;
  Bytes S = 10 * kBytesPerMB;  // Q^hi_0
  double E = 10.0;

  void validate() const;
};

struct QueueRange {
  Bytes lo = 0;
  Bytes hi = kInfiniteBytes;  // kInfiniteBytes marks the open-ended last queue

  friend bool operator==(const QueueRange&, const QueueRange&) = default;
};

/// Half-open ranges [lo, hi) for queues 0..K-1; the last hi is the infinity
/// sentinel. Throws ConfigError on invalid K/S/E or threshold overflow.
std::vector<QueueRange> derive_thresholds(const QueueConfig& config);

struct PortCapacity {
  Bytes egress_rate = kGigabitBytesPerSecond;   // bytes/second
  Bytes ingress_rate = kGigabitBytesPerSecond;  // bytes/second

  friend bool operator==(const PortCapacity&, const PortCapacity&) = default;
};

/// Bytes a port side may carry in one interval (floor of rate * delta).
Bytes per_interval_budget(Bytes rate_bps, Micros delta);

enum class Origin : std::uint8_t { AllOrNone, WorkConservation };

const char* to_string(Origin origin);

struct ScheduleEntry {
  CoflowId coflow_id = 0;
  FlowId flow_id = 0;
  std::uint32_t coflow_slot = 0;
  std::uint32_t flow_slot = 0;
  PortId src_port = 0;
  PortId dst_port = 0;
  Bytes budget = 0;  // bytes per interval
  Origin origin = Origin::AllOrNone;
};

struct Schedule {
  std::int64_t interval_index = 0;
  std::vector<ScheduleEntry> entries;

  const ScheduleEntry* find(FlowId flow_id) const;
};

enum class AvailabilityMode : std::uint8_t { AllAtArrival, Pipelined };
enum class ContentionScope : std::uint8_t { Global, Queue };

struct SimConfig {
  Micros delta = 8 * kMicrosPerMilli;
  QueueConfig queues;
  double deadline_factor = 2.0;  // d
  double arrival_scale = 1.0;    // A
  int port_count = 0;            // 0: take from the trace header
  Bytes port_rate = kGigabitBytesPerSecond;
  std::uint64_t rng_seed = 0;
  AvailabilityMode availability = AvailabilityMode::AllAtArrival;
  Bytes producer_rate = kGigabitBytesPerSecond;  // pipelined production, bytes/second
  ContentionScope contention_scope = ContentionScope::Global;
  bool dynamics_requeue = true;
  std::string policy = "saath";
  std::int64_t max_intervals = 100'000'000;
  bool interval_skipping = true;  // batch identical consecutive intervals

  void validate() const;
};

}  // namespace saath
