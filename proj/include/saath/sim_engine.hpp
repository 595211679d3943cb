#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "saath/policies.hpp"
#include "saath/trace_io.hpp"
#include "saath/types.hpp"

namespace saath {

struct CoflowRecord {
  CoflowId coflow_id = 0;
  Micros arrival = 0;
  Micros start = 0;  // registration origin: max(arrival, last parent completion)
  Micros completion = 0;
  Micros cct = 0;    // completion - start
  std::size_t width = 0;
  Bytes total_size = 0;
  std::vector<Micros> fcts;  // per flow in flow_id order, finish - start
  std::vector<Bytes> flow_sizes;
  int queue_transitions = 0;
  int deadline_expiries = 0;
  std::vector<QueueTransition> queue_history;

  friend bool operator==(const CoflowRecord&, const CoflowRecord&) = default;
};

/// Run of consecutive intervals that each delivered `bytes_per_interval`.
struct UtilizationSegment {
  std::int64_t first_interval = 0;
  std::int64_t intervals = 0;
  Bytes bytes_per_interval = 0;

  friend bool operator==(const UtilizationSegment&, const UtilizationSegment&) = default;
};

struct RunResult {
  std::string policy;
  std::vector<CoflowRecord> coflows;  // ascending coflow_id
  std::vector<UtilizationSegment> utilization;
  std::int64_t intervals = 0;         // intervals simulated, including idle ones
  std::int64_t schedules_computed = 0;
  int rejected_events = 0;
  Bytes delivered_bytes = 0;
  Bytes total_bytes = 0;
  Bytes port_budget = 0;  // per side per interval, for utilization ratios
  int port_count = 0;

  const CoflowRecord* find(CoflowId id) const;
  double mean_cct_seconds() const;

  friend bool operator==(const RunResult&, const RunResult&) = default;
};

enum class InjectOutcome : std::uint8_t { Applied, Rejected };

/// One simulation run. Boundary n sits at time n * delta; the schedule
/// computed there from the flow stats at that instant is applied during
/// interval n. Anything that happens strictly before n * delta (arrivals,
/// dynamics) becomes visible at boundary n.
class Simulation {
 public:
  Simulation(std::vector<CoFlow> coflows, std::vector<DynamicsEvent> dynamics, SimConfig config,
             std::unique_ptr<Policy> policy);
  ~Simulation();
  Simulation(const Simulation&) = delete;
  Simulation& operator=(const Simulation&) = delete;

  bool done() const;

  /// Advances past one computed schedule (one interval, or several identical
  /// ones when interval skipping is on). Returns false once every coflow is
  /// complete.
  bool step();

  /// Runs to completion.
  RunResult run();

  /// Applies a dynamics event right away, at the current boundary. Unknown
  /// flows throw SimError; restarts of finished or unregistered flows are
  /// rejected.
  InjectOutcome inject(const DynamicsEvent& event);

  Micros now() const;
  std::int64_t interval() const { return interval_; }
  const CoFlow* coflow(CoflowId id) const;
  std::span<const CoFlow> coflows() const { return coflows_; }
  const Policy& policy() const { return *policy_; }
  const Schedule& last_schedule() const { return last_schedule_; }

  /// One "interval,coflow_id,flow_id,bytes_per_interval,rate_bps,origin" line
  /// per scheduled flow and interval. Disables interval skipping.
  void set_audit(std::ostream* out);

  RunResult result() const;

 private:
  struct FlowRef {
    std::size_t coflow = 0;
    std::size_t flow = 0;
  };
  struct PendingEvent {
    Micros time = 0;
    int kind = 0;  // 0 arrival, 3 dynamics
    std::int64_t id = 0;
    std::size_t index = 0;
  };

  void process_events();
  void register_coflow(std::size_t slot, Micros start);
  void refresh_availability();
  ClusterState make_state();
  std::int64_t horizon(const ClusterState& state, const Schedule& schedule) const;
  void apply(const Schedule& schedule, std::int64_t count);
  void complete(std::size_t slot);
  std::int64_t boundary_after(Micros t) const;
  void record_utilization(std::int64_t first, std::int64_t count, Bytes per_interval);

  SimConfig config_;
  std::unique_ptr<Policy> policy_;
  std::vector<CoFlow> coflows_;
  std::map<CoflowId, std::size_t> slot_of_;
  std::map<FlowId, FlowRef> flow_of_;
  std::vector<std::vector<std::size_t>> children_;
  std::vector<std::size_t> open_parents_;
  std::vector<PendingEvent> events_;  // sorted by (time, kind, id)
  std::size_t next_event_ = 0;
  std::vector<DynamicsEvent> dynamics_;
  std::vector<CoFlow*> active_;  // ordered by (arrival, id)
  std::vector<QueueRange> thresholds_;
  PortBudget capacity_;
  Bytes port_budget_ = 0;
  int port_count_ = 0;
  std::int64_t interval_ = 0;
  std::int64_t schedules_ = 0;
  std::size_t completed_ = 0;
  int rejected_ = 0;
  Bytes delivered_ = 0;
  bool coordinator_restart_ = false;
  Schedule last_schedule_;
  std::vector<UtilizationSegment> utilization_;
  std::ostream* audit_ = nullptr;
};

/// Runs a trace, with optional DAG edges and dynamics events, under
/// `config.policy` (or the given policy object).
RunResult run(const Trace& trace, std::span<const DagEdge> dag,
              std::span<const DynamicsEvent> dynamics, const SimConfig& config);
RunResult run(std::vector<CoFlow> coflows, std::span<const DynamicsEvent> dynamics,
              const SimConfig& config, std::unique_ptr<Policy> policy = nullptr);

/// Replays the same trace under every policy (concurrently). Needs at least
/// two policies; unknown names throw ConfigError.
std::map<std::string, RunResult> run_comparison(const Trace& trace,
                                                std::span<const std::string> policies,
                                                const SimConfig& config,
                                                std::span<const DagEdge> dag = {},
                                                std::span<const DynamicsEvent> dynamics = {});

}  // namespace saath
