#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "saath/types.hpp"

namespace saath {

/// Per-port, per-side byte budgets for one interval.
struct PortBudget {
  std::vector<Bytes> egress;
  std::vector<Bytes> ingress;

  static PortBudget uniform(int port_count, Bytes per_interval);
  static PortBudget from_capacities(std::span<const PortCapacity> ports, Micros delta);
};

/// Everything a policy may look at when computing the next interval's
/// schedule. Flow statistics are those reported at the end of the previous
/// interval. Policies may update the scheduler fields of active coflows
/// (queue, deadline, counters); nothing else.
struct ClusterState {
  Micros now = 0;
  std::int64_t interval = 0;
  Micros delta = 8 * kMicrosPerMilli;
  std::span<CoFlow* const> active;  // registered, unfinished; ordered by (arrival, id)
  std::span<const QueueRange> thresholds;
  QueueConfig queues;
  PortBudget capacity;  // per-interval budgets
  Bytes line_rate = kGigabitBytesPerSecond;
  double deadline_factor = 2.0;
  AvailabilityMode availability = AvailabilityMode::AllAtArrival;
  ContentionScope contention_scope = ContentionScope::Global;
  bool dynamics_requeue = true;
};

/// Unread data needed before a flow may be scheduled under pipelined
/// availability: one interval at line rate, or the whole remainder.
bool is_ready(const FlowState& flow, const ClusterState& state);

/// Bytes a flow actually moves in one interval when granted `budget`.
Bytes effective_budget(const FlowState& flow, Bytes budget, Micros delta);

/// Smallest q with m_c * N_c <= Q^hi_q (per-flow threshold), K-1 otherwise.
int assign_queue(Bytes max_flow_bytes, std::size_t width, std::span<const QueueRange> thresholds);

/// Smallest q with total_bytes <= Q^hi_q (total-bytes threshold).
int assign_queue_total(Bytes total_bytes, std::span<const QueueRange> thresholds);

struct ContentionRecord {
  CoflowId coflow_id = 0;
  int k = 0;  // other active coflows sharing at least one port
};

/// Contention of every coflow in `active`, in the same order. Ports are the
/// src and dst of each coflow's unfinished flows. With ContentionScope::Queue
/// only coflows in the same queue are counted.
std::vector<ContentionRecord> compute_contention(std::span<CoFlow* const> active,
                                                 ContentionScope scope = ContentionScope::Global);

/// Contention of one coflow against `active` (which may contain it).
ContentionRecord compute_contention(const CoFlow& coflow, std::span<CoFlow* const> active);

struct DeadlineParams {
  Micros now = 0;
  double d = 2.0;
  Bytes line_rate = kGigabitBytesPerSecond;
  double E = 10.0;
  Bytes S = 10 * kBytesPerMB;
};

/// Minimum residence time t_q of a coflow of `width` flows in queue q: the
/// threshold gap split across its flows at line rate. The unbounded last
/// queue uses E * t_{K-2}; a lone queue (K == 1) uses S.
double queue_residence_seconds(int q, std::size_t width, std::span<const QueueRange> thresholds,
                               Bytes line_rate, double E, Bytes S);

/// Absolute deadline for a coflow entering queue q behind `coflows_in_queue`
/// others: now + d * C_q * t_q.
Micros set_deadline(const CoFlow& coflow, int q, std::size_t coflows_in_queue,
                    std::span<const QueueRange> thresholds, const DeadlineParams& params);

/// Queue from the remaining-length estimate after dynamics: f_e is the median
/// size of finished flows, m_c' = max over unfinished flows of max(0, f_e - sent).
/// nullopt when there is no finished or no unfinished flow.
std::optional<int> requeue_on_dynamics(const CoFlow& coflow,
                                       std::span<const QueueRange> thresholds);
std::optional<Bytes> remaining_length_estimate(const CoFlow& coflow);

/// All-or-none grant in the given order followed (optionally) by work
/// conservation over the coflows that were not granted. Returns the number of
/// coflows granted under all-or-none.
std::size_t allocate_ordered(std::span<CoFlow* const> order, const ClusterState& state,
                             PortBudget& remaining, Schedule& out, bool work_conservation = true);

/// Two-sided max-min fair allocation of `flows` over the budgets.
void max_min_allocate(std::span<const FlowState* const> flows, PortBudget& remaining,
                      std::vector<Bytes>& rates);

class Policy {
 public:
  virtual ~Policy() = default;
  virtual std::string_view name() const = 0;
  virtual Schedule schedule(ClusterState& state) = 0;

  /// How many consecutive intervals `schedule` stays exactly what this policy
  /// would recompute, assuming no flow completes and no event arrives.
  virtual std::int64_t stable_intervals(const ClusterState& state, const Schedule& schedule) const;

  /// Coordinator failover: recompute every deadline.
  virtual void on_coordinator_restart(ClusterState& state);
};

struct SaathOptions {
  bool per_flow_threshold = true;
  bool lcof = true;
  bool deadlines = true;
  bool work_conservation = true;
};

class SaathPolicy : public Policy {
 public:
  explicit SaathPolicy(SaathOptions options = {}, std::string name = "saath");
  std::string_view name() const override { return name_; }
  Schedule schedule(ClusterState& state) override;
  std::int64_t stable_intervals(const ClusterState& state, const Schedule& schedule) const override;
  void on_coordinator_restart(ClusterState& state) override;

  /// Consideration order used for the last schedule (coflow ids).
  const std::vector<CoflowId>& last_order() const { return last_order_; }
  const std::vector<ContentionRecord>& last_contention() const { return last_contention_; }
  const SaathOptions& options() const { return options_; }

 private:
  void update_queues(ClusterState& state);
  std::vector<CoFlow*> consideration_order(const ClusterState& state);

  SaathOptions options_;
  std::string name_;
  std::vector<CoflowId> last_order_;
  std::vector<ContentionRecord> last_contention_;
};

class AaloPolicy : public Policy {
 public:
  std::string_view name() const override { return "aalo"; }
  Schedule schedule(ClusterState& state) override;
  std::int64_t stable_intervals(const ClusterState& state, const Schedule& schedule) const override;
};

enum class OfflineKind : std::uint8_t { SCF, SRTF, SEBF, LWTF };

OfflineKind parse_offline_kind(std::string_view name);

/// Ordering key of an offline policy (smaller goes first).
/// SEBF's bottleneck Gamma_c is measured in intervals at each port side's budget.
double offline_key(OfflineKind kind, const CoFlow& coflow, int contention,
                   const PortBudget& capacity);

class OfflinePolicy : public Policy {
 public:
  explicit OfflinePolicy(OfflineKind kind);
  std::string_view name() const override;
  Schedule schedule(ClusterState& state) override;
  std::int64_t stable_intervals(const ClusterState& state, const Schedule& schedule) const override;

 private:
  OfflineKind kind_;
};

class UcTcpPolicy : public Policy {
 public:
  std::string_view name() const override { return "uc-tcp"; }
  Schedule schedule(ClusterState& state) override;
  std::int64_t stable_intervals(const ClusterState& state, const Schedule& schedule) const override;
};

/// Free-function forms of the policies, for single-shot use.
Schedule saath_schedule(ClusterState& state, const SaathOptions& options = {});
Schedule aalo_schedule(ClusterState& state);
Schedule offline_schedule(ClusterState& state, OfflineKind kind);
Schedule uc_tcp_schedule(ClusterState& state);

/// Builds a policy by name: saath | aalo | scf | srtf | sebf | lwtf | uc-tcp |
/// saath-an | saath-an-pf. Unknown names throw ConfigError.
std::unique_ptr<Policy> make_policy(std::string_view name);
std::vector<std::string> policy_names();

/// Checks the per-port capacity invariant; returns a description of the first
/// violation, or nullopt.
std::optional<std::string> check_capacity(const Schedule& schedule, const PortBudget& capacity);

}  // namespace saath
