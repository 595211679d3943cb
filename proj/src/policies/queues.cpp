#include <algorithm>
#include <cmath>

#include "saath/policies.hpp"

namespace saath {

PortBudget PortBudget::uniform(int port_count, Bytes per_interval) {
  PortBudget b;
  b.egress.assign(static_cast<std::size_t>(port_count), per_interval);
  b.ingress.assign(static_cast<std::size_t>(port_count), per_interval);
  return b;
}

PortBudget PortBudget::from_capacities(std::span<const PortCapacity> ports, Micros delta) {
  PortBudget b;
  for (const auto& p : ports) {
    b.egress.push_back(per_interval_budget(p.egress_rate, delta));
    b.ingress.push_back(per_interval_budget(p.ingress_rate, delta));
  }
  return b;
}

bool is_ready(const FlowState& flow, const ClusterState& state) {
  if (flow.finished()) return false;
  if (state.availability == AvailabilityMode::AllAtArrival) return true;
  const Bytes one_interval = per_interval_budget(state.line_rate, state.delta);
  return flow.unread() >= std::min(flow.remaining(), one_interval);
}

Bytes effective_budget(const FlowState& flow, Bytes budget, Micros delta) {
  if (!flow.rate_cap) return budget;
  return std::min(budget, per_interval_budget(*flow.rate_cap, delta));
}

int assign_queue(Bytes max_flow_bytes, std::size_t width, std::span<const QueueRange> thresholds) {
  const auto n = static_cast<__int128>(std::max<std::size_t>(width, 1));
  const auto scaled = static_cast<__int128>(std::max<Bytes>(max_flow_bytes, 0)) * n;
  const int last = static_cast<int>(thresholds.size()) - 1;
  for (int q = 0; q < last; ++q) {
    if (scaled <= static_cast<__int128>(thresholds[static_cast<std::size_t>(q)].hi)) return q;
  }
  return last;
}

int assign_queue_total(Bytes total_bytes, std::span<const QueueRange> thresholds) {
  return assign_queue(total_bytes, 1, thresholds);
}

double queue_residence_seconds(int q, std::size_t width, std::span<const QueueRange> thresholds,
                               Bytes line_rate, double E, Bytes S) {
  const auto k = static_cast<int>(thresholds.size());
  const long double per_flow_rate =
      static_cast<long double>(std::max<std::size_t>(width, 1)) * static_cast<long double>(line_rate);
  if (q < k - 1) {
    const auto& r = thresholds[static_cast<std::size_t>(q)];
    return static_cast<double>(static_cast<long double>(r.hi - r.lo) / per_flow_rate);
  }
  if (k == 1) return static_cast<double>(static_cast<long double>(S) / per_flow_rate);
  return E * queue_residence_seconds(k - 2, width, thresholds, line_rate, E, S);
}

Micros set_deadline(const CoFlow& coflow, int q, std::size_t coflows_in_queue,
                    std::span<const QueueRange> thresholds, const DeadlineParams& params) {
  const double t = queue_residence_seconds(q, coflow.width(), thresholds, params.line_rate, params.E,
                                          params.S);
  const long double offset_us = static_cast<long double>(params.d) *
                                static_cast<long double>(coflows_in_queue) * t *
                                static_cast<long double>(kMicrosPerSecond);
  const long double limit = static_cast<long double>(kNever - params.now) / 2;
  if (offset_us >= limit) return params.now + static_cast<Micros>(limit);
  return params.now + static_cast<Micros>(std::llround(offset_us));
}

std::optional<Bytes> remaining_length_estimate(const CoFlow& coflow) {
  std::vector<Bytes> finished;
  for (const auto& f : coflow.flows) {
    if (f.finished()) finished.push_back(f.spec.size_bytes);
  }
  if (finished.empty() || finished.size() == coflow.flows.size()) return std::nullopt;
  std::sort(finished.begin(), finished.end());
  const std::size_t n = finished.size();
  const Bytes median = n % 2 == 1 ? finished[n / 2] : (finished[n / 2 - 1] + finished[n / 2]) / 2;
  Bytes estimate = 0;
  for (const auto& f : coflow.flows) {
    if (!f.finished()) estimate = std::max(estimate, std::max<Bytes>(0, median - f.bytes_sent));
  }
  return estimate;
}

std::optional<int> requeue_on_dynamics(const CoFlow& coflow,
                                       std::span<const QueueRange> thresholds) {
  const auto estimate = remaining_length_estimate(coflow);
  if (!estimate) return std::nullopt;
  return assign_queue(*estimate, coflow.width(), thresholds);
}

std::optional<std::string> check_capacity(const Schedule& schedule, const PortBudget& capacity) {
  std::vector<Bytes> eg(capacity.egress.size(), 0);
  std::vector<Bytes> in(capacity.ingress.size(), 0);
  for (const auto& e : schedule.entries) {
    if (e.budget <= 0) return "flow " + std::to_string(e.flow_id) + " has non-positive budget";
    eg[static_cast<std::size_t>(e.src_port)] += e.budget;
    in[static_cast<std::size_t>(e.dst_port)] += e.budget;
  }
  for (std::size_t p = 0; p < eg.size(); ++p) {
    if (eg[p] > capacity.egress[p]) return "egress of port " + std::to_string(p) + " oversubscribed";
    if (in[p] > capacity.ingress[p]) return "ingress of port " + std::to_string(p) + " oversubscribed";
  }
  return std::nullopt;
}

}  // namespace saath
