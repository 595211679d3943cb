#include <algorithm>

#include "horizon.hpp"
#include "saath/policies.hpp"

namespace saath {

Schedule AaloPolicy::schedule(ClusterState& state) {
  for (CoFlow* c : state.active) {
    const int q = assign_queue_total(c->total_attained(), state.thresholds);
    if (c->queue_history.empty() || c->queue_index != q) {
      c->queue_index = q;
      c->queue_entry_time = state.now;
      c->queue_history.push_back({state.now, q});
    }
  }

  std::vector<CoFlow*> order(state.active.begin(), state.active.end());
  std::stable_sort(order.begin(), order.end(), [](const CoFlow* a, const CoFlow* b) {
    if (a->queue_index != b->queue_index) return a->queue_index < b->queue_index;
    if (a->arrival_time != b->arrival_time) return a->arrival_time < b->arrival_time;
    return a->coflow_id < b->coflow_id;
  });

  // Strict priority at every port: a flow takes whatever both of its port
  // sides still have after all higher-priority flows.
  Schedule out;
  out.interval_index = state.interval;
  PortBudget remaining = state.capacity;
  for (const CoFlow* c : order) {
    for (std::size_t fs = 0; fs < c->flows.size(); ++fs) {
      const auto& f = c->flows[fs];
      if (f.finished() || !is_ready(f, state)) continue;
      Bytes& eg = remaining.egress[static_cast<std::size_t>(f.spec.src_port)];
      Bytes& in = remaining.ingress[static_cast<std::size_t>(f.spec.dst_port)];
      const Bytes b = std::min(eg, in);
      if (b <= 0) continue;
      eg -= b;
      in -= b;
      out.entries.push_back(ScheduleEntry{c->coflow_id, f.spec.flow_id,
                                          static_cast<std::uint32_t>(c->slot),
                                          static_cast<std::uint32_t>(fs), f.spec.src_port,
                                          f.spec.dst_port, b, Origin::WorkConservation});
    }
  }
  return out;
}

std::int64_t AaloPolicy::stable_intervals(const ClusterState& state,
                                          const Schedule& schedule) const {
  return detail::total_bytes_horizon(state, schedule);
}

Schedule aalo_schedule(ClusterState& state) {
  AaloPolicy policy;
  return policy.schedule(state);
}

}  // namespace saath
