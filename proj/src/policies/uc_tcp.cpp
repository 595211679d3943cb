#include "horizon.hpp"
#include "saath/policies.hpp"

namespace saath {

Schedule UcTcpPolicy::schedule(ClusterState& state) {
  std::vector<const FlowState*> flows;
  std::vector<std::pair<const CoFlow*, std::size_t>> owner;
  for (const CoFlow* c : state.active) {
    for (std::size_t fs = 0; fs < c->flows.size(); ++fs) {
      const auto& f = c->flows[fs];
      if (f.finished() || !is_ready(f, state)) continue;
      flows.push_back(&f);
      owner.emplace_back(c, fs);
    }
  }
  PortBudget remaining = state.capacity;
  std::vector<Bytes> rates;
  max_min_allocate(flows, remaining, rates);

  Schedule out;
  out.interval_index = state.interval;
  for (std::size_t i = 0; i < flows.size(); ++i) {
    if (rates[i] <= 0) continue;
    const auto& [c, fs] = owner[i];
    const auto& s = flows[i]->spec;
    out.entries.push_back(ScheduleEntry{c->coflow_id, s.flow_id, static_cast<std::uint32_t>(c->slot),
                                        static_cast<std::uint32_t>(fs), s.src_port, s.dst_port,
                                        rates[i], Origin::WorkConservation});
  }
  return out;
}

std::int64_t UcTcpPolicy::stable_intervals(const ClusterState&, const Schedule&) const {
  return detail::kUnbounded;
}

Schedule uc_tcp_schedule(ClusterState& state) {
  UcTcpPolicy policy;
  return policy.schedule(state);
}

}  // namespace saath
