#pragma once

#include <limits>
#include <unordered_map>

#include "saath/policies.hpp"

namespace saath::detail {

inline constexpr std::int64_t kUnbounded = std::numeric_limits<std::int64_t>::max();

// Intervals until a flow progressing at `eff` bytes per interval pushes
// `attained * width` past `hi`.
inline std::int64_t crossing_horizon(Bytes attained, std::size_t width, Bytes eff, Bytes hi) {
  if (eff <= 0 || hi == kInfiniteBytes) return kUnbounded;
  const auto n = static_cast<__int128>(width);
  const __int128 slack = static_cast<__int128>(hi) - static_cast<__int128>(attained) * n;
  if (slack < 0) return 1;
  const __int128 steps = slack / (static_cast<__int128>(eff) * n) + 1;
  return steps > kUnbounded ? kUnbounded : static_cast<std::int64_t>(steps);
}

inline std::unordered_map<std::size_t, const CoFlow*> by_slot(std::span<CoFlow* const> active) {
  std::unordered_map<std::size_t, const CoFlow*> m;
  m.reserve(active.size());
  for (const CoFlow* c : active) m.emplace(c->slot, c);
  return m;
}

// Per-flow threshold: the first interval after which some scheduled flow's
// attained bytes times the width exceed its queue's upper threshold.
inline std::int64_t per_flow_horizon(const ClusterState& state, const Schedule& schedule) {
  std::int64_t horizon = kUnbounded;
  const auto lookup = by_slot(state.active);
  for (const auto& e : schedule.entries) {
    const auto it = lookup.find(e.coflow_slot);
    if (it == lookup.end()) continue;
    const CoFlow& c = *it->second;
    const auto& f = c.flows[e.flow_slot];
    const Bytes hi = state.thresholds[static_cast<std::size_t>(c.queue_index)].hi;
    horizon = std::min(horizon, crossing_horizon(f.bytes_attained, c.width(),
                                                 effective_budget(f, e.budget, state.delta), hi));
  }
  return horizon;
}

// Total-bytes threshold: the coflow's summed progress crossing its queue's
// upper threshold.
inline std::int64_t total_bytes_horizon(const ClusterState& state, const Schedule& schedule) {
  std::unordered_map<std::size_t, Bytes> progress;
  const auto lookup = by_slot(state.active);
  for (const auto& e : schedule.entries) {
    const auto it = lookup.find(e.coflow_slot);
    if (it == lookup.end()) continue;
    progress[e.coflow_slot] += effective_budget(it->second->flows[e.flow_slot], e.budget, state.delta);
  }
  std::int64_t horizon = kUnbounded;
  for (const auto& [slot, eff] : progress) {
    const CoFlow& c = *lookup.at(slot);
    const Bytes hi = state.thresholds[static_cast<std::size_t>(c.queue_index)].hi;
    horizon = std::min(horizon, crossing_horizon(c.total_attained(), 1, eff, hi));
  }
  return horizon;
}

}  // namespace saath::detail
