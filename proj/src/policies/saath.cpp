#include <algorithm>
#include <limits>

#include "horizon.hpp"
#include "saath/policies.hpp"

namespace saath {
namespace {

DeadlineParams deadline_params(const ClusterState& state) {
  return DeadlineParams{state.now, state.deadline_factor, state.line_rate, state.queues.E,
                        state.queues.S};
}

bool arrival_less(const CoFlow* a, const CoFlow* b) {
  if (a->arrival_time != b->arrival_time) return a->arrival_time < b->arrival_time;
  return a->coflow_id < b->coflow_id;
}

}  // namespace

std::int64_t Policy::stable_intervals(const ClusterState&, const Schedule&) const { return 1; }

void Policy::on_coordinator_restart(ClusterState&) {}

SaathPolicy::SaathPolicy(SaathOptions options, std::string name)
    : options_(options), name_(std::move(name)) {}

void SaathPolicy::update_queues(ClusterState& state) {
  const auto& active = state.active;
  const std::size_t n = active.size();
  std::vector<int> next(n);
  std::vector<char> entering(n, 0);

  for (std::size_t i = 0; i < n; ++i) {
    CoFlow& c = *active[i];
    if (c.requeue_pending) {
      c.requeue_pending = false;
      if (state.dynamics_requeue && requeue_on_dynamics(c, state.thresholds)) c.estimate_mode = true;
    }
    int q = 0;
    std::optional<int> estimated;
    if (c.estimate_mode) estimated = requeue_on_dynamics(c, state.thresholds);
    if (estimated) {
      q = *estimated;
    } else if (options_.per_flow_threshold) {
      q = assign_queue(c.max_flow_attained(), c.width(), state.thresholds);
    } else {
      q = assign_queue_total(c.total_attained(), state.thresholds);
    }
    next[i] = q;
    entering[i] = c.queue_history.empty() || c.queue_index != q;
  }

  std::vector<std::size_t> occupancy(state.thresholds.size(), 0);
  for (std::size_t i = 0; i < n; ++i) {
    if (!entering[i]) ++occupancy[static_cast<std::size_t>(next[i])];
  }
  const auto params = deadline_params(state);
  for (std::size_t i = 0; i < n; ++i) {
    if (!entering[i]) continue;
    CoFlow& c = *active[i];
    const int q = next[i];
    auto& in_queue = occupancy[static_cast<std::size_t>(q)];
    c.queue_index = q;
    c.queue_entry_time = state.now;
    c.queue_history.push_back({state.now, q});
    c.deadline_counted = false;
    if (options_.deadlines) {
      c.deadline = set_deadline(c, q, in_queue, state.thresholds, params);
    } else {
      c.deadline.reset();
    }
    ++in_queue;
  }
}

std::vector<CoFlow*> SaathPolicy::consideration_order(const ClusterState& state) {
  const auto& active = state.active;
  std::vector<CoFlow*> expired;
  std::vector<std::vector<std::size_t>> queues(state.thresholds.size());
  for (std::size_t i = 0; i < active.size(); ++i) {
    CoFlow* c = active[i];
    if (options_.deadlines && c->deadline && *c->deadline <= state.now) {
      if (!c->deadline_counted) {
        c->deadline_counted = true;
        ++c->deadline_expiries;
      }
      expired.push_back(c);
    } else {
      queues[static_cast<std::size_t>(c->queue_index)].push_back(i);
    }
  }
  std::stable_sort(expired.begin(), expired.end(), [](const CoFlow* a, const CoFlow* b) {
    if (*a->deadline != *b->deadline) return *a->deadline < *b->deadline;
    return arrival_less(a, b);
  });

  if (options_.lcof) {
    last_contention_ = compute_contention(active, state.contention_scope);
  } else {
    last_contention_.clear();
  }

  std::vector<CoFlow*> order = std::move(expired);
  for (auto& q : queues) {
    std::stable_sort(q.begin(), q.end(), [&](std::size_t a, std::size_t b) {
      if (options_.lcof && last_contention_[a].k != last_contention_[b].k) {
        return last_contention_[a].k < last_contention_[b].k;
      }
      return arrival_less(active[a], active[b]);
    });
    for (std::size_t i : q) order.push_back(active[i]);
  }
  return order;
}

Schedule SaathPolicy::schedule(ClusterState& state) {
  update_queues(state);
  const auto order = consideration_order(state);
  last_order_.clear();
  for (const CoFlow* c : order) last_order_.push_back(c->coflow_id);

  Schedule out;
  out.interval_index = state.interval;
  PortBudget remaining = state.capacity;
  allocate_ordered(order, state, remaining, out, options_.work_conservation);
  return out;
}

std::int64_t SaathPolicy::stable_intervals(const ClusterState& state,
                                           const Schedule& schedule) const {
  std::int64_t horizon = detail::kUnbounded;
  for (const CoFlow* c : state.active) {
    if (c->estimate_mode) return 1;
    if (options_.deadlines && c->deadline && *c->deadline > state.now) {
      const Micros wait = *c->deadline - state.now;
      horizon = std::min(horizon, (wait + state.delta - 1) / state.delta);
    }
  }
  const std::int64_t crossing = options_.per_flow_threshold
                                    ? detail::per_flow_horizon(state, schedule)
                                    : detail::total_bytes_horizon(state, schedule);
  return std::min(horizon, crossing);
}

void SaathPolicy::on_coordinator_restart(ClusterState& state) {
  if (!options_.deadlines) return;
  std::vector<std::vector<CoFlow*>> queues(state.thresholds.size());
  for (CoFlow* c : state.active) {
    if (c->queue_history.empty()) continue;
    queues[static_cast<std::size_t>(c->queue_index)].push_back(c);
  }
  const auto params = deadline_params(state);
  for (auto& q : queues) {
    std::stable_sort(q.begin(), q.end(), [](const CoFlow* a, const CoFlow* b) {
      if (a->queue_entry_time != b->queue_entry_time) return a->queue_entry_time < b->queue_entry_time;
      return arrival_less(a, b);
    });
    for (std::size_t pos = 0; pos < q.size(); ++pos) {
      CoFlow& c = *q[pos];
      c.deadline = set_deadline(c, c.queue_index, pos, state.thresholds, params);
      c.deadline_counted = false;
    }
  }
}

Schedule saath_schedule(ClusterState& state, const SaathOptions& options) {
  SaathPolicy policy(options);
  return policy.schedule(state);
}

}  // namespace saath
