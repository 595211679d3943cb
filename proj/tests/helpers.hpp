#pragma once

#include <algorithm>
#include <initializer_list>
#include <memory>
#include <random>
#include <stdexcept>
#include <tuple>
#include <string>
#include <vector>

#include "saath/policies.hpp"
#include "saath/sim_engine.hpp"
#include "saath/trace_io.hpp"
#include "saath/types.hpp"

namespace saath::test {

struct FlowDef {
  PortId src = 0;
  PortId dst = 0;
  Bytes size = kBytesPerMB;
};

/// Builds coflows with sequential flow ids across calls.
class Builder {
 public:
  CoFlow& add(CoflowId id, Micros arrival, std::initializer_list<FlowDef> flows) {
    return add(id, arrival, std::vector<FlowDef>(flows));
  }

  CoFlow& add(CoflowId id, Micros arrival, const std::vector<FlowDef>& flows) {
    CoFlow c;
    c.coflow_id = id;
    c.arrival_time = arrival;
    c.start_time = arrival;
    for (const auto& f : flows) {
      FlowState s;
      s.spec = FlowSpec{next_flow_++, id, f.src, f.dst, f.size};
      s.available_bytes = f.size;
      c.flows.push_back(s);
    }
    coflows_.push_back(std::move(c));
    return coflows_.back();
  }

  std::vector<CoFlow>& coflows() { return coflows_; }
  std::vector<CoFlow> take() { return std::move(coflows_); }

 private:
  std::vector<CoFlow> coflows_;
  FlowId next_flow_ = 0;
};

/// Registered coflows plus the thresholds and budgets a policy needs, for
/// calling policies directly without an engine.
struct Fixture {
  std::vector<CoFlow> coflows;
  std::vector<CoFlow*> active;
  std::vector<QueueRange> thresholds;
  ClusterState state;

  Fixture(std::vector<CoFlow> cs, int ports, QueueConfig q = {}, Micros now = 8000)
      : coflows(std::move(cs)) {
    std::stable_sort(coflows.begin(), coflows.end(), [](const CoFlow& a, const CoFlow& b) {
      return std::tie(a.arrival_time, a.coflow_id) < std::tie(b.arrival_time, b.coflow_id);
    });
    for (std::size_t i = 0; i < coflows.size(); ++i) {
      coflows[i].slot = i;
      coflows[i].registered = true;
      active.push_back(&coflows[i]);
    }
    thresholds = derive_thresholds(q);
    state.now = now;
    state.interval = now / state.delta;
    state.active = active;
    state.thresholds = thresholds;
    state.queues = q;
    state.capacity = PortBudget::uniform(ports, per_interval_budget(kGigabitBytesPerSecond, state.delta));
  }

  CoFlow& get(CoflowId id) {
    for (auto& c : coflows) {
      if (c.coflow_id == id) return c;
    }
    throw std::out_of_range("no coflow " + std::to_string(id));
  }
};

/// Grants coflows all-or-none in a fixed id order, with work conservation.
class FixedOrderPolicy : public Policy {
 public:
  explicit FixedOrderPolicy(std::vector<CoflowId> order) : order_(std::move(order)) {}
  std::string_view name() const override { return "fixed-order"; }
  Schedule schedule(ClusterState& state) override {
    std::vector<CoFlow*> order;
    for (CoflowId id : order_) {
      for (CoFlow* c : state.active) {
        if (c->coflow_id == id) order.push_back(c);
      }
    }
    Schedule out;
    out.interval_index = state.interval;
    PortBudget remaining = state.capacity;
    allocate_ordered(order, state, remaining, out, true);
    return out;
  }

 private:
  std::vector<CoflowId> order_;
};

/// Small random instance for property checks.
struct RandomInstance {
  std::vector<CoFlow> coflows;
  std::vector<DynamicsEvent> dynamics;
  int ports = 0;
};

inline RandomInstance random_instance(std::uint64_t seed, bool with_dynamics = false) {
  std::mt19937_64 rng(seed * 0x9E3779B97F4A7C15ULL + 17);
  auto uni = [&](std::int64_t lo, std::int64_t hi) {
    return lo + static_cast<std::int64_t>(rng() % static_cast<std::uint64_t>(hi - lo + 1));
  };
  RandomInstance inst;
  inst.ports = static_cast<int>(uni(2, 6));
  const auto n = uni(1, 6);
  Builder b;
  for (std::int64_t i = 0; i < n; ++i) {
    const auto width = uni(1, 4);
    const bool equal = uni(0, 1) == 1;
    const Bytes common = uni(50, 5000) * 1000;
    std::vector<FlowDef> flows;
    for (std::int64_t f = 0; f < width; ++f) {
      flows.push_back({static_cast<PortId>(uni(0, inst.ports - 1)),
                       static_cast<PortId>(uni(0, inst.ports - 1)),
                       equal ? common : uni(50, 5000) * 1000});
    }
    b.add(i + 1, uni(0, 40) * 1000 + uni(0, 999), flows);
  }
  inst.coflows = b.take();
  if (with_dynamics) {
    FlowId total = 0;
    for (const auto& c : inst.coflows) total += static_cast<FlowId>(c.flows.size());
    const auto events = uni(1, 3);
    for (std::int64_t e = 0; e < events; ++e) {
      DynamicsEvent ev;
      ev.time = uni(0, 60) * 1000;
      const auto kind = uni(0, 2);
      ev.kind = kind == 0 ? DynamicsKind::Straggler
                          : (kind == 1 ? DynamicsKind::FlowRestart : DynamicsKind::CoordinatorRestart);
      ev.flow_id = ev.kind == DynamicsKind::CoordinatorRestart ? -1 : uni(0, total - 1);
      ev.rate_cap = ev.kind == DynamicsKind::Straggler ? kGigabitBytesPerSecond / uni(2, 10) : 0;
      inst.dynamics.push_back(ev);
    }
    std::stable_sort(inst.dynamics.begin(), inst.dynamics.end(),
                     [](const DynamicsEvent& a, const DynamicsEvent& b) { return a.time < b.time; });
  }
  return inst;
}

/// Small queue thresholds so random instances cross several queues.
inline SimConfig small_queue_config() {
  SimConfig c;
  c.queues.K = 4;
  c.queues.S = 500'000;
  c.queues.E = 4.0;
  c.max_intervals = 1'000'000;
  return c;
}

/// Real-valued progressive filling over two-sided port capacities. Each flow
/// is (src, dst); returns the max-min fair rate of every flow.
inline std::vector<double> water_fill(const std::vector<std::pair<PortId, PortId>>& flows,
                                      int ports, double capacity) {
  std::vector<double> rate(flows.size(), 0.0);
  std::vector<bool> frozen(flows.size(), false);
  std::vector<double> eg(static_cast<std::size_t>(ports), capacity);
  std::vector<double> in(static_cast<std::size_t>(ports), capacity);
  for (;;) {
    std::vector<int> eg_n(eg.size(), 0), in_n(in.size(), 0);
    bool any = false;
    for (std::size_t i = 0; i < flows.size(); ++i) {
      if (frozen[i]) continue;
      any = true;
      ++eg_n[static_cast<std::size_t>(flows[i].first)];
      ++in_n[static_cast<std::size_t>(flows[i].second)];
    }
    if (!any) return rate;
    double inc = capacity;
    for (std::size_t p = 0; p < eg.size(); ++p) {
      if (eg_n[p] > 0) inc = std::min(inc, eg[p] / eg_n[p]);
      if (in_n[p] > 0) inc = std::min(inc, in[p] / in_n[p]);
    }
    for (std::size_t i = 0; i < flows.size(); ++i) {
      if (frozen[i]) continue;
      rate[i] += inc;
      eg[static_cast<std::size_t>(flows[i].first)] -= inc;
      in[static_cast<std::size_t>(flows[i].second)] -= inc;
    }
    const double eps = capacity * 1e-12;
    for (std::size_t i = 0; i < flows.size(); ++i) {
      if (frozen[i]) continue;
      if (eg[static_cast<std::size_t>(flows[i].first)] <= eps ||
          in[static_cast<std::size_t>(flows[i].second)] <= eps) {
        frozen[i] = true;
      }
    }
  }
}

}  // namespace saath::test
