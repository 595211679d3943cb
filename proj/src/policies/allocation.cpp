#include <algorithm>
#include <limits>

#include "saath/policies.hpp"

namespace saath {
namespace {

struct SideCounts {
  std::vector<std::int64_t> egress;
  std::vector<std::int64_t> ingress;
  std::vector<PortId> touched_egress;
  std::vector<PortId> touched_ingress;

  explicit SideCounts(std::size_t ports) : egress(ports, 0), ingress(ports, 0) {}

  void add(const FlowSpec& s) {
    if (egress[static_cast<std::size_t>(s.src_port)]++ == 0) touched_egress.push_back(s.src_port);
    if (ingress[static_cast<std::size_t>(s.dst_port)]++ == 0) touched_ingress.push_back(s.dst_port);
  }

  void clear() {
    for (PortId p : touched_egress) egress[static_cast<std::size_t>(p)] = 0;
    for (PortId p : touched_ingress) ingress[static_cast<std::size_t>(p)] = 0;
    touched_egress.clear();
    touched_ingress.clear();
  }
};

ScheduleEntry make_entry(const CoFlow& c, std::size_t flow_slot, Bytes budget, Origin origin) {
  const auto& s = c.flows[flow_slot].spec;
  return ScheduleEntry{c.coflow_id,
                       s.flow_id,
                       static_cast<std::uint32_t>(c.slot),
                       static_cast<std::uint32_t>(flow_slot),
                       s.src_port,
                       s.dst_port,
                       budget,
                       origin};
}

}  // namespace

std::size_t allocate_ordered(std::span<CoFlow* const> order, const ClusterState& state,
                             PortBudget& remaining, Schedule& out, bool work_conservation) {
  SideCounts counts(remaining.egress.size());
  std::vector<char> granted(order.size(), 0);
  std::size_t granted_count = 0;

  for (std::size_t i = 0; i < order.size(); ++i) {
    const CoFlow& c = *order[i];
    bool eligible = true;
    counts.clear();
    for (const auto& f : c.flows) {
      if (f.finished()) continue;
      if (!is_ready(f, state)) {
        eligible = false;
        break;
      }
      counts.add(f.spec);
    }
    if (!eligible || counts.touched_egress.empty()) continue;

    Bytes rate = std::numeric_limits<Bytes>::max();
    for (PortId p : counts.touched_egress) {
      const auto idx = static_cast<std::size_t>(p);
      rate = std::min(rate, remaining.egress[idx] / counts.egress[idx]);
    }
    for (PortId p : counts.touched_ingress) {
      const auto idx = static_cast<std::size_t>(p);
      rate = std::min(rate, remaining.ingress[idx] / counts.ingress[idx]);
    }
    if (rate <= 0) continue;

    for (std::size_t fs = 0; fs < c.flows.size(); ++fs) {
      const auto& f = c.flows[fs];
      if (f.finished()) continue;
      remaining.egress[static_cast<std::size_t>(f.spec.src_port)] -= rate;
      remaining.ingress[static_cast<std::size_t>(f.spec.dst_port)] -= rate;
      out.entries.push_back(make_entry(c, fs, rate, Origin::AllOrNone));
    }
    granted[i] = 1;
    ++granted_count;
  }

  if (!work_conservation) return granted_count;

  for (std::size_t i = 0; i < order.size(); ++i) {
    if (granted[i]) continue;
    const CoFlow& c = *order[i];
    for (std::size_t fs = 0; fs < c.flows.size(); ++fs) {
      const auto& f = c.flows[fs];
      if (f.finished() || !is_ready(f, state)) continue;
      Bytes& eg = remaining.egress[static_cast<std::size_t>(f.spec.src_port)];
      Bytes& in = remaining.ingress[static_cast<std::size_t>(f.spec.dst_port)];
      const Bytes b = std::min(eg, in);
      if (b <= 0) continue;
      eg -= b;
      in -= b;
      out.entries.push_back(make_entry(c, fs, b, Origin::WorkConservation));
    }
  }
  return granted_count;
}

void max_min_allocate(std::span<const FlowState* const> flows, PortBudget& remaining,
                      std::vector<Bytes>& rates) {
  const std::size_t ports = remaining.egress.size();
  const std::size_t n = flows.size();
  rates.assign(n, 0);
  if (n == 0) return;

  // Side s < ports is egress s, otherwise ingress s - ports.
  const std::size_t sides = 2 * ports;
  std::vector<std::vector<std::size_t>> members(sides);
  std::vector<std::int64_t> open(sides, 0);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& s = flows[i]->spec;
    members[static_cast<std::size_t>(s.src_port)].push_back(i);
    members[ports + static_cast<std::size_t>(s.dst_port)].push_back(i);
    ++open[static_cast<std::size_t>(s.src_port)];
    ++open[ports + static_cast<std::size_t>(s.dst_port)];
  }
  auto side_budget = [&](std::size_t side) -> Bytes& {
    return side < ports ? remaining.egress[side] : remaining.ingress[side - ports];
  };

  std::vector<char> fixed(n, 0);
  std::size_t left = n;
  while (left > 0) {
    std::size_t best = sides;
    Bytes best_share = 0;
    for (std::size_t side = 0; side < sides; ++side) {
      if (open[side] == 0) continue;
      const Bytes share = std::max<Bytes>(side_budget(side), 0) / open[side];
      if (best == sides || share < best_share) {
        best = side;
        best_share = share;
      }
    }
    for (std::size_t i : members[best]) {
      if (fixed[i]) continue;
      fixed[i] = 1;
      --left;
      rates[i] = best_share;
      const auto& s = flows[i]->spec;
      const auto eg = static_cast<std::size_t>(s.src_port);
      const auto in = ports + static_cast<std::size_t>(s.dst_port);
      side_budget(eg) -= best_share;
      side_budget(in) -= best_share;
      --open[eg];
      --open[in];
    }
  }
}

}  // namespace saath
