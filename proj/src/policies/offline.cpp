#include <algorithm>
#include <string>

#include "horizon.hpp"
#include "saath/policies.hpp"

namespace saath {
namespace {

// Gamma_c in intervals: the most loaded port side's remaining bytes over the
// side's per-interval budget.
double bottleneck_intervals(const CoFlow& coflow, const PortBudget& capacity) {
  std::vector<Bytes> eg(capacity.egress.size(), 0);
  std::vector<Bytes> in(capacity.ingress.size(), 0);
  for (const auto& f : coflow.flows) {
    if (f.finished()) continue;
    eg[static_cast<std::size_t>(f.spec.src_port)] += f.remaining();
    in[static_cast<std::size_t>(f.spec.dst_port)] += f.remaining();
  }
  double gamma = 0.0;
  for (std::size_t p = 0; p < eg.size(); ++p) {
    if (eg[p] > 0) {
      gamma = std::max(gamma, static_cast<double>(eg[p]) / static_cast<double>(capacity.egress[p]));
    }
    if (in[p] > 0) {
      gamma = std::max(gamma, static_cast<double>(in[p]) / static_cast<double>(capacity.ingress[p]));
    }
  }
  return gamma;
}

}  // namespace

OfflineKind parse_offline_kind(std::string_view name) {
  if (name == "scf") return OfflineKind::SCF;
  if (name == "srtf") return OfflineKind::SRTF;
  if (name == "sebf") return OfflineKind::SEBF;
  if (name == "lwtf") return OfflineKind::LWTF;
  throw ConfigError("unknown offline policy '" + std::string(name) + "'");
}

double offline_key(OfflineKind kind, const CoFlow& coflow, int contention,
                   const PortBudget& capacity) {
  switch (kind) {
    case OfflineKind::SCF: return static_cast<double>(coflow.total_size());
    case OfflineKind::SRTF: return static_cast<double>(coflow.remaining_bytes());
    case OfflineKind::SEBF: return bottleneck_intervals(coflow, capacity);
    case OfflineKind::LWTF: return bottleneck_intervals(coflow, capacity) * contention;
  }
  return 0.0;
}

OfflinePolicy::OfflinePolicy(OfflineKind kind) : kind_(kind) {}

std::string_view OfflinePolicy::name() const {
  switch (kind_) {
    case OfflineKind::SCF: return "scf";
    case OfflineKind::SRTF: return "srtf";
    case OfflineKind::SEBF: return "sebf";
    case OfflineKind::LWTF: return "lwtf";
  }
  return "offline";
}

Schedule OfflinePolicy::schedule(ClusterState& state) {
  const auto& active = state.active;
  std::vector<ContentionRecord> contention;
  if (kind_ == OfflineKind::LWTF) contention = compute_contention(active, ContentionScope::Global);

  std::vector<std::pair<double, CoFlow*>> keyed;
  keyed.reserve(active.size());
  for (std::size_t i = 0; i < active.size(); ++i) {
    const int k = contention.empty() ? 0 : contention[i].k;
    keyed.emplace_back(offline_key(kind_, *active[i], k, state.capacity), active[i]);
  }
  std::stable_sort(keyed.begin(), keyed.end(), [](const auto& a, const auto& b) {
    if (a.first != b.first) return a.first < b.first;
    if (a.second->arrival_time != b.second->arrival_time) {
      return a.second->arrival_time < b.second->arrival_time;
    }
    return a.second->coflow_id < b.second->coflow_id;
  });
  std::vector<CoFlow*> order;
  order.reserve(keyed.size());
  for (auto& kv : keyed) order.push_back(kv.second);

  Schedule out;
  out.interval_index = state.interval;
  PortBudget remaining = state.capacity;
  allocate_ordered(order, state, remaining, out, true);
  return out;
}

std::int64_t OfflinePolicy::stable_intervals(const ClusterState&, const Schedule&) const {
  // Only SCF's key is static; the others change with every byte sent.
  return kind_ == OfflineKind::SCF ? detail::kUnbounded : 1;
}

Schedule offline_schedule(ClusterState& state, OfflineKind kind) {
  OfflinePolicy policy(kind);
  return policy.schedule(state);
}

}  // namespace saath
