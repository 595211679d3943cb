#include <algorithm>
#include <cmath>
#include <future>
#include <set>
#include <tuple>

#include "saath/sim_engine.hpp"

namespace saath {
namespace {

constexpr int kArrivalEvent = 0;
constexpr int kDynamicsEvent = 3;

bool arrival_order(const CoFlow& a, const CoFlow& b) {
  return std::tie(a.arrival_time, a.coflow_id) < std::tie(b.arrival_time, b.coflow_id);
}

Bytes ceil_div(Bytes a, Bytes b) { return (a + b - 1) / b; }

}  // namespace

const CoflowRecord* RunResult::find(CoflowId id) const {
  auto it = std::lower_bound(coflows.begin(), coflows.end(), id,
                             [](const CoflowRecord& r, CoflowId v) { return r.coflow_id < v; });
  if (it == coflows.end() || it->coflow_id != id) return nullptr;
  return &*it;
}

double RunResult::mean_cct_seconds() const {
  if (coflows.empty()) return 0.0;
  long double sum = 0;
  for (const auto& r : coflows) sum += static_cast<long double>(r.cct);
  return static_cast<double>(sum / static_cast<long double>(coflows.size()) /
                             static_cast<long double>(kMicrosPerSecond));
}

Simulation::Simulation(std::vector<CoFlow> coflows, std::vector<DynamicsEvent> dynamics,
                       SimConfig config, std::unique_ptr<Policy> policy)
    : config_(std::move(config)), policy_(std::move(policy)), coflows_(std::move(coflows)),
      dynamics_(std::move(dynamics)) {
  config_.validate();
  if (!policy_) policy_ = make_policy(config_.policy);
  thresholds_ = derive_thresholds(config_.queues);

  PortId max_port = 0;
  for (auto& c : coflows_) {
    if (c.flows.empty()) {
      throw ConfigError("coflow " + std::to_string(c.coflow_id) + " has no flows");
    }
    for (const auto& f : c.flows) {
      if (f.spec.size_bytes < 1) {
        throw ConfigError("flow " + std::to_string(f.spec.flow_id) + " has size < 1 byte");
      }
      if (f.spec.src_port < 0 || f.spec.dst_port < 0) {
        throw ConfigError("flow " + std::to_string(f.spec.flow_id) + " has a negative port");
      }
      max_port = std::max({max_port, f.spec.src_port, f.spec.dst_port});
    }
    if (c.arrival_time < 0) {
      throw ConfigError("coflow " + std::to_string(c.coflow_id) + " arrives before time 0");
    }
    if (config_.arrival_scale != 1.0) {
      c.arrival_time = static_cast<Micros>(
          std::llround(static_cast<long double>(c.arrival_time) / config_.arrival_scale));
    }
  }
  port_count_ = config_.port_count > 0 ? config_.port_count : static_cast<int>(max_port) + 1;
  if (!coflows_.empty() && max_port >= port_count_) {
    throw ConfigError("port " + std::to_string(max_port) + " is outside the cluster of " +
                      std::to_string(port_count_) + " ports");
  }
  port_budget_ = per_interval_budget(config_.port_rate, config_.delta);
  capacity_ = PortBudget::uniform(port_count_, port_budget_);

  std::stable_sort(coflows_.begin(), coflows_.end(), arrival_order);
  for (std::size_t i = 0; i < coflows_.size(); ++i) {
    auto& c = coflows_[i];
    std::sort(c.flows.begin(), c.flows.end(), [](const FlowState& a, const FlowState& b) {
      return a.spec.flow_id < b.spec.flow_id;
    });
    c.slot = i;
    c.arrived = false;
    c.registered = false;
    c.completion_time.reset();
    if (!slot_of_.emplace(c.coflow_id, i).second) {
      throw ConfigError("duplicate coflow id " + std::to_string(c.coflow_id));
    }
    for (std::size_t f = 0; f < c.flows.size(); ++f) {
      auto& fl = c.flows[f];
      fl.bytes_sent = 0;
      fl.bytes_attained = 0;
      fl.current_budget = 0;
      fl.finish_time.reset();
      fl.available_bytes =
          config_.availability == AvailabilityMode::AllAtArrival ? fl.spec.size_bytes : 0;
      if (!flow_of_.emplace(fl.spec.flow_id, FlowRef{i, f}).second) {
        throw ConfigError("duplicate flow id " + std::to_string(fl.spec.flow_id));
      }
    }
  }

  children_.assign(coflows_.size(), {});
  open_parents_.assign(coflows_.size(), 0);
  for (std::size_t i = 0; i < coflows_.size(); ++i) {
    std::set<CoflowId> parents(coflows_[i].parents.begin(), coflows_[i].parents.end());
    for (CoflowId p : parents) {
      auto it = slot_of_.find(p);
      if (it == slot_of_.end()) {
        throw ConfigError("coflow " + std::to_string(coflows_[i].coflow_id) +
                          " depends on unknown coflow " + std::to_string(p));
      }
      children_[it->second].push_back(i);
      ++open_parents_[i];
    }
  }

  for (std::size_t i = 0; i < coflows_.size(); ++i) {
    events_.push_back({coflows_[i].arrival_time, kArrivalEvent, coflows_[i].coflow_id, i});
  }
  for (std::size_t i = 0; i < dynamics_.size(); ++i) {
    const auto& d = dynamics_[i];
    if (d.time < 0) throw ConfigError("dynamics event before time 0");
    if (d.kind != DynamicsKind::CoordinatorRestart && !flow_of_.count(d.flow_id)) {
      throw ConfigError("dynamics event references unknown flow " + std::to_string(d.flow_id));
    }
    events_.push_back({d.time, kDynamicsEvent, static_cast<std::int64_t>(i), i});
  }
  std::stable_sort(events_.begin(), events_.end(), [](const PendingEvent& a, const PendingEvent& b) {
    return std::tie(a.time, a.kind, a.id) < std::tie(b.time, b.kind, b.id);
  });
}

Simulation::~Simulation() = default;

bool Simulation::done() const { return completed_ == coflows_.size(); }

Micros Simulation::now() const { return interval_ * config_.delta; }

const CoFlow* Simulation::coflow(CoflowId id) const {
  auto it = slot_of_.find(id);
  return it == slot_of_.end() ? nullptr : &coflows_[it->second];
}

void Simulation::set_audit(std::ostream* out) {
  audit_ = out;
  if (audit_) *audit_ << "interval,coflow_id,flow_id,bytes_per_interval,rate_bps,origin\n";
}

std::int64_t Simulation::boundary_after(Micros t) const { return t / config_.delta + 1; }

void Simulation::register_coflow(std::size_t slot, Micros start) {
  CoFlow& c = coflows_[slot];
  c.registered = true;
  c.start_time = start;
  for (auto& f : c.flows) f.production_start = start;
  auto pos = std::lower_bound(active_.begin(), active_.end(), &c,
                              [](const CoFlow* a, const CoFlow* b) { return arrival_order(*a, *b); });
  active_.insert(pos, &c);
}

void Simulation::process_events() {
  const Micros t = now();
  while (next_event_ < events_.size() && events_[next_event_].time < t) {
    const auto ev = events_[next_event_++];
    if (ev.kind == kArrivalEvent) {
      CoFlow& c = coflows_[ev.index];
      c.arrived = true;
      if (open_parents_[ev.index] == 0) {
        Micros start = c.arrival_time;
        for (CoflowId p : c.parents) {
          start = std::max(start, *coflows_[slot_of_.at(p)].completion_time);
        }
        register_coflow(ev.index, start);
      }
    } else if (inject(dynamics_[ev.index]) == InjectOutcome::Rejected) {
      ++rejected_;
    }
  }
}

void Simulation::refresh_availability() {
  if (config_.availability != AvailabilityMode::Pipelined) return;
  const Micros t = now();
  for (CoFlow* c : active_) {
    for (auto& f : c->flows) {
      if (f.finished()) continue;
      const auto produced = static_cast<__int128>(config_.producer_rate) *
                            std::max<Micros>(0, t - f.production_start) / kMicrosPerSecond;
      f.available_bytes = static_cast<Bytes>(
          std::min<__int128>(produced, static_cast<__int128>(f.spec.size_bytes)));
      f.available_bytes = std::max(f.available_bytes, f.bytes_sent);
    }
  }
}

ClusterState Simulation::make_state() {
  ClusterState s;
  s.now = now();
  s.interval = interval_;
  s.delta = config_.delta;
  s.active = active_;
  s.thresholds = thresholds_;
  s.queues = config_.queues;
  s.capacity = capacity_;
  s.line_rate = config_.port_rate;
  s.deadline_factor = config_.deadline_factor;
  s.availability = config_.availability;
  s.contention_scope = config_.contention_scope;
  s.dynamics_requeue = config_.dynamics_requeue;
  return s;
}

InjectOutcome Simulation::inject(const DynamicsEvent& event) {
  if (event.kind == DynamicsKind::CoordinatorRestart) {
    if (!active_.empty()) {
      auto state = make_state();
      policy_->on_coordinator_restart(state);
    }
    return InjectOutcome::Applied;
  }
  auto it = flow_of_.find(event.flow_id);
  if (it == flow_of_.end()) {
    throw SimError("dynamics event references unknown flow " + std::to_string(event.flow_id));
  }
  CoFlow& c = coflows_[it->second.coflow];
  FlowState& f = c.flows[it->second.flow];
  if (f.finished()) return InjectOutcome::Rejected;

  if (event.kind == DynamicsKind::Straggler) {
    if (event.rate_cap <= 0) throw SimError("straggler rate cap must be > 0");
    f.rate_cap = event.rate_cap;
    return InjectOutcome::Applied;
  }
  if (!c.registered) return InjectOutcome::Rejected;
  f.bytes_sent = 0;
  if (config_.availability == AvailabilityMode::Pipelined) {
    f.available_bytes = 0;
    f.production_start = now();
  }
  c.requeue_pending = true;
  return InjectOutcome::Applied;
}

std::int64_t Simulation::horizon(const ClusterState& state, const Schedule& schedule) const {
  if (!config_.interval_skipping || audit_ != nullptr ||
      config_.availability == AvailabilityMode::Pipelined) {
    return 1;
  }
  std::int64_t l = policy_->stable_intervals(state, schedule);
  for (const auto& e : schedule.entries) {
    const auto& f = coflows_[e.coflow_slot].flows[e.flow_slot];
    const Bytes eff = effective_budget(f, e.budget, config_.delta);
    if (eff > 0) l = std::min(l, ceil_div(f.remaining(), eff));
  }
  if (next_event_ < events_.size()) {
    l = std::min(l, boundary_after(events_[next_event_].time) - interval_);
  }
  l = std::min(l, config_.max_intervals - interval_);
  return std::max<std::int64_t>(l, 1);
}

void Simulation::record_utilization(std::int64_t first, std::int64_t count, Bytes per_interval) {
  if (count <= 0) return;
  if (!utilization_.empty()) {
    auto& last = utilization_.back();
    if (last.first_interval + last.intervals == first && last.bytes_per_interval == per_interval) {
      last.intervals += count;
      return;
    }
  }
  utilization_.push_back({first, count, per_interval});
}

void Simulation::apply(const Schedule& schedule, std::int64_t count) {
  for (const auto& e : last_schedule_.entries) {
    coflows_[e.coflow_slot].flows[e.flow_slot].current_budget = 0;
  }
  const Micros last_start = (interval_ + count - 1) * config_.delta;
  const bool pipelined = config_.availability == AvailabilityMode::Pipelined;
  Bytes bulk_per_interval = 0;
  Bytes last_interval = 0;
  std::vector<std::size_t> finished_coflows;

  for (const auto& e : schedule.entries) {
    CoFlow& c = coflows_[e.coflow_slot];
    FlowState& f = c.flows[e.flow_slot];
    f.current_budget = e.budget;
    if (audit_) {
      const auto rate = static_cast<__int128>(e.budget) * kMicrosPerSecond / config_.delta;
      *audit_ << interval_ << ',' << e.coflow_id << ',' << e.flow_id << ',' << e.budget << ','
              << static_cast<long long>(rate) << ',' << to_string(e.origin) << '\n';
    }
    const Bytes eff = effective_budget(f, e.budget, config_.delta);
    if (eff <= 0) continue;
    const Bytes bulk = eff * (count - 1);
    f.bytes_sent += bulk;
    f.bytes_attained += bulk;
    bulk_per_interval += eff;

    Bytes send = std::min(eff, f.remaining());
    if (pipelined) send = std::min(send, f.unread());
    if (send <= 0) continue;
    f.bytes_sent += send;
    f.bytes_attained += send;
    last_interval += send;
    if (f.remaining() == 0) {
      f.finish_time = last_start + ceil_div(send * config_.delta, eff);
      if (c.unfinished_count() == 0) finished_coflows.push_back(e.coflow_slot);
    }
  }

  delivered_ += bulk_per_interval * (count - 1) + last_interval;
  record_utilization(interval_, count - 1, bulk_per_interval);
  record_utilization(interval_ + count - 1, 1, last_interval);

  std::sort(finished_coflows.begin(), finished_coflows.end());
  finished_coflows.erase(std::unique(finished_coflows.begin(), finished_coflows.end()),
                         finished_coflows.end());
  for (auto& slot : finished_coflows) {
    Micros done_at = 0;
    for (const auto& f : coflows_[slot].flows) done_at = std::max(done_at, *f.finish_time);
    coflows_[slot].completion_time = done_at;
  }
  std::sort(finished_coflows.begin(), finished_coflows.end(), [&](std::size_t a, std::size_t b) {
    return std::tie(*coflows_[a].completion_time, coflows_[a].coflow_id) <
           std::tie(*coflows_[b].completion_time, coflows_[b].coflow_id);
  });
  for (auto slot : finished_coflows) complete(slot);
}

void Simulation::complete(std::size_t slot) {
  CoFlow& c = coflows_[slot];
  ++completed_;
  active_.erase(std::find(active_.begin(), active_.end(), &c));
  for (std::size_t child : children_[slot]) {
    if (--open_parents_[child] != 0 || !coflows_[child].arrived) continue;
    Micros start = coflows_[child].arrival_time;
    for (CoflowId p : coflows_[child].parents) {
      start = std::max(start, *coflows_[slot_of_.at(p)].completion_time);
    }
    register_coflow(child, start);
  }
}

bool Simulation::step() {
  if (done()) return false;
  if (active_.empty()) {
    if (next_event_ >= events_.size()) {
      throw SimError("no active coflow and no pending event, yet " +
                     std::to_string(coflows_.size() - completed_) + " coflows are unfinished");
    }
    const std::int64_t b = boundary_after(events_[next_event_].time);
    if (b > interval_) {
      record_utilization(interval_, b - interval_, 0);
      interval_ = b;
    }
  }
  if (interval_ >= config_.max_intervals) {
    throw SimError("run exceeded " + std::to_string(config_.max_intervals) + " intervals with " +
                   std::to_string(coflows_.size() - completed_) + " coflows unfinished");
  }
  process_events();
  refresh_availability();
  if (active_.empty()) return !done();

  auto state = make_state();
  Schedule schedule = policy_->schedule(state);
  ++schedules_;
  if (auto violation = check_capacity(schedule, capacity_)) {
    throw SimError(std::string(policy_->name()) + " produced an infeasible schedule: " + *violation);
  }
  const std::int64_t count = horizon(state, schedule);
  apply(schedule, count);
  interval_ += count;
  last_schedule_ = std::move(schedule);
  return !done();
}

RunResult Simulation::run() {
  while (step()) {
  }
  return result();
}

RunResult Simulation::result() const {
  RunResult r;
  r.policy = std::string(policy_->name());
  r.intervals = interval_;
  r.schedules_computed = schedules_;
  r.rejected_events = rejected_;
  r.delivered_bytes = delivered_;
  r.utilization = utilization_;
  r.port_budget = port_budget_;
  r.port_count = port_count_;
  for (const auto& c : coflows_) {
    r.total_bytes += c.total_size();
    if (!c.completion_time) continue;
    CoflowRecord rec;
    rec.coflow_id = c.coflow_id;
    rec.arrival = c.arrival_time;
    rec.start = c.start_time;
    rec.completion = *c.completion_time;
    rec.cct = *c.cct();
    rec.width = c.width();
    rec.total_size = c.total_size();
    for (const auto& f : c.flows) {
      rec.fcts.push_back(*f.finish_time - c.start_time);
      rec.flow_sizes.push_back(f.spec.size_bytes);
    }
    rec.queue_history = c.queue_history;
    rec.queue_transitions = c.queue_history.empty() ? 0 : static_cast<int>(c.queue_history.size()) - 1;
    rec.deadline_expiries = c.deadline_expiries;
    r.coflows.push_back(std::move(rec));
  }
  std::sort(r.coflows.begin(), r.coflows.end(),
            [](const CoflowRecord& a, const CoflowRecord& b) { return a.coflow_id < b.coflow_id; });
  return r;
}

RunResult run(const Trace& trace, std::span<const DagEdge> dag,
              std::span<const DynamicsEvent> dynamics, const SimConfig& config) {
  SimConfig cfg = config;
  if (cfg.port_count == 0) cfg.port_count = trace.header.port_count;
  auto coflows = to_coflows(trace);
  apply_dag(coflows, dag);
  return run(std::move(coflows), dynamics, cfg);
}

RunResult run(std::vector<CoFlow> coflows, std::span<const DynamicsEvent> dynamics,
              const SimConfig& config, std::unique_ptr<Policy> policy) {
  Simulation sim(std::move(coflows), {dynamics.begin(), dynamics.end()}, config, std::move(policy));
  return sim.run();
}

std::map<std::string, RunResult> run_comparison(const Trace& trace,
                                                std::span<const std::string> policies,
                                                const SimConfig& config,
                                                std::span<const DagEdge> dag,
                                                std::span<const DynamicsEvent> dynamics) {
  if (policies.size() < 2) throw ConfigError("a comparison needs at least two policies");
  for (const auto& p : policies) make_policy(p);
  std::vector<std::future<RunResult>> runs;
  for (const auto& p : policies) {
    SimConfig cfg = config;
    cfg.policy = p;
    runs.push_back(std::async(std::launch::async,
                              [&trace, dag, dynamics, cfg] { return run(trace, dag, dynamics, cfg); }));
  }
  std::map<std::string, RunResult> out;
  for (std::size_t i = 0; i < policies.size(); ++i) out[policies[i]] = runs[i].get();
  return out;
}

}  // namespace saath
