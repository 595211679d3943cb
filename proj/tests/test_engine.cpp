#include <sstream>

#include "doctest.h"
#include "helpers.hpp"
#include "saath/metrics.hpp"

using namespace saath;
using namespace saath::test;

namespace {

constexpr Bytes kT = 100 * kBytesPerMB;  // "t": 100 intervals at line rate
constexpr Micros kDelta = 8 * kMicrosPerMilli;

SimConfig no_transition_config() {
  SimConfig c;
  c.queues.K = 1;
  c.queues.S = 1'000'000 * kBytesPerMB;
  return c;
}

// Mean CCT in units of t, net of the one-interval registration latency.
double mean_in_t(const RunResult& r) {
  double sum = 0;
  for (const auto& c : r.coflows) sum += static_cast<double>(c.cct - kDelta);
  return sum / static_cast<double>(r.coflows.size()) / (100.0 * kDelta);
}

}  // namespace

TEST_CASE("one 1 MB flow completes in 16 ms") {
  Builder b;
  b.add(1, 0, {{0, 1, kBytesPerMB}});
  const auto r = run(b.take(), {}, SimConfig{});
  REQUIRE(r.coflows.size() == 1);
  CHECK(r.coflows[0].cct == 16 * kMicrosPerMilli);
  CHECK(r.coflows[0].fcts == std::vector<Micros>{16 * kMicrosPerMilli});
  CHECK(r.delivered_bytes == kBytesPerMB);
}

TEST_CASE("a flow finishing mid-interval finishes at its pro-rated time") {
  Builder b;
  b.add(1, 0, {{0, 1, 1'500'000}});
  const auto r = run(b.take(), {}, SimConfig{});
  CHECK(r.coflows[0].cct == 8000 + 8000 + 4000);
}

TEST_CASE("empty trace gives an empty result") {
  const auto r = run(std::vector<CoFlow>{}, {}, SimConfig{});
  CHECK(r.coflows.empty());
  CHECK(r.intervals == 0);
  Trace t;
  t.header.port_count = 4;
  CHECK(run(t, {}, {}, SimConfig{}).coflows.empty());
}

TEST_CASE("runs are deterministic") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto inst = random_instance(seed, true);
    auto cfg = small_queue_config();
    cfg.port_count = inst.ports;
    for (const auto& p : policy_names()) {
      cfg.policy = p;
      CHECK(run(inst.coflows, inst.dynamics, cfg) == run(inst.coflows, inst.dynamics, cfg));
    }
  }
  GeneratorSpec g;
  g.coflow_count = 30;
  g.seed = 5;
  const auto trace = synthesize(g);
  CHECK(run(trace, {}, {}, SimConfig{}) == run(trace, {}, {}, SimConfig{}));
}

TEST_CASE("restarting a finished flow is rejected") {
  Builder b;
  b.add(1, 0, {{0, 1, kBytesPerMB}});
  b.add(2, 0, {{2, 3, 10 * kBytesPerMB}});
  SimConfig cfg;
  cfg.interval_skipping = false;
  Simulation sim(b.take(), {}, cfg, nullptr);
  while (!sim.coflow(1)->finished()) sim.step();
  CHECK(sim.inject(DynamicsEvent{sim.now(), DynamicsKind::FlowRestart, 0, 0}) ==
        InjectOutcome::Rejected);
  CHECK(sim.inject(DynamicsEvent{sim.now(), DynamicsKind::FlowRestart, 1, 0}) ==
        InjectOutcome::Applied);
  CHECK(sim.coflow(2)->flows[0].bytes_sent == 0);
  CHECK_THROWS_AS(sim.inject(DynamicsEvent{sim.now(), DynamicsKind::FlowRestart, 7, 0}), SimError);
  const auto r = sim.run();
  CHECK(r.delivered_bytes > r.total_bytes);
}

TEST_CASE("rejected dynamics are counted") {
  Builder b;
  b.add(1, 0, {{0, 1, kBytesPerMB}});
  b.add(2, 0, {{2, 3, 10 * kBytesPerMB}});
  const std::vector<DynamicsEvent> ev{{30'000, DynamicsKind::FlowRestart, 0, 0}};
  CHECK(run(b.take(), ev, SimConfig{}).rejected_events == 1);
}

TEST_CASE("a straggler capped at R/10 takes ten times its solo time") {
  Builder b;
  b.add(1, 0, {{0, 1, kBytesPerMB}, {2, 3, kBytesPerMB}});
  const std::vector<DynamicsEvent> ev{
      {0, DynamicsKind::Straggler, 0, kGigabitBytesPerSecond / 10}};
  const auto r = run(b.take(), ev, SimConfig{});
  CHECK(r.coflows[0].cct >= 10 * kDelta);
  CHECK(r.coflows[0].cct == kDelta + 10 * kDelta);
}

TEST_CASE("DAG chain serializes stages") {
  Builder b;
  b.add(1, 0, {{0, 1, kBytesPerMB}});
  b.add(2, 0, {{2, 3, kBytesPerMB}});
  b.add(3, 0, {{4, 5, kBytesPerMB}});
  auto cs = b.take();
  const std::vector<DagEdge> dag{{3, 2}, {2, 1}};
  apply_dag(cs, dag);
  const auto r = run(cs, {}, SimConfig{});
  const auto* c1 = r.find(1);
  const auto* c2 = r.find(2);
  const auto* c3 = r.find(3);
  CHECK(c1->completion == 16'000);
  CHECK(c2->start == c1->completion);
  CHECK(c2->completion == 24'000);
  CHECK(c3->start == c2->completion);
  CHECK(c3->completion == 32'000);
  CHECK(c3->cct == kDelta);
}

TEST_CASE("coordinator restart recomputes deadlines in queue-entry order") {
  Builder b;
  b.add(1, 0, {{0, 1, 10 * kBytesPerMB}});
  b.add(2, 0, {{0, 2, 10 * kBytesPerMB}});
  SimConfig cfg;
  cfg.queues.K = 1;
  cfg.interval_skipping = false;
  Simulation sim(b.take(), {}, cfg, nullptr);
  sim.step();
  CHECK(sim.coflow(1)->deadline == 8'000);
  CHECK(sim.coflow(2)->deadline == 8'000 + 160'000);
  sim.step();
  sim.step();
  const Micros now = sim.now();
  CHECK(sim.inject(DynamicsEvent{now, DynamicsKind::CoordinatorRestart, -1, 0}) ==
        InjectOutcome::Applied);
  CHECK(sim.coflow(1)->deadline == now);
  CHECK(sim.coflow(2)->deadline == now + 160'000);
}

TEST_CASE("pipelined availability throttles flows to the producer") {
  Builder b;
  b.add(1, 0, {{0, 1, 3 * kBytesPerMB}});
  auto cs = b.take();
  SimConfig cfg;
  const auto eager = run(cs, {}, cfg);
  cfg.availability = AvailabilityMode::Pipelined;
  cfg.producer_rate = kGigabitBytesPerSecond / 2;
  const auto piped = run(cs, {}, cfg);
  CHECK(piped.coflows[0].cct >= 48'000);
  CHECK(piped.coflows[0].cct > eager.coflows[0].cct);
  CHECK(piped.delivered_bytes == 3 * kBytesPerMB);
}

TEST_CASE("aalo blocks the wide coflow's neighbours, saath does not") {
  // C2 spans P1, P3, P4; C1, C3, C4 each use one of those ports.
  Builder b;
  b.add(1, 0, {{1, 11, kT}});
  b.add(2, 1, {{1, 12, kT}, {3, 13, kT}, {4, 14, kT}});
  b.add(3, 2, {{3, 15, kT}});
  b.add(4, 3, {{4, 16, kT}});
  const auto cs = b.take();
  auto cfg = no_transition_config();
  cfg.policy = "aalo";
  const auto aalo = run(cs, {}, cfg);
  cfg.policy = "saath";
  const auto saath = run(cs, {}, cfg);
  CHECK(mean_in_t(aalo) == doctest::Approx(1.75));
  CHECK(mean_in_t(saath) == doctest::Approx(1.25));
  CHECK(mean_in_t(aalo) / mean_in_t(saath) == doctest::Approx(1.4));
}

TEST_CASE("work conservation shortens the cyclic layout") {
  Builder b;
  b.add(1, 0, {{0, 3, kT}, {1, 4, kT}});
  b.add(2, 1, {{1, 5, kT}, {2, 6, kT}});
  b.add(3, 2, {{2, 7, kT}, {0, 8, kT}});
  const auto cs = b.take();
  const auto cfg = no_transition_config();
  const auto off = run(cs, {}, cfg, std::make_unique<SaathPolicy>(SaathOptions{true, true, true, false}));
  const auto on = run(cs, {}, cfg, std::make_unique<SaathPolicy>());
  CHECK(mean_in_t(off) == doctest::Approx(2.0));
  CHECK(mean_in_t(on) == doctest::Approx(5.0 / 3.0));
}

TEST_CASE("comparison on a single coflow gives speedup 1") {
  Trace t = parse_trace("4 1\n1 0 1 0 1 2:3\n");
  const std::vector<std::string> pols{"aalo", "saath"};
  auto runs = run_comparison(t, pols, SimConfig{});
  const auto rep = speedups(runs.at("aalo"), runs.at("saath"));
  CHECK(rep.overall.median == 1.0);
  CHECK_THROWS_AS(run_comparison(t, std::vector<std::string>{"saath"}, SimConfig{}), ConfigError);
  CHECK_THROWS_AS(run_comparison(t, std::vector<std::string>{"saath", "nope"}, SimConfig{}),
                  ConfigError);
}

TEST_CASE("saath beats uncoordinated sharing on a contended trace") {
  GeneratorSpec g;
  g.coflow_count = 60;
  g.port_count = 10;
  g.mean_interarrival_ms = 20;
  g.seed = 11;
  const std::vector<std::string> pols{"uc-tcp", "saath"};
  auto runs = run_comparison(synthesize(g), pols, SimConfig{});
  CHECK(speedups(runs.at("uc-tcp"), runs.at("saath")).overall.median > 1.0);
}

TEST_CASE("arrival scale compresses arrivals") {
  Builder b;
  b.add(1, 0, {{0, 1, kBytesPerMB}});
  b.add(2, 80'000, {{2, 3, kBytesPerMB}});
  SimConfig cfg;
  cfg.arrival_scale = 4.0;
  const auto r = run(b.take(), {}, cfg);
  CHECK(r.find(2)->arrival == 20'000);
}

TEST_CASE("the interval guard stops runaway runs") {
  Builder b;
  b.add(1, 0, {{0, 1, 100 * kBytesPerMB}});
  SimConfig cfg;
  cfg.max_intervals = 10;
  CHECK_THROWS_AS(run(b.take(), {}, cfg), SimError);
}

TEST_CASE("invalid inputs are configuration errors") {
  Builder b;
  b.add(1, 0, {{0, 5, kBytesPerMB}});
  SimConfig cfg;
  cfg.port_count = 3;
  CHECK_THROWS_AS(run(b.take(), {}, cfg), ConfigError);
  Builder d;
  d.add(1, 0, {{0, 1}});
  d.add(1, 0, {{0, 1}});
  CHECK_THROWS_AS(run(d.take(), {}, SimConfig{}), ConfigError);
}

TEST_CASE("audit log lists every scheduled flow") {
  Builder b;
  b.add(1, 0, {{0, 1, 2 * kBytesPerMB}});
  std::ostringstream log;
  Simulation sim(b.take(), {}, SimConfig{}, nullptr);
  sim.set_audit(&log);
  sim.run();
  CHECK(log.str() ==
        "interval,coflow_id,flow_id,bytes_per_interval,rate_bps,origin\n"
        "1,1,0,1000000,125000000,ALL_OR_NONE\n"
        "2,1,0,1000000,125000000,ALL_OR_NONE\n");
}

TEST_CASE("utilization segments cover the run") {
  Builder b;
  b.add(1, 0, {{0, 1, 5 * kBytesPerMB}});
  const auto r = run(b.take(), {}, SimConfig{});
  std::int64_t covered = 0;
  Bytes bytes = 0;
  for (const auto& s : r.utilization) {
    covered += s.intervals;
    bytes += s.intervals * s.bytes_per_interval;
  }
  CHECK(covered == r.intervals);
  CHECK(bytes == r.delivered_bytes);
}
