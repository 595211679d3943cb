#include <numeric>

#include "doctest.h"
#include "saath/trace_io.hpp"

using namespace saath;

namespace {

std::size_t error_line(const std::string& text) {
  try {
    parse_trace(text);
  } catch (const TraceError& e) {
    return e.line();
  }
  return 0;
}

}  // namespace

TEST_CASE("single mapper and reducer") {
  const auto t = parse_trace("5 1\n1 50 1 2 1 4:10\n");
  REQUIRE(t.coflows.size() == 1);
  const auto cs = to_coflows(t);
  REQUIRE(cs[0].flows.size() == 1);
  CHECK(cs[0].arrival_time == 50'000);
  CHECK(cs[0].flows[0].spec.src_port == 2);
  CHECK(cs[0].flows[0].spec.dst_port == 4);
  CHECK(cs[0].flows[0].spec.size_bytes == 10 * kBytesPerMB);
}

TEST_CASE("reducer totals are split evenly across mappers") {
  const auto cs = to_coflows(parse_trace("4 1\n7 0 2 0 1 2 2:4 3:4\n"));
  REQUIRE(cs[0].flows.size() == 4);
  Bytes total = 0;
  for (const auto& f : cs[0].flows) {
    CHECK(f.spec.size_bytes == 2 * kBytesPerMB);
    total += f.spec.size_bytes;
  }
  CHECK(total == 8 * kBytesPerMB);
}

TEST_CASE("uneven splits round up by less than one byte per flow") {
  const auto cs = to_coflows(parse_trace("4 1\n1 0 3 0 1 2 1 3:0.000001\n"));
  CHECK(split_flow_size(1, 3) == 1);
  CHECK(cs[0].total_size() >= 1);
  CHECK(cs[0].total_size() - 1 < 3);
  CHECK(split_flow_size(10, 3) == 4);
}

TEST_CASE("a 150-port header is accepted") {
  std::string text = "150 2\n1 0 2 0 149 1 75:1\n2 10 1 3 2 148:2 0:5\n";
  const auto t = parse_trace(text);
  CHECK(t.header.port_count == 150);
  for (const auto& c : to_coflows(t)) {
    for (const auto& f : c.flows) {
      CHECK(f.spec.src_port < 150);
      CHECK(f.spec.dst_port < 150);
    }
  }
}

TEST_CASE("parse errors carry line numbers") {
  CHECK(error_line("4 2\n1 0 1 0 1 1:1\n2 0 1 9 1 1:1\n") == 3);       // port out of range
  CHECK(error_line("4 2\n1 0 1 0 1 1:1\n1 5 1 0 1 1:1\n") == 3);       // ids not increasing
  CHECK(error_line("4 1\n1 0 0 1 1:1\n") == 2);                        // zero mappers
  CHECK(error_line("4 1\n1 0 1 0 0\n") == 2);                          // zero reducers
  CHECK(error_line("4 1\n1 0 1 0 1 1:-3\n") == 2);                     // negative size
  CHECK(error_line("4 1\n1 0 1 0 1 1:x\n") == 2);                      // malformed size
  CHECK(error_line("4 1\n1 0 1 0 2 1:1\n") == 2);                      // truncated reducers
  CHECK(error_line("4\n") == 1);                                       // bad header
  CHECK(error_line("4 3\n1 0 1 0 1 1:1\n") == 1);                      // count mismatch
  CHECK_THROWS_AS(parse_trace(""), TraceError);
}

TEST_CASE("coflows are sorted by arrival") {
  const auto t = parse_trace("4 3\n1 30 1 0 1 1:1\n2 10 1 0 1 1:1\n3 10 1 0 1 1:1\n");
  CHECK(t.coflows[0].id == 2);
  CHECK(t.coflows[1].id == 3);
  CHECK(t.coflows[2].id == 1);
}

TEST_CASE("emit and parse round-trip") {
  const auto t = parse_trace("10 2\n1 0.5 2 0 1 2 2:4.25 3:0.001\n4 1000 1 9 1 9:12\n");
  CHECK(parse_trace(emit_trace(t)) == t);
  GeneratorSpec g;
  g.coflow_count = 50;
  g.port_count = 12;
  g.seed = 3;
  const auto s = synthesize(g);
  CHECK(parse_trace(emit_trace(s)) == s);
}

TEST_CASE("arrival scaling") {
  const auto t = parse_trace("4 2\n1 0 1 0 1 1:1\n2 100 1 0 1 1:1\n");
  const auto fast = scale_arrivals(t, 4.0);
  CHECK(fast.coflows[0].arrival == 0);
  CHECK(fast.coflows[1].arrival == 25'000);
  CHECK(scale_arrivals(t, 1.0) == t);
  const auto slow = scale_arrivals(t, 0.5);
  CHECK(slow.coflows[1].arrival == 200'000);
  CHECK(slow.coflows[1].reducers == t.coflows[1].reducers);
  CHECK_THROWS_AS(scale_arrivals(t, 0.0), ConfigError);
  CHECK_THROWS_AS(scale_arrivals(t, -1.0), ConfigError);
}

TEST_CASE("generator") {
  GeneratorSpec g;
  g.coflow_count = 1;
  g.port_count = 2;
  g.max_mappers = 1;
  g.max_reducers = 1;
  g.min_reducer_mb = 1.0;
  g.max_reducer_mb = 1.0;
  const auto one = to_coflows(synthesize(g));
  REQUIRE(one.size() == 1);
  CHECK(one[0].flows.size() == 1);
  CHECK(one[0].flows[0].spec.size_bytes == kBytesPerMB);

  GeneratorSpec h;
  h.coflow_count = 40;
  h.seed = 99;
  CHECK(emit_trace(synthesize(h)) == emit_trace(synthesize(h)));

  h.equal_flow_fraction = 1.0;
  for (const auto& c : to_coflows(synthesize(h))) {
    for (const auto& f : c.flows) CHECK(f.spec.size_bytes == c.flows[0].spec.size_bytes);
  }

  GeneratorSpec bad;
  bad.port_count = 3;
  bad.max_mappers = 4;
  CHECK_THROWS_AS(synthesize(bad), ConfigError);
}

TEST_CASE("DAG sidecar") {
  const std::vector<CoflowId> ids{1, 2, 3};
  CHECK(parse_dag("", ids).empty());
  CHECK(parse_dag("# nothing\n\n", ids).empty());
  const auto chain = parse_dag("3 2\n2 1  # wave two\n", ids);
  REQUIRE(chain.size() == 2);
  CHECK(chain[0] == DagEdge{3, 2});
  try {
    parse_dag("2 1\n1 2\n", ids);
    FAIL("cycle accepted");
  } catch (const TraceError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("cycle") != std::string::npos);
    CHECK(msg.find("1 -> 2 -> 1") != std::string::npos);
  }
  CHECK_THROWS_AS(parse_dag("4 1\n", ids), TraceError);
  CHECK_THROWS_AS(parse_dag("4\n", ids), TraceError);
}

TEST_CASE("dynamics file") {
  const auto cs = to_coflows(parse_trace("4 2\n1 0 2 0 1 1 2:2\n2 0 1 3 1 2:1\n"));
  const auto ev = parse_dynamics(
      "# t kind args\n"
      "20 FLOW_RESTART 1\n"
      "5 STRAGGLER 0 12500000\n"
      "30 COORDINATOR_RESTART\n"
      "40 NODE_FAILURE 0\n",
      cs);
  REQUIRE(ev.size() == 4);
  CHECK(ev[0] == DynamicsEvent{5000, DynamicsKind::Straggler, 0, 12'500'000});
  CHECK(ev[1] == DynamicsEvent{20000, DynamicsKind::FlowRestart, 1, 0});
  CHECK(ev[2].kind == DynamicsKind::CoordinatorRestart);
  CHECK(ev[3] == DynamicsEvent{40000, DynamicsKind::FlowRestart, 0, 0});
  CHECK_THROWS_AS(parse_dynamics("1 FLOW_RESTART 99\n", cs), TraceError);
  CHECK_THROWS_AS(parse_dynamics("1 REBOOT 1\n", cs), TraceError);
  CHECK_THROWS_AS(parse_dynamics("1 STRAGGLER 1 0\n", cs), TraceError);
  CHECK_THROWS_AS(parse_dynamics("-1 FLOW_RESTART 1\n", cs), TraceError);
}
