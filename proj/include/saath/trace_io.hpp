#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "saath/types.hpp"

namespace saath {

/// Parse failure carrying the 1-based line it occurred on (0 when the error
/// is not tied to a line).
class TraceError : public std::runtime_error {
 public:
  TraceError(std::size_t line, const std::string& what);
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

struct TraceHeader {
  int port_count = 0;
  int coflow_count = 0;

  friend bool operator==(const TraceHeader&, const TraceHeader&) = default;
};

struct ReducerSpec {
  PortId port = 0;
  Bytes total_bytes = 0;  // shuffle bytes destined to this reducer

  friend bool operator==(const ReducerSpec&, const ReducerSpec&) = default;
};

/// One line of the coflow-benchmark format.
struct TraceCoflow {
  CoflowId id = 0;
  Micros arrival = 0;
  std::vector<PortId> mappers;
  std::vector<ReducerSpec> reducers;

  friend bool operator==(const TraceCoflow&, const TraceCoflow&) = default;
};

struct Trace {
  TraceHeader header;
  std::vector<TraceCoflow> coflows;  // sorted by (arrival, id)

  friend bool operator==(const Trace&, const Trace&) = default;
};

/// Parses the coflow-benchmark text format:
///   line 1: "<port_count> <coflow_count>"
///   then:   "<id> <arrival_ms> <M> <m_1> ... <m_M> <R> <r_1:mb_1> ... <r_R:mb_R>"
Trace parse_trace(std::string_view text);
Trace load_trace(const std::string& path);

/// Writes a trace in the same format; parse_trace(emit_trace(t)) == t.
std::string emit_trace(const Trace& trace);

/// Size of each flow towards `reducer`: the reducer total split evenly across
/// the mappers, rounded up to whole bytes.
Bytes split_flow_size(Bytes reducer_total, std::size_t mapper_count);

/// Expands a trace into M x R flows per coflow. Flow ids are assigned
/// sequentially in (coflow order, mapper index, reducer index) order.
std::vector<CoFlow> to_coflows(const Trace& trace);

/// Divides every arrival by `scale` (A = 4 means 4x faster arrivals).
Trace scale_arrivals(Trace trace, double scale);

struct GeneratorSpec {
  int coflow_count = 100;
  int port_count = 20;
  int min_mappers = 1;
  int max_mappers = 4;
  int min_reducers = 1;
  int max_reducers = 4;
  double min_reducer_mb = 1.0;  // per-reducer totals are log-uniform in [min, max]
  double max_reducer_mb = 100.0;
  double mean_interarrival_ms = 50.0;  // exponential inter-arrivals; 0 = all at t=0
  double equal_flow_fraction = 0.5;    // share of multi-flow coflows with equal flows
  std::uint64_t seed = 0;
};

/// Deterministic workload generator. Throws ConfigError for impossible specs.
Trace synthesize(const GeneratorSpec& spec);

struct DagEdge {
  CoflowId child = 0;
  CoflowId parent = 0;

  friend bool operator==(const DagEdge&, const DagEdge&) = default;
};

/// Parses "<child> <parent>" lines ('#' starts a comment). When `known_ids` is
/// non-empty every id must appear in it. Cycles are rejected with a witness.
std::vector<DagEdge> parse_dag(std::string_view text, std::span<const CoflowId> known_ids = {});

/// Attaches parent lists to coflows. Unknown ids throw TraceError.
void apply_dag(std::vector<CoFlow>& coflows, std::span<const DagEdge> edges);

enum class DynamicsKind : std::uint8_t { Straggler, FlowRestart, CoordinatorRestart };

struct DynamicsEvent {
  Micros time = 0;
  DynamicsKind kind = DynamicsKind::FlowRestart;
  FlowId flow_id = -1;
  Bytes rate_cap = 0;  // bytes/second, stragglers only

  friend bool operator==(const DynamicsEvent&, const DynamicsEvent&) = default;
};

const char* to_string(DynamicsKind kind);

/// Parses "<time_ms> <KIND> <args>" lines:
///   STRAGGLER <flow_id> <rate_cap_bytes_per_sec>
///   FLOW_RESTART <flow_id>
///   NODE_FAILURE <port>        (expands to FLOW_RESTART of every flow on the port)
///   COORDINATOR_RESTART
/// Flow references are checked against `coflows`. Output is sorted by time.
std::vector<DynamicsEvent> parse_dynamics(std::string_view text, std::span<const CoFlow> coflows);

std::string read_file(const std::string& path);

/// Writes to a sibling temp file, then renames it over `path`.
void write_file_atomic(const std::string& path, std::string_view content);

}  // namespace saath
