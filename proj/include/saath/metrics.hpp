#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "saath/sim_engine.hpp"
#include "saath/trace_io.hpp"

namespace saath {

/// Nearest-rank percentile, p in (0, 100]. `sorted` must be ascending and
/// non-empty.
double nearest_rank(std::span<const double> sorted, double p);

/// Middle value, averaging the two middle values of an even-length list.
double median(std::vector<double> values);

/// Population standard deviation over mean; 0 when the mean is 0.
double normalized_deviation(std::span<const double> values);

struct Distribution {
  std::size_t count = 0;
  double median = 0.0;
  double p10 = 0.0;
  double p90 = 0.0;
};

Distribution summarize(std::vector<double> values);

struct SpeedupRecord {
  CoflowId coflow_id = 0;
  Micros cct_baseline = 0;
  Micros cct_test = 0;
  double speedup = 0.0;  // cct_baseline / cct_test
  int bin = 0;
};

struct SpeedupReport {
  std::string baseline;
  std::string test;
  std::vector<SpeedupRecord> records;  // ascending coflow_id
  Distribution overall;
  std::array<Distribution, 4> bins;  // bin-1 .. bin-4
};

/// Per-coflow speedup of `test` over `baseline`. Throws std::invalid_argument
/// when the two runs do not cover the same coflow ids.
SpeedupReport speedups(const RunResult& baseline, const RunResult& test);

/// 1 = (width <= 10, size <= 100 MB), 2 = (> 10, <= 100 MB),
/// 3 = (<= 10, > 100 MB), 4 = (> 10, > 100 MB).
int bin(std::size_t width, Bytes total_size);
int bin(const CoflowRecord& record);

struct OutOfSyncRecord {
  CoflowId coflow_id = 0;
  bool equal_length = false;
  double deviation = 0.0;
};

/// Normalized FCT deviation of every coflow with at least two flows.
std::vector<OutOfSyncRecord> out_of_sync(const RunResult& run);

struct OutOfSyncSummary {
  std::size_t count = 0;
  double fraction_zero = 0.0;
  std::array<double, 9> deciles{};  // deviation at 10%, 20%, ..., 90%
};

OutOfSyncSummary summarize_out_of_sync(std::span<const OutOfSyncRecord> records, bool equal_length);

/// True when `better` is at or below `worse` at every decile and strictly
/// below at one or more.
bool dominates(const OutOfSyncSummary& better, const OutOfSyncSummary& worse);

struct FlowLengthStats {
  std::size_t coflows = 0;
  std::size_t single_flow = 0;
  std::size_t equal_multi = 0;
  std::size_t unequal_multi = 0;
  std::map<std::size_t, std::size_t> width_histogram;
  std::vector<double> deviations;  // normalized flow-length deviation, multi-flow coflows

  double single_fraction() const;
};

FlowLengthStats flow_length_stats(const Trace& trace);

/// Job speedup when a fraction f of the job is shuffle sped up by s.
double jct_speedup(double cct_speedup, double shuffle_fraction);

// Delimited-text tables.
void write_cct_table(std::ostream& out, const RunResult& run);
void write_speedup_table(std::ostream& out, const SpeedupReport& report);
void write_out_of_sync_table(std::ostream& out, std::span<const OutOfSyncRecord> records);
void write_summary_rows(std::ostream& out, const SpeedupReport& report);

/// Machine-readable summary: policy, baseline, seed, median, p10, p90,
/// per-bin medians and out-of-sync CDF points.
std::string summary_json(const SpeedupReport& report, const RunResult& baseline,
                         const RunResult& test, std::uint64_t seed);

}  // namespace saath
