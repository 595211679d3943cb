#include "saath/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include <fmt/format.h>

#include "json.hpp"

namespace saath {

double nearest_rank(std::span<const double> sorted, double p) {
  if (sorted.empty()) throw std::invalid_argument("percentile of an empty list");
  const auto n = static_cast<double>(sorted.size());
  auto rank = static_cast<std::size_t>(std::ceil(p / 100.0 * n - 1e-9));
  rank = std::clamp<std::size_t>(rank, 1, sorted.size());
  return sorted[rank - 1];
}

double median(std::vector<double> values) {
  if (values.empty()) throw std::invalid_argument("median of an empty list");
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  if (n % 2 == 1) return values[n / 2];
  return (values[n / 2 - 1] + values[n / 2]) / 2.0;
}

double normalized_deviation(std::span<const double> values) {
  if (values.empty()) return 0.0;
  const long double n = static_cast<long double>(values.size());
  long double sum = 0;
  for (double v : values) sum += v;
  const long double mean = sum / n;
  if (mean == 0) return 0.0;
  long double sq = 0;
  for (double v : values) sq += (v - mean) * (v - mean);
  return static_cast<double>(std::sqrt(sq / n) / mean);
}

Distribution summarize(std::vector<double> values) {
  Distribution d;
  d.count = values.size();
  if (values.empty()) return d;
  std::sort(values.begin(), values.end());
  d.median = median(values);
  d.p10 = nearest_rank(values, 10);
  d.p90 = nearest_rank(values, 90);
  return d;
}

int bin(std::size_t width, Bytes total_size) {
  const bool wide = width > 10;
  const bool large = total_size > 100 * kBytesPerMB;
  return 1 + (wide ? 1 : 0) + (large ? 2 : 0);
}

int bin(const CoflowRecord& record) { return bin(record.width, record.total_size); }

SpeedupReport speedups(const RunResult& baseline, const RunResult& test) {
  if (baseline.coflows.size() != test.coflows.size()) {
    throw std::invalid_argument(fmt::format("runs cover different coflows ({} vs {})",
                                            baseline.coflows.size(), test.coflows.size()));
  }
  SpeedupReport report;
  report.baseline = baseline.policy;
  report.test = test.policy;
  std::vector<double> all;
  std::array<std::vector<double>, 4> per_bin;
  for (std::size_t i = 0; i < baseline.coflows.size(); ++i) {
    const auto& b = baseline.coflows[i];
    const auto& t = test.coflows[i];
    if (b.coflow_id != t.coflow_id) {
      throw std::invalid_argument(
          fmt::format("coflow id mismatch: {} vs {}", b.coflow_id, t.coflow_id));
    }
    SpeedupRecord r{b.coflow_id, b.cct, t.cct,
                    static_cast<double>(b.cct) / static_cast<double>(t.cct), bin(b)};
    all.push_back(r.speedup);
    per_bin[static_cast<std::size_t>(r.bin - 1)].push_back(r.speedup);
    report.records.push_back(r);
  }
  report.overall = summarize(all);
  for (std::size_t k = 0; k < 4; ++k) report.bins[k] = summarize(per_bin[k]);
  return report;
}

std::vector<OutOfSyncRecord> out_of_sync(const RunResult& run) {
  std::vector<OutOfSyncRecord> out;
  for (const auto& r : run.coflows) {
    if (r.width < 2) continue;
    std::vector<double> fcts(r.fcts.begin(), r.fcts.end());
    const bool equal = std::adjacent_find(r.flow_sizes.begin(), r.flow_sizes.end(),
                                          std::not_equal_to<>()) == r.flow_sizes.end();
    out.push_back({r.coflow_id, equal, normalized_deviation(fcts)});
  }
  return out;
}

OutOfSyncSummary summarize_out_of_sync(std::span<const OutOfSyncRecord> records,
                                       bool equal_length) {
  std::vector<double> values;
  for (const auto& r : records) {
    if (r.equal_length == equal_length) values.push_back(r.deviation);
  }
  OutOfSyncSummary s;
  s.count = values.size();
  if (values.empty()) return s;
  std::sort(values.begin(), values.end());
  s.fraction_zero = static_cast<double>(std::count(values.begin(), values.end(), 0.0)) /
                    static_cast<double>(values.size());
  for (std::size_t i = 0; i < s.deciles.size(); ++i) {
    s.deciles[i] = nearest_rank(values, 10.0 * static_cast<double>(i + 1));
  }
  return s;
}

bool dominates(const OutOfSyncSummary& better, const OutOfSyncSummary& worse) {
  bool strict = false;
  for (std::size_t i = 0; i < better.deciles.size(); ++i) {
    if (better.deciles[i] > worse.deciles[i]) return false;
    if (better.deciles[i] < worse.deciles[i]) strict = true;
  }
  return strict;
}

double FlowLengthStats::single_fraction() const {
  return coflows == 0 ? 0.0 : static_cast<double>(single_flow) / static_cast<double>(coflows);
}

FlowLengthStats flow_length_stats(const Trace& trace) {
  FlowLengthStats s;
  for (const auto& c : to_coflows(trace)) {
    ++s.coflows;
    ++s.width_histogram[c.width()];
    if (c.width() == 1) {
      ++s.single_flow;
      continue;
    }
    std::vector<double> sizes;
    for (const auto& f : c.flows) sizes.push_back(static_cast<double>(f.spec.size_bytes));
    const bool equal = std::adjacent_find(sizes.begin(), sizes.end(), std::not_equal_to<>()) ==
                       sizes.end();
    ++(equal ? s.equal_multi : s.unequal_multi);
    s.deviations.push_back(normalized_deviation(sizes));
  }
  return s;
}

double jct_speedup(double cct_speedup, double shuffle_fraction) {
  if (!(cct_speedup > 0.0)) throw std::invalid_argument("speedup must be > 0");
  if (shuffle_fraction < 0.0 || shuffle_fraction > 1.0) {
    throw std::invalid_argument("shuffle fraction must be in [0, 1]");
  }
  return 1.0 / ((1.0 - shuffle_fraction) + shuffle_fraction / cct_speedup);
}

void write_cct_table(std::ostream& out, const RunResult& run) {
  out << "coflow_id,arrival_ms,start_ms,completion_ms,cct_ms,width,total_bytes,bin,"
         "queue_transitions,deadline_expiries\n";
  for (const auto& r : run.coflows) {
    out << fmt::format("{},{:.3f},{:.3f},{:.3f},{:.3f},{},{},{},{},{}\n", r.coflow_id,
                       to_millis(r.arrival), to_millis(r.start), to_millis(r.completion),
                       to_millis(r.cct), r.width, r.total_size, bin(r), r.queue_transitions,
                       r.deadline_expiries);
  }
}

void write_speedup_table(std::ostream& out, const SpeedupReport& report) {
  out << "coflow_id,cct_baseline_ms,cct_test_ms,speedup,bin\n";
  for (const auto& r : report.records) {
    out << fmt::format("{},{:.3f},{:.3f},{:.6f},{}\n", r.coflow_id, to_millis(r.cct_baseline),
                       to_millis(r.cct_test), r.speedup, r.bin);
  }
}

void write_out_of_sync_table(std::ostream& out, std::span<const OutOfSyncRecord> records) {
  out << "coflow_id,equal_length,deviation\n";
  for (const auto& r : records) {
    out << fmt::format("{},{},{:.6f}\n", r.coflow_id, r.equal_length ? 1 : 0, r.deviation);
  }
}

void write_summary_rows(std::ostream& out, const SpeedupReport& report) {
  out << "statistic,count,value\n";
  out << fmt::format("median,{},{:.6f}\n", report.overall.count, report.overall.median);
  out << fmt::format("p10,{},{:.6f}\n", report.overall.count, report.overall.p10);
  out << fmt::format("p90,{},{:.6f}\n", report.overall.count, report.overall.p90);
  for (std::size_t k = 0; k < report.bins.size(); ++k) {
    const auto& b = report.bins[k];
    if (b.count == 0) {
      out << fmt::format("bin-{}_median,0,\n", k + 1);
    } else {
      out << fmt::format("bin-{}_median,{},{:.6f}\n", k + 1, b.count, b.median);
    }
  }
}

namespace {

nlohmann::json oos_json(const OutOfSyncSummary& s) {
  nlohmann::json j;
  j["count"] = s.count;
  j["fraction_zero"] = s.fraction_zero;
  j["deciles"] = s.count == 0 ? nlohmann::json::array() : nlohmann::json(s.deciles);
  return j;
}

}  // namespace

std::string summary_json(const SpeedupReport& report, const RunResult& baseline,
                         const RunResult& test, std::uint64_t seed) {
  nlohmann::json j;
  j["policy"] = report.test;
  j["baseline"] = report.baseline;
  j["seed"] = seed;
  j["coflows"] = report.overall.count;
  j["median"] = report.overall.median;
  j["p10"] = report.overall.p10;
  j["p90"] = report.overall.p90;
  j["mean_cct_ms"] = {{report.baseline, baseline.mean_cct_seconds() * 1000.0},
                      {report.test, test.mean_cct_seconds() * 1000.0}};
  nlohmann::json bins = nlohmann::json::object();
  for (std::size_t k = 0; k < report.bins.size(); ++k) {
    const auto& b = report.bins[k];
    bins["bin-" + std::to_string(k + 1)] = {
        {"count", b.count}, {"median", b.count == 0 ? nlohmann::json() : nlohmann::json(b.median)}};
  }
  j["bins"] = bins;
  nlohmann::json oos;
  for (const auto* run : {&baseline, &test}) {
    const auto records = out_of_sync(*run);
    oos[run->policy] = {{"equal_length", oos_json(summarize_out_of_sync(records, true))},
                        {"unequal_length", oos_json(summarize_out_of_sync(records, false))}};
  }
  j["out_of_sync"] = oos;
  return j.dump(2) + "\n";
}

}  // namespace saath
