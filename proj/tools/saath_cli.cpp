// saath: command-line front end for the coflow scheduling simulator.
#include <algorithm>
#include <filesystem>
#include <fstream>
#include <future>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "CLI11.hpp"
#include "json.hpp"
#include "saath/metrics.hpp"
#include "saath/sim_engine.hpp"
#include "saath/trace_io.hpp"

namespace fs = std::filesystem;
using namespace saath;

namespace {

struct ConfigFlags {
  int K = 10;
  double E = 10.0;
  double S_mb = 10.0;
  double delta_ms = 8.0;
  double deadline_factor = 2.0;
  double arrival_scale = 1.0;
  double port_rate_gbps = 1.0;
  std::string availability = "arrival";
  double producer_rate_gbps = 1.0;
  std::string contention_scope = "global";
  std::uint64_t seed = 0;
  bool no_requeue = false;
  bool no_skip = false;

  void add_to(CLI::App& app) {
    app.add_option("--K", K, "number of priority queues")->capture_default_str();
    app.add_option("--E", E, "queue threshold growth factor")->capture_default_str();
    app.add_option("--S", S_mb, "first queue threshold, MB")->capture_default_str();
    app.add_option("--delta-ms", delta_ms, "scheduling interval, ms")->capture_default_str();
    app.add_option("--deadline-factor", deadline_factor, "deadline factor d")->capture_default_str();
    app.add_option("--arrival-scale", arrival_scale, "arrival speed-up A")->capture_default_str();
    app.add_option("--port-rate-gbps", port_rate_gbps, "per-port rate, Gbps")->capture_default_str();
    app.add_option("--availability", availability, "data availability model")
        ->check(CLI::IsMember({"arrival", "pipelined"}))
        ->capture_default_str();
    app.add_option("--producer-rate-gbps", producer_rate_gbps,
                   "pipelined producer rate per flow, Gbps")
        ->capture_default_str();
    app.add_option("--contention-scope", contention_scope, "coflows counted in k_c")
        ->check(CLI::IsMember({"global", "queue"}))
        ->capture_default_str();
    app.add_option("--seed", seed, "random seed, echoed into summaries")->capture_default_str();
    app.add_flag("--no-requeue", no_requeue, "ignore restarts when placing coflows in queues");
    app.add_flag("--no-skip", no_skip, "simulate every interval individually");
  }

  SimConfig build() const {
    SimConfig c;
    c.queues.K = K;
    c.queues.E = E;
    c.queues.S = static_cast<Bytes>(std::llround(S_mb * static_cast<double>(kBytesPerMB)));
    c.delta = millis(delta_ms);
    c.deadline_factor = deadline_factor;
    c.arrival_scale = arrival_scale;
    c.port_rate = static_cast<Bytes>(std::llround(port_rate_gbps * kGigabitBytesPerSecond));
    c.producer_rate = static_cast<Bytes>(std::llround(producer_rate_gbps * kGigabitBytesPerSecond));
    c.availability =
        availability == "pipelined" ? AvailabilityMode::Pipelined : AvailabilityMode::AllAtArrival;
    c.contention_scope = contention_scope == "queue" ? ContentionScope::Queue : ContentionScope::Global;
    c.rng_seed = seed;
    c.dynamics_requeue = !no_requeue;
    c.interval_skipping = !no_skip;
    c.validate();
    return c;
  }
};

struct Inputs {
  std::string trace_path;
  std::string dag_path;
  std::string dynamics_path;
  Trace trace;
  std::vector<DagEdge> dag;
  std::vector<DynamicsEvent> dynamics;
};

std::runtime_error with_path(const std::string& path, const std::exception& e) {
  return std::runtime_error(path + ": " + e.what());
}

void load_inputs(Inputs& in) {
  try {
    in.trace = load_trace(in.trace_path);
  } catch (const std::exception& e) {
    throw with_path(in.trace_path, e);
  }
  std::vector<CoflowId> ids;
  for (const auto& c : in.trace.coflows) ids.push_back(c.id);
  if (!in.dag_path.empty()) {
    try {
      in.dag = parse_dag(read_file(in.dag_path), ids);
    } catch (const std::exception& e) {
      throw with_path(in.dag_path, e);
    }
  }
  if (!in.dynamics_path.empty()) {
    try {
      const auto coflows = to_coflows(in.trace);
      in.dynamics = parse_dynamics(read_file(in.dynamics_path), coflows);
    } catch (const std::exception& e) {
      throw with_path(in.dynamics_path, e);
    }
  }
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

void write_out(const fs::path& dir, const std::string& name, const std::string& content) {
  fs::create_directories(dir);
  write_file_atomic((dir / name).string(), content);
}

template <typename Fn>
std::string render(Fn&& fn) {
  std::ostringstream ss;
  fn(ss);
  return ss.str();
}

nlohmann::json run_summary(const RunResult& r, const SimConfig& cfg) {
  std::vector<double> ccts;
  for (const auto& c : r.coflows) ccts.push_back(to_millis(c.cct));
  const auto dist = summarize(ccts);
  const auto oos = out_of_sync(r);
  const auto eq = summarize_out_of_sync(oos, true);
  return {{"policy", r.policy},
          {"seed", cfg.rng_seed},
          {"coflows", r.coflows.size()},
          {"mean_cct_ms", r.mean_cct_seconds() * 1000.0},
          {"median_cct_ms", dist.median},
          {"p10_cct_ms", dist.p10},
          {"p90_cct_ms", dist.p90},
          {"intervals", r.intervals},
          {"rejected_events", r.rejected_events},
          {"out_of_sync_equal_fraction_zero", eq.fraction_zero}};
}

int cmd_run(Inputs& in, const ConfigFlags& flags, const std::string& policy, const fs::path& out,
            const std::string& audit_path) {
  load_inputs(in);
  SimConfig cfg = flags.build();
  cfg.policy = policy;
  if (cfg.port_count == 0) cfg.port_count = in.trace.header.port_count;
  auto coflows = to_coflows(in.trace);
  apply_dag(coflows, in.dag);
  Simulation sim(std::move(coflows), in.dynamics, cfg, make_policy(policy));
  std::ofstream audit;
  std::string audit_tmp;
  if (!audit_path.empty()) {
    audit_tmp = audit_path + ".tmp";
    audit.open(audit_tmp, std::ios::trunc);
    if (!audit) throw std::runtime_error("cannot write '" + audit_tmp + "'");
    sim.set_audit(&audit);
  }
  const RunResult r = sim.run();
  if (!audit_path.empty()) {
    audit.close();
    fs::rename(audit_tmp, audit_path);
  }
  write_out(out, "cct_" + policy + ".csv", render([&](std::ostream& o) { write_cct_table(o, r); }));
  const auto oos = out_of_sync(r);
  write_out(out, "out_of_sync_" + policy + ".csv",
            render([&](std::ostream& o) { write_out_of_sync_table(o, oos); }));
  const auto summary = run_summary(r, cfg);
  write_out(out, "summary_" + policy + ".json", summary.dump(2) + "\n");
  std::cout << fmt::format("{}: {} coflows, mean CCT {:.3f} ms, median {:.3f} ms, seed {}\n",
                           policy, r.coflows.size(), summary["mean_cct_ms"].get<double>(),
                           summary["median_cct_ms"].get<double>(), cfg.rng_seed);
  return 0;
}

void print_report(const SpeedupReport& rep) {
  std::cout << fmt::format("{} over {}: median {:.3f}  p10 {:.3f}  p90 {:.3f}  ({} coflows)\n",
                           rep.test, rep.baseline, rep.overall.median, rep.overall.p10,
                           rep.overall.p90, rep.overall.count);
  for (std::size_t k = 0; k < rep.bins.size(); ++k) {
    const auto& b = rep.bins[k];
    if (b.count == 0) {
      std::cout << fmt::format("  bin-{}: no coflows\n", k + 1);
    } else {
      std::cout << fmt::format("  bin-{}: median {:.3f} ({} coflows)\n", k + 1, b.median, b.count);
    }
  }
}

int cmd_compare(Inputs& in, const ConfigFlags& flags, const std::vector<std::string>& policies,
                const fs::path& out) {
  load_inputs(in);
  const SimConfig cfg = flags.build();
  const auto runs = run_comparison(in.trace, policies, cfg, in.dag, in.dynamics);
  const RunResult& test = runs.at(policies.front());
  write_out(out, "cct_" + test.policy + ".csv",
            render([&](std::ostream& o) { write_cct_table(o, test); }));
  for (std::size_t i = 1; i < policies.size(); ++i) {
    const RunResult& base = runs.at(policies[i]);
    const auto rep = speedups(base, test);
    const std::string stem = policies.front() + "_vs_" + policies[i];
    write_out(out, "cct_" + base.policy + ".csv",
              render([&](std::ostream& o) { write_cct_table(o, base); }));
    write_out(out, "speedup_" + stem + ".csv",
              render([&](std::ostream& o) { write_speedup_table(o, rep); }));
    write_out(out, "speedup_summary_" + stem + ".csv",
              render([&](std::ostream& o) { write_summary_rows(o, rep); }));
    write_out(out, "summary_" + stem + ".json", summary_json(rep, base, test, cfg.rng_seed));
    print_report(rep);
  }
  return 0;
}

void set_param(SimConfig& c, const std::string& param, double v) {
  if (param == "delta") {
    c.delta = millis(v);
  } else if (param == "A") {
    c.arrival_scale = v;
  } else if (param == "d") {
    c.deadline_factor = v;
  } else if (param == "S") {
    c.queues.S = static_cast<Bytes>(std::llround(v * static_cast<double>(kBytesPerMB)));
  } else if (param == "E") {
    c.queues.E = v;
  } else if (param == "K") {
    c.queues.K = static_cast<int>(v);
  } else {
    throw ConfigError("unknown sweep parameter '" + param + "'");
  }
  c.validate();
}

int cmd_sweep(Inputs& in, const ConfigFlags& flags, const std::vector<std::string>& policies,
              const std::string& param, const std::vector<double>& values, const fs::path& out) {
  load_inputs(in);
  const SimConfig base_cfg = flags.build();
  for (const auto& p : policies) make_policy(p);

  struct Point {
    double value;
    std::map<std::string, RunResult> runs;
  };
  std::vector<std::future<Point>> jobs;
  for (double v : values) {
    SimConfig cfg = base_cfg;
    set_param(cfg, param, v);
    jobs.push_back(std::async(std::launch::async, [&in, &policies, cfg, v] {
      Point pt{v, {}};
      for (const auto& p : policies) {
        SimConfig c = cfg;
        c.policy = p;
        pt.runs[p] = run(in.trace, in.dag, in.dynamics, c);
      }
      return pt;
    }));
  }

  std::ostringstream table;
  table << "param,value,policy,mean_cct_ms,median_cct_ms,speedup_baseline,speedup_median,"
           "speedup_p10,speedup_p90,seed\n";
  for (auto& job : jobs) {
    const Point pt = job.get();
    const RunResult& test = pt.runs.at(policies.front());
    for (const auto& p : policies) {
      const RunResult& r = pt.runs.at(p);
      std::vector<double> ccts;
      for (const auto& c : r.coflows) ccts.push_back(to_millis(c.cct));
      const auto dist = summarize(ccts);
      std::string speed = ",,,,";
      if (p != policies.front()) {
        const auto rep = speedups(r, test);
        speed = fmt::format("{},{:.6f},{:.6f},{:.6f},", p, rep.overall.median, rep.overall.p10,
                            rep.overall.p90);
      }
      table << fmt::format("{},{},{},{:.3f},{:.3f},{}{}\n", param, pt.value, p,
                           r.mean_cct_seconds() * 1000.0, dist.median, speed, base_cfg.rng_seed);
    }
  }
  write_out(out, "sweep_" + param + ".csv", table.str());
  std::cout << table.str();
  return 0;
}

int cmd_validate(Inputs& in) {
  const std::string text = read_file(in.trace_path);
  std::vector<std::string> problems;
  try {
    in.trace = parse_trace(text);
  } catch (const TraceError& e) {
    problems.push_back(e.what());
    // Re-check every coflow line on its own so all bad lines get reported.
    std::istringstream lines(text);
    std::string header;
    std::getline(lines, header);
    std::istringstream hs(header);
    int ports = 0;
    hs >> ports;
    std::string line;
    std::size_t no = 1;
    while (std::getline(lines, line)) {
      ++no;
      if (line.find_first_not_of(" \t\r") == std::string::npos || ports < 1) continue;
      try {
        parse_trace(std::to_string(ports) + " 1\n" + line + "\n");
      } catch (const TraceError& le) {
        std::string msg = le.what();
        const auto colon = msg.find(": ");
        const std::string item =
            "line " + std::to_string(no) + ": " + (colon == std::string::npos ? msg : msg.substr(colon + 2));
        if (std::find(problems.begin(), problems.end(), item) == problems.end()) {
          problems.push_back(item);
        }
      }
    }
  }
  if (problems.empty()) {
    std::vector<CoflowId> ids;
    for (const auto& c : in.trace.coflows) ids.push_back(c.id);
    if (!in.dag_path.empty()) {
      try {
        parse_dag(read_file(in.dag_path), ids);
      } catch (const std::exception& e) {
        problems.push_back(in.dag_path + ": " + e.what());
      }
    }
    if (!in.dynamics_path.empty()) {
      try {
        parse_dynamics(read_file(in.dynamics_path), to_coflows(in.trace));
      } catch (const std::exception& e) {
        problems.push_back(in.dynamics_path + ": " + e.what());
      }
    }
  }
  if (!problems.empty()) {
    for (const auto& p : problems) std::cerr << in.trace_path << ": " << p << '\n';
    std::cerr << problems.size() << " error(s)\n";
    return 1;
  }

  const auto stats = flow_length_stats(in.trace);
  std::cout << fmt::format("{} coflows, {} ports\n", in.trace.header.coflow_count,
                           in.trace.header.port_count);
  const double n = static_cast<double>(std::max<std::size_t>(stats.coflows, 1));
  std::cout << fmt::format("single-flow: {} ({:.1f}%)\n", stats.single_flow,
                           100.0 * static_cast<double>(stats.single_flow) / n);
  std::cout << fmt::format("multi-flow, equal lengths: {} ({:.1f}%)\n", stats.equal_multi,
                           100.0 * static_cast<double>(stats.equal_multi) / n);
  std::cout << fmt::format("multi-flow, unequal lengths: {} ({:.1f}%)\n", stats.unequal_multi,
                           100.0 * static_cast<double>(stats.unequal_multi) / n);
  if (!stats.deviations.empty()) {
    const auto d = summarize(stats.deviations);
    std::cout << fmt::format("flow-length deviation (multi-flow): median {:.3f} p90 {:.3f}\n",
                             d.median, d.p90);
  }
  std::cout << "width,count\n";
  for (const auto& [w, c] : stats.width_histogram) std::cout << w << ',' << c << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Coflow scheduling simulator"};
  app.require_subcommand(1);

  Inputs in;
  ConfigFlags flags;
  std::string policy = "saath";
  std::string policies_csv = "saath,aalo";
  std::string out_dir = "out";
  std::string audit_path;
  std::string param;
  std::vector<double> values;

  auto add_inputs = [&](CLI::App* sub) {
    sub->add_option("--trace", in.trace_path, "coflow trace")->required()->check(CLI::ExistingFile);
    sub->add_option("--dag", in.dag_path, "stage dependencies")->check(CLI::ExistingFile);
    sub->add_option("--dynamics", in.dynamics_path, "dynamics events")->check(CLI::ExistingFile);
  };

  auto* run_cmd = app.add_subcommand("run", "simulate one policy");
  add_inputs(run_cmd);
  run_cmd->add_option("--policy", policy, "policy name")
      ->check(CLI::IsMember(policy_names()))
      ->capture_default_str();
  run_cmd->add_option("--out", out_dir, "output directory")->capture_default_str();
  run_cmd->add_option("--audit-log", audit_path, "per-interval schedule log");
  flags.add_to(*run_cmd);

  auto* compare_cmd = app.add_subcommand("compare", "speedup of the first policy over the others");
  add_inputs(compare_cmd);
  compare_cmd->add_option("--policies", policies_csv, "comma-separated policies")
      ->capture_default_str();
  compare_cmd->add_option("--out", out_dir, "output directory")->capture_default_str();
  flags.add_to(*compare_cmd);

  auto* sweep_cmd = app.add_subcommand("sweep", "rerun policies across parameter values");
  add_inputs(sweep_cmd);
  sweep_cmd->add_option("--policies", policies_csv, "comma-separated policies")
      ->capture_default_str();
  sweep_cmd->add_option("--param", param, "parameter to vary")
      ->required()
      ->check(CLI::IsMember({"delta", "A", "d", "S", "E", "K"}));
  sweep_cmd->add_option("--values", values, "values (delta in ms, S in MB)")
      ->required()
      ->delimiter(',');
  sweep_cmd->add_option("--out", out_dir, "output directory")->capture_default_str();
  flags.add_to(*sweep_cmd);

  auto* validate_cmd = app.add_subcommand("validate", "check a trace and report its shape");
  add_inputs(validate_cmd);

  GeneratorSpec gen;
  std::string synth_out;
  auto* synth_cmd = app.add_subcommand("synth", "generate a synthetic trace");
  synth_cmd->add_option("--coflows", gen.coflow_count)->capture_default_str();
  synth_cmd->add_option("--ports", gen.port_count)->capture_default_str();
  synth_cmd->add_option("--min-mappers", gen.min_mappers)->capture_default_str();
  synth_cmd->add_option("--max-mappers", gen.max_mappers)->capture_default_str();
  synth_cmd->add_option("--min-reducers", gen.min_reducers)->capture_default_str();
  synth_cmd->add_option("--max-reducers", gen.max_reducers)->capture_default_str();
  synth_cmd->add_option("--min-mb", gen.min_reducer_mb, "per-reducer MB, lower bound")
      ->capture_default_str();
  synth_cmd->add_option("--max-mb", gen.max_reducer_mb, "per-reducer MB, upper bound")
      ->capture_default_str();
  synth_cmd->add_option("--mean-interarrival-ms", gen.mean_interarrival_ms)->capture_default_str();
  synth_cmd->add_option("--equal-fraction", gen.equal_flow_fraction)->capture_default_str();
  synth_cmd->add_option("--seed", gen.seed)->capture_default_str();
  synth_cmd->add_option("--out", synth_out, "trace file to write")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run_cmd) return cmd_run(in, flags, policy, out_dir, audit_path);
    if (*compare_cmd) {
      const auto policies = split_list(policies_csv);
      if (policies.size() < 2) throw ConfigError("--policies needs at least two policies");
      return cmd_compare(in, flags, policies, out_dir);
    }
    if (*sweep_cmd) {
      const auto policies = split_list(policies_csv);
      if (policies.empty()) throw ConfigError("--policies is empty");
      return cmd_sweep(in, flags, policies, param, values, out_dir);
    }
    if (*validate_cmd) return cmd_validate(in);
    if (*synth_cmd) {
      write_file_atomic(synth_out, emit_trace(synthesize(gen)));
      std::cout << fmt::format("wrote {} coflows on {} ports to {}\n", gen.coflow_count,
                               gen.port_count, synth_out);
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
