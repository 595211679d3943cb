#include "saath/trace_io.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <sstream>
#include <tuple>
#include <unordered_map>
#include <unordered_set>

namespace saath {

TraceError::TraceError(std::size_t line, const std::string& what)
    : std::runtime_error(line == 0 ? what : "line " + std::to_string(line) + ": " + what),
      line_(line) {}

namespace {

std::vector<std::string_view> split_ws(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
    std::size_t j = i;
    while (j < s.size() && !std::isspace(static_cast<unsigned char>(s[j]))) ++j;
    if (j > i) out.push_back(s.substr(i, j - i));
    i = j;
  }
  return out;
}

std::vector<std::string_view> split_lines(std::string_view text) {
  std::vector<std::string_view> lines;
  std::size_t start = 0;
  while (start <= text.size()) {
    auto end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    auto line = text.substr(start, end - start);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    lines.push_back(line);
    start = end + 1;
  }
  return lines;
}

template <typename Int>
Int parse_int(std::string_view tok, std::size_t line, const char* what) {
  Int value{};
  auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), value);
  if (ec != std::errc{} || ptr != tok.data() + tok.size()) {
    throw TraceError(line, std::string("expected integer ") + what + ", got '" +
                               std::string(tok) + "'");
  }
  return value;
}

// Decimal number scaled by `scale` and rounded to an integer; rejects
// anything that is not plain [-]digits[.digits].
std::int64_t parse_scaled_decimal(std::string_view tok, double scale, std::size_t line,
                                  const char* what) {
  bool ok = !tok.empty();
  bool seen_digit = false;
  bool seen_dot = false;
  for (std::size_t i = 0; i < tok.size() && ok; ++i) {
    const char c = tok[i];
    if (std::isdigit(static_cast<unsigned char>(c))) {
      seen_digit = true;
    } else if (c == '.' && !seen_dot) {
      seen_dot = true;
    } else if (c == '-' && i == 0) {
    } else {
      ok = false;
    }
  }
  if (!ok || !seen_digit) {
    throw TraceError(line, std::string("expected number for ") + what + ", got '" +
                               std::string(tok) + "'");
  }
  const long double v = std::strtold(std::string(tok).c_str(), nullptr);
  const long double scaled = v * static_cast<long double>(scale);
  if (std::fabs(scaled) > 9.0e18L) throw TraceError(line, std::string(what) + " out of range");
  return static_cast<std::int64_t>(std::llround(scaled));
}

std::string format_scaled(std::int64_t value, std::int64_t unit, int digits) {
  const bool neg = value < 0;
  const std::int64_t mag = neg ? -value : value;
  std::string out = (neg ? "-" : "") + std::to_string(mag / unit);
  std::int64_t frac = mag % unit;
  if (frac != 0) {
    std::string f = std::to_string(frac);
    f.insert(0, static_cast<std::size_t>(digits) - f.size(), '0');
    while (!f.empty() && f.back() == '0') f.pop_back();
    out += "." + f;
  }
  return out;
}

std::string_view strip_comment(std::string_view line) {
  const auto hash = line.find('#');
  return hash == std::string_view::npos ? line : line.substr(0, hash);
}

}  // namespace

Trace parse_trace(std::string_view text) {
  const auto lines = split_lines(text);
  Trace trace;
  std::size_t idx = 0;
  while (idx < lines.size() && split_ws(lines[idx]).empty()) ++idx;
  if (idx == lines.size()) throw TraceError(0, "empty trace: missing header");

  const auto head = split_ws(lines[idx]);
  const std::size_t header_line = idx + 1;
  if (head.size() != 2) {
    throw TraceError(header_line, "header must be '<port_count> <coflow_count>'");
  }
  trace.header.port_count = parse_int<int>(head[0], header_line, "port count");
  trace.header.coflow_count = parse_int<int>(head[1], header_line, "coflow count");
  if (trace.header.port_count < 1) throw TraceError(header_line, "port count must be >= 1");
  if (trace.header.coflow_count < 1) throw TraceError(header_line, "coflow count must be >= 1");

  const auto check_port = [&](PortId p, std::size_t line) {
    if (p < 0 || p >= trace.header.port_count) {
      throw TraceError(line, "port index " + std::to_string(p) + " out of range [0, " +
                                 std::to_string(trace.header.port_count) + ")");
    }
  };

  std::optional<CoflowId> last_id;
  for (++idx; idx < lines.size(); ++idx) {
    const std::size_t ln = idx + 1;
    const auto tok = split_ws(lines[idx]);
    if (tok.empty()) continue;
    if (tok.size() < 5) throw TraceError(ln, "truncated coflow line");

    TraceCoflow c;
    c.id = parse_int<CoflowId>(tok[0], ln, "coflow id");
    if (last_id && c.id <= *last_id) {
      throw TraceError(ln, "coflow ids must be strictly increasing (" + std::to_string(c.id) +
                               " after " + std::to_string(*last_id) + ")");
    }
    last_id = c.id;
    c.arrival = parse_scaled_decimal(tok[1], static_cast<double>(kMicrosPerMilli), ln,
                                     "arrival time");
    if (c.arrival < 0) throw TraceError(ln, "negative arrival time");

    std::size_t pos = 2;
    const auto m = parse_int<long>(tok[pos++], ln, "mapper count");
    if (m < 1) throw TraceError(ln, "coflow needs at least one mapper");
    if (tok.size() < pos + static_cast<std::size_t>(m) + 1) {
      throw TraceError(ln, "truncated mapper list");
    }
    for (long i = 0; i < m; ++i) {
      const auto p = parse_int<PortId>(tok[pos++], ln, "mapper port");
      check_port(p, ln);
      c.mappers.push_back(p);
    }
    const auto r = parse_int<long>(tok[pos++], ln, "reducer count");
    if (r < 1) throw TraceError(ln, "coflow needs at least one reducer");
    if (tok.size() != pos + static_cast<std::size_t>(r)) {
      throw TraceError(ln, "expected " + std::to_string(r) + " reducer entries, found " +
                               std::to_string(tok.size() - pos));
    }
    for (long i = 0; i < r; ++i) {
      const auto entry = tok[pos++];
      const auto colon = entry.find(':');
      if (colon == std::string_view::npos) {
        throw TraceError(ln, "reducer entry '" + std::string(entry) + "' is not port:mb");
      }
      ReducerSpec red;
      red.port = parse_int<PortId>(entry.substr(0, colon), ln, "reducer port");
      check_port(red.port, ln);
      red.total_bytes = parse_scaled_decimal(entry.substr(colon + 1),
                                             static_cast<double>(kBytesPerMB), ln, "shuffle MB");
      if (red.total_bytes <= 0) {
        throw TraceError(ln, "reducer " + std::to_string(red.port) +
                                 " has non-positive shuffle size");
      }
      c.reducers.push_back(red);
    }
    trace.coflows.push_back(std::move(c));
  }

  if (static_cast<int>(trace.coflows.size()) != trace.header.coflow_count) {
    throw TraceError(header_line, "header declares " + std::to_string(trace.header.coflow_count) +
                                      " coflows, found " + std::to_string(trace.coflows.size()));
  }
  std::stable_sort(trace.coflows.begin(), trace.coflows.end(),
                   [](const TraceCoflow& a, const TraceCoflow& b) {
                     return std::tie(a.arrival, a.id) < std::tie(b.arrival, b.id);
                   });
  return trace;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw TraceError(0, "cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file_atomic(const std::string& path, std::string_view content) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write '" + tmp + "'");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out) throw std::runtime_error("short write to '" + tmp + "'");
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0) {
    std::remove(tmp.c_str());
    throw std::runtime_error("cannot rename '" + tmp + "' to '" + path + "'");
  }
}

Trace load_trace(const std::string& path) { return parse_trace(read_file(path)); }

std::string emit_trace(const Trace& trace) {
  std::ostringstream out;
  out << trace.header.port_count << ' ' << trace.header.coflow_count << '\n';
  for (const auto& c : trace.coflows) {
    out << c.id << ' ' << format_scaled(c.arrival, kMicrosPerMilli, 3) << ' ' << c.mappers.size();
    for (auto m : c.mappers) out << ' ' << m;
    out << ' ' << c.reducers.size();
    for (const auto& r : c.reducers) {
      out << ' ' << r.port << ':' << format_scaled(r.total_bytes, kBytesPerMB, 6);
    }
    out << '\n';
  }
  return out.str();
}

Bytes split_flow_size(Bytes reducer_total, std::size_t mapper_count) {
  const auto m = static_cast<Bytes>(mapper_count);
  return (reducer_total + m - 1) / m;
}

std::vector<CoFlow> to_coflows(const Trace& trace) {
  std::vector<CoFlow> out;
  out.reserve(trace.coflows.size());
  FlowId next_flow = 0;
  for (const auto& tc : trace.coflows) {
    CoFlow c;
    c.coflow_id = tc.id;
    c.arrival_time = tc.arrival;
    c.start_time = tc.arrival;
    c.flows.reserve(tc.mappers.size() * tc.reducers.size());
    for (auto mapper : tc.mappers) {
      for (const auto& red : tc.reducers) {
        FlowState f;
        f.spec.flow_id = next_flow++;
        f.spec.coflow_id = tc.id;
        f.spec.src_port = mapper;
        f.spec.dst_port = red.port;
        f.spec.size_bytes = split_flow_size(red.total_bytes, tc.mappers.size());
        f.available_bytes = f.spec.size_bytes;
        c.flows.push_back(f);
      }
    }
    out.push_back(std::move(c));
  }
  return out;
}

Trace scale_arrivals(Trace trace, double scale) {
  if (!(scale > 0.0) || !std::isfinite(scale)) {
    throw ConfigError("arrival scale A must be > 0");
  }
  for (auto& c : trace.coflows) {
    c.arrival = static_cast<Micros>(std::llround(static_cast<long double>(c.arrival) / scale));
  }
  // Division by a positive constant is monotone; rounding can only create ties,
  // which the (arrival, id) order already resolves.
  std::stable_sort(trace.coflows.begin(), trace.coflows.end(),
                   [](const TraceCoflow& a, const TraceCoflow& b) {
                     return std::tie(a.arrival, a.id) < std::tie(b.arrival, b.id);
                   });
  return trace;
}

namespace {

// Small portable generator helpers so traces do not depend on the standard
// library's distribution implementations.
struct Rng {
  std::mt19937_64 engine;
  explicit Rng(std::uint64_t seed) : engine(seed) {}
  double uniform01() { return static_cast<double>(engine() >> 11) * 0x1.0p-53; }
  int uniform_int(int lo, int hi) {
    const auto span = static_cast<std::uint64_t>(hi - lo + 1);
    return lo + static_cast<int>(engine() % span);
  }
  std::vector<PortId> distinct_ports(int count, int port_count) {
    std::vector<PortId> all(static_cast<std::size_t>(port_count));
    for (int i = 0; i < port_count; ++i) all[static_cast<std::size_t>(i)] = i;
    for (int i = 0; i < count; ++i) {
      const int j = uniform_int(i, port_count - 1);
      std::swap(all[static_cast<std::size_t>(i)], all[static_cast<std::size_t>(j)]);
    }
    all.resize(static_cast<std::size_t>(count));
    return all;
  }
};

}  // namespace

Trace synthesize(const GeneratorSpec& spec) {
  if (spec.coflow_count < 1) throw ConfigError("coflow_count must be >= 1");
  if (spec.port_count < 1) throw ConfigError("port_count must be >= 1");
  if (spec.min_mappers < 1 || spec.min_mappers > spec.max_mappers ||
      spec.min_reducers < 1 || spec.min_reducers > spec.max_reducers) {
    throw ConfigError("invalid mapper/reducer count range");
  }
  if (spec.max_mappers > spec.port_count || spec.max_reducers > spec.port_count) {
    throw ConfigError("coflow width exceeds port_count^2: at most " +
                      std::to_string(spec.port_count) + " mappers and reducers");
  }
  if (!(spec.min_reducer_mb > 0.0) || spec.min_reducer_mb > spec.max_reducer_mb) {
    throw ConfigError("invalid reducer size range");
  }
  if (spec.mean_interarrival_ms < 0.0) throw ConfigError("mean inter-arrival must be >= 0");
  if (spec.equal_flow_fraction < 0.0 || spec.equal_flow_fraction > 1.0) {
    throw ConfigError("equal_flow_fraction must be in [0, 1]");
  }

  Rng rng(spec.seed);
  const double log_lo = std::log(spec.min_reducer_mb);
  const double log_hi = std::log(spec.max_reducer_mb);
  const auto draw_bytes = [&] {
    const double mb = std::exp(log_lo + (log_hi - log_lo) * rng.uniform01());
    // Quantize to kilobytes so emitted traces stay compact and exact.
    return std::max<Bytes>(1000, static_cast<Bytes>(std::llround(mb * 1000.0)) * 1000);
  };

  Trace trace;
  trace.header.port_count = spec.port_count;
  trace.header.coflow_count = spec.coflow_count;
  double clock_ms = 0.0;
  for (int i = 0; i < spec.coflow_count; ++i) {
    if (i > 0 && spec.mean_interarrival_ms > 0.0) {
      clock_ms += -std::log(1.0 - rng.uniform01()) * spec.mean_interarrival_ms;
    }
    TraceCoflow c;
    c.id = i + 1;
    c.arrival = static_cast<Micros>(std::llround(clock_ms)) * kMicrosPerMilli;
    const int m = rng.uniform_int(spec.min_mappers, spec.max_mappers);
    const int r = rng.uniform_int(spec.min_reducers, spec.max_reducers);
    c.mappers = rng.distinct_ports(m, spec.port_count);
    const auto reducer_ports = rng.distinct_ports(r, spec.port_count);
    const bool equal = rng.uniform01() < spec.equal_flow_fraction;
    const Bytes shared = draw_bytes();
    for (auto p : reducer_ports) {
      c.reducers.push_back({p, equal ? shared : draw_bytes()});
    }
    trace.coflows.push_back(std::move(c));
  }
  return trace;
}

std::vector<DagEdge> parse_dag(std::string_view text, std::span<const CoflowId> known_ids) {
  const std::unordered_set<CoflowId> known(known_ids.begin(), known_ids.end());
  std::vector<DagEdge> edges;
  const auto lines = split_lines(text);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const std::size_t ln = i + 1;
    const auto tok = split_ws(strip_comment(lines[i]));
    if (tok.empty()) continue;
    if (tok.size() != 2) throw TraceError(ln, "DAG line must be '<child> <parent>'");
    DagEdge e{parse_int<CoflowId>(tok[0], ln, "child id"),
              parse_int<CoflowId>(tok[1], ln, "parent id")};
    if (!known.empty()) {
      for (auto id : {e.child, e.parent}) {
        if (!known.contains(id)) {
          throw TraceError(ln, "DAG references unknown coflow " + std::to_string(id));
        }
      }
    }
    edges.push_back(e);
  }

  // Cycle check: iterative DFS over child -> parent edges.
  std::map<CoflowId, std::vector<CoflowId>> adj;
  for (const auto& e : edges) adj[e.child].push_back(e.parent);
  enum class Mark { White, Grey, Black };
  std::map<CoflowId, Mark> mark;
  for (const auto& [start, _] : adj) {
    if (mark[start] != Mark::White) continue;
    std::vector<std::pair<CoflowId, std::size_t>> stack{{start, 0}};
    mark[start] = Mark::Grey;
    while (!stack.empty()) {
      auto& [node, next] = stack.back();
      const auto it = adj.find(node);
      if (it == adj.end() || next >= it->second.size()) {
        mark[node] = Mark::Black;
        stack.pop_back();
        continue;
      }
      const CoflowId succ = it->second[next++];
      if (mark[succ] == Mark::Grey) {
        std::string witness;
        bool in_cycle = false;
        for (const auto& [n, _i] : stack) {
          if (n == succ) in_cycle = true;
          if (in_cycle) witness += std::to_string(n) + " -> ";
        }
        witness += std::to_string(succ);
        throw TraceError(0, "DAG contains a cycle: " + witness);
      }
      if (mark[succ] == Mark::White) {
        mark[succ] = Mark::Grey;
        stack.emplace_back(succ, 0);
      }
    }
  }
  return edges;
}

void apply_dag(std::vector<CoFlow>& coflows, std::span<const DagEdge> edges) {
  std::unordered_map<CoflowId, std::size_t> index;
  for (std::size_t i = 0; i < coflows.size(); ++i) index[coflows[i].coflow_id] = i;
  for (const auto& e : edges) {
    const auto child = index.find(e.child);
    if (child == index.end() || !index.contains(e.parent)) {
      throw TraceError(0, "DAG edge " + std::to_string(e.child) + " " +
                              std::to_string(e.parent) + " references an unknown coflow");
    }
    auto& parents = coflows[child->second].parents;
    if (std::find(parents.begin(), parents.end(), e.parent) == parents.end()) {
      parents.push_back(e.parent);
    }
  }
}

const char* to_string(DynamicsKind kind) {
  switch (kind) {
    case DynamicsKind::Straggler: return "STRAGGLER";
    case DynamicsKind::FlowRestart: return "FLOW_RESTART";
    case DynamicsKind::CoordinatorRestart: return "COORDINATOR_RESTART";
  }
  return "?";
}

std::vector<DynamicsEvent> parse_dynamics(std::string_view text, std::span<const CoFlow> coflows) {
  std::unordered_set<FlowId> flow_ids;
  std::map<PortId, std::vector<FlowId>> flows_by_port;
  for (const auto& c : coflows) {
    for (const auto& f : c.flows) {
      flow_ids.insert(f.spec.flow_id);
      flows_by_port[f.spec.src_port].push_back(f.spec.flow_id);
      if (f.spec.dst_port != f.spec.src_port) {
        flows_by_port[f.spec.dst_port].push_back(f.spec.flow_id);
      }
    }
  }

  std::vector<DynamicsEvent> events;
  const auto lines = split_lines(text);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const std::size_t ln = i + 1;
    const auto tok = split_ws(strip_comment(lines[i]));
    if (tok.empty()) continue;
    if (tok.size() < 2) throw TraceError(ln, "dynamics line must be '<time_ms> <KIND> ...'");
    const Micros time = parse_scaled_decimal(tok[0], static_cast<double>(kMicrosPerMilli), ln,
                                             "event time");
    if (time < 0) throw TraceError(ln, "negative event time");
    const std::string_view kind = tok[1];
    const auto want_args = [&](std::size_t n) {
      if (tok.size() != n + 2) {
        throw TraceError(ln, std::string(kind) + " takes " + std::to_string(n) + " argument(s)");
      }
    };
    const auto flow_arg = [&](std::string_view t) {
      const auto id = parse_int<FlowId>(t, ln, "flow id");
      if (!flow_ids.contains(id)) throw TraceError(ln, "unknown flow " + std::to_string(id));
      return id;
    };

    if (kind == "STRAGGLER") {
      want_args(2);
      DynamicsEvent e{time, DynamicsKind::Straggler, flow_arg(tok[2]),
                      parse_int<Bytes>(tok[3], ln, "rate cap")};
      if (e.rate_cap <= 0) throw TraceError(ln, "straggler rate cap must be > 0");
      events.push_back(e);
    } else if (kind == "FLOW_RESTART") {
      want_args(1);
      events.push_back({time, DynamicsKind::FlowRestart, flow_arg(tok[2]), 0});
    } else if (kind == "NODE_FAILURE") {
      want_args(1);
      const auto port = parse_int<PortId>(tok[2], ln, "port");
      const auto it = flows_by_port.find(port);
      if (it == flows_by_port.end()) {
        throw TraceError(ln, "no flow touches port " + std::to_string(port));
      }
      for (auto id : it->second) events.push_back({time, DynamicsKind::FlowRestart, id, 0});
    } else if (kind == "COORDINATOR_RESTART") {
      want_args(0);
      events.push_back({time, DynamicsKind::CoordinatorRestart, -1, 0});
    } else {
      throw TraceError(ln, "unknown dynamics kind '" + std::string(kind) + "'");
    }
  }
  std::stable_sort(events.begin(), events.end(),
                   [](const DynamicsEvent& a, const DynamicsEvent& b) { return a.time < b.time; });
  return events;
}

}  // namespace saath
