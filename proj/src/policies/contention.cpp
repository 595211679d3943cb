#include <algorithm>
#include <bit>
#include <cstdint>
#include <iterator>

#include "saath/policies.hpp"

namespace saath {
namespace {

// Port identity ignores the side: a coflow reading from and a coflow writing
// to the same machine still contend for it.
void collect_ports(const CoFlow& c, std::vector<PortId>& ports) {
  ports.clear();
  for (const auto& f : c.flows) {
    if (f.finished()) continue;
    ports.push_back(f.spec.src_port);
    ports.push_back(f.spec.dst_port);
  }
  std::sort(ports.begin(), ports.end());
  ports.erase(std::unique(ports.begin(), ports.end()), ports.end());
}

}  // namespace

std::vector<ContentionRecord> compute_contention(std::span<CoFlow* const> active,
                                                 ContentionScope scope) {
  const std::size_t n = active.size();
  std::vector<ContentionRecord> out(n);
  if (n == 0) return out;

  std::vector<std::vector<PortId>> ports(n);
  PortId max_port = -1;
  for (std::size_t i = 0; i < n; ++i) {
    collect_ports(*active[i], ports[i]);
    if (!ports[i].empty()) max_port = std::max(max_port, ports[i].back());
  }

  // One bitset over active coflows per port.
  const std::size_t words = (n + 63) / 64;
  const auto port_count = static_cast<std::size_t>(max_port + 1);
  std::vector<std::uint64_t> on_port(port_count * words, 0);
  for (std::size_t i = 0; i < n; ++i) {
    for (PortId p : ports[i]) {
      on_port[static_cast<std::size_t>(p) * words + i / 64] |= std::uint64_t{1} << (i % 64);
    }
  }

  std::vector<std::uint64_t> acc(words);
  std::vector<std::uint64_t> same_queue(words);
  for (std::size_t i = 0; i < n; ++i) {
    std::fill(acc.begin(), acc.end(), 0);
    for (PortId p : ports[i]) {
      const std::uint64_t* row = &on_port[static_cast<std::size_t>(p) * words];
      for (std::size_t w = 0; w < words; ++w) acc[w] |= row[w];
    }
    acc[i / 64] &= ~(std::uint64_t{1} << (i % 64));
    if (scope == ContentionScope::Queue) {
      std::fill(same_queue.begin(), same_queue.end(), 0);
      for (std::size_t j = 0; j < n; ++j) {
        if (active[j]->queue_index == active[i]->queue_index) {
          same_queue[j / 64] |= std::uint64_t{1} << (j % 64);
        }
      }
      for (std::size_t w = 0; w < words; ++w) acc[w] &= same_queue[w];
    }
    int k = 0;
    for (auto w : acc) k += std::popcount(w);
    out[i] = {active[i]->coflow_id, k};
  }
  return out;
}

ContentionRecord compute_contention(const CoFlow& coflow, std::span<CoFlow* const> active) {
  std::vector<PortId> mine;
  std::vector<PortId> theirs;
  collect_ports(coflow, mine);
  int k = 0;
  for (const CoFlow* other : active) {
    if (other == &coflow || other->coflow_id == coflow.coflow_id) continue;
    collect_ports(*other, theirs);
    std::vector<PortId> common;
    std::set_intersection(mine.begin(), mine.end(), theirs.begin(), theirs.end(),
                          std::back_inserter(common));
    if (!common.empty()) ++k;
  }
  return {coflow.coflow_id, k};
}

}  // namespace saath
