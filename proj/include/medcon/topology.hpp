#pragma once

// Communication graphs, the round-robin transmit schedule, and the
// per-message loss model.

#include <cstdint>
#include <numeric>
#include <string>
#include <vector>

#include "medcon/errors.hpp"

namespace medcon {

// Undirected communication graph as a dense 0/1 adjacency matrix.
// Invariants enforced at construction: symmetric, unit diagonal, connected.
struct Topology {
  int n = 0;
  std::vector<std::uint8_t> adjacency;  // row-major n*n

  std::uint8_t at(int i, int j) const { return adjacency[static_cast<std::size_t>(i) * n + j]; }

  bool operator==(const Topology&) const = default;
};

namespace detail {

inline void check_topology(const Topology& t) {
  if (t.n < 2) throw invalid_size_error("topology needs at least 2 agents, got " +
                                        std::to_string(t.n));
  if (t.adjacency.size() != static_cast<std::size_t>(t.n) * t.n)
    throw invalid_size_error("adjacency matrix is not n*n");
  for (int i = 0; i < t.n; ++i) {
    if (t.at(i, i) != 1)
      throw invalid_parameter_error("adjacency diagonal must be all ones (row " +
                                    std::to_string(i) + ")");
    for (int j = 0; j < t.n; ++j) {
      if (t.at(i, j) != 0 && t.at(i, j) != 1)
        throw invalid_parameter_error("adjacency entries must be 0 or 1");
      if (t.at(i, j) != t.at(j, i))
        throw invalid_parameter_error("adjacency must be symmetric, differs at (" +
                                      std::to_string(i) + "," + std::to_string(j) + ")");
    }
  }
  // Connectivity over the off-diagonal edges.
  std::vector<char> seen(t.n, 0);
  std::vector<int> stack{0};
  seen[0] = 1;
  while (!stack.empty()) {
    int v = stack.back();
    stack.pop_back();
    for (int j = 0; j < t.n; ++j) {
      if (j != v && t.at(v, j) && !seen[j]) {
        seen[j] = 1;
        stack.push_back(j);
      }
    }
  }
  for (int i = 0; i < t.n; ++i)
    if (!seen[i])
      throw invalid_parameter_error("topology is not connected (agent " + std::to_string(i) +
                                    " unreachable)");
}

}  // namespace detail

// All-ones matrix: every agent hears every slot.
inline Topology build_complete(int n) {
  if (n < 2) throw invalid_size_error("build_complete: n must be >= 2, got " + std::to_string(n));
  Topology t;
  t.n = n;
  t.adjacency.assign(static_cast<std::size_t>(n) * n, 1);
  return t;
}

// Tridiagonal matrix: each agent hears itself and its index neighbors.
inline Topology build_chain(int n) {
  if (n < 2) throw invalid_size_error("build_chain: n must be >= 2, got " + std::to_string(n));
  Topology t;
  t.n = n;
  t.adjacency.assign(static_cast<std::size_t>(n) * n, 0);
  for (int i = 0; i < n; ++i) {
    t.adjacency[static_cast<std::size_t>(i) * n + i] = 1;
    if (i > 0) t.adjacency[static_cast<std::size_t>(i) * n + i - 1] = 1;
    if (i + 1 < n) t.adjacency[static_cast<std::size_t>(i) * n + i + 1] = 1;
  }
  return t;
}

// Arbitrary user-supplied matrix; validates every topology invariant.
inline Topology topology_from_matrix(int n, std::vector<std::uint8_t> adjacency) {
  Topology t;
  t.n = n;
  t.adjacency = std::move(adjacency);
  detail::check_topology(t);
  return t;
}

// r_i = row sums, the per-agent neighbor counts including self.
inline std::vector<int> neighbor_counts(const Topology& t) {
  std::vector<int> r(t.n, 0);
  for (int i = 0; i < t.n; ++i)
    for (int j = 0; j < t.n; ++j) r[i] += t.at(i, j);
  return r;
}

// Round-robin transmit schedule: agent slot_order[k mod n] transmits at step k.
struct Schedule {
  int n = 0;
  std::vector<int> slot_order;

  int transmitter(long long k) const { return slot_order[static_cast<std::size_t>(k % n)]; }

  bool operator==(const Schedule&) const = default;
};

inline Schedule make_schedule(int n, std::vector<int> slot_order) {
  if (n < 2) throw invalid_size_error("schedule needs at least 2 agents");
  if (slot_order.size() != static_cast<std::size_t>(n))
    throw invalid_parameter_error("slot_order length must equal agent count");
  std::vector<char> seen(n, 0);
  for (int v : slot_order) {
    if (v < 0 || v >= n || seen[v])
      throw invalid_parameter_error("slot_order must be a permutation of 0..n-1");
    seen[v] = 1;
  }
  return Schedule{n, std::move(slot_order)};
}

// Ascending-index default.
inline Schedule round_robin_schedule(int n) {
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  return make_schedule(n, std::move(order));
}

// Independent per-directed-message Bernoulli drops, reproducible by seed.
struct LossModel {
  double drop_probability = 0.0;
  std::uint64_t rng_seed = 0;

  bool operator==(const LossModel&) const = default;
};

namespace detail {

// splitmix64: tiny counter-based generator; used so delivery decisions are a
// pure function of (seed, step) with bit-identical output on every platform.
struct SplitMix64 {
  std::uint64_t state;

  explicit SplitMix64(std::uint64_t seed) : state(seed) {}

  std::uint64_t next() {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }
};

inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t k) {
  SplitMix64 g(seed ^ (k * 0x9e3779b97f4a7c15ULL + 0x7f4a7c15ULL));
  return g.next();
}

}  // namespace detail

// Receivers of step k's transmission, ascending index order. The transmitter
// itself is a candidate only when self_update is set and is never dropped by
// the random loss; drop_probability >= 1 silences the slot entirely.
inline std::vector<int> deliveries(const Topology& t, const Schedule& s, const LossModel& loss,
                                   long long k, bool self_update = true) {
  if (k < 0) throw range_error("deliveries: step index must be >= 0");
  const int j = s.transmitter(k);
  std::vector<int> out;
  if (loss.drop_probability >= 1.0) return out;
  detail::SplitMix64 g(detail::mix_seed(loss.rng_seed, static_cast<std::uint64_t>(k)));
  const bool draw = loss.drop_probability > 0.0;
  for (int i = 0; i < t.n; ++i) {
    if (!t.at(i, j)) continue;
    if (i == j) {
      if (self_update) out.push_back(i);
      continue;
    }
    if (draw && g.uniform() < loss.drop_probability) continue;
    out.push_back(i);
  }
  return out;
}

}  // namespace medcon
