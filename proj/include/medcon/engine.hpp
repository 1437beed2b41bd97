#pragma once

// The step loop: evaluate measurements, pick the slot's transmitter, resolve
// deliveries, apply the local update to every receiver, record the trace.
//
// Semantics that matter for reproducibility:
//   - every receiver of step k reads the transmitter's pre-step x, so the
//     order receivers are processed in cannot influence the result;
//   - quantization (when enabled) rounds only the over-the-air value, and the
//     transmitter's own self-update uses its raw x;
//   - measurements advance every step, and row k of the trace holds the state
//     at step k together with the transmission performed during step k. The
//     final row holds the end state, transmitter -1, empty delivery mask.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "medcon/errors.hpp"
#include "medcon/protocol.hpp"
#include "medcon/signals.hpp"
#include "medcon/topology.hpp"

namespace medcon {

enum class ReceiverOrder { ascending, descending };

struct EngineOptions {
  bool self_update = true;
  bool y_clamp = false;
  double quantization = 0.0;  // 0: off, otherwise the over-the-air step size
  ReceiverOrder receiver_order = ReceiverOrder::ascending;
  ValidationMode validation = ValidationMode::lenient;

  bool operator==(const EngineOptions&) const = default;
};

struct SimulationConfig {
  ProtocolParams params;
  Topology topology;
  Schedule schedule;
  LossModel loss;
  std::vector<ReferenceSignal> signals;
  long long total_steps = 0;
  EngineOptions options;

  bool operator==(const SimulationConfig&) const = default;
};

// Full time series of a run. Row-major layout, (total_steps + 1) rows of n
// agents each. delivered and y_band are per-row bitmasks packed into 64-bit
// words (bit i = agent i), mask_words words per row.
struct Trace {
  int n = 0;
  long long total_steps = 0;
  int mask_words = 0;
  std::vector<double> x, y, z;      // rows * n
  std::vector<int> transmitter;     // rows; -1 on the final row
  std::vector<double> lyapunov;     // rows
  std::vector<std::uint64_t> delivered;  // rows * mask_words
  std::vector<std::uint64_t> y_band;     // rows * mask_words

  long long rows() const { return total_steps + 1; }

  double x_at(long long k, int i) const { return x[static_cast<std::size_t>(k) * n + i]; }
  double y_at(long long k, int i) const { return y[static_cast<std::size_t>(k) * n + i]; }
  double z_at(long long k, int i) const { return z[static_cast<std::size_t>(k) * n + i]; }

  bool delivered_to(long long k, int i) const {
    return (delivered[static_cast<std::size_t>(k) * mask_words + i / 64] >>
            (i % 64)) & 1u;
  }
  bool y_band_violated(long long k, int i) const {
    return (y_band[static_cast<std::size_t>(k) * mask_words + i / 64] >> (i % 64)) & 1u;
  }

  bool operator==(const Trace&) const = default;
};

// Rejects inconsistent configurations before any stepping happens.
inline void validate_config(const SimulationConfig& cfg) {
  ensure_valid(cfg.params, cfg.options.validation);
  detail::check_topology(cfg.topology);
  if (cfg.topology.n != cfg.params.n)
    throw config_error("topology describes " + std::to_string(cfg.topology.n) +
                       " agents but params.n is " + std::to_string(cfg.params.n));
  if (cfg.schedule.n != cfg.params.n)
    throw config_error("schedule describes " + std::to_string(cfg.schedule.n) +
                       " agents but params.n is " + std::to_string(cfg.params.n));
  make_schedule(cfg.schedule.n, cfg.schedule.slot_order);
  if (cfg.signals.size() != static_cast<std::size_t>(cfg.params.n))
    throw config_error("scenario defines " + std::to_string(cfg.signals.size()) +
                       " signals for " + std::to_string(cfg.params.n) + " agents");
  for (const ReferenceSignal& s : cfg.signals) validate_signal(s);
  if (cfg.total_steps < 1) throw config_error("total_steps must be >= 1");
  if (cfg.loss.drop_probability < 0.0 || cfg.loss.drop_probability > 1.0)
    throw config_error("drop_probability must lie in [0, 1]");
  if (cfg.options.quantization < 0.0)
    throw config_error("quantization step must be >= 0");
}

namespace detail {

inline void record_row(Trace& tr, long long k, const std::vector<AgentState>& st,
                       const ProtocolParams& p, int tx, const std::vector<int>& recv) {
  const int n = tr.n;
  const std::size_t base = static_cast<std::size_t>(k) * n;
  double xmin = st[0].x, xmax = st[0].x, ymin = st[0].y, ymax = st[0].y;
  for (int i = 0; i < n; ++i) {
    tr.x[base + i] = st[i].x;
    tr.y[base + i] = st[i].y;
    tr.z[base + i] = st[i].z;
    xmin = std::min(xmin, st[i].x);
    xmax = std::max(xmax, st[i].x);
    ymin = std::min(ymin, st[i].y);
    ymax = std::max(ymax, st[i].y);
    if (y_band_violation(st[i], p))
      tr.y_band[static_cast<std::size_t>(k) * tr.mask_words + i / 64] |= 1ULL << (i % 64);
  }
  tr.lyapunov[static_cast<std::size_t>(k)] = (xmax - xmin) + (ymax - ymin);
  tr.transmitter[static_cast<std::size_t>(k)] = tx;
  for (int i : recv)
    tr.delivered[static_cast<std::size_t>(k) * tr.mask_words + i / 64] |= 1ULL << (i % 64);
}

}  // namespace detail

inline Trace run(const SimulationConfig& cfg) {
  validate_config(cfg);
  const int n = cfg.params.n;
  const std::vector<int> r = neighbor_counts(cfg.topology);

  Trace tr;
  tr.n = n;
  tr.total_steps = cfg.total_steps;
  tr.mask_words = (n + 63) / 64;
  const std::size_t rows = static_cast<std::size_t>(tr.rows());
  tr.x.resize(rows * n);
  tr.y.resize(rows * n);
  tr.z.resize(rows * n);
  tr.transmitter.resize(rows);
  tr.lyapunov.resize(rows);
  tr.delivered.assign(rows * tr.mask_words, 0);
  tr.y_band.assign(rows * tr.mask_words, 0);

  std::vector<AgentState> st(n);
  std::vector<double> zk;
  evaluate_all(cfg.signals, 0, zk);
  for (int i = 0; i < n; ++i) st[i] = AgentState{zk[i], 0.0, zk[i], r[i]};

  const double q = cfg.options.quantization;
  std::vector<int> recv;
  for (long long k = 0; k < cfg.total_steps; ++k) {
    if (k > 0) {
      evaluate_all(cfg.signals, k, zk);
      for (int i = 0; i < n; ++i) st[i].z = zk[i];
    }
    const int tx = cfg.schedule.transmitter(k);
    recv = deliveries(cfg.topology, cfg.schedule, cfg.loss, k, cfg.options.self_update);
    detail::record_row(tr, k, st, cfg.params, tx, recv);

    const double x_raw = st[tx].x;
    const double x_air = q > 0.0 ? std::round(x_raw / q) * q : x_raw;
    auto apply = [&](int i) {
      st[i] = local_update(st[i], i == tx ? x_raw : x_air, true, cfg.params);
      if (cfg.options.y_clamp) {
        const double bound = 2.0 * cfg.params.alpha / st[i].r;
        st[i].y = std::clamp(st[i].y, -bound, bound);
      }
      if (!std::isfinite(st[i].x) || !std::isfinite(st[i].y))
        throw numeric_domain_error("non-finite state for agent " + std::to_string(i) +
                                   " after step " + std::to_string(k));
    };
    if (cfg.options.receiver_order == ReceiverOrder::ascending) {
      for (auto it = recv.begin(); it != recv.end(); ++it) apply(*it);
    } else {
      for (auto it = recv.rbegin(); it != recv.rend(); ++it) apply(*it);
    }
  }

  evaluate_all(cfg.signals, cfg.total_steps, zk);
  for (int i = 0; i < n; ++i) st[i].z = zk[i];
  recv.clear();
  detail::record_row(tr, cfg.total_steps, st, cfg.params, -1, recv);
  return tr;
}

// Runs n_runs independent copies of cfg whose loss seeds are
// seed_base, seed_base+1, ...; invokes fn(run_index, trace) for each and
// discards the trace afterwards. Backbone for sweeps over many runs.
template <typename Fn>
inline void for_each_run(const SimulationConfig& cfg, int n_runs, std::uint64_t seed_base,
                         Fn&& fn) {
  if (n_runs < 1) throw invalid_parameter_error("n_runs must be >= 1");
  for (int i = 0; i < n_runs; ++i) {
    SimulationConfig c = cfg;
    c.loss.rng_seed = seed_base + static_cast<std::uint64_t>(i);
    fn(i, run(c));
  }
}

inline std::vector<Trace> run_ensemble(const SimulationConfig& cfg, int n_runs,
                                       std::uint64_t seed_base) {
  std::vector<Trace> out;
  out.reserve(static_cast<std::size_t>(n_runs));
  for_each_run(cfg, n_runs, seed_base, [&](int, Trace tr) { out.push_back(std::move(tr)); });
  return out;
}

// Periodicity diagnostic: max over agents of |x_i^{k+cycle} - x_i^k| +
// |y_i^{k+cycle} - y_i^k|. Zero for a perfectly period-locked system.
inline double stationarity_residual(const Trace& tr, long long k, int cycle) {
  if (cycle < 1) throw invalid_parameter_error("stationarity_residual: cycle must be >= 1");
  if (k < 0 || k + cycle > tr.total_steps)
    throw range_error("stationarity_residual: window [" + std::to_string(k) + ", " +
                      std::to_string(k + cycle) + "] outside trace of " +
                      std::to_string(tr.total_steps) + " steps");
  double worst = 0.0;
  for (int i = 0; i < tr.n; ++i) {
    const double d = std::abs(tr.x_at(k + cycle, i) - tr.x_at(k, i)) +
                     std::abs(tr.y_at(k + cycle, i) - tr.y_at(k, i));
    worst = std::max(worst, d);
  }
  return worst;
}

}  // namespace medcon
