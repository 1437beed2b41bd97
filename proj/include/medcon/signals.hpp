#pragma once

// Per-agent measurement generators. Evaluation is a pure function of the
// step index; validation happens once, when a signal enters a configuration.

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "medcon/errors.hpp"

namespace medcon {

struct ConstantSignal {
  double value = 0.0;

  bool operator==(const ConstantSignal&) const = default;
};

// Holds initial_value before step_time, final_value from step_time on.
struct StepSignal {
  double initial_value = 0.0;
  double final_value = 0.0;
  long long step_time = 0;

  bool operator==(const StepSignal&) const = default;
};

// offset + amplitude*sin(2*pi*k/period + phase). When switch_step >= 0 the
// period changes to period2 at that step, with the phase carried over so the
// waveform stays continuous.
struct SineSignal {
  double offset = 0.0;
  double amplitude = 0.0;
  double period = 2.0;  // steps per cycle, >= 2
  double phase = 0.0;
  long long switch_step = -1;  // -1: no period change
  double period2 = 0.0;

  bool operator==(const SineSignal&) const = default;
};

// Breakpoints (step, value), strictly increasing steps starting at 0;
// the most recent value holds until the next breakpoint.
struct TableSignal {
  std::vector<std::pair<long long, double>> points;

  bool operator==(const TableSignal&) const = default;
};

using ReferenceSignal = std::variant<ConstantSignal, StepSignal, SineSignal, TableSignal>;

// Enforces the per-kind invariants. Called by scenario parsing and by the
// engine's configuration check so evaluate() can stay throw-free.
inline void validate_signal(const ReferenceSignal& sig) {
  if (const auto* st = std::get_if<StepSignal>(&sig)) {
    if (st->step_time < 0) throw invalid_parameter_error("step signal: step_time must be >= 0");
  } else if (const auto* sn = std::get_if<SineSignal>(&sig)) {
    if (!(sn->period >= 2.0))
      throw invalid_parameter_error("sine signal: period must be >= 2 steps");
    if (sn->switch_step >= 0 && !(sn->period2 >= 2.0))
      throw invalid_parameter_error("sine signal: period2 must be >= 2 steps");
  } else if (const auto* tb = std::get_if<TableSignal>(&sig)) {
    if (tb->points.empty()) throw invalid_parameter_error("table signal: needs breakpoints");
    if (tb->points.front().first != 0)
      throw invalid_parameter_error("table signal: first breakpoint must be at step 0");
    for (std::size_t i = 1; i < tb->points.size(); ++i)
      if (tb->points[i].first <= tb->points[i - 1].first)
        throw invalid_parameter_error("table signal: breakpoints must be strictly increasing");
  }
}

inline double evaluate(const ReferenceSignal& sig, long long k) {
  struct Visitor {
    long long k;

    double operator()(const ConstantSignal& s) const { return s.value; }

    double operator()(const StepSignal& s) const {
      return k >= s.step_time ? s.final_value : s.initial_value;
    }

    double operator()(const SineSignal& s) const {
      constexpr double two_pi = 2.0 * std::numbers::pi;
      double angle;
      if (s.switch_step >= 0 && k >= s.switch_step) {
        angle = two_pi * static_cast<double>(s.switch_step) / s.period + s.phase +
                two_pi * static_cast<double>(k - s.switch_step) / s.period2;
      } else {
        angle = two_pi * static_cast<double>(k) / s.period + s.phase;
      }
      return s.offset + s.amplitude * std::sin(angle);
    }

    double operator()(const TableSignal& s) const {
      auto it = std::upper_bound(
          s.points.begin(), s.points.end(), k,
          [](long long step, const std::pair<long long, double>& p) { return step < p.first; });
      return std::prev(it)->second;
    }
  };
  return std::visit(Visitor{k}, sig);
}

inline void evaluate_all(const std::vector<ReferenceSignal>& signals, long long k,
                         std::vector<double>& out) {
  out.resize(signals.size());
  for (std::size_t i = 0; i < signals.size(); ++i) out[i] = evaluate(signals[i], k);
}

// Measurement vector z^k for all agents. n_agents guards against a scenario
// describing fewer signals than agents.
inline std::vector<double> evaluate_all(const std::vector<ReferenceSignal>& signals, long long k,
                                        int n_agents) {
  if (signals.size() != static_cast<std::size_t>(n_agents))
    throw invalid_size_error("signal count " + std::to_string(signals.size()) +
                             " does not match agent count " + std::to_string(n_agents));
  std::vector<double> out;
  evaluate_all(signals, k, out);
  return out;
}

}  // namespace medcon
