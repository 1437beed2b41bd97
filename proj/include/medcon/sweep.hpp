#pragma once

// Parameter sweeps: a grid over one or two swept dimensions, an ensemble of
// seeded runs per grid point, and per-point settling/steady-state statistics.

#include <optional>
#include <string>
#include <vector>

#include "medcon/analysis.hpp"
#include "medcon/engine.hpp"
#include "medcon/scenario.hpp"
#include "medcon/trace_io.hpp"

namespace medcon {

struct SweepAssignment {
  std::string parameter;
  double value = 0.0;
};

struct SweepPointResult {
  std::vector<SweepAssignment> assignment;
  int runs = 0;
  std::optional<EnsembleStats> t_s;  // empty when no run settled
  EnsembleStats eps_ss;
};

namespace detail {

inline SweepPointResult evaluate_sweep_point(const SweepSpec& sw,
                                             std::vector<SweepAssignment> assignment) {
  SimulationConfig cfg = sw.base.config;
  for (const SweepAssignment& a : assignment)
    cfg = apply_parameter(std::move(cfg), a.parameter, a.value);

  SweepPointResult pt;
  pt.assignment = std::move(assignment);
  pt.runs = sw.runs;
  std::vector<std::optional<double>> ts_values;
  std::vector<std::optional<double>> eps_values;
  ts_values.reserve(static_cast<std::size_t>(sw.runs));
  eps_values.reserve(static_cast<std::size_t>(sw.runs));
  for_each_run(cfg, sw.runs, sw.seed_base, [&](int, const Trace& tr) {
    const MetricsReport rep = compute_metrics(tr, cfg.params.n);
    if (rep.t_s.has_value())
      ts_values.emplace_back(static_cast<double>(*rep.t_s));
    else
      ts_values.emplace_back(std::nullopt);
    eps_values.emplace_back(rep.epsilon_ss);
  });
  try {
    pt.t_s = ensemble_stats(ts_values);
  } catch (const undefined_stats_error&) {
    pt.t_s.reset();
  }
  pt.eps_ss = ensemble_stats(eps_values);
  return pt;
}

}  // namespace detail

// Evaluates every grid point; report(index, total, result) is called as each
// point completes (pass a no-op for silent operation).
template <typename Report>
inline std::vector<SweepPointResult> run_sweep(const SweepSpec& sw, Report&& report) {
  std::vector<SweepPointResult> out;
  if (sw.dimensions.size() == 1) {
    const SweepDimension& d = sw.dimensions[0];
    const int total = static_cast<int>(d.values.size());
    for (int i = 0; i < total; ++i) {
      out.push_back(detail::evaluate_sweep_point(sw, {{d.parameter, d.values[i]}}));
      report(static_cast<int>(out.size()) - 1, total, out.back());
    }
  } else {
    const SweepDimension& d0 = sw.dimensions[0];
    const SweepDimension& d1 = sw.dimensions[1];
    const int total = static_cast<int>(d0.values.size() * d1.values.size());
    for (double v0 : d0.values) {
      for (double v1 : d1.values) {
        out.push_back(detail::evaluate_sweep_point(
            sw, {{d0.parameter, v0}, {d1.parameter, v1}}));
        report(static_cast<int>(out.size()) - 1, total, out.back());
      }
    }
  }
  return out;
}

inline std::vector<SweepPointResult> run_sweep(const SweepSpec& sw) {
  return run_sweep(sw, [](int, int, const SweepPointResult&) {});
}

// One row per grid point; empty settling cells when no run settled.
inline std::string sweep_summary_csv(const std::vector<SweepPointResult>& points) {
  if (points.empty()) throw empty_input_error("sweep_summary_csv: no points");
  std::string out;
  const std::size_t dims = points[0].assignment.size();
  for (std::size_t d = 0; d < dims; ++d) {
    if (d > 0) out += ',';
    const std::string suffix = dims > 1 ? "_" + std::to_string(d + 1) : "";
    out += "parameter" + suffix + ",value" + suffix;
  }
  out += ",runs,t_s_mean,t_s_std,t_s_not_reached,eps_ss_mean,eps_ss_std\n";
  for (const SweepPointResult& pt : points) {
    for (std::size_t d = 0; d < dims; ++d) {
      if (d > 0) out += ',';
      out += pt.assignment[d].parameter + "," + format_double(pt.assignment[d].value);
    }
    out += ',';
    out += std::to_string(pt.runs);
    if (pt.t_s.has_value()) {
      out += ',';
      out += format_double(pt.t_s->mean);
      out += ',';
      out += format_double(pt.t_s->stddev);
      out += ',';
      out += std::to_string(pt.t_s->not_reached);
    } else {
      out += ",,,";
      out += std::to_string(pt.runs);
    }
    out += ',';
    out += format_double(pt.eps_ss.mean);
    out += ',';
    out += format_double(pt.eps_ss.stddev);
    out += '\n';
  }
  return out;
}

}  // namespace medcon
