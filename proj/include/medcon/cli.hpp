#pragma once

// Command implementations behind the medcon executable: run, sweep, validate.
// Kept in the library so tests can drive them directly. Exit codes: 0 when
// every requested output was written, 2 for usage/parse problems, 1 otherwise.

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "medcon/analysis.hpp"
#include "medcon/engine.hpp"
#include "medcon/errors.hpp"
#include "medcon/scenario.hpp"
#include "medcon/sweep.hpp"
#include "medcon/trace_io.hpp"
#include "medcon/version.hpp"

namespace medcon {

struct CliOptions {
  std::string scenario_path;
  std::string out_dir;
  std::optional<std::uint64_t> seed;  // overrides the scenario's loss seed
  std::optional<int> runs;            // ensemble size for run
  bool strict = false;                // strict parameter validation
  std::optional<double> quantize;     // over-the-air quantization step
};

namespace cli_detail {

inline constexpr int exit_ok = 0;
inline constexpr int exit_failure = 1;
inline constexpr int exit_usage = 2;

inline void apply_overrides(Scenario& sc, const CliOptions& opt) {
  if (opt.seed.has_value()) sc.config.loss.rng_seed = *opt.seed;
  if (opt.quantize.has_value()) sc.config.options.quantization = *opt.quantize;
  if (opt.strict) sc.config.options.validation = ValidationMode::strict;
}

inline nlohmann::json run_metadata(const Scenario& sc, std::uint64_t seed_used) {
  const SimulationConfig& cfg = sc.config;
  const std::vector<int> r = neighbor_counts(cfg.topology);
  nlohmann::json meta;
  meta["artifact"] = "medcon";
  meta["version"] = version_string;
  meta["scenario"] = scenario_to_json(sc);
  meta["seed_used"] = seed_used;
  meta["neighbor_counts"] = r;
  meta["instability_band"] =
      instability_band(cfg.params, *std::min_element(r.begin(), r.end()));
  return meta;
}

inline std::string condition_line(const ConditionCheck& c) {
  const char* status = c.status == ConditionStatus::pass
                           ? "pass"
                           : (c.status == ConditionStatus::warn ? "warn" : "fail");
  return "  " + c.name + ": " + status + " [" + c.detail + "]";
}

inline std::string metric_or_dash(const std::optional<long long>& v) {
  return v.has_value() ? std::to_string(*v) : std::string("not-reached");
}

// Writes trace, sidecar, metrics, and plot data for one run into dir.
inline MetricsReport write_run_outputs(const std::filesystem::path& dir, const Scenario& sc,
                                       const Trace& tr) {
  write_trace_csv(dir / "trace.csv", tr);
  write_text_atomic(dir / "trace.meta.json",
                    run_metadata(sc, sc.config.loss.rng_seed).dump(2) + "\n");
  const MetricsReport rep = compute_metrics(tr, sc.config.params.n);
  write_text_atomic(dir / "metrics.json", metrics_to_json(rep).dump(2) + "\n");
  write_plot_files(dir, tr);
  return rep;
}

}  // namespace cli_detail

inline int cmd_run(const CliOptions& opt, std::ostream& out = std::cout,
                   std::ostream& err = std::cerr) {
  namespace fs = std::filesystem;
  if (opt.scenario_path.empty()) {
    err << "run: --scenario PATH is required\n";
    return cli_detail::exit_usage;
  }
  if (opt.out_dir.empty()) {
    err << "run: --out DIR must not be empty\n";
    return cli_detail::exit_usage;
  }
  try {
    Scenario sc = load_scenario(opt.scenario_path);
    cli_detail::apply_overrides(sc, opt);
    const int n_runs = opt.runs.value_or(1);
    if (n_runs < 1) {
      err << "run: --runs must be >= 1\n";
      return cli_detail::exit_usage;
    }
    fs::create_directories(opt.out_dir);
    const fs::path dir(opt.out_dir);

    if (n_runs == 1) {
      const Trace tr = run(sc.config);
      const MetricsReport rep = cli_detail::write_run_outputs(dir, sc, tr);
      out << "scenario: " << (sc.name.empty() ? opt.scenario_path : sc.name) << "\n"
          << "steps: " << tr.total_steps << "\n"
          << "t_s: " << cli_detail::metric_or_dash(rep.t_s) << "\n"
          << "t_c: " << cli_detail::metric_or_dash(rep.t_c) << "\n"
          << "epsilon_ss: " << rep.epsilon_ss << "\n"
          << "outputs: " << (dir / "trace.csv").string() << " trace.meta.json metrics.json"
          << " plot_{x,y,z,v}.csv\n";
      return cli_detail::exit_ok;
    }

    // Ensemble: full outputs for the first run, per-run metrics for all.
    const std::uint64_t seed_base = sc.config.loss.rng_seed;
    std::vector<std::optional<double>> ts_values, tc_values, eps_values;
    std::string per_run = "run,seed,t_s,t_c,epsilon_ss\n";
    for_each_run(sc.config, n_runs, seed_base, [&](int i, const Trace& tr) {
      const MetricsReport rep = compute_metrics(tr, sc.config.params.n);
      if (i == 0) {
        Scenario first = sc;
        first.config.loss.rng_seed = seed_base;
        cli_detail::write_run_outputs(dir, first, tr);
      }
      ts_values.emplace_back(rep.t_s.has_value()
                                 ? std::optional<double>(static_cast<double>(*rep.t_s))
                                 : std::nullopt);
      tc_values.emplace_back(rep.t_c.has_value()
                                 ? std::optional<double>(static_cast<double>(*rep.t_c))
                                 : std::nullopt);
      eps_values.emplace_back(rep.epsilon_ss);
      per_run += std::to_string(i) + "," + std::to_string(seed_base + i) + "," +
                 (rep.t_s ? std::to_string(*rep.t_s) : "") + "," +
                 (rep.t_c ? std::to_string(*rep.t_c) : "") + "," +
                 format_double(rep.epsilon_ss) + "\n";
    });
    write_text_atomic(dir / "runs_metrics.csv", per_run);

    nlohmann::json ens;
    ens["runs"] = n_runs;
    ens["seed_base"] = seed_base;
    auto stats_json = [](const std::vector<std::optional<double>>& vals) -> nlohmann::json {
      try {
        const EnsembleStats st = ensemble_stats(vals);
        return {{"mean", st.mean},
                {"std", st.stddev},
                {"count", st.count},
                {"not_reached", st.not_reached}};
      } catch (const undefined_stats_error&) {
        return {{"mean", nullptr},
                {"std", nullptr},
                {"count", 0},
                {"not_reached", static_cast<long long>(vals.size())}};
      }
    };
    ens["t_s"] = stats_json(ts_values);
    ens["t_c"] = stats_json(tc_values);
    ens["epsilon_ss"] = stats_json(eps_values);
    write_text_atomic(dir / "ensemble.json", ens.dump(2) + "\n");

    out << "scenario: " << (sc.name.empty() ? opt.scenario_path : sc.name) << "\n"
        << "runs: " << n_runs << " (seeds " << seed_base << ".." << seed_base + n_runs - 1
        << ")\n"
        << "outputs: runs_metrics.csv ensemble.json plus trace/metrics/plots of run 0 in "
        << dir.string() << "\n";
    return cli_detail::exit_ok;
  } catch (const parse_error& e) {
    err << "run: " << e.what() << "\n";
    return cli_detail::exit_usage;
  } catch (const error& e) {
    err << "run: " << e.what() << "\n";
    return cli_detail::exit_failure;
  }
}

inline int cmd_sweep(const CliOptions& opt, std::ostream& out = std::cout,
                     std::ostream& err = std::cerr) {
  namespace fs = std::filesystem;
  if (opt.scenario_path.empty()) {
    err << "sweep: --scenario PATH is required\n";
    return cli_detail::exit_usage;
  }
  if (opt.out_dir.empty()) {
    err << "sweep: --out DIR must not be empty\n";
    return cli_detail::exit_usage;
  }
  try {
    SweepSpec sw = load_sweep(opt.scenario_path);
    cli_detail::apply_overrides(sw.base, opt);
    if (opt.seed.has_value()) sw.seed_base = *opt.seed;
    if (opt.runs.has_value()) {
      if (*opt.runs < 1) {
        err << "sweep: --runs must be >= 1\n";
        return cli_detail::exit_usage;
      }
      sw.runs = *opt.runs;
    }
    fs::create_directories(opt.out_dir);
    const fs::path dir(opt.out_dir);

    const std::vector<SweepPointResult> points =
        run_sweep(sw, [&](int idx, int total, const SweepPointResult& pt) {
          out << "point " << (idx + 1) << "/" << total;
          for (const SweepAssignment& a : pt.assignment)
            out << " " << a.parameter << "=" << a.value;
          if (pt.t_s.has_value())
            out << " t_s_mean=" << pt.t_s->mean << " t_s_std=" << pt.t_s->stddev;
          else
            out << " t_s=not-reached";
          out << " eps_mean=" << pt.eps_ss.mean << "\n";
        });
    write_text_atomic(dir / "sweep_summary.csv", sweep_summary_csv(points));

    nlohmann::json meta;
    meta["artifact"] = "medcon";
    meta["version"] = version_string;
    meta["sweep"] = {{"name", sw.name},
                     {"base", sw.base_ref},
                     {"runs", sw.runs},
                     {"seed_base", sw.seed_base}};
    nlohmann::json dims = nlohmann::json::array();
    for (const SweepDimension& d : sw.dimensions)
      dims.push_back({{"parameter", d.parameter}, {"values", d.values}});
    meta["sweep"]["dimensions"] = std::move(dims);
    meta["base_scenario"] = scenario_to_json(sw.base);
    write_text_atomic(dir / "sweep.meta.json", meta.dump(2) + "\n");

    out << "outputs: " << (dir / "sweep_summary.csv").string() << " sweep.meta.json\n";
    return cli_detail::exit_ok;
  } catch (const parse_error& e) {
    err << "sweep: " << e.what() << "\n";
    return cli_detail::exit_usage;
  } catch (const error& e) {
    err << "sweep: " << e.what() << "\n";
    return cli_detail::exit_failure;
  }
}

inline int cmd_validate(const CliOptions& opt, std::ostream& out = std::cout,
                        std::ostream& err = std::cerr) {
  if (opt.scenario_path.empty()) {
    err << "validate: --scenario PATH is required\n";
    return cli_detail::exit_usage;
  }
  try {
    const Scenario sc = load_scenario(opt.scenario_path);
    const ValidationReport strict = validate_params(sc.config.params, ValidationMode::strict);
    const ValidationReport lenient =
        validate_params(sc.config.params, ValidationMode::lenient);
    out << "scenario: " << (sc.name.empty() ? opt.scenario_path : sc.name) << "\n"
        << "conditions (lenient):\n";
    for (const ConditionCheck& c : lenient.conditions)
      out << cli_detail::condition_line(c) << "\n";
    out << "strict: " << (strict.ok() ? "PASS" : "FAIL") << "\n"
        << "lenient: "
        << (lenient.ok() ? (lenient.has_warnings() ? "PASS (with warnings)" : "PASS") : "FAIL")
        << "\n";
    return lenient.ok() ? cli_detail::exit_ok : cli_detail::exit_failure;
  } catch (const parse_error& e) {
    err << "validate: " << e.what() << "\n";
    return cli_detail::exit_usage;
  } catch (const error& e) {
    err << "validate: " << e.what() << "\n";
    return cli_detail::exit_failure;
  }
}

}  // namespace medcon
