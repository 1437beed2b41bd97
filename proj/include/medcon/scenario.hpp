#pragma once

// Declarative scenario and sweep files (JSON). A scenario parses to exactly
// one SimulationConfig or fails with a diagnostic naming the offending field.
// Schema reference: docs/file_formats.md.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "medcon/engine.hpp"
#include "medcon/errors.hpp"

namespace medcon {

using nlohmann::json;

struct Scenario {
  std::string name;
  std::string description;
  SimulationConfig config;

  bool operator==(const Scenario&) const = default;
};

namespace detail {

[[noreturn]] inline void fail_field(const std::string& path, const std::string& what) {
  throw parse_error(path + ": " + what);
}

inline const json& require(const json& j, const char* key, const std::string& path) {
  auto it = j.find(key);
  if (it == j.end()) fail_field(path + "." + key, "missing required field");
  return *it;
}

inline double as_number(const json& j, const std::string& path) {
  if (!j.is_number()) fail_field(path, "expected a number");
  return j.get<double>();
}

inline long long as_integer(const json& j, const std::string& path) {
  if (!j.is_number_integer()) fail_field(path, "expected an integer");
  return j.get<long long>();
}

inline std::string as_string(const json& j, const std::string& path) {
  if (!j.is_string()) fail_field(path, "expected a string");
  return j.get<std::string>();
}

inline bool as_bool(const json& j, const std::string& path) {
  if (!j.is_boolean()) fail_field(path, "expected a boolean");
  return j.get<bool>();
}

inline ReferenceSignal parse_signal(const json& j, const std::string& path) {
  if (!j.is_object()) fail_field(path, "expected a signal object");
  const std::string kind = as_string(require(j, "kind", path), path + ".kind");
  ReferenceSignal sig;
  if (kind == "constant") {
    sig = ConstantSignal{as_number(require(j, "value", path), path + ".value")};
  } else if (kind == "step") {
    StepSignal s;
    s.initial_value = as_number(require(j, "initial", path), path + ".initial");
    s.final_value = as_number(require(j, "final", path), path + ".final");
    s.step_time = as_integer(require(j, "at", path), path + ".at");
    sig = s;
  } else if (kind == "sine") {
    SineSignal s;
    s.offset = as_number(require(j, "offset", path), path + ".offset");
    s.amplitude = as_number(require(j, "amplitude", path), path + ".amplitude");
    s.period = as_number(require(j, "period", path), path + ".period");
    if (j.contains("phase")) s.phase = as_number(j["phase"], path + ".phase");
    if (j.contains("switch_at") != j.contains("period2"))
      fail_field(path, "switch_at and period2 must be given together");
    if (j.contains("switch_at")) {
      s.switch_step = as_integer(j["switch_at"], path + ".switch_at");
      s.period2 = as_number(j["period2"], path + ".period2");
    }
    sig = s;
  } else if (kind == "table") {
    TableSignal s;
    const json& pts = require(j, "points", path);
    if (!pts.is_array() || pts.empty()) fail_field(path + ".points", "expected a non-empty array");
    for (std::size_t i = 0; i < pts.size(); ++i) {
      const std::string ppath = path + ".points[" + std::to_string(i) + "]";
      const json& pt = pts[i];
      if (!pt.is_array() || pt.size() != 2) fail_field(ppath, "expected a [step, value] pair");
      s.points.emplace_back(as_integer(pt[0], ppath + "[0]"), as_number(pt[1], ppath + "[1]"));
    }
    sig = s;
  } else {
    fail_field(path + ".kind", "unknown signal kind '" + kind +
                                   "' (expected constant, step, sine, or table)");
  }
  try {
    validate_signal(sig);
  } catch (const error& e) {
    fail_field(path, e.what());
  }
  return sig;
}

inline json signal_to_json(const ReferenceSignal& sig) {
  json j;
  if (const auto* c = std::get_if<ConstantSignal>(&sig)) {
    j["kind"] = "constant";
    j["value"] = c->value;
  } else if (const auto* s = std::get_if<StepSignal>(&sig)) {
    j["kind"] = "step";
    j["initial"] = s->initial_value;
    j["final"] = s->final_value;
    j["at"] = s->step_time;
  } else if (const auto* sn = std::get_if<SineSignal>(&sig)) {
    j["kind"] = "sine";
    j["offset"] = sn->offset;
    j["amplitude"] = sn->amplitude;
    j["period"] = sn->period;
    j["phase"] = sn->phase;
    if (sn->switch_step >= 0) {
      j["switch_at"] = sn->switch_step;
      j["period2"] = sn->period2;
    }
  } else if (const auto* t = std::get_if<TableSignal>(&sig)) {
    j["kind"] = "table";
    json pts = json::array();
    for (const auto& [k, v] : t->points) pts.push_back(json::array({k, v}));
    j["points"] = std::move(pts);
  }
  return j;
}

inline Topology parse_topology(const json& j, int n, const std::string& path) {
  if (j.is_string()) {
    const std::string kind = j.get<std::string>();
    if (kind == "complete") return build_complete(n);
    if (kind == "chain") return build_chain(n);
    fail_field(path, "unknown topology '" + kind + "' (expected complete, chain, or a matrix)");
  }
  if (j.is_object() && j.contains("matrix")) {
    const json& m = j["matrix"];
    if (!m.is_array() || m.size() != static_cast<std::size_t>(n))
      fail_field(path + ".matrix", "expected " + std::to_string(n) + " rows");
    std::vector<std::uint8_t> adj;
    adj.reserve(static_cast<std::size_t>(n) * n);
    for (std::size_t i = 0; i < m.size(); ++i) {
      const std::string rpath = path + ".matrix[" + std::to_string(i) + "]";
      if (!m[i].is_array() || m[i].size() != static_cast<std::size_t>(n))
        fail_field(rpath, "expected " + std::to_string(n) + " entries");
      for (std::size_t c = 0; c < m[i].size(); ++c)
        adj.push_back(static_cast<std::uint8_t>(
            as_integer(m[i][c], rpath + "[" + std::to_string(c) + "]")));
    }
    try {
      return topology_from_matrix(n, std::move(adj));
    } catch (const error& e) {
      fail_field(path + ".matrix", e.what());
    }
  }
  fail_field(path, "expected \"complete\", \"chain\", or {\"matrix\": [[...]]}");
}

inline json topology_to_json(const Topology& t) {
  if (t == build_complete(t.n)) return json("complete");
  if (t == build_chain(t.n)) return json("chain");
  json rows = json::array();
  for (int i = 0; i < t.n; ++i) {
    json row = json::array();
    for (int j2 = 0; j2 < t.n; ++j2) row.push_back(static_cast<int>(t.at(i, j2)));
    rows.push_back(std::move(row));
  }
  return json{{"matrix", std::move(rows)}};
}

}  // namespace detail

// context names the source (usually the file path) in diagnostics.
inline Scenario parse_scenario(const json& root, const std::string& context) {
  const std::string base = context + ": $";
  if (!root.is_object()) detail::fail_field(base, "expected a top-level object");

  Scenario sc;
  if (root.contains("name")) sc.name = detail::as_string(root["name"], base + ".name");
  if (root.contains("description"))
    sc.description = detail::as_string(root["description"], base + ".description");

  const long long n = detail::as_integer(detail::require(root, "agents", base), base + ".agents");
  if (n < 2 || n > 100000) detail::fail_field(base + ".agents", "agent count out of range");
  SimulationConfig& cfg = sc.config;
  cfg.params.n = static_cast<int>(n);

  const json& pj = detail::require(root, "params", base);
  const std::string ppath = base + ".params";
  cfg.params.alpha = detail::as_number(detail::require(pj, "alpha", ppath), ppath + ".alpha");
  cfg.params.beta = detail::as_number(detail::require(pj, "beta", ppath), ppath + ".beta");
  cfg.params.gamma = detail::as_number(detail::require(pj, "gamma", ppath), ppath + ".gamma");
  cfg.params.kappa = detail::as_number(detail::require(pj, "kappa", ppath), ppath + ".kappa");

  cfg.topology = detail::parse_topology(detail::require(root, "topology", base),
                                        cfg.params.n, base + ".topology");

  if (root.contains("schedule")) {
    const json& sj = root["schedule"];
    const std::string spath = base + ".schedule";
    if (!sj.is_array()) detail::fail_field(spath, "expected an array of agent indices");
    std::vector<int> order;
    for (std::size_t i = 0; i < sj.size(); ++i)
      order.push_back(static_cast<int>(
          detail::as_integer(sj[i], spath + "[" + std::to_string(i) + "]")));
    try {
      cfg.schedule = make_schedule(cfg.params.n, std::move(order));
    } catch (const error& e) {
      detail::fail_field(spath, e.what());
    }
  } else {
    cfg.schedule = round_robin_schedule(cfg.params.n);
  }

  if (root.contains("loss")) {
    const json& lj = root["loss"];
    const std::string lpath = base + ".loss";
    if (!lj.is_object()) detail::fail_field(lpath, "expected an object");
    if (lj.contains("drop"))
      cfg.loss.drop_probability = detail::as_number(lj["drop"], lpath + ".drop");
    if (lj.contains("seed"))
      cfg.loss.rng_seed =
          static_cast<std::uint64_t>(detail::as_integer(lj["seed"], lpath + ".seed"));
    if (cfg.loss.drop_probability < 0.0 || cfg.loss.drop_probability > 1.0)
      detail::fail_field(lpath + ".drop", "must lie in [0, 1]");
  }

  const json& sigj = detail::require(root, "signals", base);
  if (!sigj.is_array()) detail::fail_field(base + ".signals", "expected an array");
  for (std::size_t i = 0; i < sigj.size(); ++i)
    cfg.signals.push_back(
        detail::parse_signal(sigj[i], base + ".signals[" + std::to_string(i) + "]"));
  if (cfg.signals.size() != static_cast<std::size_t>(cfg.params.n))
    detail::fail_field(base + ".signals", "expected one signal per agent (" +
                                              std::to_string(cfg.params.n) + "), got " +
                                              std::to_string(cfg.signals.size()));

  cfg.total_steps = detail::as_integer(detail::require(root, "steps", base), base + ".steps");
  if (cfg.total_steps < 1) detail::fail_field(base + ".steps", "must be >= 1");

  if (root.contains("options")) {
    const json& oj = root["options"];
    const std::string opath = base + ".options";
    if (!oj.is_object()) detail::fail_field(opath, "expected an object");
    if (oj.contains("self_update"))
      cfg.options.self_update = detail::as_bool(oj["self_update"], opath + ".self_update");
    if (oj.contains("y_clamp"))
      cfg.options.y_clamp = detail::as_bool(oj["y_clamp"], opath + ".y_clamp");
    if (oj.contains("quantization")) {
      cfg.options.quantization =
          detail::as_number(oj["quantization"], opath + ".quantization");
      if (cfg.options.quantization < 0.0)
        detail::fail_field(opath + ".quantization", "must be >= 0");
    }
  }
  return sc;
}

inline json scenario_to_json(const Scenario& sc) {
  const SimulationConfig& cfg = sc.config;
  json j;
  if (!sc.name.empty()) j["name"] = sc.name;
  if (!sc.description.empty()) j["description"] = sc.description;
  j["agents"] = cfg.params.n;
  j["params"] = {{"alpha", cfg.params.alpha},
                 {"beta", cfg.params.beta},
                 {"gamma", cfg.params.gamma},
                 {"kappa", cfg.params.kappa}};
  j["topology"] = detail::topology_to_json(cfg.topology);
  j["schedule"] = cfg.schedule.slot_order;
  j["loss"] = {{"drop", cfg.loss.drop_probability}, {"seed", cfg.loss.rng_seed}};
  json sigs = json::array();
  for (const ReferenceSignal& s : cfg.signals) sigs.push_back(detail::signal_to_json(s));
  j["signals"] = std::move(sigs);
  j["steps"] = cfg.total_steps;
  j["options"] = {{"self_update", cfg.options.self_update},
                  {"y_clamp", cfg.options.y_clamp},
                  {"quantization", cfg.options.quantization}};
  return j;
}

inline json load_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw io_error("cannot open " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw parse_error(path.string() + ": " + e.what());
  }
  return j;
}

inline Scenario load_scenario(const std::filesystem::path& path) {
  return parse_scenario(load_json_file(path), path.string());
}

// One swept dimension: a parameter name (alpha, beta, gamma, kappa, or drop)
// and the values it takes.
struct SweepDimension {
  std::string parameter;
  std::vector<double> values;

  bool operator==(const SweepDimension&) const = default;
};

struct SweepSpec {
  std::string name;
  std::string base_ref;  // base scenario path as written in the sweep file
  Scenario base;
  std::vector<SweepDimension> dimensions;  // one or two
  int runs = 1;
  std::uint64_t seed_base = 0;

  bool operator==(const SweepSpec&) const = default;
};

inline bool is_sweepable_parameter(const std::string& name) {
  return name == "alpha" || name == "beta" || name == "gamma" || name == "kappa" ||
         name == "drop";
}

// Returns a copy of cfg with one protocol or loss parameter replaced.
inline SimulationConfig apply_parameter(SimulationConfig cfg, const std::string& name,
                                        double value) {
  if (name == "alpha")
    cfg.params.alpha = value;
  else if (name == "beta")
    cfg.params.beta = value;
  else if (name == "gamma")
    cfg.params.gamma = value;
  else if (name == "kappa")
    cfg.params.kappa = value;
  else if (name == "drop")
    cfg.loss.drop_probability = value;
  else
    throw invalid_parameter_error("unknown sweep parameter '" + name +
                                  "' (expected alpha, beta, gamma, kappa, or drop)");
  return cfg;
}

inline SweepSpec parse_sweep(const json& root, const std::string& context,
                             const std::filesystem::path& base_dir) {
  const std::string base = context + ": $";
  if (!root.is_object()) detail::fail_field(base, "expected a top-level object");
  SweepSpec sw;
  if (root.contains("name")) sw.name = detail::as_string(root["name"], base + ".name");
  sw.base_ref = detail::as_string(detail::require(root, "base", base), base + ".base");
  std::filesystem::path bp(sw.base_ref);
  if (bp.is_relative()) bp = base_dir / bp;
  sw.base = load_scenario(bp);

  const json& dims = detail::require(root, "dimensions", base);
  if (!dims.is_array() || dims.empty() || dims.size() > 2)
    detail::fail_field(base + ".dimensions", "expected an array of one or two dimensions");
  for (std::size_t d = 0; d < dims.size(); ++d) {
    const std::string dpath = base + ".dimensions[" + std::to_string(d) + "]";
    const json& dj = dims[d];
    if (!dj.is_object()) detail::fail_field(dpath, "expected an object");
    SweepDimension dim;
    dim.parameter =
        detail::as_string(detail::require(dj, "parameter", dpath), dpath + ".parameter");
    if (!is_sweepable_parameter(dim.parameter))
      detail::fail_field(dpath + ".parameter",
                         "'" + dim.parameter +
                             "' is not sweepable (expected alpha, beta, gamma, kappa, or drop)");
    const json& vals = detail::require(dj, "values", dpath);
    if (!vals.is_array() || vals.empty())
      detail::fail_field(dpath + ".values", "expected a non-empty array of numbers");
    for (std::size_t i = 0; i < vals.size(); ++i)
      dim.values.push_back(
          detail::as_number(vals[i], dpath + ".values[" + std::to_string(i) + "]"));
    sw.dimensions.push_back(std::move(dim));
  }

  if (root.contains("runs")) {
    sw.runs = static_cast<int>(detail::as_integer(root["runs"], base + ".runs"));
    if (sw.runs < 1) detail::fail_field(base + ".runs", "must be >= 1");
  }
  if (root.contains("seed_base"))
    sw.seed_base =
        static_cast<std::uint64_t>(detail::as_integer(root["seed_base"], base + ".seed_base"));
  else
    sw.seed_base = sw.base.config.loss.rng_seed;
  return sw;
}

inline SweepSpec load_sweep(const std::filesystem::path& path) {
  return parse_sweep(load_json_file(path), path.string(), path.parent_path());
}

}  // namespace medcon
