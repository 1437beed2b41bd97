#pragma once

// Per-agent state, the per-step local update rule, parameter validation,
// and the two scalar diagnostics (Lyapunov spread, instability band).

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <sstream>
#include <string>
#include <vector>

#include "medcon/errors.hpp"

namespace medcon {

// Tuning parameters shared by all agents.
//   alpha  step size of the sign term, in signal units per step
//   beta   proportional coupling gain
//   gamma  integral coupling gain
//   kappa  forgetting factor on the integral state
//   n      number of agents
struct ProtocolParams {
  double alpha = 0.0;
  double beta = 0.0;
  double gamma = 0.0;
  double kappa = 0.0;
  int n = 0;

  bool operator==(const ProtocolParams&) const = default;
};

// One agent's state.
//   x  consensus state (initialized to the first measurement)
//   y  auxiliary integral state (initialized to 0)
//   z  current local measurement
//   r  neighbor count in the underlying graph, including the agent itself
struct AgentState {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;
  int r = 1;

  bool operator==(const AgentState&) const = default;
};

enum class ValidationMode { strict, lenient };

enum class ConditionStatus { pass, warn, fail };

struct ConditionCheck {
  std::string name;    // the inequality, e.g. "gamma < beta"
  bool holds = false;  // whether the strict inequality holds
  ConditionStatus status = ConditionStatus::pass;
  std::string detail;
};

struct ValidationReport {
  ValidationMode mode = ValidationMode::lenient;
  std::vector<ConditionCheck> conditions;

  bool ok() const {
    return std::none_of(conditions.begin(), conditions.end(), [](const ConditionCheck& c) {
      return c.status == ConditionStatus::fail;
    });
  }
  bool has_warnings() const {
    return std::any_of(conditions.begin(), conditions.end(), [](const ConditionCheck& c) {
      return c.status == ConditionStatus::warn;
    });
  }
  const ConditionCheck* first_failure() const {
    for (const auto& c : conditions)
      if (c.status == ConditionStatus::fail) return &c;
    return nullptr;
  }
};

namespace detail {

inline std::string describe(const char* name, double lhs, double rhs) {
  std::ostringstream os;
  os << name << " (" << lhs << " vs " << rhs << ")";
  return os.str();
}

}  // namespace detail

// Checks the three gain conditions. Domain violations (non-positive values,
// n < 2) throw; condition outcomes are reported, never thrown, so callers can
// print the whole table. In lenient mode a failing "beta < 1/n^2" is reduced
// to a warning; the other two conditions are hard failures in both modes.
inline ValidationReport validate_params(const ProtocolParams& p, ValidationMode mode) {
  if (!(p.alpha > 0.0) || !(p.beta > 0.0) || !(p.gamma > 0.0) || !(p.kappa > 0.0)) {
    std::ostringstream os;
    os << "all tuning parameters must be positive (alpha=" << p.alpha << ", beta=" << p.beta
       << ", gamma=" << p.gamma << ", kappa=" << p.kappa << ")";
    throw invalid_parameter_error(os.str());
  }
  if (p.n < 2) {
    throw invalid_parameter_error("agent count must be at least 2, got " +
                                  std::to_string(p.n));
  }

  ValidationReport rep;
  rep.mode = mode;

  const double n2_bound = 1.0 / (static_cast<double>(p.n) * static_cast<double>(p.n));

  ConditionCheck gb;
  gb.name = "gamma < beta";
  gb.holds = p.gamma < p.beta;
  gb.status = gb.holds ? ConditionStatus::pass : ConditionStatus::fail;
  gb.detail = detail::describe("gamma vs beta", p.gamma, p.beta);
  rep.conditions.push_back(gb);

  ConditionCheck kg;
  kg.name = "kappa*gamma < 1";
  kg.holds = p.kappa * p.gamma < 1.0;
  kg.status = kg.holds ? ConditionStatus::pass : ConditionStatus::fail;
  kg.detail = detail::describe("kappa*gamma vs 1", p.kappa * p.gamma, 1.0);
  rep.conditions.push_back(kg);

  ConditionCheck bn;
  bn.name = "beta < 1/n^2";
  bn.holds = p.beta < n2_bound;
  if (bn.holds)
    bn.status = ConditionStatus::pass;
  else
    bn.status = (mode == ValidationMode::strict) ? ConditionStatus::fail : ConditionStatus::warn;
  bn.detail = detail::describe("beta vs 1/n^2", p.beta, n2_bound);
  rep.conditions.push_back(bn);

  return rep;
}

// Throwing gate used by the engine and the CLI: raises a constraint violation
// naming the first failed inequality.
inline ValidationReport ensure_valid(const ProtocolParams& p, ValidationMode mode) {
  ValidationReport rep = validate_params(p, mode);
  if (const ConditionCheck* f = rep.first_failure()) {
    throw constraint_violation_error("parameter constraint violated: " + f->name + ", " +
                                     f->detail);
  }
  return rep;
}

// Sign with sign(0) = 0.
inline double sign(double v) {
  return static_cast<double>(v > 0.0) - static_cast<double>(v < 0.0);
}

// One receiver-side update. With an inactive link this is the identity map,
// bit-exactly. x_j is the value received from the slot's transmitter; z and r
// are left untouched (the measurement advances elsewhere).
inline AgentState local_update(AgentState s, double x_j, bool link_active,
                               const ProtocolParams& p) {
  if (!link_active) return s;
  if (!std::isfinite(s.x) || !std::isfinite(s.y) || !std::isfinite(s.z) ||
      !std::isfinite(x_j)) {
    throw numeric_domain_error("local_update received a non-finite value");
  }
  const double diff = x_j - s.x;
  const double nx = s.x + p.beta * diff + (p.alpha / s.r) * sign(s.z - s.x) + s.y;
  const double ny = s.y + p.gamma * (diff - p.kappa * s.y);
  s.x = nx;
  s.y = ny;
  return s;
}

// True when the auxiliary state left the band [-2*alpha/r, 2*alpha/r] the
// convergence argument assumes. A diagnostic flag, not an error.
inline bool y_band_violation(const AgentState& s, const ProtocolParams& p) {
  return std::abs(s.y) > 2.0 * p.alpha / s.r;
}

// Spread diagnostic: (max x - min x) + (max y - min y).
inline double lyapunov_value(const std::vector<AgentState>& states) {
  if (states.empty()) throw empty_input_error("lyapunov_value: empty state list");
  double xmin = states[0].x, xmax = states[0].x;
  double ymin = states[0].y, ymax = states[0].y;
  for (const AgentState& s : states) {
    xmin = std::min(xmin, s.x);
    xmax = std::max(xmax, s.x);
    ymin = std::min(ymin, s.y);
    ymax = std::max(ymax, s.y);
  }
  return (xmax - xmin) + (ymax - ymin);
}

// Theoretical spread below which the per-cycle decrease of the Lyapunov
// diagnostic is no longer guaranteed. Annotation only; the simulator never
// acts on it.
inline double instability_band(const ProtocolParams& p, int r_min) {
  if (r_min < 1) throw invalid_parameter_error("instability_band: r_min must be >= 1");
  validate_params(p, ValidationMode::lenient);
  if (!(p.beta > p.gamma)) {
    throw constraint_violation_error(
        "instability_band requires beta > gamma, " +
        detail::describe("beta vs gamma", p.beta, p.gamma));
  }
  return (6.0 * p.alpha - 4.0 * p.kappa * p.gamma * p.alpha) /
         (static_cast<double>(r_min) * (p.beta - p.gamma));
}

}  // namespace medcon
