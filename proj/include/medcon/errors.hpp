#pragma once

#include <stdexcept>
#include <string>

namespace medcon {

// Base class for every exception raised by the library.
struct error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A parameter is outside its domain (non-positive gain, n < 2, bad permutation).
struct invalid_parameter_error : error {
  using error::error;
};

// A relational constraint between otherwise valid parameters fails.
struct constraint_violation_error : error {
  using error::error;
};

// A numeric input or computed state is NaN/inf.
struct numeric_domain_error : error {
  using error::error;
};

struct empty_input_error : error {
  using error::error;
};

// Structural size problem (topology smaller than 2 agents, bad matrix shape).
struct invalid_size_error : error {
  using error::error;
};

// Inconsistent simulation configuration detected before stepping.
struct config_error : error {
  using error::error;
};

// Scenario / sweep / trace file could not be parsed; message names the field.
struct parse_error : error {
  using error::error;
};

struct io_error : error {
  using error::error;
};

// An index or window lies outside the trace.
struct range_error : error {
  using error::error;
};

// Ensemble statistics requested but every run failed to reach the metric.
struct undefined_stats_error : error {
  using error::error;
};

}  // namespace medcon
