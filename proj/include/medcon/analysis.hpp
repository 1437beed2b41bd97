#pragma once

// Median oracle and the trace metrics: settling time, convergence time,
// steady-state error, and ensemble statistics.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "medcon/engine.hpp"
#include "medcon/errors.hpp"

namespace medcon {

// Median of a measurement vector. Odd count: the middle order statistic
// (low = high = point). Even count: the interval between the two middle
// order statistics, with point at its midpoint; distances are measured to
// the interval, so any value inside it counts as zero deviation.
struct MedianResult {
  double low = 0.0;
  double high = 0.0;
  double point = 0.0;

  bool operator==(const MedianResult&) const = default;
};

inline MedianResult median(std::vector<double> z) {
  if (z.empty()) throw empty_input_error("median: empty vector");
  std::sort(z.begin(), z.end());
  const std::size_t n = z.size();
  MedianResult m;
  if (n % 2 == 1) {
    m.low = m.high = m.point = z[n / 2];
  } else {
    m.low = z[n / 2 - 1];
    m.high = z[n / 2];
    m.point = m.low + (m.high - m.low) / 2.0;
  }
  return m;
}

// Distance from a value to the median (interval distance for even counts).
inline double median_distance(double v, const MedianResult& m) {
  if (v < m.low) return m.low - v;
  if (v > m.high) return v - m.high;
  return 0.0;
}

// Relative bands divide by |median point|; when the median sits below
// median_floor the comparison switches to absolute_tolerance to avoid a
// division blow-up.
struct BandPolicy {
  double median_floor = 1e-9;
  double absolute_tolerance = 1e-6;

  bool operator==(const BandPolicy&) const = default;
};

struct MetricsOptions {
  double tolerance = 0.05;  // the 5% band
  BandPolicy band_policy;
  long long from_step = 0;  // earliest step eligible as a settling point
  bool operator==(const MetricsOptions&) const = default;
};

namespace detail {

inline bool within_band(double deviation, const MedianResult& m, double tolerance,
                        const BandPolicy& policy) {
  if (std::abs(m.point) < policy.median_floor) return deviation <= policy.absolute_tolerance;
  return deviation <= tolerance * std::abs(m.point);
}

inline MedianResult row_median(const Trace& tr, long long k) {
  std::vector<double> z(tr.z.begin() + static_cast<std::ptrdiff_t>(k) * tr.n,
                        tr.z.begin() + static_cast<std::ptrdiff_t>(k + 1) * tr.n);
  return median(std::move(z));
}

// Shared backward scan: finds the smallest k >= from_step such that
// row_ok holds for every row in [k, last]. Sustained entry, not first touch.
template <typename RowOk>
inline std::optional<long long> sustained_entry(const Trace& tr, long long from_step,
                                                RowOk&& row_ok) {
  const long long last = tr.total_steps;
  long long first_good = last + 1;
  for (long long k = last; k >= from_step; --k) {
    if (!row_ok(k)) break;
    first_good = k;
  }
  if (first_good > last) return std::nullopt;
  return first_good;
}

}  // namespace detail

// Smallest step from which every agent stays within tolerance of the
// (time-varying) measurement median for the rest of the trace.
inline std::optional<long long> settling_time(const Trace& tr, const MetricsOptions& opt = {}) {
  if (tr.rows() <= 0 || tr.n <= 0) throw empty_input_error("settling_time: empty trace");
  return detail::sustained_entry(tr, opt.from_step, [&](long long k) {
    const MedianResult m = detail::row_median(tr, k);
    for (int i = 0; i < tr.n; ++i) {
      if (!detail::within_band(median_distance(tr.x_at(k, i), m), m, opt.tolerance,
                               opt.band_policy))
        return false;
    }
    return true;
  });
}

// Smallest step from which the spread between the highest and lowest agent
// stays within tolerance of the median for the rest of the trace.
inline std::optional<long long> convergence_time(const Trace& tr,
                                                 const MetricsOptions& opt = {}) {
  if (tr.rows() <= 0 || tr.n <= 0) throw empty_input_error("convergence_time: empty trace");
  return detail::sustained_entry(tr, opt.from_step, [&](long long k) {
    double xmin = tr.x_at(k, 0), xmax = xmin;
    for (int i = 1; i < tr.n; ++i) {
      const double v = tr.x_at(k, i);
      xmin = std::min(xmin, v);
      xmax = std::max(xmax, v);
    }
    const MedianResult m = detail::row_median(tr, k);
    return detail::within_band(xmax - xmin, m, opt.tolerance, opt.band_policy);
  });
}

// Largest distance of any agent from the median over a row window,
// in signal units (used for absolute-band checks such as sine tracking).
inline double max_median_distance(const Trace& tr, long long window_begin,
                                  long long window_end) {
  if (window_begin < 0 || window_end > tr.total_steps || window_begin > window_end)
    throw range_error("max_median_distance: window outside trace");
  double worst = 0.0;
  for (long long k = window_begin; k <= window_end; ++k) {
    const MedianResult m = detail::row_median(tr, k);
    for (int i = 0; i < tr.n; ++i)
      worst = std::max(worst, median_distance(tr.x_at(k, i), m));
  }
  return worst;
}

struct SteadyStateError {
  double value = 0.0;                  // max relative deviation over the window
  bool window_before_settling = false; // warning: window starts pre-settling
};

// Max over the window of (distance to median) / |median point|, the relative
// steady-state error. Rows whose median sits under the floor contribute their
// absolute distance instead.
inline SteadyStateError steady_state_error(const Trace& tr, long long window_begin,
                                           long long window_end,
                                           const MetricsOptions& opt = {}) {
  if (window_begin < 0 || window_end > tr.total_steps || window_begin > window_end)
    throw range_error("steady_state_error: window outside trace");
  SteadyStateError out;
  for (long long k = window_begin; k <= window_end; ++k) {
    const MedianResult m = detail::row_median(tr, k);
    const double scale =
        std::abs(m.point) < opt.band_policy.median_floor ? 1.0 : std::abs(m.point);
    for (int i = 0; i < tr.n; ++i)
      out.value = std::max(out.value, median_distance(tr.x_at(k, i), m) / scale);
  }
  const std::optional<long long> ts = settling_time(tr, opt);
  out.window_before_settling = !ts.has_value() || *ts > window_begin;
  return out;
}

struct MetricsReport {
  std::optional<long long> t_s;  // settling time, empty = not reached
  std::optional<long long> t_c;  // convergence time, empty = not reached
  double epsilon_ss = 0.0;
  double band = 0.05;            // tolerance the times were measured against
  long long window_begin = 0;    // steady-state measurement window
  long long window_end = 0;
  bool window_before_settling = false;
};

// Full report for one trace. The steady-state window defaults to the final
// full communication cycle, rows [T - cycle, T].
inline MetricsReport compute_metrics(const Trace& tr, int cycle,
                                     const MetricsOptions& opt = {}) {
  MetricsReport rep;
  rep.band = opt.tolerance;
  rep.t_s = settling_time(tr, opt);
  rep.t_c = convergence_time(tr, opt);
  rep.window_begin = std::max<long long>(0, tr.total_steps - cycle);
  rep.window_end = tr.total_steps;
  const SteadyStateError e = steady_state_error(tr, rep.window_begin, rep.window_end, opt);
  rep.epsilon_ss = e.value;
  rep.window_before_settling = e.window_before_settling;
  return rep;
}

struct EnsembleStats {
  double mean = 0.0;
  double stddev = 0.0;      // sample standard deviation (n-1); 0 for one value
  long long count = 0;      // values that reached the metric
  long long not_reached = 0;
};

inline EnsembleStats ensemble_stats(const std::vector<std::optional<double>>& values) {
  if (values.empty()) throw empty_input_error("ensemble_stats: no values");
  EnsembleStats st;
  double sum = 0.0;
  for (const auto& v : values) {
    if (v.has_value()) {
      ++st.count;
      sum += *v;
    } else {
      ++st.not_reached;
    }
  }
  if (st.count == 0)
    throw undefined_stats_error("ensemble_stats: no run reached the metric");
  st.mean = sum / static_cast<double>(st.count);
  if (st.count > 1) {
    double ss = 0.0;
    for (const auto& v : values) {
      if (!v.has_value()) continue;
      const double d = *v - st.mean;
      ss += d * d;
    }
    st.stddev = std::sqrt(ss / static_cast<double>(st.count - 1));
  }
  return st;
}

}  // namespace medcon
