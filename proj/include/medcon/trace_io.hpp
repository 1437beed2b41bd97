#pragma once

// Trace serialization. CSV column layout (docs/file_formats.md):
//   k,transmitter,x_0..x_{n-1},y_0..y_{n-1},z_0..z_{n-1},V,delivered
// Doubles are written in shortest round-trip form, so a written trace parses
// back bit-exactly. The delivered column is a hex bitmask (bit i = agent i).
// Files are written to a temp name and renamed into place.

#include <charconv>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "json.hpp"

#include "medcon/analysis.hpp"
#include "medcon/engine.hpp"
#include "medcon/errors.hpp"
#include "medcon/version.hpp"

namespace medcon {

inline std::string format_double(double v) {
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

inline double parse_double(std::string_view s, const std::string& context) {
  double v = 0.0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size())
    throw parse_error(context + ": bad number '" + std::string(s) + "'");
  return v;
}

inline long long parse_integer(std::string_view s, const std::string& context) {
  long long v = 0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size())
    throw parse_error(context + ": bad integer '" + std::string(s) + "'");
  return v;
}

namespace detail {

inline std::string mask_to_hex(const std::uint64_t* words, int n_words) {
  int top = n_words - 1;
  while (top > 0 && words[top] == 0) --top;
  char buf[17];
  auto word_hex = [&buf](std::uint64_t w) {
    auto res = std::to_chars(buf, buf + sizeof(buf), w, 16);
    return std::string(buf, res.ptr);
  };
  std::string out = "0x" + word_hex(words[top]);
  for (int w = top - 1; w >= 0; --w) {
    std::string h = word_hex(words[w]);
    out.append(16 - h.size(), '0');
    out += h;
  }
  return out;
}

inline void hex_to_mask(std::string_view s, std::uint64_t* words, int n_words,
                        const std::string& context) {
  if (s.size() < 3 || s[0] != '0' || s[1] != 'x')
    throw parse_error(context + ": bad mask '" + std::string(s) + "'");
  s.remove_prefix(2);
  for (int w = 0; w < n_words; ++w) words[w] = 0;
  int w = 0;
  while (!s.empty() && w < n_words) {
    const std::size_t take = s.size() >= 16 ? 16 : s.size();
    std::string_view chunk = s.substr(s.size() - take);
    std::uint64_t v = 0;
    auto res = std::from_chars(chunk.data(), chunk.data() + chunk.size(), v, 16);
    if (res.ec != std::errc() || res.ptr != chunk.data() + chunk.size())
      throw parse_error(context + ": bad mask digits '" + std::string(chunk) + "'");
    words[w++] = v;
    s.remove_suffix(take);
  }
  if (!s.empty()) throw parse_error(context + ": mask wider than " +
                                    std::to_string(n_words * 64) + " bits");
}

// Streams content through a sibling temp file, then renames into place.
template <typename WriteFn>
inline void write_file_atomic(const std::filesystem::path& path, WriteFn&& body) {
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw io_error("cannot open " + tmp.string() + " for writing");
    body(out);
    out.flush();
    if (!out) throw io_error("write failed for " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp);
    throw io_error("cannot move " + tmp.string() + " to " + path.string() + ": " +
                   ec.message());
  }
}

}  // namespace detail

inline void write_text_atomic(const std::filesystem::path& path, const std::string& content) {
  detail::write_file_atomic(path, [&](std::ofstream& out) { out << content; });
}

inline std::string trace_csv_header(int n) {
  std::string h = "k,transmitter";
  for (int i = 0; i < n; ++i) h += ",x_" + std::to_string(i);
  for (int i = 0; i < n; ++i) h += ",y_" + std::to_string(i);
  for (int i = 0; i < n; ++i) h += ",z_" + std::to_string(i);
  h += ",V,delivered";
  return h;
}

inline void write_trace_csv(const std::filesystem::path& path, const Trace& tr) {
  detail::write_file_atomic(path, [&](std::ofstream& out) {
    out << trace_csv_header(tr.n) << '\n';
    std::string line;
    for (long long k = 0; k <= tr.total_steps; ++k) {
      line.clear();
      line += std::to_string(k);
      line += ',';
      line += std::to_string(tr.transmitter[static_cast<std::size_t>(k)]);
      const std::size_t base = static_cast<std::size_t>(k) * tr.n;
      for (int i = 0; i < tr.n; ++i) {
        line += ',';
        line += format_double(tr.x[base + i]);
      }
      for (int i = 0; i < tr.n; ++i) {
        line += ',';
        line += format_double(tr.y[base + i]);
      }
      for (int i = 0; i < tr.n; ++i) {
        line += ',';
        line += format_double(tr.z[base + i]);
      }
      line += ',';
      line += format_double(tr.lyapunov[static_cast<std::size_t>(k)]);
      line += ',';
      line += detail::mask_to_hex(
          tr.delivered.data() + static_cast<std::size_t>(k) * tr.mask_words, tr.mask_words);
      line += '\n';
      out << line;
    }
  });
}

namespace detail {

inline std::vector<std::string_view> split_csv(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = line.find(',', start);
    if (pos == std::string_view::npos) {
      out.push_back(line.substr(start));
      break;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
  return out;
}

}  // namespace detail

// Parses a trace CSV back. The y-band flags are not stored in the file; they
// are deterministic given params and neighbor counts, see recompute_y_band.
inline Trace read_trace_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw io_error("cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw parse_error(path.string() + ": empty file");
  if (!line.empty() && line.back() == '\r') line.pop_back();

  // Header tells us n: columns are k, transmitter, 3n series, V, delivered.
  const auto cols = detail::split_csv(line);
  if (cols.size() < 7 || (cols.size() - 4) % 3 != 0)
    throw parse_error(path.string() + ": unexpected column count in header");
  const int n = static_cast<int>((cols.size() - 4) / 3);
  if (line != trace_csv_header(n))
    throw parse_error(path.string() + ": header does not match the trace format");

  Trace tr;
  tr.n = n;
  tr.mask_words = (n + 63) / 64;
  long long row = 0;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const std::string ctx = path.string() + ":" + std::to_string(row + 2);
    const auto f = detail::split_csv(line);
    if (f.size() != cols.size())
      throw parse_error(ctx + ": expected " + std::to_string(cols.size()) + " fields, got " +
                        std::to_string(f.size()));
    if (parse_integer(f[0], ctx) != row)
      throw parse_error(ctx + ": step index out of order");
    tr.transmitter.push_back(static_cast<int>(parse_integer(f[1], ctx)));
    std::size_t c = 2;
    for (int i = 0; i < n; ++i) tr.x.push_back(parse_double(f[c++], ctx));
    for (int i = 0; i < n; ++i) tr.y.push_back(parse_double(f[c++], ctx));
    for (int i = 0; i < n; ++i) tr.z.push_back(parse_double(f[c++], ctx));
    tr.lyapunov.push_back(parse_double(f[c++], ctx));
    tr.delivered.resize(tr.delivered.size() + tr.mask_words, 0);
    detail::hex_to_mask(f[c], tr.delivered.data() + (row * tr.mask_words), tr.mask_words, ctx);
    ++row;
  }
  if (row == 0) throw parse_error(path.string() + ": no data rows");
  tr.total_steps = row - 1;
  tr.y_band.assign(static_cast<std::size_t>(row) * tr.mask_words, 0);
  return tr;
}

inline void recompute_y_band(Trace& tr, double alpha, const std::vector<int>& r) {
  if (r.size() != static_cast<std::size_t>(tr.n))
    throw invalid_size_error("recompute_y_band: neighbor counts do not match trace width");
  std::fill(tr.y_band.begin(), tr.y_band.end(), 0);
  for (long long k = 0; k <= tr.total_steps; ++k) {
    for (int i = 0; i < tr.n; ++i) {
      if (std::abs(tr.y_at(k, i)) > 2.0 * alpha / r[i])
        tr.y_band[static_cast<std::size_t>(k) * tr.mask_words + i / 64] |= 1ULL << (i % 64);
    }
  }
}

// Plot-ready series, one file per figure family: agent states (with the
// running median interval), auxiliary states, measurements, spread diagnostic.
inline void write_plot_files(const std::filesystem::path& dir, const Trace& tr) {
  namespace fs = std::filesystem;
  detail::write_file_atomic(dir / "plot_x.csv", [&](std::ofstream& out) {
    std::string h = "k";
    for (int i = 0; i < tr.n; ++i) h += ",x_" + std::to_string(i);
    out << h << ",median_low,median_high\n";
    for (long long k = 0; k <= tr.total_steps; ++k) {
      const MedianResult m = detail::row_median(tr, k);
      std::string line = std::to_string(k);
      for (int i = 0; i < tr.n; ++i) {
        line += ',';
        line += format_double(tr.x_at(k, i));
      }
      line += ',';
      line += format_double(m.low);
      line += ',';
      line += format_double(m.high);
      out << line << '\n';
    }
  });
  auto series = [&](const fs::path& path, const char* prefix,
                    const std::vector<double>& data) {
    detail::write_file_atomic(path, [&](std::ofstream& out) {
      std::string h = "k";
      for (int i = 0; i < tr.n; ++i) h += "," + std::string(prefix) + "_" + std::to_string(i);
      out << h << '\n';
      for (long long k = 0; k <= tr.total_steps; ++k) {
        std::string line = std::to_string(k);
        const std::size_t base = static_cast<std::size_t>(k) * tr.n;
        for (int i = 0; i < tr.n; ++i) {
          line += ',';
          line += format_double(data[base + i]);
        }
        out << line << '\n';
      }
    });
  };
  series(dir / "plot_y.csv", "y", tr.y);
  series(dir / "plot_z.csv", "z", tr.z);
  detail::write_file_atomic(dir / "plot_v.csv", [&](std::ofstream& out) {
    out << "k,V\n";
    for (long long k = 0; k <= tr.total_steps; ++k)
      out << k << ',' << format_double(tr.lyapunov[static_cast<std::size_t>(k)]) << '\n';
  });
}

inline nlohmann::json metrics_to_json(const MetricsReport& rep) {
  nlohmann::json j;
  j["t_s"] = rep.t_s.has_value() ? nlohmann::json(*rep.t_s) : nlohmann::json(nullptr);
  j["t_c"] = rep.t_c.has_value() ? nlohmann::json(*rep.t_c) : nlohmann::json(nullptr);
  j["epsilon_ss"] = rep.epsilon_ss;
  j["band"] = rep.band;
  j["window"] = {rep.window_begin, rep.window_end};
  j["window_before_settling"] = rep.window_before_settling;
  return j;
}

}  // namespace medcon
