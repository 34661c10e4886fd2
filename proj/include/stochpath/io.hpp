#pragma once

// CSV price ingestion and result serialization.
//
// Price files: UTF-8, comma separated, header row with columns "date"
// (YYYY-MM-DD) and "close". Extra columns are ignored.
//
// Result bundles (JSON, schema_version 1):
//   schema_version, model ("gbm" | "heston"), scheme, config {n_paths, n_steps,
//   horizon, seed}, parameters {...}, warnings [...], summary {...},
//   report {...} (omitted when absent), paths_file (omitted when absent).
// Price-valued fields are rounded to 4 decimal places unless raw rendering is
// requested; parameters and the config are always written at full precision.

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <variant>
#include <vector>

#include <json.hpp>

#include "stochpath/calibration.hpp"
#include "stochpath/engine.hpp"
#include "stochpath/errors.hpp"
#include "stochpath/models.hpp"

namespace stochpath {

inline constexpr int kSchemaVersion = 1;

enum class Format { json, csv };
enum class PriceRendering { fixed4, raw };
enum class PathDump { full, terminal };

struct ResultBundle {
  int schema_version = kSchemaVersion;
  ModelParams model = GbmParams{};
  Scheme scheme = Scheme::gbm_exact;
  SimulationConfig config;
  SimulationSummary summary;
  std::optional<RangeErrorReport> report;
  std::optional<std::string> paths_file;

  friend bool operator==(const ResultBundle&, const ResultBundle&) = default;
};

// ---------------------------------------------------------------------------
// Number and date rendering

// Shortest decimal that parses back to the same double.
inline std::string format_raw(double x) {
  std::array<char, 64> buf{};
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), x);
  return std::string(buf.data(), res.ptr);
}

inline double round4(double x) { return std::round(x * 1e4) / 1e4; }

inline std::string format_fixed4(double x) {
  std::array<char, 64> buf{};
  const int len = std::snprintf(buf.data(), buf.size(), "%.4f", x);
  return std::string(buf.data(), static_cast<std::size_t>(len));
}

inline std::string format_price(double x, PriceRendering rendering) {
  return rendering == PriceRendering::raw ? format_raw(x) : format_fixed4(x);
}

inline std::string format_date(std::chrono::year_month_day d) {
  std::array<char, 16> buf{};
  std::snprintf(buf.data(), buf.size(), "%04d-%02u-%02u", static_cast<int>(d.year()),
                static_cast<unsigned>(d.month()), static_cast<unsigned>(d.day()));
  return buf.data();
}

inline std::optional<std::chrono::year_month_day> parse_date(std::string_view s) {
  if (s.size() != 10 || s[4] != '-' || s[7] != '-') return std::nullopt;
  auto digits = [&](std::size_t pos, std::size_t len, int& out) {
    const auto* first = s.data() + pos;
    const auto* last = first + len;
    if (!std::all_of(first, last, [](char c) { return c >= '0' && c <= '9'; })) return false;
    return std::from_chars(first, last, out).ec == std::errc{};
  };
  int y = 0;
  int m = 0;
  int d = 0;
  if (!digits(0, 4, y) || !digits(5, 2, m) || !digits(8, 2, d)) return std::nullopt;
  const std::chrono::year_month_day ymd{std::chrono::year{y},
                                        std::chrono::month{static_cast<unsigned>(m)},
                                        std::chrono::day{static_cast<unsigned>(d)}};
  if (!ymd.ok()) return std::nullopt;
  return ymd;
}

inline std::optional<double> parse_double(std::string_view s) {
  if (s.empty()) return std::nullopt;
  if (s.front() == '+') s.remove_prefix(1);
  double value = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), value);
  if (res.ec != std::errc{} || res.ptr != s.data() + s.size()) return std::nullopt;
  return value;
}

template <class Int>
std::optional<Int> parse_integer(std::string_view s) {
  Int value{};
  const auto res = std::from_chars(s.data(), s.data() + s.size(), value);
  if (s.empty() || res.ec != std::errc{} || res.ptr != s.data() + s.size()) return std::nullopt;
  return value;
}

// ---------------------------------------------------------------------------
// Minimal CSV reading

namespace detail {

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

// Splits one CSV record; double-quoted fields may contain commas and "" escapes.
inline std::vector<std::string> split_csv(std::string_view line) {
  std::vector<std::string> fields;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cur += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        cur += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.emplace_back(trim(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  fields.emplace_back(trim(cur));
  return fields;
}

inline std::string quote_csv(std::string_view field) {
  if (field.find_first_of(",\"\n") == std::string_view::npos) return std::string(field);
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;  // rows[i] is file line i + 2

  std::size_t column(std::string_view name) const {
    for (std::size_t i = 0; i < header.size(); ++i) {
      if (header[i] == name) return i;
    }
    throw SchemaError(std::string(name));
  }

  std::optional<std::size_t> find_column(std::string_view name) const {
    for (std::size_t i = 0; i < header.size(); ++i) {
      if (header[i] == name) return i;
    }
    return std::nullopt;
  }
};

inline CsvTable read_csv(std::istream& in) {
  std::vector<std::string> lines;
  for (std::string line; std::getline(in, line);) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(std::move(line));
  }
  while (!lines.empty() && trim(lines.back()).empty()) lines.pop_back();
  if (lines.empty()) throw SchemaError("date");

  CsvTable table;
  std::string_view head = lines.front();
  if (head.starts_with("\xEF\xBB\xBF")) head.remove_prefix(3);
  table.header = split_csv(head);
  for (auto& h : table.header) {
    std::transform(h.begin(), h.end(), h.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  }
  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (trim(lines[i]).empty()) throw ParseError(i + 1, "*", "empty row");
    table.rows.push_back(split_csv(lines[i]));
    if (table.rows.back().size() != table.header.size()) {
      throw ParseError(i + 1, "*",
                       "expected " + std::to_string(table.header.size()) + " fields, found " +
                           std::to_string(table.rows.back().size()));
    }
  }
  return table;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Price files

inline HistoricalSeries load_prices(std::istream& in, double dt = 1.0 / 252.0) {
  const auto table = detail::read_csv(in);
  const std::size_t date_col = table.column("date");
  const std::size_t close_col = table.column("close");

  HistoricalSeries series;
  series.dt = dt;
  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    const std::size_t row = i + 2;
    const auto& cells = table.rows[i];
    const auto date = parse_date(cells[date_col]);
    if (!date) throw ParseError(row, "date", "invalid date '" + cells[date_col] + "'");
    const auto close = parse_double(cells[close_col]);
    if (!close || !std::isfinite(*close)) {
      throw ParseError(row, "close", "invalid number '" + cells[close_col] + "'");
    }
    if (!(*close > 0.0)) throw DataError(row, "close must be positive, got " + cells[close_col]);
    if (!series.dates.empty()) {
      const std::chrono::sys_days prev{series.dates.back()};
      const std::chrono::sys_days cur{*date};
      if (cur == prev) throw DataError(row, "duplicate date " + cells[date_col]);
      if (cur < prev) throw DataError(row, "date " + cells[date_col] + " is not increasing");
    }
    series.dates.push_back(*date);
    series.closes.push_back(*close);
  }
  return series;
}

inline void write_prices(const HistoricalSeries& series, std::ostream& out) {
  out << "date,close\n";
  for (std::size_t i = 0; i < series.size(); ++i) {
    out << format_date(series.dates[i]) << ',' << format_raw(series.closes[i]) << '\n';
  }
}

// ---------------------------------------------------------------------------
// Parameter naming

inline std::string_view model_name(const ModelParams& model) {
  return std::holds_alternative<HestonParams>(model) ? "heston" : "gbm";
}

inline std::vector<std::pair<std::string, double>> parameter_list(const ModelParams& model) {
  if (const auto* g = std::get_if<GbmParams>(&model)) {
    return {{"mu", g->mu}, {"sigma", g->sigma}, {"x0", g->x0}};
  }
  const auto& h = std::get<HestonParams>(model);
  return {{"mu", h.mu},   {"kappa", h.kappa}, {"theta", h.theta}, {"sigma_v", h.sigma_v},
          {"rho", h.rho}, {"v0", h.v0},       {"x0", h.x0}};
}

namespace detail {

template <class Lookup>
ModelParams model_from(std::string_view name, Lookup&& get) {
  if (name == "gbm") return GbmParams{get("mu"), get("sigma"), get("x0")};
  if (name == "heston") {
    return HestonParams{get("mu"), get("kappa"), get("theta"), get("sigma_v"),
                        get("rho"), get("v0"),   get("x0")};
  }
  throw ParseError(0, "model", "unknown model '" + std::string(name) + "'");
}

inline std::string quantile_label(double level) {
  std::array<char, 8> buf{};
  std::snprintf(buf.data(), buf.size(), "p%02d", static_cast<int>(std::lround(level * 100.0)));
  return buf.data();
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Summary serialization

using ordered_json = nlohmann::ordered_json;

inline ordered_json summary_to_json(const SimulationSummary& s, PriceRendering rendering) {
  auto price = [&](double x) { return rendering == PriceRendering::raw ? x : round4(x); };
  ordered_json j;
  j["n_paths"] = s.n_paths;
  j["terminal_min"] = price(s.terminal_min);
  j["terminal_max"] = price(s.terminal_max);
  j["terminal_mean"] = price(s.terminal_mean);
  j["terminal_std"] = price(s.terminal_std);
  ordered_json q = ordered_json::object();
  for (std::size_t i = 0; i < kQuantileLevels.size(); ++i) {
    q[detail::quantile_label(kQuantileLevels[i])] = price(s.quantiles[i]);
  }
  j["quantiles"] = q;
  j["path_min"] = price(s.path_min);
  j["path_max"] = price(s.path_max);
  j["truncation_events"] = s.truncation_events;
  return j;
}

inline ordered_json report_to_json(const RangeErrorReport& r, PriceRendering rendering) {
  auto price = [&](double x) { return rendering == PriceRendering::raw ? x : round4(x); };
  ordered_json j;
  j["simulated_low"] = price(r.simulated_low);
  j["simulated_high"] = price(r.simulated_high);
  j["exact_low"] = price(r.exact_low);
  j["exact_high"] = price(r.exact_high);
  j["abs_error_low"] = price(r.abs_error_low);
  j["abs_error_high"] = price(r.abs_error_high);
  return j;
}

inline ordered_json bundle_to_json(const ResultBundle& b, PriceRendering rendering) {
  ordered_json j;
  j["schema_version"] = b.schema_version;
  j["model"] = model_name(b.model);
  j["scheme"] = to_string(b.scheme);
  j["config"] = {{"n_paths", b.config.n_paths},
                 {"n_steps", b.config.n_steps},
                 {"horizon", b.config.horizon},
                 {"seed", b.config.seed}};
  ordered_json params = ordered_json::object();
  for (const auto& [name, value] : parameter_list(b.model)) params[name] = value;
  j["parameters"] = params;
  ordered_json warnings = ordered_json::array();
  if (const auto* h = std::get_if<HestonParams>(&b.model)) {
    for (const auto& w : h->warnings()) warnings.push_back(w);
  }
  j["warnings"] = warnings;
  j["summary"] = summary_to_json(b.summary, rendering);
  if (b.report) j["report"] = report_to_json(*b.report, rendering);
  if (b.paths_file) j["paths_file"] = *b.paths_file;
  return j;
}

inline SimulationSummary summary_from_json(const ordered_json& j) {
  SimulationSummary s;
  s.n_paths = j.at("n_paths").get<std::size_t>();
  s.terminal_min = j.at("terminal_min").get<double>();
  s.terminal_max = j.at("terminal_max").get<double>();
  s.terminal_mean = j.at("terminal_mean").get<double>();
  s.terminal_std = j.at("terminal_std").get<double>();
  const auto& q = j.at("quantiles");
  for (std::size_t i = 0; i < kQuantileLevels.size(); ++i) {
    s.quantiles[i] = q.at(detail::quantile_label(kQuantileLevels[i])).get<double>();
  }
  s.path_min = j.at("path_min").get<double>();
  s.path_max = j.at("path_max").get<double>();
  s.truncation_events = j.at("truncation_events").get<std::size_t>();
  return s;
}

inline RangeErrorReport report_from_json(const ordered_json& j) {
  return {j.at("simulated_low").get<double>(), j.at("simulated_high").get<double>(),
          j.at("exact_low").get<double>(),     j.at("exact_high").get<double>(),
          j.at("abs_error_low").get<double>(), j.at("abs_error_high").get<double>()};
}

inline ResultBundle bundle_from_json(const ordered_json& j) {
  try {
    ResultBundle b;
    b.schema_version = j.at("schema_version").get<int>();
    if (b.schema_version != kSchemaVersion) {
      throw ParseError(0, "schema_version",
                       "unsupported schema version " + std::to_string(b.schema_version));
    }
    const auto& params = j.at("parameters");
    b.model = detail::model_from(j.at("model").get<std::string>(),
                                 [&](const char* name) { return params.at(name).get<double>(); });
    b.scheme = parse_scheme(j.at("scheme").get<std::string>());
    const auto& c = j.at("config");
    b.config.n_paths = c.at("n_paths").get<std::size_t>();
    b.config.n_steps = c.at("n_steps").get<std::size_t>();
    b.config.horizon = c.at("horizon").get<double>();
    b.config.seed = c.at("seed").get<std::uint64_t>();
    b.summary = summary_from_json(j.at("summary"));
    if (j.contains("report")) b.report = report_from_json(j.at("report"));
    if (j.contains("paths_file")) b.paths_file = j.at("paths_file").get<std::string>();
    return b;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(0, "json", e.what());
  } catch (const ConfigError& e) {
    throw ParseError(0, "scheme", e.what());
  }
}

namespace detail {

inline std::vector<std::string> summary_csv_columns(const ModelParams& model) {
  std::vector<std::string> cols{"schema_version", "model", "scheme", "seed",
                                "n_paths", "n_steps", "horizon"};
  for (const auto& [name, value] : parameter_list(model)) cols.push_back(name);
  for (const char* c : {"terminal_min", "terminal_max", "terminal_mean", "terminal_std"}) cols.emplace_back(c);
  for (double level : kQuantileLevels) cols.push_back(quantile_label(level));
  for (const char* c : {"path_min", "path_max", "truncation_events", "simulated_low",
                        "simulated_high", "exact_low", "exact_high", "abs_error_low",
                        "abs_error_high", "paths_file"}) {
    cols.emplace_back(c);
  }
  return cols;
}

}  // namespace detail

inline void write_summary_csv(const ResultBundle& b, std::ostream& out, PriceRendering rendering) {
  const auto cols = detail::summary_csv_columns(b.model);
  std::vector<std::string> cells;
  cells.push_back(std::to_string(b.schema_version));
  cells.emplace_back(model_name(b.model));
  cells.emplace_back(to_string(b.scheme));
  cells.push_back(std::to_string(b.config.seed));
  cells.push_back(std::to_string(b.config.n_paths));
  cells.push_back(std::to_string(b.config.n_steps));
  cells.push_back(format_raw(b.config.horizon));
  for (const auto& [name, value] : parameter_list(b.model)) cells.push_back(format_raw(value));
  const auto& s = b.summary;
  for (double x : {s.terminal_min, s.terminal_max, s.terminal_mean, s.terminal_std}) {
    cells.push_back(format_price(x, rendering));
  }
  for (double q : s.quantiles) cells.push_back(format_price(q, rendering));
  cells.push_back(format_price(s.path_min, rendering));
  cells.push_back(format_price(s.path_max, rendering));
  cells.push_back(std::to_string(s.truncation_events));
  if (b.report) {
    const auto& r = *b.report;
    for (double x : {r.simulated_low, r.simulated_high, r.exact_low, r.exact_high, r.abs_error_low,
                     r.abs_error_high}) {
      cells.push_back(format_price(x, rendering));
    }
  } else {
    cells.insert(cells.end(), 6, "");
  }
  cells.push_back(b.paths_file ? detail::quote_csv(*b.paths_file) : "");

  for (std::size_t i = 0; i < cols.size(); ++i) out << (i ? "," : "") << cols[i];
  out << '\n';
  for (std::size_t i = 0; i < cells.size(); ++i) out << (i ? "," : "") << cells[i];
  out << '\n';
}

// Deterministic field order; the seed is always embedded.
inline std::string write_summary(const ResultBundle& bundle, Format format,
                                 PriceRendering rendering = PriceRendering::fixed4) {
  std::ostringstream out;
  if (format == Format::json) {
    out << bundle_to_json(bundle, rendering).dump(2) << '\n';
  } else {
    write_summary_csv(bundle, out, rendering);
  }
  return out.str();
}

inline ResultBundle parse_summary_json(std::string_view text) {
  ordered_json j;
  try {
    j = ordered_json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(0, "json", e.what());
  }
  return bundle_from_json(j);
}

inline ResultBundle parse_summary_csv(std::istream& in) {
  const auto table = detail::read_csv(in);
  if (table.rows.size() != 1) throw ParseError(2, "*", "expected exactly one summary row");
  const auto& row = table.rows.front();
  auto cell = [&](std::string_view name) -> const std::string& { return row[table.column(name)]; };
  auto number = [&](std::string_view name) {
    const auto v = parse_double(cell(name));
    if (!v) throw ParseError(2, std::string(name), "invalid number '" + cell(name) + "'");
    return *v;
  };
  auto count = [&](std::string_view name) {
    const auto v = parse_integer<std::uint64_t>(cell(name));
    if (!v) throw ParseError(2, std::string(name), "invalid integer '" + cell(name) + "'");
    return *v;
  };

  ResultBundle b;
  b.schema_version = static_cast<int>(count("schema_version"));
  b.model = detail::model_from(cell("model"), [&](const char* name) { return number(name); });
  try {
    b.scheme = parse_scheme(cell("scheme"));
  } catch (const ConfigError& e) {
    throw ParseError(2, "scheme", e.what());
  }
  b.config.seed = count("seed");
  b.config.n_paths = count("n_paths");
  b.config.n_steps = count("n_steps");
  b.config.horizon = number("horizon");
  auto& s = b.summary;
  s.n_paths = b.config.n_paths;
  s.terminal_min = number("terminal_min");
  s.terminal_max = number("terminal_max");
  s.terminal_mean = number("terminal_mean");
  s.terminal_std = number("terminal_std");
  for (std::size_t i = 0; i < kQuantileLevels.size(); ++i) {
    s.quantiles[i] = number(detail::quantile_label(kQuantileLevels[i]));
  }
  s.path_min = number("path_min");
  s.path_max = number("path_max");
  s.truncation_events = count("truncation_events");
  if (!cell("simulated_low").empty()) {
    b.report = RangeErrorReport{number("simulated_low"), number("simulated_high"),
                                number("exact_low"),     number("exact_high"),
                                number("abs_error_low"), number("abs_error_high")};
  }
  if (!cell("paths_file").empty()) b.paths_file = cell("paths_file");
  return b;
}

// ---------------------------------------------------------------------------
// Path dumps

// Long format: path_index, step_index, time, price[, variance]. Terminal mode
// writes only the last grid point of each path. Indices start at first_index.
inline void write_paths(std::span<const PricePath> paths, std::ostream& out,
                        PathDump mode = PathDump::full, std::size_t first_index = 0) {
  if (paths.empty()) throw DomainError("no paths to write");
  const bool with_variance =
      std::any_of(paths.begin(), paths.end(), [](const PricePath& p) { return p.has_variances(); });
  out << "path_index,step_index,time,price" << (with_variance ? ",variance" : "") << '\n';
  for (std::size_t i = 0; i < paths.size(); ++i) {
    const auto& p = paths[i];
    const std::size_t begin = mode == PathDump::terminal ? p.n_steps() : 0;
    for (std::size_t k = begin; k < p.prices.size(); ++k) {
      out << first_index + i << ',' << k << ',' << format_raw(p.times[k]) << ','
          << format_raw(p.prices[k]);
      if (with_variance) out << ',' << (p.has_variances() ? format_raw(p.variances[k]) : "");
      out << '\n';
    }
  }
}

// ---------------------------------------------------------------------------
// Calibration reports

inline ordered_json calibration_to_json(const CalibrationReport& report,
                                        const HistoricalSeries& series) {
  ordered_json j;
  j["schema_version"] = kSchemaVersion;
  j["n_observations"] = series.size();
  j["dt"] = series.dt;
  ordered_json gbm = ordered_json::object();
  for (const auto& [name, value] : parameter_list(report.gbm)) gbm[name] = value;
  j["gbm"] = gbm;
  if (report.heston) {
    ordered_json h = ordered_json::object();
    for (const auto& [name, value] : parameter_list(*report.heston)) h[name] = value;
    j["heston"] = h;
  }
  ordered_json se = ordered_json::object();
  for (const auto& e : report.diagnostics.standard_errors) se[e.parameter] = e.value;
  j["standard_errors"] = se;
  j["warnings"] = report.diagnostics.warnings;
  return j;
}

}  // namespace stochpath
