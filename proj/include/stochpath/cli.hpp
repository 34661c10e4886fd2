#pragma once

// Command-line front end: estimate, simulate, compare.
//
// Exit status: 0 success, 2 usage error, 3 data error, 4 I/O error.

#include <cstdint>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <CLI11.hpp>

#include "stochpath/calibration.hpp"
#include "stochpath/engine.hpp"
#include "stochpath/errors.hpp"
#include "stochpath/io.hpp"
#include "stochpath/models.hpp"

namespace stochpath::cli {

enum ExitCode : int { kOk = 0, kUsage = 2, kData = 3, kIo = 4 };

class UsageError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

// Wraps a failure caused by the content of an input file.
class InputDataError : public Error {
 public:
  using Error::Error;
};

struct ParameterOverrides {
  std::optional<double> mu;
  std::optional<double> sigma;
  std::optional<double> x0;
  std::optional<double> kappa;
  std::optional<double> theta;
  std::optional<double> sigma_v;
  std::optional<double> rho;
  std::optional<double> v0;
};

struct CliConfig {
  std::string subcommand;
  std::string model = "gbm";     // gbm | heston | both
  std::string scheme;  // exact | em; empty picks exact for GBM, em for Heston
  std::string input;
  std::string output;
  std::string format = "json";
  bool raw = false;
  ParameterOverrides overrides;
  std::size_t n_paths = 10000;
  std::size_t n_steps = 1;
  double horizon = 1.0 / kTradingDaysPerYear;
  std::uint64_t seed = 0;
  bool random_seed = false;
  std::optional<double> exact_low;
  std::optional<double> exact_high;
  std::size_t window = kDefaultVarianceWindow;
  double dt = 1.0 / kTradingDaysPerYear;
  std::string paths_output;
  bool terminal_only = false;
  std::string range_basis = "terminal";
  unsigned threads = 0;
  bool independent_draws = false;
  std::vector<double> heston_range;  // bypass: simulated [low, high] fed directly
  std::vector<double> gbm_range;
};

// Accepts decimals and fractions such as "1/252".
inline double parse_time(const std::string& text) {
  const auto slash = text.find('/');
  if (slash == std::string::npos) {
    if (auto v = parse_double(text)) return *v;
  } else {
    const auto num = parse_double(text.substr(0, slash));
    const auto den = parse_double(text.substr(slash + 1));
    if (num && den && *den != 0.0) return *num / *den;
  }
  throw UsageError("invalid time value '" + text + "'");
}

namespace detail {

inline HistoricalSeries read_series(const std::string& path, double dt) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open input file '" + path + "'");
  try {
    return load_prices(in, dt);
  } catch (const Error& e) {
    throw InputDataError(path + ": " + e.what());
  }
}

inline void write_text(const std::string& path, const std::string& text, std::ostream& fallback) {
  if (path.empty()) {
    fallback << text;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open output file '" + path + "'");
  out << text;
  if (!out) throw IoError("failed writing output file '" + path + "'");
}

inline double require(const std::optional<double>& value, const char* flag) {
  if (!value) {
    throw UsageError(std::string("missing parameter ") + flag +
                     " (give it explicitly or pass --input to calibrate)");
  }
  return *value;
}

template <class F>
auto calibrating(F&& f) {
  try {
    return f();
  } catch (const DomainError& e) {
    throw InputDataError(e.what());
  } catch (const EstimationError& e) {
    throw InputDataError(e.what());
  }
}

inline std::string format_days(double horizon) {
  const double days = horizon * kTradingDaysPerYear;
  std::ostringstream s;
  s << days << (days == 1.0 ? " day" : " days");
  return s.str();
}

}  // namespace detail

// Calibrated values (when an input series is given) overlaid with explicit overrides.
struct EffectiveParameters {
  std::optional<GbmParams> gbm;
  std::optional<HestonParams> heston;
};

inline EffectiveParameters resolve_parameters(const CliConfig& cfg, bool need_gbm, bool need_heston) {
  ParameterOverrides base;
  if (!cfg.input.empty()) {
    const auto series = detail::read_series(cfg.input, cfg.dt);
    const auto gbm = detail::calibrating([&] { return estimate_gbm(series); });
    base.mu = gbm.mu;
    base.sigma = gbm.sigma;
    base.x0 = gbm.x0;
    if (need_heston) {
      const auto h = detail::calibrating([&] { return estimate_heston(series, cfg.window); });
      base.kappa = h.kappa;
      base.theta = h.theta;
      base.sigma_v = h.sigma_v;
      base.rho = h.rho;
      base.v0 = h.v0;
    }
  }
  const auto& o = cfg.overrides;
  auto pick = [](const std::optional<double>& over, const std::optional<double>& cal) {
    return over ? over : cal;
  };
  EffectiveParameters eff;
  const auto mu = pick(o.mu, base.mu);
  const auto x0 = pick(o.x0, base.x0);
  if (need_gbm) {
    eff.gbm = GbmParams{detail::require(mu, "--mu"), detail::require(pick(o.sigma, base.sigma), "--sigma"),
                        detail::require(x0, "--x0")};
  }
  if (need_heston) {
    eff.heston = HestonParams{detail::require(mu, "--mu"),
                              detail::require(pick(o.kappa, base.kappa), "--kappa"),
                              detail::require(pick(o.theta, base.theta), "--theta"),
                              detail::require(pick(o.sigma_v, base.sigma_v), "--sigma-v"),
                              detail::require(pick(o.rho, base.rho), "--rho"),
                              detail::require(pick(o.v0, base.v0), "--v0"),
                              detail::require(x0, "--x0")};
  }
  try {
    if (eff.gbm) eff.gbm->validate();
    if (eff.heston) eff.heston->validate();
  } catch (const DomainError& e) {
    throw UsageError(e.what());
  }
  return eff;
}

inline std::uint64_t effective_seed(const CliConfig& cfg) {
  if (!cfg.random_seed) return cfg.seed;
  std::random_device rd;
  return (static_cast<std::uint64_t>(rd()) << 32) ^ rd();
}

inline SimulationConfig simulation_config(const CliConfig& cfg, std::uint64_t seed) {
  SimulationConfig sc{cfg.n_paths, cfg.n_steps, cfg.horizon, seed};
  try {
    sc.validate();
  } catch (const ConfigError& e) {
    throw UsageError(e.what());
  }
  return sc;
}

inline RangeBasis range_basis(const CliConfig& cfg) {
  if (cfg.range_basis == "terminal") return RangeBasis::terminal;
  if (cfg.range_basis == "path") return RangeBasis::whole_path;
  throw UsageError("--range-basis must be 'terminal' or 'path'");
}

inline Scheme gbm_scheme(const CliConfig& cfg) {
  if (cfg.scheme.empty() || cfg.scheme == "exact") return Scheme::gbm_exact;
  if (cfg.scheme == "em") return Scheme::gbm_em;
  throw UsageError("--scheme must be 'exact' or 'em'");
}

inline std::optional<std::pair<double, double>> exact_range(const CliConfig& cfg) {
  if (cfg.exact_low.has_value() != cfg.exact_high.has_value()) {
    throw UsageError("--exact-low and --exact-high must be given together");
  }
  if (!cfg.exact_low) return std::nullopt;
  if (!(*cfg.exact_low <= *cfg.exact_high)) throw UsageError("--exact-low must not exceed --exact-high");
  return std::pair{*cfg.exact_low, *cfg.exact_high};
}

// ---------------------------------------------------------------------------

inline std::string render_calibration_text(const CalibrationReport& r, const HistoricalSeries& s) {
  std::ostringstream out;
  out << "observations: " << s.size() << "\n";
  for (const auto& [name, value] : parameter_list(r.gbm)) out << "gbm." << name << " = " << format_raw(value) << "\n";
  if (r.heston) {
    for (const auto& [name, value] : parameter_list(*r.heston)) {
      out << "heston." << name << " = " << format_raw(value) << "\n";
    }
  }
  for (const auto& se : r.diagnostics.standard_errors) {
    out << "stderr(" << se.parameter << ") = " << format_raw(se.value) << "\n";
  }
  for (const auto& w : r.diagnostics.warnings) out << "warning: " << w << "\n";
  return out.str();
}

inline int cmd_estimate(const CliConfig& cfg, std::ostream& out, std::ostream& err) {
  if (cfg.input.empty()) throw UsageError("estimate requires --input");
  if (cfg.model != "gbm" && cfg.model != "heston" && cfg.model != "both") {
    throw UsageError("--model must be gbm, heston or both");
  }
  if (cfg.format != "text" && cfg.format != "json") throw UsageError("--format must be text or json");
  const auto series = detail::read_series(cfg.input, cfg.dt);

  CalibrationReport report = detail::calibrating([&] { return calibrate(series, false); });
  std::optional<std::string> heston_failure;
  if (cfg.model != "gbm") {
    try {
      report = detail::calibrating([&] { return calibrate(series, true, cfg.window); });
    } catch (const InputDataError& e) {
      heston_failure = e.what();
    }
  }
  const std::string text = cfg.format == "json"
                               ? calibration_to_json(report, series).dump(2) + "\n"
                               : render_calibration_text(report, series);
  detail::write_text(cfg.output, text, out);
  if (heston_failure) {
    err << "error: Heston estimation refused: " << *heston_failure << "\n";
    return kData;
  }
  return kOk;
}

inline int cmd_simulate(const CliConfig& cfg, std::ostream& out, std::ostream&) {
  Scheme scheme{};
  bool heston = false;
  if (cfg.model == "gbm") {
    scheme = gbm_scheme(cfg);
  } else if (cfg.model == "heston") {
    if (!cfg.scheme.empty() && cfg.scheme != "em") throw UsageError("the Heston model only supports --scheme em");
    scheme = Scheme::heston_em;
    heston = true;
  } else {
    throw UsageError("simulate needs --model gbm or --model heston");
  }
  if (cfg.format != "json" && cfg.format != "csv") throw UsageError("--format must be json or csv");
  const auto basis = range_basis(cfg);
  const auto exact = exact_range(cfg);
  const auto eff = resolve_parameters(cfg, !heston, heston);
  const auto sc = simulation_config(cfg, effective_seed(cfg));

  ResultBundle bundle;
  bundle.model = heston ? ModelParams{*eff.heston} : ModelParams{*eff.gbm};
  bundle.scheme = scheme;
  bundle.config = sc;
  EngineOptions opts;
  opts.threads = cfg.threads;
  opts.path_storage_cap = cfg.paths_output.empty() ? 0 : sc.n_paths;
  const auto result = run_simulation(bundle.model, sc, scheme, opts);
  bundle.summary = result.summary;
  if (exact) bundle.report = range_error(result.summary, exact->first, exact->second, basis);
  if (!cfg.paths_output.empty()) {
    std::ostringstream dump;
    write_paths(result.paths, dump, cfg.terminal_only ? PathDump::terminal : PathDump::full);
    detail::write_text(cfg.paths_output, dump.str(), out);
    bundle.paths_file = cfg.paths_output;
  }
  const auto text = write_summary(bundle, cfg.format == "csv" ? Format::csv : Format::json,
                                  cfg.raw ? PriceRendering::raw : PriceRendering::fixed4);
  detail::write_text(cfg.output, text, out);
  return kOk;
}

struct ComparisonEntry {
  std::string label;
  RangeErrorReport report;
  std::optional<ResultBundle> bundle;  // absent in bypass mode
};

// Table 1 / Table 2 style side-by-side layout.
inline std::string render_comparison_table(const std::vector<ComparisonEntry>& entries,
                                           double horizon) {
  std::ostringstream out;
  auto row = [&](const std::string& label, const std::vector<std::string>& cells) {
    out << std::left << std::setw(24) << label;
    for (const auto& c : cells) out << std::setw(24) << c;
    out << "\n";
  };
  std::vector<std::string> names;
  std::vector<std::string> variation;
  std::vector<std::string> simulated;
  std::vector<std::string> exact;
  std::vector<std::string> err_lo;
  std::vector<std::string> err_hi;
  for (const auto& e : entries) {
    names.push_back(e.label);
    variation.push_back(detail::format_days(horizon));
    simulated.push_back(format_fixed4(e.report.simulated_low) + " - " + format_fixed4(e.report.simulated_high));
    exact.push_back(format_fixed4(e.report.exact_low) + " - " + format_fixed4(e.report.exact_high));
    err_lo.push_back(format_fixed4(e.report.abs_error_low));
    err_hi.push_back(format_fixed4(e.report.abs_error_high));
  }
  row("", names);
  row("Variation of Prices", variation);
  row("Simulated Range", simulated);
  row("Exact Range", exact);
  out << "\n";
  row("Absolute Error", names);
  row("Minimum", err_lo);
  row("Maximum", err_hi);
  return out.str();
}

inline int cmd_compare(const CliConfig& cfg, std::ostream& out, std::ostream&) {
  const auto exact = exact_range(cfg);
  if (!exact) throw UsageError("compare requires --exact-low and --exact-high");
  const bool bypass = !cfg.heston_range.empty() || !cfg.gbm_range.empty();

  std::vector<ComparisonEntry> entries;
  nlohmann::ordered_json doc;
  doc["schema_version"] = kSchemaVersion;
  doc["kind"] = "comparison";
  doc["exact_low"] = exact->first;
  doc["exact_high"] = exact->second;
  const auto rendering = cfg.raw ? PriceRendering::raw : PriceRendering::fixed4;

  if (bypass) {
    if (cfg.heston_range.size() != 2 || cfg.gbm_range.size() != 2) {
      throw UsageError("bypass mode needs both --heston-range and --gbm-range");
    }
    entries.push_back({"Heston Model",
                       range_error(cfg.heston_range[0], cfg.heston_range[1], exact->first, exact->second),
                       std::nullopt});
    entries.push_back({"GBM Model",
                       range_error(cfg.gbm_range[0], cfg.gbm_range[1], exact->first, exact->second),
                       std::nullopt});
    doc["bypass"] = true;
    doc["heston"] = {{"report", report_to_json(entries[0].report, rendering)}};
    doc["gbm"] = {{"report", report_to_json(entries[1].report, rendering)}};
  } else {
    const auto basis = range_basis(cfg);
    const auto eff = resolve_parameters(cfg, true, true);
    const auto sc = simulation_config(cfg, effective_seed(cfg));
    EngineOptions opts;
    opts.threads = cfg.threads;
    opts.path_storage_cap = 0;

    ResultBundle hb;
    hb.model = *eff.heston;
    hb.scheme = Scheme::heston_em;
    hb.config = sc;
    hb.summary = run_simulation(hb.model, sc, hb.scheme, opts).summary;
    hb.report = range_error(hb.summary, exact->first, exact->second, basis);

    // Coupled by default: GBM reads its shocks from lane 0, the same lane that
    // carries the Heston price shocks.
    ResultBundle gb;
    gb.model = *eff.gbm;
    gb.scheme = gbm_scheme(cfg);
    gb.config = sc;
    EngineOptions gopts = opts;
    if (cfg.independent_draws) gopts.lane_offset = 2;
    gb.summary = run_simulation(gb.model, sc, gb.scheme, gopts).summary;
    gb.report = range_error(gb.summary, exact->first, exact->second, basis);

    entries.push_back({"Heston Model", *hb.report, hb});
    entries.push_back({"GBM Model", *gb.report, gb});
    doc["bypass"] = false;
    doc["coupled"] = !cfg.independent_draws;
    doc["seed"] = sc.seed;
    doc["heston"] = bundle_to_json(hb, rendering);
    doc["gbm"] = bundle_to_json(gb, rendering);
  }

  const auto table = render_comparison_table(entries, cfg.horizon);
  out << table;
  if (!cfg.output.empty()) detail::write_text(cfg.output, doc.dump(2) + "\n", out);
  return kOk;
}

// ---------------------------------------------------------------------------

inline void add_model_options(CLI::App& app, CliConfig& cfg) {
  auto& o = cfg.overrides;
  app.add_option("--mu,--r", o.mu, "drift / rate of return per year");
  app.add_option("--sigma", o.sigma, "GBM volatility per sqrt(year)");
  app.add_option("--x0", o.x0, "initial price");
  app.add_option("--kappa", o.kappa, "Heston mean-reversion rate");
  app.add_option("--theta", o.theta, "Heston long-run variance");
  app.add_option("--sigma-v", o.sigma_v, "Heston volatility of variance");
  app.add_option("--rho", o.rho, "Heston price/variance correlation");
  app.add_option("--v0", o.v0, "Heston initial variance");
}

inline void add_run_options(CLI::App& app, CliConfig& cfg) {
  app.add_option("--scheme", cfg.scheme, "exact | em (GBM only; Heston always uses em)");
  app.add_option("--n-paths", cfg.n_paths, "number of simulated paths")->capture_default_str();
  app.add_option("--n-steps", cfg.n_steps, "time steps per path")->capture_default_str();
  app.add_option_function<std::string>(
         "--horizon", [&cfg](const std::string& v) { cfg.horizon = parse_time(v); },
         "horizon in years, e.g. 1/252")
      ->default_str("1/252");
  app.add_option("--seed", cfg.seed, "random seed")->capture_default_str();
  app.add_flag("--random-seed", cfg.random_seed, "draw the seed from the system entropy source");
  app.add_option("--exact-low", cfg.exact_low, "realized range low");
  app.add_option("--exact-high", cfg.exact_high, "realized range high");
  app.add_option("--range-basis", cfg.range_basis, "terminal | path")->capture_default_str();
  app.add_option("--threads", cfg.threads, "worker threads (0 = all cores)")->capture_default_str();
  app.add_option("--window", cfg.window, "variance proxy window")->capture_default_str();
  app.add_flag("--raw", cfg.raw, "write prices at full precision");
}

inline int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CliConfig cfg;
  CLI::App app{"stochpath: GBM and Heston Monte Carlo price-range forecasts"};
  app.require_subcommand(1);

  auto* estimate = app.add_subcommand("estimate", "calibrate GBM/Heston parameters from a price CSV");
  estimate->add_option("--input,-i", cfg.input, "price CSV (date,close)")->required();
  estimate->add_option("--output,-o", cfg.output, "write the report here instead of stdout");
  // Options share cfg across subcommands, so estimate's defaults are applied after parsing.
  auto* estimate_model = estimate->add_option("--model", cfg.model, "gbm | heston | both")->default_str("both");
  auto* estimate_format = estimate->add_option("--format", cfg.format, "text | json")->default_str("text");
  estimate->add_option("--window", cfg.window, "variance proxy window")->capture_default_str();
  estimate->add_option_function<std::string>(
      "--dt", [&cfg](const std::string& v) { cfg.dt = parse_time(v); }, "years per row (default 1/252)");

  auto* simulate = app.add_subcommand("simulate", "run a Monte Carlo forecast");
  simulate->add_option("--model", cfg.model, "gbm | heston")->capture_default_str();
  simulate->add_option("--input,-i", cfg.input, "price CSV to calibrate from");
  simulate->add_option("--output,-o", cfg.output, "summary file (default stdout)");
  simulate->add_option("--format", cfg.format, "json | csv")->capture_default_str();
  simulate->add_option("--paths-output", cfg.paths_output, "write a long-format path dump");
  simulate->add_flag("--terminal-only", cfg.terminal_only, "dump only terminal prices");
  add_model_options(*simulate, cfg);
  add_run_options(*simulate, cfg);

  auto* compare = app.add_subcommand("compare", "Heston vs GBM ranges and endpoint errors");
  compare->add_option("--input,-i", cfg.input, "price CSV to calibrate from");
  compare->add_option("--output,-o", cfg.output, "JSON comparison file");
  compare->add_flag("--independent-draws", cfg.independent_draws,
                    "give GBM its own shocks instead of sharing the Heston price shocks");
  compare->add_option("--heston-range", cfg.heston_range, "bypass: simulated Heston low high")->expected(2);
  compare->add_option("--gbm-range", cfg.gbm_range, "bypass: simulated GBM low high")->expected(2);
  add_model_options(*compare, cfg);
  add_run_options(*compare, cfg);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "usage error: " << e.what() << "\n";
    return kUsage;
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << "\n";
    return kUsage;
  }

  try {
    if (estimate->parsed()) {
      cfg.subcommand = "estimate";
      if (estimate_model->count() == 0) cfg.model = "both";
      if (estimate_format->count() == 0) cfg.format = "text";
      return cmd_estimate(cfg, out, err);
    }
    if (simulate->parsed()) {
      cfg.subcommand = "simulate";
      return cmd_simulate(cfg, out, err);
    }
    cfg.subcommand = "compare";
    return cmd_compare(cfg, out, err);
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << "\n";
    return kUsage;
  } catch (const ConfigError& e) {
    err << "usage error: " << e.what() << "\n";
    return kUsage;
  } catch (const IoError& e) {
    err << "i/o error: " << e.what() << "\n";
    return kIo;
  } catch (const InputDataError& e) {
    err << "data error: " << e.what() << "\n";
    return kData;
  } catch (const DomainError& e) {
    err << "usage error: " << e.what() << "\n";
    return kUsage;
  } catch (const Error& e) {
    err << "data error: " << e.what() << "\n";
    return kData;
  }
}

}  // namespace stochpath::cli
