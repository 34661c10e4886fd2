#pragma once

// N-path Monte Carlo runs, terminal statistics, and range/error reports.
//
// Path i draws its variates from RandomStream(seed, i, lane): lane 0 carries
// the price shocks for every scheme and lane 1 the Heston variance shocks.
// Workers fill per-index slots and the reduction runs in index order, so the
// summary is bit-identical for any thread count.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstdlib>
#include <exception>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <thread>
#include <variant>
#include <vector>

#include "stochpath/errors.hpp"
#include "stochpath/models.hpp"
#include "stochpath/random.hpp"

namespace stochpath {

inline constexpr double kTradingDaysPerYear = 252.0;

enum class Scheme { gbm_exact, gbm_em, heston_em };

inline std::string_view to_string(Scheme scheme) {
  switch (scheme) {
    case Scheme::gbm_exact: return "gbm-exact";
    case Scheme::gbm_em: return "gbm-em";
    case Scheme::heston_em: return "heston-em";
  }
  return "unknown";
}

inline Scheme parse_scheme(std::string_view name) {
  if (name == "gbm-exact") return Scheme::gbm_exact;
  if (name == "gbm-em") return Scheme::gbm_em;
  if (name == "heston-em") return Scheme::heston_em;
  throw ConfigError("unknown scheme '" + std::string(name) + "'");
}

using ModelParams = std::variant<GbmParams, HestonParams>;

struct SimulationConfig {
  std::size_t n_paths = 10000;
  std::size_t n_steps = 1;
  double horizon = 1.0 / kTradingDaysPerYear;
  std::uint64_t seed = 0;

  void validate() const {
    if (n_paths < 1) throw ConfigError("n_paths must be >= 1");
    if (n_steps < 1) throw ConfigError("n_steps must be >= 1");
    if (!(horizon > 0.0) || !std::isfinite(horizon)) throw ConfigError("horizon must be > 0");
  }

  friend bool operator==(const SimulationConfig&, const SimulationConfig&) = default;
};

inline constexpr std::array<double, 7> kQuantileLevels{0.01, 0.05, 0.25, 0.50, 0.75, 0.95, 0.99};

struct SimulationSummary {
  std::size_t n_paths = 0;
  double terminal_min = 0.0;
  double terminal_max = 0.0;
  double terminal_mean = 0.0;
  double terminal_std = 0.0;
  std::array<double, kQuantileLevels.size()> quantiles{};  // aligned with kQuantileLevels
  double path_min = 0.0;  // over every grid point of every path
  double path_max = 0.0;
  std::size_t truncation_events = 0;

  double quantile(double level) const {
    for (std::size_t i = 0; i < kQuantileLevels.size(); ++i) {
      if (kQuantileLevels[i] == level) return quantiles[i];
    }
    throw DomainError("quantile level not tabulated");
  }

  friend bool operator==(const SimulationSummary&, const SimulationSummary&) = default;
};

// Which values the "simulated range" is taken over.
enum class RangeBasis { terminal, whole_path };

struct RangeErrorReport {
  double simulated_low = 0.0;
  double simulated_high = 0.0;
  double exact_low = 0.0;
  double exact_high = 0.0;
  double abs_error_low = 0.0;
  double abs_error_high = 0.0;

  friend bool operator==(const RangeErrorReport&, const RangeErrorReport&) = default;
};

struct EngineOptions {
  // 0 means "use the hardware concurrency"; STOCHPATH_THREADS caps either way.
  unsigned threads = 0;
  // Paths with index below the cap are returned; 0 gives a summary-only run.
  std::size_t path_storage_cap = 10000;
  // Added to every lane; a nonzero offset decouples a run from another run
  // that shares the seed.
  std::uint64_t lane_offset = 0;
};

struct SimulationResult {
  std::vector<PricePath> paths;
  SimulationSummary summary;
};

// Linear interpolation between order statistics: with sorted x[0..n-1],
// h = (n - 1) p and q(p) = x[floor h] + (h - floor h) (x[floor h + 1] - x[floor h]).
inline double interpolated_quantile(std::span<const double> sorted, double level) {
  if (sorted.empty()) throw DomainError("quantile of an empty sample");
  if (!(level >= 0.0 && level <= 1.0)) throw DomainError("quantile level must lie in [0, 1]");
  const double h = static_cast<double>(sorted.size() - 1) * level;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = h - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

// Terminal statistics in index order. path_min/path_max default to the
// terminal extremes when whole-path extremes are not supplied.
inline SimulationSummary summarize_terminals(std::span<const double> terminals,
                                             std::size_t truncation_events = 0,
                                             std::optional<std::pair<double, double>> path_range = {}) {
  if (terminals.empty()) throw DomainError("cannot summarize an empty collection of paths");
  SimulationSummary s;
  s.n_paths = terminals.size();
  const auto n = static_cast<double>(terminals.size());
  double sum = 0.0;
  for (double x : terminals) sum += x;
  s.terminal_mean = sum / n;
  double ss = 0.0;
  for (double x : terminals) ss += (x - s.terminal_mean) * (x - s.terminal_mean);
  s.terminal_std = terminals.size() > 1 ? std::sqrt(ss / (n - 1.0)) : 0.0;

  std::vector<double> sorted(terminals.begin(), terminals.end());
  std::sort(sorted.begin(), sorted.end());
  s.terminal_min = sorted.front();
  s.terminal_max = sorted.back();
  for (std::size_t i = 0; i < kQuantileLevels.size(); ++i) {
    s.quantiles[i] = interpolated_quantile(sorted, kQuantileLevels[i]);
  }
  s.path_min = path_range ? path_range->first : s.terminal_min;
  s.path_max = path_range ? path_range->second : s.terminal_max;
  s.truncation_events = truncation_events;
  return s;
}

inline SimulationSummary summarize(std::span<const PricePath> paths) {
  if (paths.empty()) throw DomainError("cannot summarize an empty collection of paths");
  const auto& grid = paths.front().times;
  std::vector<double> terminals;
  terminals.reserve(paths.size());
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  std::size_t truncations = 0;
  for (const auto& p : paths) {
    if (p.times != grid || p.prices.size() != grid.size() || p.prices.empty()) {
      throw DomainError("paths must share the same time grid");
    }
    terminals.push_back(p.terminal());
    const auto [mn, mx] = std::minmax_element(p.prices.begin(), p.prices.end());
    lo = std::min(lo, *mn);
    hi = std::max(hi, *mx);
    truncations += p.truncation_events;
  }
  return summarize_terminals(terminals, truncations, std::pair{lo, hi});
}

inline RangeErrorReport range_error(double simulated_low, double simulated_high, double exact_low,
                                    double exact_high) {
  if (!(exact_low <= exact_high)) {
    throw DomainError("exact_low must not exceed exact_high");
  }
  return {simulated_low,
          simulated_high,
          exact_low,
          exact_high,
          std::abs(simulated_low - exact_low),
          std::abs(simulated_high - exact_high)};
}

// "Minimum" error is the low-endpoint error, "Maximum" the high-endpoint error.
inline RangeErrorReport range_error(const SimulationSummary& summary, double exact_low,
                                    double exact_high, RangeBasis basis = RangeBasis::terminal) {
  return basis == RangeBasis::terminal
             ? range_error(summary.terminal_min, summary.terminal_max, exact_low, exact_high)
             : range_error(summary.path_min, summary.path_max, exact_low, exact_high);
}

// Worker count: requested (or hardware concurrency when 0), capped by the
// STOCHPATH_THREADS environment variable when it holds a positive integer.
inline unsigned resolve_threads(unsigned requested) {
  unsigned n = requested != 0 ? requested : std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("STOCHPATH_THREADS")) {
    char* end = nullptr;
    const long cap = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && cap > 0) n = std::min(n, static_cast<unsigned>(cap));
  }
  return n;
}

inline void check_compatible(const ModelParams& model, Scheme scheme) {
  const bool heston = std::holds_alternative<HestonParams>(model);
  if (heston != (scheme == Scheme::heston_em)) {
    throw ConfigError("scheme '" + std::string(to_string(scheme)) + "' cannot run " +
                      (heston ? "Heston" : "GBM") + " parameters");
  }
}

// Generates path `index` of a run.
inline PricePath simulate_path(const ModelParams& model, const SimulationConfig& config,
                               Scheme scheme, std::size_t index, std::uint64_t lane_offset = 0) {
  RandomStream price_shocks(config.seed, index, lane_offset);
  switch (scheme) {
    case Scheme::gbm_exact:
      return gbm_exact_path(std::get<GbmParams>(model), config.n_steps, config.horizon, price_shocks);
    case Scheme::gbm_em:
      return gbm_em_path(std::get<GbmParams>(model), config.n_steps, config.horizon, price_shocks);
    case Scheme::heston_em: {
      RandomStream variance_shocks(config.seed, index, lane_offset + 1);
      return heston_path(std::get<HestonParams>(model), config.n_steps, config.horizon,
                         price_shocks, variance_shocks);
    }
  }
  throw ConfigError("unknown scheme");
}

inline SimulationResult run_simulation(const ModelParams& model, const SimulationConfig& config,
                                       Scheme scheme, const EngineOptions& options = {}) {
  config.validate();
  check_compatible(model, scheme);
  std::visit([](const auto& p) { p.validate(); }, model);

  const std::size_t n = config.n_paths;
  const std::size_t stored = std::min(n, options.path_storage_cap);
  std::vector<double> terminals(n);
  std::vector<double> lows(n);
  std::vector<double> highs(n);
  std::vector<std::size_t> truncations(n);
  SimulationResult result;
  result.paths.resize(stored);

  auto work = [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      PricePath path = simulate_path(model, config, scheme, i, options.lane_offset);
      terminals[i] = path.terminal();
      const auto [mn, mx] = std::minmax_element(path.prices.begin(), path.prices.end());
      lows[i] = *mn;
      highs[i] = *mx;
      truncations[i] = path.truncation_events;
      if (i < stored) result.paths[i] = std::move(path);
    }
  };

  const std::size_t workers = std::min<std::size_t>(resolve_threads(options.threads), n);
  if (workers <= 1) {
    work(0, n);
  } else {
    std::vector<std::exception_ptr> failures(workers);
    {
      std::vector<std::jthread> pool;
      pool.reserve(workers);
      const std::size_t chunk = (n + workers - 1) / workers;
      for (std::size_t w = 0; w < workers; ++w) {
        const std::size_t begin = w * chunk;
        const std::size_t end = std::min(n, begin + chunk);
        if (begin >= end) break;
        pool.emplace_back([&, w, begin, end] {
          try {
            work(begin, end);
          } catch (...) {
            failures[w] = std::current_exception();
          }
        });
      }
    }
    for (const auto& f : failures) {
      if (f) std::rethrow_exception(f);
    }
  }

  std::size_t total_truncations = 0;
  for (auto t : truncations) total_truncations += t;
  const double lo = *std::min_element(lows.begin(), lows.end());
  const double hi = *std::max_element(highs.begin(), highs.end());
  result.summary = summarize_terminals(terminals, total_truncations, std::pair{lo, hi});
  return result;
}

}  // namespace stochpath
