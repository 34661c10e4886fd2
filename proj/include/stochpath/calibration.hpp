#pragma once

// Parameter estimation from a historical close-price series.
//
// Every row is one trading step of dt years (1/252 by default); calendar gaps
// between dates are ignored.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "stochpath/errors.hpp"
#include "stochpath/models.hpp"

namespace stochpath {

inline constexpr std::size_t kMinGbmLength = 2;
inline constexpr std::size_t kMinHestonLength = 30;
inline constexpr std::size_t kDefaultVarianceWindow = 21;

struct HistoricalSeries {
  std::vector<std::chrono::year_month_day> dates;
  std::vector<double> closes;
  double dt = 1.0 / 252.0;

  std::size_t size() const noexcept { return closes.size(); }

  // Rows are reported 1-based.
  void validate() const {
    if (dates.size() != closes.size()) throw DomainError("dates and closes differ in length");
    if (!(dt > 0.0)) throw DomainError("series dt must be > 0");
    for (std::size_t i = 0; i < closes.size(); ++i) {
      if (!(closes[i] > 0.0)) throw DataError(i + 1, "close must be positive");
      if (i > 0 && !(std::chrono::sys_days{dates[i - 1]} < std::chrono::sys_days{dates[i]})) {
        throw DataError(i + 1, "dates must be strictly increasing");
      }
    }
  }

  friend bool operator==(const HistoricalSeries&, const HistoricalSeries&) = default;
};

// Builds a series on consecutive calendar days starting at `start`.
inline HistoricalSeries make_series(std::vector<double> closes, double dt = 1.0 / 252.0,
                                    std::chrono::year_month_day start = std::chrono::year{2000} /
                                                                        std::chrono::January / 1) {
  HistoricalSeries s;
  s.dt = dt;
  s.dates.reserve(closes.size());
  std::chrono::sys_days day{start};
  for (std::size_t i = 0; i < closes.size(); ++i) {
    s.dates.emplace_back(day);
    day += std::chrono::days{1};
  }
  s.closes = std::move(closes);
  return s;
}

inline std::vector<double> log_returns(const HistoricalSeries& series) {
  std::vector<double> r;
  if (series.closes.size() < 2) return r;
  r.reserve(series.closes.size() - 1);
  for (std::size_t i = 1; i < series.closes.size(); ++i) {
    r.push_back(std::log(series.closes[i] / series.closes[i - 1]));
  }
  return r;
}

struct StandardError {
  std::string parameter;
  double value = 0.0;

  friend bool operator==(const StandardError&, const StandardError&) = default;
};

struct Diagnostics {
  std::vector<StandardError> standard_errors;
  std::vector<std::string> warnings;

  std::optional<double> standard_error(const std::string& parameter) const {
    for (const auto& se : standard_errors) {
      if (se.parameter == parameter) return se.value;
    }
    return std::nullopt;
  }
};

struct CalibrationReport {
  GbmParams gbm;
  std::optional<HestonParams> heston;
  Diagnostics diagnostics;
};

namespace detail {

inline double mean(std::span<const double> xs) {
  double sum = 0.0;
  for (double x : xs) sum += x;
  return sum / static_cast<double>(xs.size());
}

inline double sample_variance(std::span<const double> xs) {
  const double m = mean(xs);
  double ss = 0.0;
  for (double x : xs) ss += (x - m) * (x - m);
  return ss / static_cast<double>(xs.size() - 1);
}

inline double sample_covariance(std::span<const double> xs, std::span<const double> ys) {
  const double mx = mean(xs);
  const double my = mean(ys);
  double s = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) s += (xs[i] - mx) * (ys[i] - my);
  return s / static_cast<double>(xs.size() - 1);
}

inline void check_gbm_input(const HistoricalSeries& series) {
  if (series.size() < kMinGbmLength) {
    throw DomainError("insufficient length: GBM estimation needs at least 2 closes, got " +
                      std::to_string(series.size()));
  }
  series.validate();
}

}  // namespace detail

// sigma = std(log returns) / sqrt(dt) with the n-1 denominator;
// mu = mean(log returns) / dt + sigma^2 / 2; x0 = last close.
inline GbmParams estimate_gbm(const HistoricalSeries& series) {
  detail::check_gbm_input(series);
  const auto r = log_returns(series);
  const double m = detail::mean(r);
  const double var = r.size() > 1 ? detail::sample_variance(r) : 0.0;
  GbmParams p;
  p.sigma = std::sqrt(var / series.dt);
  p.mu = m / series.dt + 0.5 * p.sigma * p.sigma;
  p.x0 = series.closes.back();
  return p;
}

// Asymptotic standard errors: se(sigma) = sigma / sqrt(2 (n - 1)) and
// se(mu) = sigma / sqrt(n dt) for n log returns.
inline std::vector<StandardError> gbm_standard_errors(const GbmParams& p,
                                                      const HistoricalSeries& series) {
  const auto n = static_cast<double>(series.size() - 1);
  return {{"mu", p.sigma / std::sqrt(n * series.dt)},
          {"sigma", n > 1.0 ? p.sigma / std::sqrt(2.0 * (n - 1.0)) : 0.0}};
}

// Rolling realized-variance proxy: sample variance of the `window` log returns
// ending at return index window-1+j, divided by dt. Throws EstimationError on a
// zero-variance window.
inline std::vector<double> realized_variance_proxy(std::span<const double> returns,
                                                   std::size_t window, double dt) {
  if (window < 2 || returns.size() < window) return {};
  std::vector<double> proxy(returns.size() - window + 1);
  for (std::size_t j = 0; j < proxy.size(); ++j) {
    const double v = detail::sample_variance(returns.subspan(j, window)) / dt;
    if (!(v > 0.0)) {
      std::ostringstream msg;
      msg << "zero-variance window: log returns " << j + 1 << ".." << j + window
          << " are all equal";
      throw EstimationError(msg.str());
    }
    proxy[j] = v;
  }
  return proxy;
}

inline std::size_t min_heston_length(std::size_t window) {
  return std::max(kMinHestonLength, 3 * window + 2);
}

struct HestonEstimate {
  HestonParams params;
  std::vector<StandardError> standard_errors;
  std::vector<std::string> warnings;
};

// Moment estimator on the rolling variance proxy vh (window w).
//
// Sampling noise in vh is correlated only within w lags, so the
// autocovariances c(h) for h in [w, min(4w, m/2)] follow the stationary
// square-root process: c(h) = S(kappa) Var(v) exp(-kappa h dt), where S is the
// attenuation from averaging over the window. A least-squares line through
// log c(h) gives kappa and Var(v); theta is the proxy mean; the stationary
// variance Var(v) = sigma_v^2 theta / (2 kappa) gives sigma_v. The leverage
// correlation comes from cov(r_t, vh_after - vh_before), whose expectation is
// rho sigma_v theta dt times the mean decay factor over the window.
inline HestonEstimate estimate_heston_detailed(const HistoricalSeries& series,
                                               std::size_t window = kDefaultVarianceWindow) {
  if (window < 5) throw DomainError("variance window must be >= 5, got " + std::to_string(window));
  const std::size_t needed = min_heston_length(window);
  if (series.size() < needed) {
    throw DomainError("insufficient length: Heston estimation with window " +
                      std::to_string(window) + " needs at least " + std::to_string(needed) +
                      " closes, got " + std::to_string(series.size()));
  }
  series.validate();

  const double dt = series.dt;
  const auto r = log_returns(series);
  const auto vh = realized_variance_proxy(r, window, dt);
  const std::size_t m = vh.size();
  const auto w = window;

  HestonEstimate est;
  HestonParams& p = est.params;
  double rho_se = 0.0;
  p.x0 = series.closes.back();
  p.mu = estimate_gbm(series).mu;
  p.theta = detail::mean(vh);
  p.v0 = vh.back();

  // Log-linear fit of the autocovariance tail.
  const std::size_t max_lag = std::min(4 * w, m / 2);
  std::vector<double> lag_t;
  std::vector<double> log_c;
  for (std::size_t h = w; h <= max_lag; ++h) {
    double c = 0.0;
    for (std::size_t j = 0; j + h < m; ++j) c += (vh[j + h] - p.theta) * (vh[j] - p.theta);
    c /= static_cast<double>(m);
    if (c > 0.0) {
      lag_t.push_back(static_cast<double>(h) * dt);
      log_c.push_back(std::log(c));
    }
  }

  double slope = 0.0;
  double intercept = 0.0;
  if (lag_t.size() >= 2) {
    const double mt = detail::mean(lag_t);
    const double ml = detail::mean(log_c);
    double sxy = 0.0;
    double sxx = 0.0;
    for (std::size_t i = 0; i < lag_t.size(); ++i) {
      sxy += (lag_t[i] - mt) * (log_c[i] - ml);
      sxx += (lag_t[i] - mt) * (lag_t[i] - mt);
    }
    slope = sxy / sxx;
    intercept = ml - slope * mt;
  }

  if (lag_t.size() < 2 || slope >= 0.0) {
    est.warnings.emplace_back(
        "no mean reversion detected in the variance proxy; kappa, sigma_v and rho set to 0");
    p.kappa = 0.0;
    p.sigma_v = 0.0;
    p.rho = 0.0;
  } else {
    p.kappa = -slope;
    double attenuation = 0.0;
    for (std::size_t i = 0; i < w; ++i) {
      for (std::size_t j = 0; j < w; ++j) {
        const double gap = i > j ? static_cast<double>(i - j) : static_cast<double>(j - i);
        attenuation += std::exp(-p.kappa * dt * gap);
      }
    }
    attenuation /= static_cast<double>(w * w);
    const double stationary_var = std::exp(intercept) / attenuation;
    p.sigma_v = p.theta > 0.0 ? std::sqrt(2.0 * p.kappa * stationary_var / p.theta) : 0.0;

    std::vector<double> rt;
    std::vector<double> dv;
    for (std::size_t i = w - 1; i + 1 < m; ++i) {
      rt.push_back(r[i]);
      dv.push_back(vh[i + 1] - vh[i - w + 1]);
    }
    double decay = 0.0;
    for (std::size_t j = 0; j < w; ++j) decay += std::pow(1.0 - p.kappa * dt, static_cast<double>(j));
    decay /= static_cast<double>(w);
    const double scale = p.sigma_v * p.theta * dt * decay;
    double rho = rt.size() >= 2 && scale > 0.0 ? detail::sample_covariance(rt, dv) / scale : 0.0;
    if (rt.size() >= 2 && scale > 0.0) {
      // dv windows overlap, but r is serially independent, so the products are
      // close to uncorrelated.
      const double mr = detail::mean(rt);
      const double md = detail::mean(dv);
      std::vector<double> prod(rt.size());
      for (std::size_t i = 0; i < rt.size(); ++i) prod[i] = (rt[i] - mr) * (dv[i] - md);
      rho_se = std::sqrt(detail::sample_variance(prod) / static_cast<double>(rt.size())) / scale;
    }
    if (rho > 1.0 || rho < -1.0) {
      std::ostringstream msg;
      msg << "leverage correlation estimate " << rho << " clamped to [-1, 1]";
      est.warnings.push_back(msg.str());
      rho = std::clamp(rho, -1.0, 1.0);
    }
    p.rho = rho;
  }

  // kappa and theta: asymptotics for a continuously observed square-root
  // process over T = m dt years. For kappa this is a lower bound; noise in the
  // proxy makes the real spread a few times larger.
  const double span_years = static_cast<double>(m) * dt;
  const double stationary_var =
      p.kappa > 0.0 ? p.sigma_v * p.sigma_v * p.theta / (2.0 * p.kappa) : detail::sample_variance(vh);
  est.standard_errors = {
      {"mu", estimate_gbm(series).sigma / std::sqrt(static_cast<double>(r.size()) * dt)},
      {"kappa", p.kappa > 0.0 ? std::sqrt(2.0 * p.kappa / span_years) : 0.0},
      {"theta", p.kappa > 0.0 ? std::sqrt(2.0 * std::max(stationary_var, 0.0) / (p.kappa * span_years))
                              : std::sqrt(detail::sample_variance(vh) / static_cast<double>(m))},
      {"rho", rho_se},
  };

  for (auto& w_msg : p.warnings()) est.warnings.push_back(std::move(w_msg));
  return est;
}

inline HestonParams estimate_heston(const HistoricalSeries& series,
                                    std::size_t window = kDefaultVarianceWindow) {
  return estimate_heston_detailed(series, window).params;
}

// GBM estimate always; Heston estimate when requested (errors propagate).
inline CalibrationReport calibrate(const HistoricalSeries& series, bool with_heston,
                                   std::size_t window = kDefaultVarianceWindow) {
  CalibrationReport report;
  report.gbm = estimate_gbm(series);
  report.diagnostics.standard_errors = gbm_standard_errors(report.gbm, series);
  for (auto& se : report.diagnostics.standard_errors) se.parameter = "gbm." + se.parameter;
  if (with_heston) {
    auto est = estimate_heston_detailed(series, window);
    report.heston = est.params;
    for (auto& se : est.standard_errors) {
      report.diagnostics.standard_errors.push_back({"heston." + se.parameter, se.value});
    }
    for (auto& w : est.warnings) report.diagnostics.warnings.push_back(std::move(w));
  }
  return report;
}

}  // namespace stochpath
