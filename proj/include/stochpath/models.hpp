#pragma once

// GBM and Heston dynamics.
//
// All rates are annualized; time is measured in years on a uniform grid with
// dt = horizon / n_steps. The Heston scheme is Euler-Maruyama with full
// truncation: max(v, 0) is used inside both square roots and the stored
// variance is max(v_raw, 0). Each clamp of v_raw is counted.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "stochpath/errors.hpp"
#include "stochpath/random.hpp"

namespace stochpath {

struct GbmParams {
  double mu = 0.0;     // drift per year
  double sigma = 0.0;  // volatility per sqrt(year)
  double x0 = 1.0;     // initial price

  void validate() const {
    if (!(sigma >= 0.0)) throw DomainError("GBM sigma must be >= 0");
    if (!(x0 > 0.0)) throw DomainError("initial price x0 must be > 0");
    if (!std::isfinite(mu)) throw DomainError("GBM mu must be finite");
  }

  friend bool operator==(const GbmParams&, const GbmParams&) = default;
};

struct HestonParams {
  double mu = 0.0;
  double kappa = 0.0;    // mean-reversion rate per year
  double theta = 0.0;    // long-run variance; sign is not restricted
  double sigma_v = 0.0;  // volatility of variance
  double rho = 0.0;      // price/variance shock correlation
  double v0 = 0.0;       // initial variance
  double x0 = 1.0;

  void validate() const {
    if (!(rho >= -1.0 && rho <= 1.0)) throw DomainError("Heston rho must lie in [-1, 1]");
    if (!(v0 >= 0.0)) throw DomainError("Heston v0 must be >= 0");
    if (!(x0 > 0.0)) throw DomainError("initial price x0 must be > 0");
    if (!(kappa >= 0.0)) throw DomainError("Heston kappa must be >= 0");
    if (!(sigma_v >= 0.0)) throw DomainError("Heston sigma_v must be >= 0");
    if (!std::isfinite(mu) || !std::isfinite(theta)) {
      throw DomainError("Heston mu and theta must be finite");
    }
  }

  // A negative long-run variance is accepted but flagged.
  bool has_negative_theta() const noexcept { return theta < 0.0; }

  std::vector<std::string> warnings() const {
    std::vector<std::string> out;
    if (has_negative_theta()) {
      std::ostringstream msg;
      msg << "long-run variance theta is negative (" << theta
          << "); the variance process is pulled below zero and truncated";
      out.push_back(msg.str());
    }
    return out;
  }

  friend bool operator==(const HestonParams&, const HestonParams&) = default;
};

struct PricePath {
  std::vector<double> times;
  std::vector<double> prices;
  std::vector<double> variances;  // empty for GBM paths
  std::size_t truncation_events = 0;

  std::size_t n_steps() const noexcept { return prices.empty() ? 0 : prices.size() - 1; }
  double terminal() const { return prices.back(); }
  bool has_variances() const noexcept { return !variances.empty(); }

  friend bool operator==(const PricePath&, const PricePath&) = default;
};

namespace detail {

inline void check_grid(std::size_t n_steps, double horizon) {
  if (n_steps < 1) throw DomainError("n_steps must be >= 1");
  if (!(horizon > 0.0) || !std::isfinite(horizon)) {
    std::ostringstream msg;
    msg << "horizon must be positive, got " << horizon;
    throw DomainError(msg.str());
  }
}

}  // namespace detail

// t_k = horizon * k / n_steps, so the last point is exactly the horizon.
inline std::vector<double> uniform_grid(std::size_t n_steps, double horizon) {
  detail::check_grid(n_steps, horizon);
  std::vector<double> times(n_steps + 1);
  const auto n = static_cast<double>(n_steps);
  for (std::size_t k = 0; k <= n_steps; ++k) times[k] = horizon * static_cast<double>(k) / n;
  return times;
}

// Closed form x0 * exp((mu - sigma^2/2) t_k + sigma W_{t_k}) driven by explicit
// Brownian increments dW (one per step).
inline PricePath gbm_exact_path_from_increments(const GbmParams& params, double horizon,
                                                std::span<const double> dW) {
  params.validate();
  PricePath path;
  path.times = uniform_grid(dW.size(), horizon);
  path.prices.resize(dW.size() + 1);
  path.prices[0] = params.x0;
  const double drift = params.mu - 0.5 * params.sigma * params.sigma;
  double w = 0.0;
  for (std::size_t k = 0; k < dW.size(); ++k) {
    w += dW[k];
    path.prices[k + 1] = params.x0 * std::exp(drift * path.times[k + 1] + params.sigma * w);
  }
  return path;
}

template <NormalSource Source>
PricePath gbm_exact_path(const GbmParams& params, std::size_t n_steps, double horizon,
                         Source& source) {
  detail::check_grid(n_steps, horizon);
  const double dt = horizon / static_cast<double>(n_steps);
  std::vector<double> dW(n_steps);
  for (auto& inc : dW) inc = wiener_increment(dt, source.next_standard_normal());
  return gbm_exact_path_from_increments(params, horizon, dW);
}

// One Euler-Maruyama step of dX = mu X dt + sigma X dW. Requires dt > 0.
inline double gbm_em_step(double x, const GbmParams& params, double dt, double z) {
  return x + params.mu * x * dt + params.sigma * x * std::sqrt(dt) * z;
}

// Euler-Maruyama path driven by explicit Brownian increments.
inline PricePath gbm_em_path_from_increments(const GbmParams& params, double horizon,
                                             std::span<const double> dW) {
  params.validate();
  PricePath path;
  path.times = uniform_grid(dW.size(), horizon);
  path.prices.resize(dW.size() + 1);
  path.prices[0] = params.x0;
  const double dt = horizon / static_cast<double>(dW.size());
  double x = params.x0;
  for (std::size_t k = 0; k < dW.size(); ++k) {
    x = x + params.mu * x * dt + params.sigma * x * dW[k];
    path.prices[k + 1] = x;
  }
  return path;
}

template <NormalSource Source>
PricePath gbm_em_path(const GbmParams& params, std::size_t n_steps, double horizon,
                      Source& source) {
  params.validate();
  detail::check_grid(n_steps, horizon);
  const double dt = horizon / static_cast<double>(n_steps);
  PricePath path;
  path.times = uniform_grid(n_steps, horizon);
  path.prices.resize(n_steps + 1);
  path.prices[0] = params.x0;
  double x = params.x0;
  for (std::size_t k = 0; k < n_steps; ++k) {
    x = gbm_em_step(x, params, dt, source.next_standard_normal());
    path.prices[k + 1] = x;
  }
  return path;
}

struct HestonState {
  double price = 0.0;
  double variance = 0.0;
  bool truncated = false;  // v_raw was negative and has been clamped to 0
};

// One full-truncation Euler-Maruyama step. (z1, z2) must already be correlated.
inline HestonState heston_em_step(double x, double v, const HestonParams& params, double dt,
                                  double z1, double z2) {
  const double v_pos = std::max(v, 0.0);
  const double price = x + params.mu * x * dt + std::sqrt(v_pos) * x * std::sqrt(dt) * z1;
  const double v_raw =
      v + params.kappa * (params.theta - v) * dt + params.sigma_v * std::sqrt(v_pos * dt) * z2;
  return {price, std::max(v_raw, 0.0), v_raw < 0.0};
}

// Draws g1 from price_shocks and g2 from variance_shocks at every step and
// correlates them with params.rho.
template <NormalSource PriceSource, NormalSource VarianceSource>
PricePath heston_path(const HestonParams& params, std::size_t n_steps, double horizon,
                      PriceSource& price_shocks, VarianceSource& variance_shocks) {
  params.validate();
  detail::check_grid(n_steps, horizon);
  const double dt = horizon / static_cast<double>(n_steps);
  PricePath path;
  path.times = uniform_grid(n_steps, horizon);
  path.prices.resize(n_steps + 1);
  path.variances.resize(n_steps + 1);
  path.prices[0] = params.x0;
  path.variances[0] = params.v0;
  HestonState state{params.x0, params.v0, false};
  for (std::size_t k = 0; k < n_steps; ++k) {
    const double g1 = price_shocks.next_standard_normal();
    const double g2 = variance_shocks.next_standard_normal();
    const auto [z1, z2] = correlated_pair(params.rho, g1, g2);
    state = heston_em_step(state.price, state.variance, params, dt, z1, z2);
    if (state.truncated) ++path.truncation_events;
    path.prices[k + 1] = state.price;
    path.variances[k + 1] = state.variance;
  }
  return path;
}

// Single-source form: g1 then g2 are drawn from the same source at each step.
template <NormalSource Source>
PricePath heston_path(const HestonParams& params, std::size_t n_steps, double horizon,
                      Source& source) {
  return heston_path(params, n_steps, horizon, source, source);
}

}  // namespace stochpath
