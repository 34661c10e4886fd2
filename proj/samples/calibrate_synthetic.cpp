// Simulates a long Heston series, then fits both models to it.

#include <cstdio>

#include "stochpath/stochpath.hpp"

namespace sp = stochpath;

int main() {
  const sp::HestonParams truth{.mu = 0.05, .kappa = 2.0, .theta = 0.04, .sigma_v = 0.3, .rho = -0.5,
                               .v0 = 0.04, .x0 = 100.0};
  const std::size_t days = 10000;
  const sp::SimulationConfig cfg{1, days, static_cast<double>(days) / sp::kTradingDaysPerYear, 7};
  const auto path = sp::simulate_path(truth, cfg, sp::Scheme::heston_em, 0);
  const auto series = sp::make_series(path.prices);

  const auto report = sp::calibrate(series, true);
  std::printf("gbm:    mu %.4f  sigma %.4f\n", report.gbm.mu, report.gbm.sigma);
  const auto& h = *report.heston;
  std::printf("heston: kappa %.3f (true %.3f)  theta %.4f (%.4f)  sigma_v %.3f (%.3f)  rho %.3f (%.3f)\n",
              h.kappa, truth.kappa, h.theta, truth.theta, h.sigma_v, truth.sigma_v, h.rho, truth.rho);
  for (const auto& se : report.diagnostics.standard_errors) {
    std::printf("  se(%s) = %.4g\n", se.parameter.c_str(), se.value);
  }
  for (const auto& w : report.diagnostics.warnings) std::printf("warning: %s\n", w.c_str());
}
