// One-day terminal price ranges for GBM and Heston, compared against a
// realized [low, high] range.
//
//   forecast_range [seed]

#include <cstdio>
#include <cstdlib>

#include "stochpath/stochpath.hpp"

namespace sp = stochpath;

int main(int argc, char** argv) {
  const std::uint64_t seed = argc > 1 ? std::strtoull(argv[1], nullptr, 10) : 0;
  const sp::GbmParams gbm{0.513, 0.03, 67.20};
  const sp::HestonParams heston{.mu = 0.513, .kappa = 0.00979, .theta = -0.09228, .sigma_v = 0.03,
                                .rho = 0.00165, .v0 = 0.0009, .x0 = 67.20};
  const sp::SimulationConfig cfg{10000, 1, 1.0 / sp::kTradingDaysPerYear, seed};
  const double lo = 67.20;
  const double hi = 68.22;

  for (const auto& w : heston.warnings()) std::printf("warning: %s\n", w.c_str());
  std::printf("%-8s %-22s %-10s %-10s\n", "model", "simulated range", "err low", "err high");
  auto show = [&](const char* name, const sp::ModelParams& model, sp::Scheme scheme) {
    const auto s = sp::run_simulation(model, cfg, scheme).summary;
    const auto r = sp::range_error(s, lo, hi, sp::RangeBasis::terminal);
    std::printf("%-8s %s - %s    %-10s %-10s\n", name, sp::format_fixed4(r.simulated_low).c_str(),
                sp::format_fixed4(r.simulated_high).c_str(), sp::format_fixed4(r.abs_error_low).c_str(),
                sp::format_fixed4(r.abs_error_high).c_str());
  };
  show("heston", heston, sp::Scheme::heston_em);
  show("gbm", gbm, sp::Scheme::gbm_exact);
  std::printf("realized %s - %s\n", sp::format_fixed4(lo).c_str(), sp::format_fixed4(hi).c_str());
}
