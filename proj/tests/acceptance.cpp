// Acceptance checks: one PASS/FAIL line per criterion, non-zero exit on any failure.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "stochpath/stochpath.hpp"

namespace sp = stochpath;

namespace {

constexpr double kDay = 1.0 / 252.0;

struct Verdict {
  bool ok = true;
  std::string detail;

  void require(bool cond, const std::string& what) {
    if (!cond && ok) {
      ok = false;
      detail = what;
    }
  }
};

sp::HestonParams table_heston() {
  return {.mu = 0.513, .kappa = 0.00979, .theta = -0.09228, .sigma_v = 0.03, .rho = 0.00165,
          .v0 = 0.0009, .x0 = 67.20};
}

sp::GbmParams table_gbm() { return {0.513, 0.03, 67.20}; }

Verdict table_two_errors() {
  Verdict v;
  const auto h = sp::range_error(67.2098, 68.2224, 67.20, 68.22);
  const auto g = sp::range_error(67.2987, 68.1559, 67.20, 68.22);
  const std::string got = sp::format_fixed4(h.abs_error_low) + " " + sp::format_fixed4(h.abs_error_high) +
                          " " + sp::format_fixed4(g.abs_error_low) + " " +
                          sp::format_fixed4(g.abs_error_high);
  v.require(got == "0.0098 0.0024 0.0987 0.0641", "got " + got);
  v.detail = v.ok ? got : v.detail;
  return v;
}

Verdict table_one_ranges() {
  Verdict v;
  double min_ratio = 1e9;
  double max_ratio = 0.0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const sp::SimulationConfig cfg{10000, 1, kDay, seed};
    const auto h = sp::run_simulation(table_heston(), cfg, sp::Scheme::heston_em).summary;
    const auto g = sp::run_simulation(table_gbm(), cfg, sp::Scheme::gbm_exact).summary;
    for (const auto& [s, paper_width, name] :
         {std::tuple{h, 1.0126, "heston"}, std::tuple{g, 0.8572, "gbm"}}) {
      const bool overlaps = s.terminal_min <= 68.22 && s.terminal_max >= 67.20;
      const double ratio = (s.terminal_max - s.terminal_min) / paper_width;
      min_ratio = std::min(min_ratio, ratio);
      max_ratio = std::max(max_ratio, ratio);
      v.require(overlaps, std::string(name) + " seed " + std::to_string(seed) + " misses [67.20, 68.22]");
      v.require(ratio >= 1.0 / 3.0 && ratio <= 3.0,
                std::string(name) + " seed " + std::to_string(seed) + " width ratio " + std::to_string(ratio));
    }
  }
  if (v.ok) {
    v.detail = "width/paper width in [" + std::to_string(min_ratio) + ", " + std::to_string(max_ratio) + "]";
  }
  return v;
}

Verdict analytic_means() {
  Verdict v;
  struct Case {
    sp::GbmParams gbm;
    sp::HestonParams heston;
    std::size_t steps;
    double horizon;
  };
  const std::vector<Case> cases{
      {table_gbm(), table_heston(), 1, kDay},
      {{0.1, 0.2, 100.0}, {.mu = 0.1, .kappa = 2.0, .theta = 0.04, .sigma_v = 0.3, .rho = -0.7, .v0 = 0.04,
                           .x0 = 100.0}, 252, 1.0},
      {{-0.2, 0.4, 20.0}, {.mu = -0.2, .kappa = 1.0, .theta = 0.09, .sigma_v = 0.5, .rho = 0.3, .v0 = 0.16,
                           .x0 = 20.0}, 50, 0.5},
  };
  double worst = 0.0;
  for (std::size_t c = 0; c < cases.size(); ++c) {
    const auto& k = cases[c];
    const sp::SimulationConfig cfg{10000, k.steps, k.horizon, 100 + c};
    const double target = k.gbm.x0 * std::exp(k.gbm.mu * k.horizon);
    for (const auto& [model, scheme] : {std::pair<sp::ModelParams, sp::Scheme>{k.gbm, sp::Scheme::gbm_exact},
                                        std::pair<sp::ModelParams, sp::Scheme>{k.heston, sp::Scheme::heston_em}}) {
      const auto s = sp::run_simulation(model, cfg, scheme).summary;
      const double z = std::abs(s.terminal_mean - target) / (s.terminal_std / std::sqrt(10000.0));
      worst = std::max(worst, z);
      v.require(z < 3.0, "set " + std::to_string(c + 1) + " " + std::string(sp::to_string(scheme)) +
                             " is " + std::to_string(z) + " SE from the analytic mean");
    }
  }
  if (v.ok) v.detail = "worst deviation " + std::to_string(worst) + " SE";
  return v;
}

Verdict strong_order() {
  Verdict v;
  const sp::GbmParams p{0.05, 0.2, 1.0};
  const std::vector<std::size_t> steps{16, 32, 64, 128};
  const std::size_t finest = steps.back();
  std::vector<double> sq(steps.size(), 0.0);
  const std::size_t n_paths = 10000;
  std::vector<double> fine(finest);
  for (std::size_t i = 0; i < n_paths; ++i) {
    sp::RandomStream rng(2024, i);
    for (auto& dw : fine) dw = sp::wiener_increment(1.0 / static_cast<double>(finest), rng.next_standard_normal());
    for (std::size_t s = 0; s < steps.size(); ++s) {
      const std::size_t group = finest / steps[s];
      std::vector<double> coarse(steps[s], 0.0);
      for (std::size_t k = 0; k < finest; ++k) coarse[k / group] += fine[k];
      const double exact = sp::gbm_exact_path_from_increments(p, 1.0, coarse).terminal();
      const double em = sp::gbm_em_path_from_increments(p, 1.0, coarse).terminal();
      sq[s] += (em - exact) * (em - exact);
    }
  }
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  for (std::size_t s = 0; s < steps.size(); ++s) {
    const double x = std::log(1.0 / static_cast<double>(steps[s]));
    const double y = std::log(std::sqrt(sq[s] / static_cast<double>(n_paths)));
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const double n = static_cast<double>(steps.size());
  const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  v.require(slope >= 0.4 && slope <= 0.6, "slope " + std::to_string(slope));
  if (v.ok) v.detail = "slope " + std::to_string(slope);
  return v;
}

Verdict correlation_recovery() {
  Verdict v;
  double worst = 0.0;
  for (double rho : {-0.9, -0.5, 0.0, 0.00165, 0.5, 0.9}) {
    sp::RandomStream a(77, 0, 0);
    sp::RandomStream b(77, 0, 1);
    const std::size_t n = 1'000'000;
    double s1 = 0, s2 = 0, s11 = 0, s22 = 0, s12 = 0;
    for (std::size_t i = 0; i < n; ++i) {
      const auto p = sp::correlated_pair(rho, a.next_standard_normal(), b.next_standard_normal());
      s1 += p.z1;
      s2 += p.z2;
      s11 += p.z1 * p.z1;
      s22 += p.z2 * p.z2;
      s12 += p.z1 * p.z2;
    }
    const double m = static_cast<double>(n);
    const double cov = s12 / m - (s1 / m) * (s2 / m);
    const double r = cov / std::sqrt((s11 / m - (s1 / m) * (s1 / m)) * (s22 / m - (s2 / m) * (s2 / m)));
    worst = std::max(worst, std::abs(r - rho));
    v.require(std::abs(r - rho) <= 0.01, "rho " + std::to_string(rho) + " recovered as " + std::to_string(r));
  }
  if (v.ok) v.detail = "max |error| " + std::to_string(worst);
  return v;
}

Verdict degenerate_heston() {
  Verdict v;
  const sp::HestonParams h{.mu = 0.3, .kappa = 1.5, .theta = 0.09, .sigma_v = 0.0, .rho = 0.0, .v0 = 0.09,
                           .x0 = 50.0};
  const sp::GbmParams g{0.3, 0.3, 50.0};
  const sp::SimulationConfig cfg{200, 50, 0.5, 3};
  for (std::size_t i = 0; i < cfg.n_paths; ++i) {
    const auto hp = sp::simulate_path(h, cfg, sp::Scheme::heston_em, i);
    const auto gp = sp::simulate_path(g, cfg, sp::Scheme::gbm_em, i);
    v.require(hp.prices == gp.prices, "path " + std::to_string(i) + " differs");
    v.require(hp.truncation_events == 0, "unexpected truncation");
  }
  if (v.ok) v.detail = "200 paths x 50 steps identical";
  return v;
}

Verdict determinism() {
  Verdict v;
  const sp::SimulationConfig cfg{20000, 5, 5.0 * kDay, 4242};
  for (const auto& [model, scheme] :
       {std::pair<sp::ModelParams, sp::Scheme>{table_heston(), sp::Scheme::heston_em},
        std::pair<sp::ModelParams, sp::Scheme>{table_gbm(), sp::Scheme::gbm_exact},
        std::pair<sp::ModelParams, sp::Scheme>{table_gbm(), sp::Scheme::gbm_em}}) {
    std::string first;
    sp::ResultBundle first_bundle;
    for (unsigned threads : {1u, 4u, 8u, 1u}) {
      sp::EngineOptions opts;
      opts.threads = threads;
      sp::ResultBundle b;
      b.model = model;
      b.scheme = scheme;
      b.config = cfg;
      b.summary = sp::run_simulation(model, cfg, scheme, opts).summary;
      b.report = sp::range_error(b.summary, 67.20, 68.22, sp::RangeBasis::terminal);
      const auto text = sp::write_summary(b, sp::Format::json, sp::PriceRendering::raw);
      if (first.empty()) {
        first = text;
        first_bundle = b;
      } else {
        v.require(text == first && b == first_bundle,
                  std::string(sp::to_string(scheme)) + " differs at " + std::to_string(threads) + " threads");
      }
    }
  }
  if (v.ok) v.detail = "3 schemes x threads {1,4,8} + repeat identical";
  return v;
}

Verdict calibration_bands() {
  Verdict v;
  // GBM: 3 standard errors.
  const sp::GbmParams g{0.513, 0.03, 67.20};
  const sp::SimulationConfig gcfg{1, 10000, 10000.0 * kDay, 0};
  const auto gpath = sp::simulate_path(g, gcfg, sp::Scheme::gbm_exact, 0);
  const auto gseries = sp::make_series(gpath.prices);
  const auto ge = sp::estimate_gbm(gseries);
  const auto se = sp::gbm_standard_errors(ge, gseries);
  v.require(std::abs(ge.mu - g.mu) <= 3.0 * se[0].value, "gbm mu " + std::to_string(ge.mu));
  v.require(std::abs(ge.sigma - g.sigma) <= 3.0 * se[1].value, "gbm sigma " + std::to_string(ge.sigma));

  // Heston: kappa +-50%, theta +-20%, rho +-0.15 on 10^4 steps.
  const sp::HestonParams h{.mu = 0.05, .kappa = 2.0, .theta = 0.04, .sigma_v = 0.3, .rho = -0.5, .v0 = 0.04,
                           .x0 = 100.0};
  const sp::SimulationConfig hcfg{1, 10000, 10000.0 * kDay, 0};
  const auto hpath = sp::simulate_path(h, hcfg, sp::Scheme::heston_em, 0);
  const auto he = sp::estimate_heston(sp::make_series(hpath.prices));
  const std::string got = "kappa " + std::to_string(he.kappa) + ", theta " + std::to_string(he.theta) +
                          ", rho " + std::to_string(he.rho);
  v.require(std::abs(he.kappa - h.kappa) <= 0.5 * h.kappa, "heston " + got);
  v.require(std::abs(he.theta - h.theta) <= 0.2 * h.theta, "heston " + got);
  v.require(std::abs(he.rho - h.rho) <= 0.15, "heston " + got);
  if (v.ok) v.detail = "gbm mu " + std::to_string(ge.mu) + ", sigma " + std::to_string(ge.sigma) + "; " + got;
  return v;
}

Verdict truncation() {
  Verdict v;
  const auto h = table_heston();
  sp::EngineOptions opts;
  opts.path_storage_cap = 10000;
  const auto r = sp::run_simulation(h, {10000, 252, 1.0, 0}, sp::Scheme::heston_em, opts);
  for (const auto& p : r.paths) {
    for (double x : p.variances) v.require(x >= 0.0, "negative stored variance");
  }
  v.require(r.summary.truncation_events > 0, "no truncation events");
  v.require(!h.warnings().empty(), "no negative-theta warning");
  if (v.ok) v.detail = std::to_string(r.summary.truncation_events) + " truncation events";
  return v;
}

Verdict round_trip() {
  Verdict v;
  sp::RandomStream rng(99, 0);
  auto uniform = [&](double lo, double hi) { return lo + (hi - lo) * rng.next_uniform(); };
  auto wild = [&] {
    // Mix of magnitudes so shortest-representation formatting gets exercised.
    return uniform(-1.0, 1.0) * std::pow(10.0, std::floor(uniform(-8.0, 8.0)));
  };
  for (int i = 0; i < 1000; ++i) {
    sp::ResultBundle b;
    if (rng.next_uniform() < 0.5) {
      b.model = sp::GbmParams{wild(), std::abs(wild()), std::abs(wild()) + 1e-9};
      b.scheme = rng.next_uniform() < 0.5 ? sp::Scheme::gbm_exact : sp::Scheme::gbm_em;
    } else {
      b.model = sp::HestonParams{wild(), std::abs(wild()), wild(), std::abs(wild()), uniform(-1.0, 1.0),
                                 std::abs(wild()), std::abs(wild()) + 1e-9};
      b.scheme = sp::Scheme::heston_em;
    }
    b.config = {1 + rng.next_u64() % 1000000, 1 + rng.next_u64() % 1000, std::abs(wild()) + 1e-12,
                rng.next_u64()};
    auto& s = b.summary;
    s.n_paths = b.config.n_paths;
    s.terminal_min = wild();
    s.terminal_max = wild();
    s.terminal_mean = wild();
    s.terminal_std = std::abs(wild());
    for (auto& q : s.quantiles) q = wild();
    s.path_min = wild();
    s.path_max = wild();
    s.truncation_events = rng.next_u64() % 100000;
    if (rng.next_uniform() < 0.5) b.report = sp::RangeErrorReport{wild(), wild(), wild(), wild(), wild(), wild()};
    if (rng.next_uniform() < 0.3) b.paths_file = "out dir/paths, \"run " + std::to_string(i) + "\".csv";

    const auto back_json = sp::parse_summary_json(sp::write_summary(b, sp::Format::json, sp::PriceRendering::raw));
    std::istringstream csv(sp::write_summary(b, sp::Format::csv, sp::PriceRendering::raw));
    const auto back_csv = sp::parse_summary_csv(csv);
    v.require(back_json == b, "json bundle " + std::to_string(i));
    v.require(back_csv == b, "csv bundle " + std::to_string(i));

    std::vector<double> closes(1 + rng.next_u64() % 300);
    for (auto& c : closes) c = std::abs(wild()) + 1e-300;
    const auto series = sp::make_series(closes, kDay, std::chrono::year{1990 + static_cast<int>(i % 30)} /
                                                          std::chrono::month{1 + static_cast<unsigned>(i % 12)} /
                                                          std::chrono::day{1 + static_cast<unsigned>(i % 28)});
    std::ostringstream out;
    sp::write_prices(series, out);
    std::istringstream in(out.str());
    const auto back = sp::load_prices(in);
    v.require(back.closes == series.closes && back.dates == series.dates, "price csv " + std::to_string(i));
  }
  if (v.ok) v.detail = "1000 bundles (json, csv) and 1000 price files";
  return v;
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Verdict()>>> criteria{
      {"endpoint errors from the published ranges", table_two_errors},
      {"terminal ranges overlap the realized range, 20 seeds", table_one_ranges},
      {"terminal mean within 3 SE of x0*exp(mu*T)", analytic_means},
      {"Euler-Maruyama strong order", strong_order},
      {"correlated pair recovers rho", correlation_recovery},
      {"degenerate Heston equals Euler-Maruyama GBM bitwise", degenerate_heston},
      {"bit-identical bundles across runs and thread counts", determinism},
      {"calibration recovers simulated parameters", calibration_bands},
      {"full truncation keeps variance non-negative", truncation},
      {"bundle and price CSV round trips", round_trip},
  };
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto start = std::chrono::steady_clock::now();
    Verdict v;
    try {
      v = criteria[i].second();
    } catch (const std::exception& e) {
      v.ok = false;
      v.detail = std::string("exception: ") + e.what();
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::printf("criterion %2zu: %s  %s (%s) [%.2fs]\n", i + 1, v.ok ? "PASS" : "FAIL", criteria[i].first,
                v.detail.c_str(), secs);
    std::fflush(stdout);
    failures += v.ok ? 0 : 1;
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failures, criteria.size());
  return failures == 0 ? 0 : 1;
}
