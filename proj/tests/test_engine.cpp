#include <cmath>
#include <cstdlib>
#include <vector>

#include <gtest/gtest.h>

#include "stochpath/engine.hpp"

namespace sp = stochpath;

namespace {

constexpr double kDay = 1.0 / 252.0;

sp::HestonParams efert_heston() {
  return {.mu = 0.513, .kappa = 0.00979, .theta = -0.09228, .sigma_v = 0.03, .rho = 0.00165,
          .v0 = 0.0009, .x0 = 67.20};
}

sp::PricePath terminal_only(double x) {
  sp::PricePath p;
  p.times = {0.0, 1.0};
  p.prices = {1.0, x};
  return p;
}

}  // namespace

TEST(Summarize, ThreeTerminals) {
  const std::vector<sp::PricePath> paths{terminal_only(1.0), terminal_only(2.0), terminal_only(3.0)};
  const auto s = sp::summarize(paths);
  EXPECT_EQ(s.n_paths, 3u);
  EXPECT_EQ(s.terminal_min, 1.0);
  EXPECT_EQ(s.terminal_max, 3.0);
  EXPECT_EQ(s.terminal_mean, 2.0);
  EXPECT_EQ(s.terminal_std, 1.0);
  EXPECT_EQ(s.quantile(0.5), 2.0);
  // h = 2 * 0.25 = 0.5 -> halfway between 1 and 2
  EXPECT_EQ(s.quantile(0.25), 1.5);
}

TEST(Summarize, OnePath) {
  const std::vector<sp::PricePath> paths{terminal_only(4.5)};
  const auto s = sp::summarize(paths);
  EXPECT_EQ(s.terminal_min, 4.5);
  EXPECT_EQ(s.terminal_max, 4.5);
  EXPECT_EQ(s.terminal_mean, 4.5);
  EXPECT_EQ(s.terminal_std, 0.0);
  for (double q : s.quantiles) EXPECT_EQ(q, 4.5);
}

TEST(Summarize, EmptyAndMismatchedGridsAreRejected) {
  EXPECT_THROW(sp::summarize(std::vector<sp::PricePath>{}), sp::DomainError);
  auto a = terminal_only(1.0);
  auto b = terminal_only(2.0);
  b.times = {0.0, 2.0};
  EXPECT_THROW(sp::summarize(std::vector<sp::PricePath>{a, b}), sp::DomainError);
}

TEST(Summarize, WholePathExtremes) {
  sp::PricePath p;
  p.times = {0.0, 0.5, 1.0};
  p.prices = {10.0, 14.0, 11.0};
  sp::PricePath q = p;
  q.prices = {10.0, 7.0, 12.0};
  const auto s = sp::summarize(std::vector<sp::PricePath>{p, q});
  EXPECT_EQ(s.terminal_min, 11.0);
  EXPECT_EQ(s.terminal_max, 12.0);
  EXPECT_EQ(s.path_min, 7.0);
  EXPECT_EQ(s.path_max, 14.0);
  const auto whole = sp::range_error(s, 7.0, 14.0, sp::RangeBasis::whole_path);
  EXPECT_EQ(whole.abs_error_low, 0.0);
  EXPECT_EQ(whole.abs_error_high, 0.0);
}

TEST(Quantile, LinearInterpolationRule) {
  const std::vector<double> xs{10.0, 20.0, 30.0, 40.0, 50.0};
  EXPECT_EQ(sp::interpolated_quantile(xs, 0.0), 10.0);
  EXPECT_EQ(sp::interpolated_quantile(xs, 1.0), 50.0);
  EXPECT_EQ(sp::interpolated_quantile(xs, 0.5), 30.0);
  EXPECT_DOUBLE_EQ(sp::interpolated_quantile(xs, 0.1), 14.0);
  EXPECT_THROW(sp::interpolated_quantile(xs, 1.5), sp::DomainError);
}

TEST(RangeError, PaperRangesGiveTableErrors) {
  const auto heston = sp::range_error(67.2098, 68.2224, 67.20, 68.22);
  EXPECT_NEAR(heston.abs_error_low, 0.0098, 5e-5);
  EXPECT_NEAR(heston.abs_error_high, 0.0024, 5e-5);
  const auto gbm = sp::range_error(67.2987, 68.1559, 67.20, 68.22);
  EXPECT_NEAR(gbm.abs_error_low, 0.0987, 5e-5);
  EXPECT_NEAR(gbm.abs_error_high, 0.0641, 5e-5);
}

TEST(RangeError, EqualRangesGiveZero) {
  const auto r = sp::range_error(67.20, 68.22, 67.20, 68.22);
  EXPECT_EQ(r.abs_error_low, 0.0);
  EXPECT_EQ(r.abs_error_high, 0.0);
}

TEST(RangeError, InvertedExactRangeIsRejected) {
  EXPECT_THROW(sp::range_error(1.0, 2.0, 3.0, 2.0), sp::DomainError);
}

TEST(RunSimulation, DeterministicDegenerateRun) {
  const sp::SimulationConfig cfg{1, 1, kDay, 0};
  const auto r = sp::run_simulation(sp::GbmParams{0.513, 0.0, 67.20}, cfg, sp::Scheme::gbm_exact);
  const double expected = 67.20 * std::exp(0.513 * kDay);
  EXPECT_DOUBLE_EQ(r.summary.terminal_min, expected);
  EXPECT_DOUBLE_EQ(r.summary.terminal_max, expected);
  EXPECT_DOUBLE_EQ(r.summary.terminal_mean, expected);
  EXPECT_EQ(r.summary.terminal_std, 0.0);
  ASSERT_EQ(r.paths.size(), 1u);
}

TEST(RunSimulation, RepeatRunsAreBitIdentical) {
  const sp::SimulationConfig cfg{2000, 3, 0.1, 99};
  const auto a = sp::run_simulation(efert_heston(), cfg, sp::Scheme::heston_em);
  const auto b = sp::run_simulation(efert_heston(), cfg, sp::Scheme::heston_em);
  EXPECT_EQ(a.summary, b.summary);
  EXPECT_EQ(a.paths, b.paths);
}

TEST(RunSimulation, ThreadCountDoesNotChangeResults) {
  const sp::SimulationConfig cfg{5000, 4, 0.05, 1234};
  for (auto scheme : {sp::Scheme::gbm_exact, sp::Scheme::gbm_em}) {
    const sp::ModelParams model = sp::GbmParams{0.2, 0.3, 10.0};
    sp::EngineOptions one;
    one.threads = 1;
    const auto base = sp::run_simulation(model, cfg, scheme, one);
    for (unsigned t : {4u, 8u}) {
      sp::EngineOptions many;
      many.threads = t;
      EXPECT_EQ(sp::run_simulation(model, cfg, scheme, many).summary, base.summary);
    }
  }
}

TEST(RunSimulation, PathIndexKeysTheSubstream) {
  const sp::SimulationConfig cfg{10, 2, 0.5, 5};
  const auto r = sp::run_simulation(efert_heston(), cfg, sp::Scheme::heston_em);
  for (std::size_t i = 0; i < cfg.n_paths; ++i) {
    EXPECT_EQ(r.paths[i], sp::simulate_path(efert_heston(), cfg, sp::Scheme::heston_em, i));
  }
}

TEST(RunSimulation, StorageCapAndSummaryOnly) {
  const sp::SimulationConfig cfg{100, 1, kDay, 0};
  sp::EngineOptions opts;
  opts.path_storage_cap = 10;
  const auto capped = sp::run_simulation(sp::GbmParams{0.1, 0.2, 1.0}, cfg, sp::Scheme::gbm_exact, opts);
  EXPECT_EQ(capped.paths.size(), 10u);
  opts.path_storage_cap = 0;
  const auto none = sp::run_simulation(sp::GbmParams{0.1, 0.2, 1.0}, cfg, sp::Scheme::gbm_exact, opts);
  EXPECT_TRUE(none.paths.empty());
  EXPECT_EQ(none.summary, capped.summary);
}

TEST(RunSimulation, SchemeMismatchIsAConfigError) {
  const sp::SimulationConfig cfg{10, 1, kDay, 0};
  EXPECT_THROW(sp::run_simulation(sp::GbmParams{0.1, 0.2, 1.0}, cfg, sp::Scheme::heston_em),
               sp::ConfigError);
  EXPECT_THROW(sp::run_simulation(efert_heston(), cfg, sp::Scheme::gbm_exact), sp::ConfigError);
  EXPECT_THROW(sp::run_simulation(efert_heston(), cfg, sp::Scheme::gbm_em), sp::ConfigError);
}

TEST(RunSimulation, InvalidConfigIsRejected) {
  EXPECT_THROW(sp::run_simulation(sp::GbmParams{0.1, 0.2, 1.0}, {0, 1, kDay, 0}, sp::Scheme::gbm_exact),
               sp::ConfigError);
  EXPECT_THROW(sp::run_simulation(sp::GbmParams{0.1, 0.2, 1.0}, {1, 0, kDay, 0}, sp::Scheme::gbm_exact),
               sp::ConfigError);
  EXPECT_THROW(sp::run_simulation(sp::GbmParams{0.1, 0.2, 1.0}, {1, 1, 0.0, 0}, sp::Scheme::gbm_exact),
               sp::ConfigError);
}

TEST(RunSimulation, QuantilesAreOrderedAndBounded) {
  const auto r = sp::run_simulation(efert_heston(), {10000, 1, kDay, 3}, sp::Scheme::heston_em);
  const auto& s = r.summary;
  EXPECT_LE(s.terminal_min, s.quantiles.front());
  EXPECT_GE(s.terminal_max, s.quantiles.back());
  for (std::size_t i = 1; i < s.quantiles.size(); ++i) EXPECT_LE(s.quantiles[i - 1], s.quantiles[i]);
  EXPECT_GE(s.terminal_std, 0.0);
}

TEST(RunSimulation, ExactGbmMeanMatchesAnalyticMoment) {
  const sp::GbmParams p{0.513, 0.03, 67.20};
  const auto r = sp::run_simulation(p, {10000, 1, kDay, 8}, sp::Scheme::gbm_exact);
  const double se = r.summary.terminal_std / std::sqrt(10000.0);
  EXPECT_LT(std::abs(r.summary.terminal_mean - 67.20 * std::exp(0.513 * kDay)), 3.0 * se);
}

TEST(RunSimulation, HalfOfExactTerminalsFallBelowTheMedian) {
  const sp::GbmParams p{0.513, 0.03, 67.20};
  sp::EngineOptions opts;
  opts.path_storage_cap = 100000;
  const auto r = sp::run_simulation(p, {100000, 1, kDay, 17}, sp::Scheme::gbm_exact, opts);
  const double median = p.x0 * std::exp((p.mu - 0.5 * p.sigma * p.sigma) * kDay);
  std::size_t below = 0;
  for (const auto& path : r.paths) below += path.terminal() < median ? 1 : 0;
  EXPECT_NEAR(static_cast<double>(below) / 100000.0, 0.5, 0.02);
}

TEST(RunSimulation, PaperHestonRangeOverlapsRealizedRange) {
  const auto r = sp::run_simulation(efert_heston(), {10000, 1, kDay, 0}, sp::Scheme::heston_em);
  EXPECT_LE(r.summary.terminal_min, 68.22);
  EXPECT_GE(r.summary.terminal_max, 67.20);
}

TEST(ResolveThreads, EnvironmentCap) {
  ::setenv("STOCHPATH_THREADS", "2", 1);
  EXPECT_EQ(sp::resolve_threads(8), 2u);
  EXPECT_EQ(sp::resolve_threads(1), 1u);
  ::setenv("STOCHPATH_THREADS", "junk", 1);
  EXPECT_EQ(sp::resolve_threads(8), 8u);
  ::unsetenv("STOCHPATH_THREADS");
  EXPECT_GE(sp::resolve_threads(0), 1u);
}

TEST(SchemeNames, RoundTrip) {
  for (auto s : {sp::Scheme::gbm_exact, sp::Scheme::gbm_em, sp::Scheme::heston_em}) {
    EXPECT_EQ(sp::parse_scheme(sp::to_string(s)), s);
  }
  EXPECT_THROW(sp::parse_scheme("milstein"), sp::ConfigError);
}
