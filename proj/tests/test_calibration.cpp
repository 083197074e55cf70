#include <gtest/gtest.h>

#include "msbridge/calibration.hpp"
#include "msbridge/errors.hpp"
#include "msbridge/random_instances.hpp"

namespace msb {
namespace {

using Kind = ArbitrageViolation::Kind;

bool has(const std::vector<ArbitrageViolation>& v, Kind k) {
  for (const auto& e : v)
    if (e.kind == k) return true;
  return false;
}

TEST(Calibration, DiracAtOne) {
  auto r = implied_marginal({{0.0, 1.0}, {1.0, 0.0}, {2.0, 0.0}});
  EXPECT_TRUE(r.violations.empty());
  EXPECT_FALSE(r.upper_tail_collapsed);
  EXPECT_DOUBLE_EQ(r.forward, 1.0);
  ASSERT_EQ(r.nu.size(), 3u);
  EXPECT_NEAR(r.nu.weight(0), 0.0, 1e-15);
  EXPECT_NEAR(r.nu.weight(1), 1.0, 1e-15);
  EXPECT_NEAR(r.nu.weight(2), 0.0, 1e-15);
}

TEST(Calibration, TwoPoint) {
  // Half at 0 and half at 2.
  auto r = implied_marginal({{0.0, 1.0}, {1.0, 0.5}, {2.0, 0.0}});
  EXPECT_TRUE(r.violations.empty());
  EXPECT_NEAR(r.nu.weight(0), 0.5, 1e-15);
  EXPECT_NEAR(r.nu.weight(1), 0.0, 1e-15);
  EXPECT_NEAR(r.nu.weight(2), 0.5, 1e-15);
}

TEST(Calibration, FlagsEachViolation) {
  EXPECT_TRUE(has(check_static_arbitrage({{0.0, 1.0}, {1.0, 1.2}, {2.0, 0.0}}), Kind::kMonotonicity));
  EXPECT_TRUE(has(check_static_arbitrage({{0.0, 3.0}, {1.0, 1.0}, {2.0, 0.0}}), Kind::kSlope));
  EXPECT_TRUE(has(check_static_arbitrage({{0.0, 1.0}, {1.0, 0.7}, {2.0, 0.0}}), Kind::kConvexity));
  auto r = implied_marginal({{0.0, 1.0}, {1.0, 0.7}, {2.0, 0.0}});
  EXPECT_FALSE(r.violations.empty());
  for (double w : r.nu.weights()) EXPECT_GE(w, 0.0);
}

TEST(Calibration, CollapsedUpperTail) {
  auto r = implied_marginal({{0.0, 1.5}, {1.0, 0.75}, {2.0, 0.25}});
  EXPECT_TRUE(r.upper_tail_collapsed);
}

TEST(Calibration, RejectsBadSheets) {
  EXPECT_THROW(implied_marginal({{0.0, 1.0}, {1.0, 0.0}}), DomainError);
  EXPECT_THROW(implied_marginal({{0.0, 1.0}, {0.0, 0.5}, {2.0, 0.0}}), DomainError);
  EXPECT_THROW(implied_marginal({{0.0, 1.0}, {1.0, -0.1}, {2.0, 0.0}}), DomainError);
}

TEST(Calibration, RoundTrip) {
  random::Engine rng(17);
  for (int k = 0; k < 100; ++k) {
    auto [nu, strikes] = random::measure_with_strikes(rng);
    auto quotes = price_calls(nu, strikes);
    EXPECT_TRUE(check_static_arbitrage(quotes).empty());
    auto r = implied_marginal(quotes);
    EXPECT_TRUE(r.violations.empty());
    auto aligned = nu.weights_on(r.nu.grid());
    for (std::size_t i = 0; i < aligned.size(); ++i) EXPECT_NEAR(r.nu.weight(i), aligned[i], 1e-12);
    auto again = price_calls(r.nu, strikes);
    for (std::size_t i = 0; i < strikes.size(); ++i) EXPECT_NEAR(again[i].price, quotes[i].price, 1e-12);
  }
}

}  // namespace
}  // namespace msb
