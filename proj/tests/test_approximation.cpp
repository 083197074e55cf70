#include <gtest/gtest.h>

#include <cmath>

#include "fixtures.hpp"
#include "msbridge/approximation.hpp"
#include "msbridge/bridge.hpp"
#include "msbridge/errors.hpp"
#include "msbridge/random_instances.hpp"

namespace msb {
namespace {

using test::two_point;

// Martingale measure on six x-atoms with a tiny atom at x = -0.5 where h
// blows up.
JointMeasure spiked_martingale() {
  std::vector<double> xs{-2.0, -1.0, -0.5, 0.5, 1.0, 2.0};
  std::vector<double> mx{0.2, 0.25, 0.002, 0.148, 0.2, 0.2};
  Grid ys({-3.0, -2.0, -1.0, 0.0, 1.0, 2.0, 3.0});
  random::Engine rng(5);
  std::vector<double> w;
  for (std::size_t i = 0; i < xs.size(); ++i)
    for (double v : random::mean_row(rng, ys, xs[i])) w.push_back(mx[i] * v);
  return JointMeasure(Grid(xs), ys, w);
}

TEST(DensityBounds, Fixture) {
  auto b = density_bounds(test::fixture_p(), test::fixture_nu());
  EXPECT_NEAR(b.lower, 0.2 / 0.3, 1e-15);
  EXPECT_NEAR(b.upper, 0.5 / 0.3, 1e-15);
}

TEST(TechnicalBound, DominatesRowEntropy) {
  auto p = test::fixture_p();
  auto q = test::fixture_q_star();
  auto i = technical_bound(q, p);
  auto dq = disintegrate(q);
  auto dp = disintegrate(p);
  for (std::size_t r = 0; r < 2; ++r) {
    double h = relative_entropy(dq.kernel.row_measure(r), dp.kernel.row_measure(r));
    EXPECT_NEAR(i.weight(r), h + std::log(2.5), 1e-12);
  }
}

TEST(SplitInterval, SymmetricTrim) {
  auto mu = DiscreteMeasure(Grid({-1.0, 1.0}), {0.5, 0.5});
  auto s = split_interval(mu, 0.1);
  EXPECT_DOUBLE_EQ(s.a, -1.0);
  EXPECT_DOUBLE_EQ(s.b, 1.0);
  EXPECT_DOUBLE_EQ(s.c, 1.0);
  EXPECT_DOUBLE_EQ(s.delta_tilde, 0.5);
  double removed = 1.0 - s.lambda_A.mass();
  EXPECT_GT(removed, 0.0);
  EXPECT_LE(removed, 0.1 + 1e-15);
  EXPECT_NEAR(barycenter(s.lambda_A), 0.0, 1e-15);
  EXPECT_TRUE(convex_order_leq(s.mu_A, s.mu_B));
}

TEST(SplitInterval, Invariants) {
  auto mu = DiscreteMeasure(Grid({-2.0, -1.0, 0.5, 1.0, 3.0}), {0.2, 0.25, 0.2, 0.25, 0.1});
  ASSERT_NEAR(barycenter(mu), 0.0, 1e-15);
  for (double delta : {0.2, 0.05, 0.001}) {
    auto s = split_interval(mu, delta);
    EXPECT_LT(s.a, 0.0);
    EXPECT_GT(s.b, 0.0);
    double removed = mu.mass() - s.lambda_A.mass();
    EXPECT_GT(removed, 0.0);
    EXPECT_LE(removed, delta + 1e-15);
    EXPECT_NEAR(barycenter(s.lambda_A), 0.0, 1e-14);
    double neg = 0.0, pos = 0.0;
    for (std::size_t i = 0; i < s.lambda_A.size(); ++i) {
      if (s.lambda_A.point(i) < 0.0) neg += s.lambda_A.weight(i);
      if (s.lambda_A.point(i) > 0.0) pos += s.lambda_A.weight(i);
      EXPECT_LE(s.lambda_A.weight(i), mu.weights_on(s.lambda_A.grid())[i] + 1e-15);
    }
    EXPECT_GE(neg, delta - 1e-15);
    EXPECT_GE(pos, delta - 1e-15);
    EXPECT_TRUE(convex_order_leq(s.mu_A, s.mu_B));
  }
}

TEST(SplitInterval, RejectsBadInput) {
  EXPECT_THROW(split_interval(DiscreteMeasure::dirac(0.0), 0.1), DomainError);
  EXPECT_THROW(split_interval(two_point(-1.0, 1.0), 0.6), DomainError);
  EXPECT_THROW(split_interval(two_point(-1.0, 2.0), 0.1), DomainError);
}

TEST(RestrictBounded, ExcludesLargeH) {
  auto mu = DiscreteMeasure(Grid({-2.0, -1.0, -0.5, 0.5, 1.0, 2.0}), {0.2392, 0.2, 0.002, 0.1588, 0.2, 0.2});
  ASSERT_NEAR(barycenter(mu), 0.0, 1e-14);
  auto s = split_interval(mu, 0.1);
  std::vector<double> h(6, 1.0);
  h[2] = 1e6;
  auto r = restrict_bounded(s, h, 0.05);
  EXPECT_LT(r.tau, 1e6);
  EXPECT_LE(r.excluded_mass, r.bound + 1e-15);
  EXPECT_NEAR(barycenter(r.lambda_eps), 0.0, 1e-12);
  auto w = r.lambda_eps.weights_on(mu.grid());
  EXPECT_EQ(w[2], 0.0);
  EXPECT_LE(tv_distance(r.lambda_eps, s.lambda_A), 0.05 + 1e-12);
}

TEST(Strassen, TextbookExample) {
  // delta_0 spread to 3/4 at -1 and 1/4 at 3.
  auto k = strassen_coupling(DiscreteMeasure::dirac(0.0), DiscreteMeasure(Grid({-1.0, 3.0}), {0.75, 0.25}));
  ASSERT_EQ(k.ygrid(), Grid({-1.0, 0.0, 3.0}));
  EXPECT_NEAR(k(0, 0), 0.75, 1e-12);
  EXPECT_NEAR(k(0, 1), 0.0, 1e-12);
  EXPECT_NEAR(k(0, 2), 0.25, 1e-12);
}

TEST(Strassen, RandomPairs) {
  random::Engine rng(61);
  for (int n = 0; n < 200; ++n) {
    auto [a, b] = random::dilation_pair(rng, 6);
    auto k = strassen_coupling(a, b);
    EXPECT_LE(max_mean_defect(k, a.normalized().weights()), 1e-9);
    auto img = compose(a.normalized(), k).second_marginal();
    EXPECT_LE(tv_distance(img, b.normalized()), 1e-9);
  }
}

TEST(Strassen, IdentityAndFailure) {
  auto a = DiscreteMeasure(Grid({-1.0, 0.0, 2.0}), {0.4, 0.4, 0.2});
  auto k = strassen_coupling(a, a);
  for (std::size_t i = 0; i < 3; ++i) EXPECT_NEAR(k(i, i), 1.0, 1e-9);
  EXPECT_THROW(strassen_coupling(two_point(-2.0, 2.0), two_point(-1.0, 1.0)), DomainError);
}

TEST(StabilityProbe, AdversarialSchedule) {
  auto a = two_point(-1.0, 1.0);
  auto b = two_point(-2.0, 2.0);
  auto narrow = two_point(-0.5, 0.5);
  std::vector<std::pair<DiscreteMeasure, DiscreteMeasure>> sched{{a, narrow}, {a, b}, {a, narrow}, {a, b}, {a, b}};
  auto r = convex_order_stability_probe(a, b, sched);
  EXPECT_EQ(r.holds, (std::vector<bool>{false, true, false, true, true}));
  ASSERT_TRUE(r.stable_from.has_value());
  EXPECT_EQ(*r.stable_from, 4u);

  sched.back().second = narrow;
  EXPECT_FALSE(convex_order_stability_probe(a, b, sched).stable_from.has_value());
  EXPECT_THROW(convex_order_stability_probe(a, a, sched), DomainError);
  EXPECT_THROW(convex_order_stability_probe(a, b, {{two_point(-3.0, 3.0), b}}), DomainError);
}

TEST(BuildQTilde, FixtureKeepsQ) {
  auto p = test::fixture_p();
  auto sol = solve_bridge(p, test::fixture_nu());
  for (double delta : {0.1, 0.01, 0.001}) {
    auto o = build_q_tilde(sol.q_star, p, {1e6, 0.0}, delta);
    EXPECT_LE(o.tv_to_q, 1e-12);
    EXPECT_NEAR(o.entropy, sol.entropy, 1e-10);
    EXPECT_LE(martingale_defect(o.q_tilde), 1e-12);
  }
}

TEST(BuildQTilde, SpikeIsExcluded) {
  auto q = spiked_martingale();
  std::vector<double> h(6, 1.0);
  h[2] = 1e6;
  auto o = build_q_tilde(q, q, h, 0.1);
  EXPECT_LT(o.h_bound, 1e6);
  EXPECT_EQ(o.q_tilde.first_marginal().weight(2), 0.0);
  EXPECT_LE(o.tv_to_q, 0.2);
  EXPECT_LE(tv_distance(o.q_tilde.second_marginal(), q.second_marginal()), 1e-12);
  EXPECT_LE(martingale_defect(o.q_tilde), 1e-10);
  EXPECT_LE(o.mixing_entropy, o.i_domination + 1e-12);
  EXPECT_LE(o.entropy, o.convexity_rhs + 1e-12);
}

TEST(BuildQTilde, ConvergenceReport) {
  auto q = spiked_martingale();
  std::vector<double> h(6, 1.0);
  auto rep = entropy_convergence_report(q, q, h, {0.1, 0.01, 0.001});
  ASSERT_EQ(rep.rows.size(), 3u);
  EXPECT_NEAR(rep.reference_entropy, 0.0, 1e-15);
  EXPECT_LE(rep.rows.back().tv_to_q, 2e-3);
  EXPECT_TRUE(rep.within_tol);
  EXPECT_THROW(entropy_convergence_report(q, q, h, {0.01, 0.1}), DomainError);
}

}  // namespace
}  // namespace msb
