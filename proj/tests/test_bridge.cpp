#include <gtest/gtest.h>

#include <cmath>

#include "fixtures.hpp"
#include "msbridge/bridge.hpp"
#include "msbridge/errors.hpp"
#include "msbridge/random_instances.hpp"

namespace msb {
namespace {

TEST(Bridge, SymmetricFixtureClosedForm) {
  auto p = test::fixture_p();
  auto sol = solve_bridge(p, test::fixture_nu());
  EXPECT_TRUE(sol.converged);
  EXPECT_TRUE(sol.potentials.support.empty());
  EXPECT_NEAR(sol.entropy, test::fixture_entropy(), 1e-12);
  EXPECT_NEAR(sol.entropy, 0.098178709817096546, 1e-12);
  auto q = test::fixture_q_star();
  for (std::size_t k = 0; k < 6; ++k) EXPECT_NEAR(sol.q_star.weights()[k], q.weights()[k], 1e-12);
  // Mirror symmetry of the potentials.
  EXPECT_NEAR(sol.potentials.h[0], -sol.potentials.h[1], 1e-10);
  EXPECT_NEAR(sol.potentials.g[0], sol.potentials.g[2], 1e-10);
}

TEST(Bridge, DensityForm) {
  random::Engine rng(21);
  for (int k = 0; k < 10; ++k) {
    auto inst = random::feasible_instance(rng, 4, 5);
    auto sol = solve_bridge(inst.p, inst.nu);
    const auto& pot = sol.potentials;
    double eg = 0.0;
    for (std::size_t j = 0; j < inst.p.cols(); ++j) eg += inst.nu.weights_on(inst.p.ygrid())[j] * pot.g[j];
    EXPECT_NEAR(eg, 0.0, 1e-12);
    EXPECT_NEAR(pot.c, sol.entropy, 1e-8);
    for (std::size_t i = 0; i < inst.p.rows(); ++i)
      for (std::size_t j = 0; j < inst.p.cols(); ++j) {
        double lhs = std::log(sol.q_star(i, j) / inst.p(i, j));
        double rhs = pot.c + pot.h[i] * (inst.p.ygrid()[j] - inst.p.xgrid()[i]) + pot.g[j];
        EXPECT_NEAR(lhs, rhs, 1e-10 * std::max(1.0, std::abs(rhs)));
      }
    EXPECT_LE(martingale_defect(sol.q_star), 1e-12);
  }
}

TEST(Bridge, DualTraceIsNonincreasingEventually) {
  auto sol = solve_bridge(test::fixture_p(), test::fixture_nu());
  ASSERT_GE(sol.dual_trace.size(), 2u);
  EXPECT_NEAR(-sol.dual_trace.back(), sol.entropy, 1e-10);
}

TEST(Bridge, PartitionMatchesPotentials) {
  auto p = test::fixture_p();
  auto sol = solve_bridge(p, test::fixture_nu());
  EXPECT_NEAR(log_partition(p, sol.potentials), -sol.potentials.c, 1e-12);
  auto q = primal_from_potentials(p, sol.potentials);
  EXPECT_NEAR(q.mass(), 1.0, 1e-12);
}

TEST(Bridge, ReducedSupport) {
  // Row x = 2 cannot be a martingale row, so the bridge lives on row x = 0.
  JointMeasure p(Grid({0.0, 2.0}), Grid({-1.0, 0.0, 1.0}), std::vector<double>(6, 1.0 / 6.0));
  DiscreteMeasure nu(Grid({-1.0, 0.0, 1.0}), {0.25, 0.5, 0.25});
  auto f = feasibility_check(p, nu);
  EXPECT_FALSE(f.equivalent);
  EXPECT_EQ(f.support, (std::vector<bool>{true, true, true, false, false, false}));
  auto sol = solve_bridge(p, nu);
  double expected = 0.0;
  for (double w : nu.weights()) expected += w * std::log(6.0 * w);
  EXPECT_NEAR(sol.entropy, expected, 1e-12);
  for (std::size_t j = 0; j < 3; ++j) {
    EXPECT_NEAR(sol.q_star(0, j), nu.weight(j), 1e-12);
    EXPECT_EQ(sol.q_star(1, j), 0.0);
  }
}

TEST(Bridge, InfeasibleMarginalsCarryCertificate) {
  auto p = test::fixture_p();
  // nu more concentrated than any martingale from supp P allows: mean 0 but
  // all mass at 0 forces every row to x = 0, which is not in the xgrid.
  DiscreteMeasure nu(Grid({-1.0, 0.0, 1.0}), {0.0, 1.0, 0.0});
  try {
    solve_bridge(p, nu);
    FAIL() << "expected InfeasibleError";
  } catch (const InfeasibleError& e) {
    EXPECT_EQ(e.certificate().size(), 3u + 2u);
  }
}

TEST(Bridge, NuOffGridIsDomainError) {
  EXPECT_THROW(solve_bridge(test::fixture_p(), DiscreteMeasure(Grid({-1.0, 0.5}), {0.5, 0.5})), DomainError);
}

TEST(Bridge, IterationCapIsNumericalError) {
  SolverOptions opts;
  opts.max_iters = 1;
  EXPECT_THROW(solve_bridge(test::fixture_p(), test::fixture_nu(), opts), NumericalError);
}

TEST(Bridge, RandomVertexWitnessesAreCalibrated) {
  auto p = test::fixture_p();
  auto nu = test::fixture_nu();
  for (const auto& w : random_vertex_witnesses(p, nu, 5, 3)) {
    EXPECT_LE(martingale_defect(w), 1e-9);
    EXPECT_LE(tv_distance(w.second_marginal(), nu), 1e-9);
  }
}

TEST(FiniteConstraints, MonotoneAndConvergent) {
  random::Engine rng(31);
  auto inst = random::feasible_instance(rng, 3, 4);
  auto full = solve_bridge(inst.p, inst.nu);
  auto basis = exhausting_basis(inst.p, inst.nu);
  double prev = 0.0;
  for (std::size_t n = 1; n <= basis.size(); ++n) {
    std::vector<MomentConstraint> sub(basis.begin(), basis.begin() + static_cast<long>(n));
    auto fc = finite_constraint_solution(inst.p, sub);
    double h = relative_entropy(fc.q, inst.p);
    EXPECT_NEAR(fc.c, h, 1e-10);
    EXPECT_GE(h, prev - 1e-10);
    EXPECT_LE(h, full.entropy + 1e-10);
    prev = h;
  }
  EXPECT_NEAR(prev, full.entropy, 1e-8);
}

TEST(FiniteConstraints, EmptyBasisIsReference) {
  auto p = test::fixture_p();
  auto fc = finite_constraint_solution(p, {});
  EXPECT_NEAR(fc.c, 0.0, 1e-15);
  for (std::size_t k = 0; k < 6; ++k) EXPECT_NEAR(fc.q.weights()[k], p.weights()[k], 1e-15);
}

TEST(FiniteConstraints, WrongLengthIsDomainError) {
  MomentConstraint bad{MomentConstraint::Kind::kStock, {1.0, 2.0, 3.0}};
  EXPECT_THROW(finite_constraint_solution(test::fixture_p(), {bad}), DomainError);
}

}  // namespace
}  // namespace msb
