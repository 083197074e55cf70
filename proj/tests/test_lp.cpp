#include <gtest/gtest.h>

#include "msbridge/errors.hpp"
#include "msbridge/lp.hpp"

namespace msb::lp {
namespace {

Eigen::MatrixXd mat(int r, int c, std::initializer_list<double> v) {
  Eigen::MatrixXd m(r, c);
  auto it = v.begin();
  for (int i = 0; i < r; ++i)
    for (int j = 0; j < c; ++j) m(i, j) = *it++;
  return m;
}

TEST(Simplex, SmallOptimum) {
  // min -x1 - 2 x2 s.t. x1 + x2 + s1 = 4, x2 + s2 = 3.
  auto a = mat(2, 4, {1, 1, 1, 0, 0, 1, 0, 1});
  Eigen::VectorXd b(2);
  b << 4, 3;
  Eigen::VectorXd c(4);
  c << -1, -2, 0, 0;
  auto s = minimize(a, b, c);
  ASSERT_EQ(s.status, Status::kOptimal);
  EXPECT_NEAR(s.objective, -7.0, 1e-12);
  EXPECT_NEAR(s.x(0), 1.0, 1e-12);
  EXPECT_NEAR(s.x(1), 3.0, 1e-12);
  EXPECT_LE(residual(a, b, s.x), 1e-12);
}

TEST(Simplex, InfeasibleHasFarkasCertificate) {
  // x1 + x2 = 1 and x1 + x2 = 2.
  auto a = mat(2, 2, {1, 1, 1, 1});
  Eigen::VectorXd b(2);
  b << 1, 2;
  auto s = minimize(a, b, Eigen::VectorXd::Zero(2));
  ASSERT_EQ(s.status, Status::kInfeasible);
  Eigen::VectorXd ya = a.transpose() * s.certificate;
  EXPECT_LE(ya.maxCoeff(), 1e-12);
  EXPECT_GT(s.certificate.dot(b), 0.0);
  EXPECT_THROW(feasible_point(a, b), InfeasibleError);
}

TEST(Simplex, Unbounded) {
  auto a = mat(1, 2, {1, -1});
  Eigen::VectorXd b(1);
  b << 0;
  Eigen::VectorXd c(2);
  c << -1, 0;
  EXPECT_EQ(minimize(a, b, c).status, Status::kUnbounded);
}

TEST(Simplex, RedundantRows) {
  auto a = mat(3, 3, {1, 1, 1, 2, 2, 2, 1, 0, 0});
  Eigen::VectorXd b(3);
  b << 1, 2, 0.25;
  Eigen::VectorXd x = feasible_point(a, b);
  EXPECT_LE(residual(a, b, x), 1e-12);
  EXPECT_GE(x.minCoeff(), 0.0);
}

TEST(InteriorPoint, DetectsForcedZeros) {
  auto a = mat(2, 3, {1, 1, 1, 0, 0, 1});
  Eigen::VectorXd b(2);
  b << 1, 0;
  auto ri = relative_interior_point(a, b);
  EXPECT_EQ(ri.support, (std::vector<bool>{true, true, false}));
  EXPECT_GT(ri.x(0), 0.0);
  EXPECT_GT(ri.x(1), 0.0);
  EXPECT_LE(residual(a, b, ri.x), 1e-10);

  auto ac = analytic_center(a, b);
  EXPECT_EQ(ac.support, ri.support);
  EXPECT_NEAR(ac.x(0), 0.5, 1e-10);
  EXPECT_NEAR(ac.x(1), 0.5, 1e-10);
  EXPECT_EQ(ac.x(2), 0.0);
}

TEST(InteriorPoint, AnalyticCenterOfTriangle) {
  auto a = mat(1, 3, {1, 1, 1});
  Eigen::VectorXd b(1);
  b << 3;
  auto ac = analytic_center(a, b);
  for (int k = 0; k < 3; ++k) EXPECT_NEAR(ac.x(k), 1.0, 1e-10);
}

}  // namespace
}  // namespace msb::lp
