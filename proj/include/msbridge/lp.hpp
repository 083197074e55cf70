#pragma once

#include <Eigen/Dense>
#include <vector>

namespace msb::lp {

// Dense two-phase tableau simplex with Bland's pivot rule for problems in
// standard form
//
//     minimize c^T x  subject to  A x = b,  x >= 0.
//
// Sizes here are desk-scale (hundreds of variables), so a dense tableau is
// the right tool; determinism matters more than speed.

enum class Status { kOptimal, kInfeasible, kUnbounded };

struct Options {
  double pivot_tol = 1e-11;
  double feasibility_tol = 1e-9;
  int max_pivots = 200000;
};

struct Solution {
  Status status = Status::kInfeasible;
  Eigen::VectorXd x;
  double objective = 0.0;
  /// For kInfeasible: y with y^T A <= 0 and y^T b > 0.
  Eigen::VectorXd certificate;
  int pivots = 0;
};

Solution minimize(const Eigen::MatrixXd& a, const Eigen::VectorXd& b, const Eigen::VectorXd& c,
                  const Options& opts = {});

/// Basic feasible solution of A x = b, x >= 0 (phase one only). Throws
/// InfeasibleError carrying the Farkas certificate.
Eigen::VectorXd feasible_point(const Eigen::MatrixXd& a, const Eigen::VectorXd& b,
                               const Options& opts = {});

struct InteriorPoint {
  Eigen::VectorXd x;
  /// support[k] is true iff some feasible point has x_k > 0.
  std::vector<bool> support;
};

/// Feasible point that is strictly positive on the maximal support of the
/// (bounded) polytope: the average of one maximizing vertex per coordinate.
InteriorPoint relative_interior_point(const Eigen::MatrixXd& a, const Eigen::VectorXd& b,
                                      const Options& opts = {});

/// Maximizer of sum_{k in support} log x_k over the polytope, with x_k = 0
/// off the maximal support. Unique, hence a canonical feasible point.
InteriorPoint analytic_center(const Eigen::MatrixXd& a, const Eigen::VectorXd& b,
                              const Options& opts = {});

/// max |A x - b|.
double residual(const Eigen::MatrixXd& a, const Eigen::VectorXd& b, const Eigen::VectorXd& x);

}  // namespace msb::lp
