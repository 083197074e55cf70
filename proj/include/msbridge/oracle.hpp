#pragma once

#include <Eigen/Dense>

#include "msbridge/measures.hpp"

namespace msb::oracle {

// Reference solvers for the test suite. Nothing here calls into the bridge
// module.

struct OracleOptions {
  double kkt_tol = 1e-13;
  /// Mirror step size; 1 makes each proximal step an exact I-projection.
  double step = 1.0;
  int max_outer = 500;
  int max_newton = 200;
  std::size_t max_cells = 256;
};

struct OracleResult {
  JointMeasure q;
  double entropy = 0.0;
  double kkt_residual = 0.0;
  int outer_iterations = 0;
};

/// min H(q|p) over {q >= 0 on supp p, column sums nu, martingale rows} by
/// entropic proximal steps; each step is a KL projection onto the affine
/// constraints, computed by damped Newton on its smooth dual.
OracleResult brute_force_bridge(const JointMeasure& p, const DiscreteMeasure& nu,
                                const OracleOptions& opts = {});

/// Phase-one point of A x = b, x >= 0 with residual checked against 1e-10.
/// Throws InfeasibleError with the Farkas certificate.
Eigen::VectorXd lp_feasible_point(const Eigen::MatrixXd& a, const Eigen::VectorXd& b);

}  // namespace msb::oracle
