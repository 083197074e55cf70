#pragma once

#include <cstdint>
#include <vector>

#include "msbridge/measures.hpp"

namespace msb {

/// Dual triple of the log-density log(dQ/dP) = c + h(X)(Y - X) + g(Y).
struct Potentials {
  double c = 0.0;
  std::vector<double> h;  ///< shares held, indexed by xgrid
  std::vector<double> g;  ///< option payoff, indexed by ygrid
  /// Cells (row-major) where the density is positive. Empty means every
  /// cell charged by P; otherwise the log-density is -infinity off it.
  std::vector<bool> support;
};

struct SolverOptions {
  int max_iters = 200000;
  double marginal_tol = 1e-13;
  double martingale_tol = 1e-13;
  double newton_tol = 1e-15;
  int newton_max_steps = 200;
  double damping = 1.0;

  void validate() const;
};

struct BridgeSolution {
  JointMeasure q_star;
  Potentials potentials;
  double entropy = 0.0;              ///< H(Q*|P) in nats
  double marginal_residual = 0.0;    ///< d_TV(second marginal, nu)
  double martingale_residual = 0.0;  ///< max_i |E[Y - x_i | X = x_i]|
  int iterations = 0;
  bool converged = false;
  /// log E^P[exp(h(X)(Y-X) + g(Y))] after each sweep, gauge E^nu[g] = 0.
  std::vector<double> dual_trace;
};

struct FeasibilityResult {
  /// Analytic center of the calibrated martingale polytope within supp P.
  JointMeasure witness;
  /// Maximal support of calibrated martingale measures (row-major cells).
  std::vector<bool> support;
  /// The witness charges every cell of P, i.e. it is equivalent to P.
  bool equivalent = false;
};

/// Linear feasibility of {Q >= 0 on supp P, column sums nu, martingale
/// rows}. Throws InfeasibleError with the Farkas certificate (one entry per
/// column constraint, then one per martingale row).
FeasibilityResult feasibility_check(const JointMeasure& p, const DiscreteMeasure& nu);

/// Vertices of the calibrated martingale polytope for random objectives.
std::vector<JointMeasure> random_vertex_witnesses(const JointMeasure& p, const DiscreteMeasure& nu,
                                                  int count, std::uint64_t seed);

/// Martingale Schroedinger bridge by block-coordinate ascent on the dual:
/// exact column projection in g, per-row Newton in h, gauge E^nu[g] = 0.
BridgeSolution solve_bridge(const JointMeasure& p, const DiscreteMeasure& nu,
                            const SolverOptions& opts = {});

/// Entrywise P * exp(c + h_i (y_j - x_i) + g_j); no renormalization.
JointMeasure primal_from_potentials(const JointMeasure& p, const Potentials& pot);

/// log E^P[exp(h(X)(Y-X) + g(Y))], ignoring c.
double log_partition(const JointMeasure& p, const Potentials& pot);

/// max over charged rows of |E^q[Y - x_i | X = x_i]|.
double martingale_defect(const JointMeasure& q);

/// ygrid-aligned copy of nu; throws when nu charges a point outside ygrid.
std::vector<double> align_to(const DiscreteMeasure& nu, const Grid& ygrid);

// ---------------------------------------------------------------------------
// Entropy minimization under finitely many linear constraints.

struct MomentConstraint {
  enum class Kind {
    kStock,   ///< E^Q[f(X)(Y - X)] = 0, f over xgrid
    kOption,  ///< E^Q[f(Y)] = 0, f over ygrid
  };
  Kind kind;
  std::vector<double> f;
};

struct FiniteConstraintSolution {
  JointMeasure q;
  /// One coefficient per constraint, in input order (a for stock rows, b for
  /// options).
  std::vector<double> coefficients;
  std::vector<double> h_tilde;  ///< sum_k a_k f_k over xgrid
  std::vector<double> g_tilde;  ///< sum_k b_k f_k over ygrid
  double c = 0.0;               ///< -log E^P[exp(V_n)] = H(Q_n|P)
  int newton_steps = 0;
};

FiniteConstraintSolution finite_constraint_solution(const JointMeasure& p,
                                                    const std::vector<MomentConstraint>& constraints,
                                                    const SolverOptions& opts = {});

/// Nested basis that pins down M(nu): option indicators 1{y = y_k} - nu_k
/// (all but the last point) interleaved with stock indicators 1{x = x_i}.
std::vector<MomentConstraint> exhausting_basis(const JointMeasure& p, const DiscreteMeasure& nu);

}  // namespace msb
