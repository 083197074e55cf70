#pragma once

#include <cstddef>
#include <optional>
#include <utility>
#include <vector>

#include "msbridge/measures.hpp"

namespace msb {

// Construction of an approximating calibrated martingale measure whose
// first marginal keeps a given h bounded. All measures on the real line
// are expected in coordinates where mu has zero barycenter, except for
// build_q_tilde and entropy_convergence_report, which recenter internally.

struct DensityBounds {
  double lower = 0.0;  ///< l = min P.(x, {y}) / nu({y})
  double upper = 0.0;  ///< L = max P.(x, {y}) / nu({y})
};

/// Bounds over x with P^1(x) > 0 and y with nu(y) > 0. Every such row of P
/// must charge exactly the atoms of nu.
DensityBounds density_bounds(const JointMeasure& p, const DiscreteMeasure& nu);

/// I(x') = H(Q.(x') | P.(x')) + log(L / l) on the atoms of Q^1 (zero
/// elsewhere), with nu = Q^2. Also verifies H(Q.(x') | P.(x)) <= I(x') for
/// every pair of charged rows.
DiscreteMeasure technical_bound(const JointMeasure& q, const JointMeasure& p);

struct SplitResult {
  double a = 0.0;
  double b = 0.0;
  double c = 0.0;            ///< smallest |x| over nonzero atoms of mu
  double delta = 0.0;
  double delta_tilde = 0.0;  ///< mu(x < 0) min mu(x > 0)
  DiscreteMeasure mu;
  DiscreteMeasure lambda_A;
  DiscreteMeasure mu_A;  ///< (1/lambda_A(R) - 1) lambda_A
  DiscreteMeasure mu_B;  ///< mu - lambda_A
};

/// Interval [a, b] between a negative and a positive atom, chosen with the
/// smallest b - a (then the largest a), such that lambda_A = mu on (a, b)
/// plus part of the atoms at a and b has zero barycenter, removes a mass in
/// (0, delta], and keeps at least delta on each side of zero.
SplitResult split_interval(const DiscreteMeasure& mu, double delta);

struct RestrictResult {
  DiscreteMeasure lambda_eps;
  double tau = 0.0;    ///< |h| <= tau on supp lambda_eps
  double bound = 0.0;  ///< allowed mu-mass of the excluded atoms
  double excluded_mass = 0.0;
};

/// Drops the atoms of lambda_A with |h| > tau for the smallest tau whose
/// excluded mu-mass is within (delta min eps)/2 * (1 min c/(|a| max |b|)),
/// then removes mass from the outermost atoms on one side to restore zero
/// barycenter.
RestrictResult restrict_bounded(const SplitResult& split, const std::vector<double>& h, double eps);

/// Mean-preserving kernel from a's grid to merge(a.grid, b.grid) that sends
/// a to b, the analytic center of the martingale couplings. Rows of
/// zero-mass points of a are Dirac rows.
Kernel strassen_coupling(const DiscreteMeasure& a, const DiscreteMeasure& b);

struct ProbeResult {
  /// 1-based index from which a_n <=_c b_n holds through the horizon.
  std::optional<std::size_t> stable_from;
  std::vector<bool> holds;
};

/// Convex-order check along a perturbation schedule of (a_n, b_n). All
/// measures are normalized first; a != b, zero barycenters and a_n << a are
/// validated.
ProbeResult convex_order_stability_probe(const DiscreteMeasure& a, const DiscreteMeasure& b,
                                         const std::vector<std::pair<DiscreteMeasure, DiscreteMeasure>>& schedule);

struct EpsSchedule {
  double ratio = 0.5;  ///< eps_n = delta * ratio^n
  int horizon = 40;
};

struct ApproxOutput {
  JointMeasure q_tilde;
  double delta = 0.0;
  double h_bound = 0.0;  ///< the threshold tau of the selected restriction
  double tv_to_q = 0.0;
  double entropy = 0.0;  ///< H(q_tilde | P)
  double entropy_gap = 0.0;
  std::size_t n0 = 0;
  double lambda_mass = 0.0;     ///< lambda_A*(R)
  double convexity_rhs = 0.0;   ///< convex-combination entropy bound
  double mixing_entropy = 0.0;  ///< E^{mu_A*}[H(Q._delta | P.)]
  double i_domination = 0.0;    ///< E^{mu_B*}[I]
  SplitResult split;
};

/// Q~ = lambda_A* (x) Q. + mu_A* (x) (M o Q.) for Q = q with an h over
/// q's xgrid; asserts the output is a calibrated martingale measure with
/// finite entropy and |h| <= tau on its first marginal.
ApproxOutput build_q_tilde(const JointMeasure& q, const JointMeasure& p, const std::vector<double>& h,
                           double delta, const EpsSchedule& schedule = {});

struct ConvergenceReport {
  std::vector<ApproxOutput> rows;
  double reference_entropy = 0.0;  ///< H(q | P)
  bool within_tol = false;         ///< last row meets tol in TV and entropy
};

ConvergenceReport entropy_convergence_report(const JointMeasure& q, const JointMeasure& p,
                                             const std::vector<double>& h, const std::vector<double>& deltas,
                                             double tol = 1e-3, const EpsSchedule& schedule = {});

}  // namespace msb
