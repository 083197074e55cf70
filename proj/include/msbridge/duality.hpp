#pragma once

#include <cstdint>
#include <vector>

#include "msbridge/bridge.hpp"

namespace msb {

/// Payoff h(x)(y - x) + g(y) at zero initial capital when price == 0.
struct SemistaticPortfolio {
  Grid xgrid;
  Grid ygrid;
  std::vector<double> h;
  std::vector<double> g;
  double price = 0.0;  ///< E^nu[g]

  double payoff(std::size_t i, std::size_t j) const { return h[i] * (ygrid[j] - xgrid[i]) + g[j]; }
};

/// -(1/gamma) log E^P[exp(-gamma V)].
double certainty_equivalent(const JointMeasure& p, const SemistaticPortfolio& v, double gamma);

/// h = -h*/gamma, g = -g*/gamma from the potentials in the E^nu[g*] = 0 gauge.
SemistaticPortfolio extract_optimal_portfolio(const BridgeSolution& sol, const DiscreteMeasure& nu,
                                              double gamma);

struct WitnessDefect {
  double gain = 0.0;           ///< |E^Q[h(X)(Y - X)]|
  double marginal = 0.0;       ///< d_TV(Q^2, nu)
  double martingale = 0.0;     ///< max_i |E^Q[Y - x_i | X = x_i]|
};

struct AdmissibilityReport {
  double price_defect = 0.0;     ///< |E^nu[g]|
  double max_gain_defect = 0.0;  ///< max over witnesses of |E^Q[h(X)(Y - X)]|
  std::vector<WitnessDefect> witnesses;
  bool admissible = false;
};

inline constexpr double kWitnessTol = 1e-9;

/// Checks E^nu[g] = 0 and E^Q[h(X)(Y - X)] = 0 for each witness after
/// validating that it is a calibrated martingale measure of finite entropy
/// relative to p.
AdmissibilityReport admissibility_check(const SemistaticPortfolio& v, const DiscreteMeasure& nu,
                                        const std::vector<JointMeasure>& witnesses, const JointMeasure& p,
                                        double tol = kWitnessTol);

struct DualityCertificate {
  double gamma = 1.0;
  double primal_value = 0.0;  ///< H(Q*|P) / gamma
  double dual_value = 0.0;    ///< certainty equivalent of the extracted portfolio
  double gap = 0.0;           ///< primal_value - dual_value
  SemistaticPortfolio portfolio;
  AdmissibilityReport admissibility;
  BridgeSolution solution;
};

struct CertifyOptions {
  SolverOptions solver;
  int random_witnesses = 4;
  std::uint64_t seed = 1;
  double gap_tol = 1e-6;
};

/// Solves the bridge, extracts the optimal portfolio and evaluates both
/// sides of the duality. Requires a calibrated martingale measure equivalent
/// to P.
DualityCertificate duality_gap(const JointMeasure& p, const DiscreteMeasure& nu, double gamma,
                               const CertifyOptions& opts = {});

}  // namespace msb
