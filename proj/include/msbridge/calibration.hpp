#pragma once

#include <string>
#include <vector>

#include "msbridge/measures.hpp"

namespace msb {

/// Undiscounted European call quote (zero rates and dividends).
struct CallQuote {
  double strike = 0.0;
  double price = 0.0;
};

struct ArbitrageViolation {
  enum class Kind { kMonotonicity, kSlope, kConvexity, kBoundary };
  Kind kind;
  double strike_lo;
  double strike_hi;
  double magnitude;
};

const char* to_string(ArbitrageViolation::Kind kind);

struct CalibrationReport {
  /// Terminal marginal on the strike grid; negative implied weights are
  /// clipped to zero and reported as violations.
  DiscreteMeasure nu;
  /// Forward C(K_min) + K_min from put-call parity at the lowest strike.
  double forward = 0.0;
  std::vector<ArbitrageViolation> violations;
  /// C(K_max) > 0: the tail above K_max was collapsed onto the end strikes.
  bool upper_tail_collapsed = false;
};

inline constexpr double kArbitrageTol = 1e-12;

/// Static-arbitrage checks on a sorted quote sheet: nonincreasing prices,
/// slopes in [-1, 0], convexity, and nonnegative boundary masses.
std::vector<ArbitrageViolation> check_static_arbitrage(const std::vector<CallQuote>& quotes,
                                                       double tol = kArbitrageTol);

/// Discrete Breeden-Litzenberger: interior weights are the jumps of the
/// divided-difference slopes; the end strikes absorb the remaining mass so
/// that total mass is 1 and the mean equals the forward.
CalibrationReport implied_marginal(const std::vector<CallQuote>& quotes, double tol = kArbitrageTol);

/// C(K) = E^nu[(Y - K)^+] at each strike.
std::vector<CallQuote> price_calls(const DiscreteMeasure& nu, const std::vector<double>& strikes);

}  // namespace msb
