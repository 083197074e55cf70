#pragma once

#include <cmath>

#include "msbridge/measures.hpp"

namespace msb::test {

// Two x-atoms, three y-atoms; the reference rows are mirror images.
inline JointMeasure fixture_p() {
  return JointMeasure(Grid({-0.5, 0.5}), Grid({-1.0, 0.0, 1.0}), {0.25, 0.15, 0.1, 0.1, 0.15, 0.25});
}

inline DiscreteMeasure fixture_nu() { return DiscreteMeasure(Grid({-1.0, 0.0, 1.0}), {0.3, 0.4, 0.3}); }

// Closed form by symmetry: rows (a, 0.2, 0.025) with a - 0.025 = 0.25.
inline JointMeasure fixture_q_star() {
  return JointMeasure(Grid({-0.5, 0.5}), Grid({-1.0, 0.0, 1.0}), {0.275, 0.2, 0.025, 0.025, 0.2, 0.275});
}

inline double fixture_entropy() {
  return 2.0 * (0.275 * std::log(1.1) + 0.2 * std::log(4.0 / 3.0) + 0.025 * std::log(0.25));
}

inline DiscreteMeasure two_point(double a, double b) { return DiscreteMeasure(Grid({a, b}), {0.5, 0.5}); }

}  // namespace msb::test
