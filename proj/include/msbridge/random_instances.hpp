#pragma once

#include <random>
#include <utility>
#include <vector>

#include "msbridge/calibration.hpp"
#include "msbridge/measures.hpp"

namespace msb::random {

// Seeded generators for property runs. Everything is driven by the caller's
// engine so that runs are reproducible.

using Engine = std::mt19937_64;

/// Sorted distinct points drawn from an integer lattice scaled by `step`.
Grid lattice_grid(Engine& rng, std::size_t n, int lo, int hi, double step = 1.0);

/// Strictly positive weights summing to `mass`.
std::vector<double> simplex_weights(Engine& rng, std::size_t n, double mass = 1.0);

/// Strictly positive row on ygrid with barycenter x (exponential tilt of a
/// random base row); requires min ygrid < x < max ygrid.
std::vector<double> mean_row(Engine& rng, const Grid& ygrid, double x);

struct BridgeInstance {
  JointMeasure p;
  DiscreteMeasure nu;
};

/// P strictly positive; nu the mixture of two martingale push-forwards, so
/// that a calibrated martingale measure equivalent to P exists.
BridgeInstance feasible_instance(Engine& rng, std::size_t nx, std::size_t ny);

/// a <=_c b with b = a pushed through a mean-preserving kernel.
std::pair<DiscreteMeasure, DiscreteMeasure> dilation_pair(Engine& rng, std::size_t max_atoms);

/// Equal-mass pair, half of the time a dilation and otherwise independent.
std::pair<DiscreteMeasure, DiscreteMeasure> equal_mass_pair(Engine& rng, std::size_t max_atoms);

/// q << p on the same grids, both probabilities.
std::pair<JointMeasure, JointMeasure> entropy_pair(Engine& rng);

/// 0 != lambda <= mu.
std::pair<DiscreteMeasure, DiscreteMeasure> dominated_pair(Engine& rng);

/// Probability measure on a subset of the returned strike grid.
std::pair<DiscreteMeasure, std::vector<double>> measure_with_strikes(Engine& rng);

}  // namespace msb::random
