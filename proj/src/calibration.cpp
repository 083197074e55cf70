#include "msbridge/calibration.hpp"

#include <cmath>

#include "msbridge/errors.hpp"

namespace msb {
namespace {

void validate(const std::vector<CallQuote>& quotes) {
  if (quotes.size() < 3) throw DomainError("calibration needs at least 3 quotes");
  for (std::size_t i = 0; i < quotes.size(); ++i) {
    if (!std::isfinite(quotes[i].strike) || !std::isfinite(quotes[i].price))
      throw DomainError("quotes must be finite");
    if (quotes[i].price < 0.0) throw DomainError("call prices must be nonnegative");
    if (i > 0 && !(quotes[i].strike > quotes[i - 1].strike))
      throw DomainError("strikes must be strictly increasing");
  }
}

struct RawDensity {
  std::vector<double> slopes;
  std::vector<double> weights;  // may be negative
  double forward = 0.0;
};

RawDensity raw_density(const std::vector<CallQuote>& q) {
  const std::size_t n = q.size();
  RawDensity out;
  out.slopes.resize(n - 1);
  for (std::size_t i = 0; i + 1 < n; ++i)
    out.slopes[i] = (q[i + 1].price - q[i].price) / (q[i + 1].strike - q[i].strike);
  out.weights.assign(n, 0.0);
  double interior_mass = 0.0;
  double interior_moment = 0.0;
  for (std::size_t i = 1; i + 1 < n; ++i) {
    out.weights[i] = out.slopes[i] - out.slopes[i - 1];
    interior_mass += out.weights[i];
    interior_moment += out.weights[i] * q[i].strike;
  }
  // End masses solve {mass = 1, mean = forward}; with C(K_max) = 0 this is
  // the usual 1 + s_0 and -s_{n-2}.
  const double k0 = q.front().strike;
  const double kn = q.back().strike;
  out.forward = q.front().price + k0;
  out.weights[n - 1] = (out.forward - interior_moment - k0 * (1.0 - interior_mass)) / (kn - k0);
  out.weights[0] = 1.0 - interior_mass - out.weights[n - 1];
  return out;
}

std::vector<ArbitrageViolation> violations_of(const std::vector<CallQuote>& q, const RawDensity& d,
                                              double tol) {
  using Kind = ArbitrageViolation::Kind;
  std::vector<ArbitrageViolation> out;
  const std::size_t n = q.size();
  for (std::size_t i = 0; i + 1 < n; ++i) {
    double s = d.slopes[i];
    if (s > tol) out.push_back({Kind::kMonotonicity, q[i].strike, q[i + 1].strike, q[i + 1].price - q[i].price});
    if (s < -1.0 - tol) out.push_back({Kind::kSlope, q[i].strike, q[i + 1].strike, -1.0 - s});
  }
  for (std::size_t i = 1; i + 1 < n; ++i) {
    if (d.weights[i] < -tol)
      out.push_back({Kind::kConvexity, q[i - 1].strike, q[i + 1].strike, -d.weights[i]});
  }
  if (d.weights[0] < -tol) out.push_back({Kind::kBoundary, q[0].strike, q[1].strike, -d.weights[0]});
  if (d.weights[n - 1] < -tol)
    out.push_back({Kind::kBoundary, q[n - 2].strike, q[n - 1].strike, -d.weights[n - 1]});
  return out;
}

}  // namespace

const char* to_string(ArbitrageViolation::Kind kind) {
  switch (kind) {
    case ArbitrageViolation::Kind::kMonotonicity: return "monotonicity";
    case ArbitrageViolation::Kind::kSlope: return "slope";
    case ArbitrageViolation::Kind::kConvexity: return "convexity";
    case ArbitrageViolation::Kind::kBoundary: return "boundary";
  }
  return "unknown";
}

std::vector<ArbitrageViolation> check_static_arbitrage(const std::vector<CallQuote>& quotes, double tol) {
  validate(quotes);
  return violations_of(quotes, raw_density(quotes), tol);
}

CalibrationReport implied_marginal(const std::vector<CallQuote>& quotes, double tol) {
  validate(quotes);
  RawDensity d = raw_density(quotes);
  CalibrationReport out;
  out.forward = d.forward;
  out.violations = violations_of(quotes, d, tol);
  out.upper_tail_collapsed = quotes.back().price > tol;
  std::vector<double> strikes(quotes.size());
  std::vector<double> w(quotes.size());
  for (std::size_t i = 0; i < quotes.size(); ++i) {
    strikes[i] = quotes[i].strike;
    w[i] = std::max(d.weights[i], 0.0);
  }
  out.nu = DiscreteMeasure(Grid(std::move(strikes)), std::move(w));
  return out;
}

std::vector<CallQuote> price_calls(const DiscreteMeasure& nu, const std::vector<double>& strikes) {
  std::vector<CallQuote> out;
  out.reserve(strikes.size());
  for (double k : strikes) {
    double c = 0.0;
    for (std::size_t i = 0; i < nu.size(); ++i) c += nu.weight(i) * std::max(nu.point(i) - k, 0.0);
    out.push_back({k, c});
  }
  return out;
}

}  // namespace msb
