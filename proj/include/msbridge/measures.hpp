#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

namespace msb {

/// Strictly increasing, finite, non-empty list of price levels.
class Grid {
 public:
  Grid() = default;
  explicit Grid(std::vector<double> points);

  std::size_t size() const { return points_.size(); }
  double operator[](std::size_t i) const { return points_[i]; }
  std::span<const double> points() const { return points_; }
  double front() const { return points_.front(); }
  double back() const { return points_.back(); }

  /// Index of an exactly matching point.
  std::optional<std::size_t> index_of(double x) const;

  /// Sorted union with exact point matching.
  static Grid merge(const Grid& a, const Grid& b);

  /// Grid with every point shifted by `offset`.
  Grid shifted(double offset) const;

  friend bool operator==(const Grid& a, const Grid& b) { return a.points_ == b.points_; }

 private:
  std::vector<double> points_;
};

/// Nonnegative weights on a grid. Sub-probability and unnormalized
/// measures are allowed; mass is the exact sum of the weights.
class DiscreteMeasure {
 public:
  DiscreteMeasure() = default;
  DiscreteMeasure(Grid grid, std::vector<double> weights);

  static DiscreteMeasure dirac(double x, double mass = 1.0);
  /// Zero measure on a grid.
  static DiscreteMeasure zero(Grid grid);

  const Grid& grid() const { return grid_; }
  std::span<const double> weights() const { return weights_; }
  double weight(std::size_t i) const { return weights_[i]; }
  std::size_t size() const { return weights_.size(); }
  double mass() const { return mass_; }
  double point(std::size_t i) const { return grid_[i]; }

  DiscreteMeasure scaled(double factor) const;
  DiscreteMeasure normalized() const;
  /// Same weights re-expressed on a grid containing every point of this one.
  DiscreteMeasure embedded(const Grid& target) const;
  /// Drops zero-weight points (keeps one point for the zero measure).
  DiscreteMeasure compacted() const;
  /// Weights with all values in grid order, including zeros.
  std::vector<double> weights_on(const Grid& target) const;

 private:
  Grid grid_;
  std::vector<double> weights_;
  double mass_ = 0.0;
};

/// Nonnegative matrix on xgrid x ygrid, row-major.
class JointMeasure {
 public:
  JointMeasure() = default;
  JointMeasure(Grid xgrid, Grid ygrid, std::vector<double> weights);

  const Grid& xgrid() const { return xgrid_; }
  const Grid& ygrid() const { return ygrid_; }
  std::size_t rows() const { return xgrid_.size(); }
  std::size_t cols() const { return ygrid_.size(); }
  double operator()(std::size_t i, std::size_t j) const { return w_[i * ygrid_.size() + j]; }
  std::span<const double> weights() const { return w_; }
  std::span<const double> row(std::size_t i) const {
    return std::span<const double>(w_).subspan(i * ygrid_.size(), ygrid_.size());
  }
  double mass() const { return mass_; }

  DiscreteMeasure first_marginal() const;
  DiscreteMeasure second_marginal() const;

  /// Product measure a (x) b.
  static JointMeasure product(const DiscreteMeasure& a, const DiscreteMeasure& b);

 private:
  Grid xgrid_;
  Grid ygrid_;
  std::vector<double> w_;
  double mass_ = 0.0;
};

/// Row-stochastic kernel from xgrid to ygrid.
class Kernel {
 public:
  Kernel() = default;
  Kernel(Grid xgrid, Grid ygrid, std::vector<double> rows);

  static Kernel identity(const Grid& grid);

  const Grid& xgrid() const { return xgrid_; }
  const Grid& ygrid() const { return ygrid_; }
  double operator()(std::size_t i, std::size_t j) const { return rows_[i * ygrid_.size() + j]; }
  std::span<const double> row(std::size_t i) const {
    return std::span<const double>(rows_).subspan(i * ygrid_.size(), ygrid_.size());
  }
  DiscreteMeasure row_measure(std::size_t i) const;
  double row_barycenter(std::size_t i) const;

 private:
  Grid xgrid_;
  Grid ygrid_;
  std::vector<double> rows_;
};

// ---------------------------------------------------------------------------
// Moments, quantiles and the convex order

double barycenter(const DiscreteMeasure& m);

/// Integral of the quantile function of m / m.mass() over (u, 1), with the
/// left-continuous quantile F^{-1}(p) = inf{y : F(y) >= p}.
double quantile_integral(const DiscreteMeasure& m, double u);

/// Cumulative probability levels of m / m.mass(), including 0 and 1.
std::vector<double> quantile_breakpoints(const DiscreteMeasure& m);

inline constexpr double kConvexOrderTol = 1e-9;

/// Quantile-integral test for a <=_c b on equal-mass measures.
bool convex_order_leq(const DiscreteMeasure& a, const DiscreteMeasure& b,
                      double tol = kConvexOrderTol);

/// Call-price test for a <=_c b: equal means and ordered call prices at
/// every strike in the union of supports. Used to cross-check the
/// quantile route.
bool convex_order_oracle(const DiscreteMeasure& a, const DiscreteMeasure& b,
                         double tol = kConvexOrderTol);

/// E^m[(Y - k)^+] for the normalized measure.
double call_price(const DiscreteMeasure& m, double strike);

struct EqualitySet {
  double alpha = 0.0;
  double beta = 1.0;
  /// Quantile integrals agree on all of (0, 1), i.e. a == b.
  bool equal = false;
};

/// Set of levels u where the quantile integrals of a and b coincide, for
/// a concentrated on [a_min, a_max] and b concentrated off its interior.
/// The set has the form (0, alpha] U [beta, 1).
EqualitySet equality_set(const DiscreteMeasure& a, const DiscreteMeasure& b,
                         double tol = 1e-12);

// ---------------------------------------------------------------------------
// Entropy and disintegration

/// Relative entropy H(q|p); +infinity when q is not absolutely continuous.
double relative_entropy(const JointMeasure& q, const JointMeasure& p);
double relative_entropy(const DiscreteMeasure& q, const DiscreteMeasure& p);

struct Disintegration {
  DiscreteMeasure marginal;
  Kernel kernel;
};

/// First marginal and conditional kernel. Rows of zero-mass x-points are
/// uniform.
Disintegration disintegrate(const JointMeasure& j);

/// m (x) k.
JointMeasure compose(const DiscreteMeasure& m, const Kernel& k);

struct EntropyChain {
  double marginal = 0.0;     ///< H(q1 | p1)
  double conditional = 0.0;  ///< E^{q1}[H(q. | p.)]
};

EntropyChain entropy_chain(const JointMeasure& q, const JointMeasure& p);

// ---------------------------------------------------------------------------
// Distances

/// sup_A |a(A) - b(A)| on the merged grid.
double tv_distance(const DiscreteMeasure& a, const DiscreteMeasure& b);
double tv_distance(const JointMeasure& a, const JointMeasure& b);

/// W1 between the normalized measures; masses must agree.
double w1_distance(const DiscreteMeasure& a, const DiscreteMeasure& b);

struct TvBound {
  double tv = 0.0;
  double bound = 0.0;
};

/// TV distance between lambda and mu after normalization together with the
/// bound (mu - lambda)(R) / mu(R); requires 0 != lambda <= mu.
TvBound normalize_tv_bound(const DiscreteMeasure& lambda, const DiscreteMeasure& mu);

/// Row x of the result is sum_x' m(x, x') q(x', .).
Kernel kernel_compose(const Kernel& m, const Kernel& q);

/// Largest |barycenter(row x) - x| over rows with positive weight.
double max_mean_defect(const Kernel& k, std::span<const double> row_weights);

}  // namespace msb
