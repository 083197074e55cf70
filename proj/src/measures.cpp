#include "msbridge/measures.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "msbridge/errors.hpp"

namespace msb {
namespace {

// Rounding in measure arithmetic (mu - lambda etc.) can leave weights a few
// ulps below zero; anything beyond this is rejected.
constexpr double kNegativeSnap = 1e-13;

std::vector<double> checked_weights(std::vector<double> w, const char* what) {
  for (double& v : w) {
    if (!std::isfinite(v)) throw DomainError(std::string(what) + ": non-finite weight");
    if (v < 0.0) {
      if (v < -kNegativeSnap) throw DomainError(std::string(what) + ": negative weight");
      v = 0.0;
    }
  }
  return w;
}

double sum(std::span<const double> v) { return std::accumulate(v.begin(), v.end(), 0.0); }

void require_same_grids(const JointMeasure& a, const JointMeasure& b, const char* op) {
  if (!(a.xgrid() == b.xgrid()) || !(a.ygrid() == b.ygrid()))
    throw DomainError(std::string(op) + ": joint measures live on different grids");
}

/// Normalized probabilities of m in grid order.
std::vector<double> probabilities(const DiscreteMeasure& m) {
  if (!(m.mass() > 0.0)) throw DomainError("empty measure");
  std::vector<double> p(m.size());
  for (std::size_t i = 0; i < m.size(); ++i) p[i] = m.weight(i) / m.mass();
  return p;
}

double entropy_term(double q, double p) {
  if (q <= 0.0) return 0.0;
  if (p <= 0.0) return std::numeric_limits<double>::infinity();
  return q * std::log(q / p);
}

}  // namespace

// ---------------------------------------------------------------------------

Grid::Grid(std::vector<double> points) : points_(std::move(points)) {
  if (points_.empty()) throw DomainError("grid must contain at least one point");
  for (std::size_t i = 0; i < points_.size(); ++i) {
    if (!std::isfinite(points_[i])) throw DomainError("grid points must be finite");
    if (i > 0 && !(points_[i] > points_[i - 1]))
      throw DomainError("grid points must be strictly increasing");
  }
}

std::optional<std::size_t> Grid::index_of(double x) const {
  auto it = std::lower_bound(points_.begin(), points_.end(), x);
  if (it == points_.end() || *it != x) return std::nullopt;
  return static_cast<std::size_t>(it - points_.begin());
}

Grid Grid::merge(const Grid& a, const Grid& b) {
  std::vector<double> out;
  out.reserve(a.size() + b.size());
  std::set_union(a.points_.begin(), a.points_.end(), b.points_.begin(), b.points_.end(),
                 std::back_inserter(out));
  return Grid(std::move(out));
}

Grid Grid::shifted(double offset) const {
  std::vector<double> out(points_);
  for (double& x : out) x += offset;
  return Grid(std::move(out));
}

// ---------------------------------------------------------------------------

DiscreteMeasure::DiscreteMeasure(Grid grid, std::vector<double> weights)
    : grid_(std::move(grid)), weights_(checked_weights(std::move(weights), "measure")) {
  if (grid_.size() == 0) throw DomainError("measure grid is empty");
  if (weights_.size() != grid_.size()) throw DomainError("measure: weight/grid size mismatch");
  mass_ = sum(weights_);
}

DiscreteMeasure DiscreteMeasure::dirac(double x, double mass) {
  return DiscreteMeasure(Grid({x}), {mass});
}

DiscreteMeasure DiscreteMeasure::zero(Grid grid) {
  std::vector<double> w(grid.size(), 0.0);
  return DiscreteMeasure(std::move(grid), std::move(w));
}

DiscreteMeasure DiscreteMeasure::scaled(double factor) const {
  std::vector<double> w(weights_);
  for (double& v : w) v *= factor;
  return DiscreteMeasure(grid_, std::move(w));
}

DiscreteMeasure DiscreteMeasure::normalized() const {
  if (!(mass_ > 0.0)) throw DomainError("empty measure");
  return scaled(1.0 / mass_);
}

std::vector<double> DiscreteMeasure::weights_on(const Grid& target) const {
  std::vector<double> out(target.size(), 0.0);
  for (std::size_t i = 0; i < size(); ++i) {
    auto k = target.index_of(grid_[i]);
    if (!k) {
      if (weights_[i] == 0.0) continue;
      throw DomainError("measure point missing from target grid");
    }
    out[*k] = weights_[i];
  }
  return out;
}

DiscreteMeasure DiscreteMeasure::embedded(const Grid& target) const {
  return DiscreteMeasure(target, weights_on(target));
}

DiscreteMeasure DiscreteMeasure::compacted() const {
  std::vector<double> pts;
  std::vector<double> w;
  for (std::size_t i = 0; i < size(); ++i) {
    if (weights_[i] > 0.0) {
      pts.push_back(grid_[i]);
      w.push_back(weights_[i]);
    }
  }
  if (pts.empty()) return DiscreteMeasure(Grid({grid_[0]}), {0.0});
  return DiscreteMeasure(Grid(std::move(pts)), std::move(w));
}

// ---------------------------------------------------------------------------

JointMeasure::JointMeasure(Grid xgrid, Grid ygrid, std::vector<double> weights)
    : xgrid_(std::move(xgrid)), ygrid_(std::move(ygrid)),
      w_(checked_weights(std::move(weights), "joint measure")) {
  if (w_.size() != xgrid_.size() * ygrid_.size())
    throw DomainError("joint measure: weight matrix does not match grids");
  mass_ = sum(w_);
}

DiscreteMeasure JointMeasure::first_marginal() const {
  std::vector<double> m(rows(), 0.0);
  for (std::size_t i = 0; i < rows(); ++i) m[i] = sum(row(i));
  return DiscreteMeasure(xgrid_, std::move(m));
}

DiscreteMeasure JointMeasure::second_marginal() const {
  std::vector<double> m(cols(), 0.0);
  for (std::size_t i = 0; i < rows(); ++i)
    for (std::size_t j = 0; j < cols(); ++j) m[j] += (*this)(i, j);
  return DiscreteMeasure(ygrid_, std::move(m));
}

JointMeasure JointMeasure::product(const DiscreteMeasure& a, const DiscreteMeasure& b) {
  std::vector<double> w(a.size() * b.size());
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < b.size(); ++j) w[i * b.size() + j] = a.weight(i) * b.weight(j);
  return JointMeasure(a.grid(), b.grid(), std::move(w));
}

// ---------------------------------------------------------------------------

Kernel::Kernel(Grid xgrid, Grid ygrid, std::vector<double> rows)
    : xgrid_(std::move(xgrid)), ygrid_(std::move(ygrid)),
      rows_(checked_weights(std::move(rows), "kernel")) {
  if (rows_.size() != xgrid_.size() * ygrid_.size())
    throw DomainError("kernel: row matrix does not match grids");
  for (std::size_t i = 0; i < xgrid_.size(); ++i) {
    if (std::abs(sum(row(i)) - 1.0) > 1e-10) throw DomainError("kernel rows must have mass 1");
  }
}

Kernel Kernel::identity(const Grid& grid) {
  std::vector<double> rows(grid.size() * grid.size(), 0.0);
  for (std::size_t i = 0; i < grid.size(); ++i) rows[i * grid.size() + i] = 1.0;
  return Kernel(grid, grid, std::move(rows));
}

DiscreteMeasure Kernel::row_measure(std::size_t i) const {
  auto r = row(i);
  return DiscreteMeasure(ygrid_, std::vector<double>(r.begin(), r.end()));
}

double Kernel::row_barycenter(std::size_t i) const {
  double m = 0.0;
  auto r = row(i);
  for (std::size_t j = 0; j < r.size(); ++j) m += r[j] * ygrid_[j];
  return m;
}

// ---------------------------------------------------------------------------

double barycenter(const DiscreteMeasure& m) {
  if (!(m.mass() > 0.0)) throw DomainError("empty measure");
  double s = 0.0;
  for (std::size_t i = 0; i < m.size(); ++i) s += m.weight(i) * m.point(i);
  return s / m.mass();
}

std::vector<double> quantile_breakpoints(const DiscreteMeasure& m) {
  auto p = probabilities(m);
  std::vector<double> out{0.0};
  double c = 0.0;
  for (std::size_t i = 0; i + 1 < p.size(); ++i) {
    c += p[i];
    if (p[i] > 0.0) out.push_back(std::min(c, 1.0));
  }
  out.push_back(1.0);
  return out;
}

double quantile_integral(const DiscreteMeasure& m, double u) {
  if (!(u >= 0.0 && u <= 1.0)) throw DomainError("quantile level outside [0, 1]");
  auto p = probabilities(m);
  // Atom i occupies the level interval (F_{i-1}, F_i].
  double lo = 0.0;
  double acc = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    double hi = (i + 1 == p.size()) ? 1.0 : lo + p[i];
    double len = hi - std::max(lo, u);
    if (len > 0.0 && p[i] > 0.0) acc += m.point(i) * std::min(len, p[i]);
    lo = hi;
  }
  return acc;
}

namespace {

void require_equal_mass(const DiscreteMeasure& a, const DiscreteMeasure& b, double tol) {
  if (!(a.mass() > 0.0) || !(b.mass() > 0.0)) throw DomainError("empty measure");
  if (std::abs(a.mass() - b.mass()) > tol * std::max(1.0, a.mass()))
    throw DomainError("convex order requires equal masses");
}

std::vector<double> merged_breakpoints(const DiscreteMeasure& a, const DiscreteMeasure& b) {
  auto u = quantile_breakpoints(a);
  auto v = quantile_breakpoints(b);
  std::vector<double> out;
  out.reserve(u.size() + v.size());
  std::merge(u.begin(), u.end(), v.begin(), v.end(), std::back_inserter(out));
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

}  // namespace

bool convex_order_leq(const DiscreteMeasure& a, const DiscreteMeasure& b, double tol) {
  require_equal_mass(a, b, tol);
  if (std::abs(quantile_integral(a, 0.0) - quantile_integral(b, 0.0)) > tol) return false;
  for (double u : merged_breakpoints(a, b)) {
    if (quantile_integral(a, u) > quantile_integral(b, u) + tol) return false;
  }
  return true;
}

double call_price(const DiscreteMeasure& m, double strike) {
  auto p = probabilities(m);
  double s = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) s += p[i] * std::max(m.point(i) - strike, 0.0);
  return s;
}

bool convex_order_oracle(const DiscreteMeasure& a, const DiscreteMeasure& b, double tol) {
  require_equal_mass(a, b, tol);
  if (std::abs(barycenter(a) - barycenter(b)) > tol) return false;
  Grid strikes = Grid::merge(a.grid(), b.grid());
  for (double k : strikes.points()) {
    if (call_price(a, k) > call_price(b, k) + tol) return false;
  }
  return true;
}

EqualitySet equality_set(const DiscreteMeasure& a, const DiscreteMeasure& b, double tol) {
  require_equal_mass(a, b, 1e-9);
  auto ca = a.compacted();
  auto cb = b.compacted();
  double scale = 1.0;
  for (double x : ca.grid().points()) scale = std::max(scale, std::abs(x));
  for (double x : cb.grid().points()) scale = std::max(scale, std::abs(x));
  if (std::abs(barycenter(ca)) > 1e-9 * scale || std::abs(barycenter(cb)) > 1e-9 * scale)
    throw DomainError("equality_set: measures must have zero barycenter");
  const double lo = ca.grid().front();
  const double hi = ca.grid().back();
  for (std::size_t j = 0; j < cb.size(); ++j) {
    if (cb.point(j) > lo && cb.point(j) < hi)
      throw DomainError("equality_set: second measure charges the interior of the first's hull");
  }
  if (!convex_order_leq(ca, cb)) throw DomainError("equality_set: measures not in convex order");

  const double zero_tol = tol * scale;
  std::vector<double> interior;
  for (double u : merged_breakpoints(ca, cb))
    if (u > 0.0 && u < 1.0) interior.push_back(u);
  auto gap = [&](double u) { return quantile_integral(cb, u) - quantile_integral(ca, u); };
  std::vector<bool> zero(interior.size());
  for (std::size_t k = 0; k < interior.size(); ++k) zero[k] = std::abs(gap(interior[k])) <= zero_tol;

  EqualitySet out;
  if (std::all_of(zero.begin(), zero.end(), [](bool z) { return z; })) {
    out.alpha = 1.0;
    out.beta = 1.0;
    out.equal = true;
    return out;
  }
  out.alpha = 0.0;
  for (std::size_t k = 0; k < interior.size() && zero[k]; ++k) out.alpha = interior[k];
  out.beta = 1.0;
  for (std::size_t k = interior.size(); k-- > 0 && zero[k];) out.beta = interior[k];
  return out;
}

// ---------------------------------------------------------------------------

double relative_entropy(const JointMeasure& q, const JointMeasure& p) {
  require_same_grids(q, p, "relative_entropy");
  double h = 0.0;
  auto qw = q.weights();
  auto pw = p.weights();
  for (std::size_t k = 0; k < qw.size(); ++k) {
    h += entropy_term(qw[k], pw[k]);
    if (std::isinf(h)) return h;
  }
  return h;
}

double relative_entropy(const DiscreteMeasure& q, const DiscreteMeasure& p) {
  Grid g = Grid::merge(q.grid(), p.grid());
  auto qw = q.weights_on(g);
  auto pw = p.weights_on(g);
  double h = 0.0;
  for (std::size_t k = 0; k < qw.size(); ++k) {
    h += entropy_term(qw[k], pw[k]);
    if (std::isinf(h)) return h;
  }
  return h;
}

Disintegration disintegrate(const JointMeasure& j) {
  auto marginal = j.first_marginal();
  const std::size_t n = j.cols();
  std::vector<double> rows(j.rows() * n);
  for (std::size_t i = 0; i < j.rows(); ++i) {
    double m = marginal.weight(i);
    for (std::size_t k = 0; k < n; ++k)
      rows[i * n + k] = m > 0.0 ? j(i, k) / m : 1.0 / static_cast<double>(n);
  }
  return {marginal, Kernel(j.xgrid(), j.ygrid(), std::move(rows))};
}

JointMeasure compose(const DiscreteMeasure& m, const Kernel& k) {
  if (!(m.grid() == k.xgrid())) throw DomainError("compose: measure grid differs from kernel source");
  const std::size_t n = k.ygrid().size();
  std::vector<double> w(m.size() * n);
  for (std::size_t i = 0; i < m.size(); ++i)
    for (std::size_t j = 0; j < n; ++j) w[i * n + j] = m.weight(i) * k(i, j);
  return JointMeasure(k.xgrid(), k.ygrid(), std::move(w));
}

EntropyChain entropy_chain(const JointMeasure& q, const JointMeasure& p) {
  require_same_grids(q, p, "entropy_chain");
  auto dq = disintegrate(q);
  auto dp = disintegrate(p);
  EntropyChain out;
  out.marginal = relative_entropy(dq.marginal, dp.marginal);
  if (std::isinf(out.marginal)) throw DomainError("entropy_chain: not absolutely continuous");
  for (std::size_t i = 0; i < q.rows(); ++i) {
    double w = dq.marginal.weight(i);
    if (w <= 0.0) continue;
    auto qr = dq.kernel.row(i);
    auto pr = dp.kernel.row(i);
    double h = 0.0;
    for (std::size_t j = 0; j < qr.size(); ++j) h += entropy_term(qr[j], pr[j]);
    if (std::isinf(h)) throw DomainError("entropy_chain: not absolutely continuous");
    out.conditional += w * h;
  }
  return out;
}

// ---------------------------------------------------------------------------

namespace {

double tv_of(std::span<const double> a, std::span<const double> b) {
  double pos = 0.0;
  double neg = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    double d = a[k] - b[k];
    if (d > 0.0) pos += d;
    else neg -= d;
  }
  return std::max(pos, neg);
}

}  // namespace

double tv_distance(const DiscreteMeasure& a, const DiscreteMeasure& b) {
  Grid g = Grid::merge(a.grid(), b.grid());
  auto aw = a.weights_on(g);
  auto bw = b.weights_on(g);
  return tv_of(aw, bw);
}

double tv_distance(const JointMeasure& a, const JointMeasure& b) {
  require_same_grids(a, b, "tv_distance");
  return tv_of(a.weights(), b.weights());
}

double w1_distance(const DiscreteMeasure& a, const DiscreteMeasure& b) {
  if (std::abs(a.mass() - b.mass()) > 1e-9 * std::max(1.0, a.mass()))
    throw DomainError("w1_distance requires equal masses");
  auto pa = probabilities(a);
  auto pb = probabilities(b);
  // Walk both quantile functions level by level.
  std::size_t i = 0;
  std::size_t j = 0;
  double ra = pa[0];
  double rb = pb[0];
  double acc = 0.0;
  while (i < pa.size() && j < pb.size()) {
    if (ra <= 0.0) {
      if (++i < pa.size()) ra = pa[i];
      continue;
    }
    if (rb <= 0.0) {
      if (++j < pb.size()) rb = pb[j];
      continue;
    }
    double step = std::min(ra, rb);
    acc += step * std::abs(a.point(i) - b.point(j));
    ra -= step;
    rb -= step;
  }
  return acc;
}

TvBound normalize_tv_bound(const DiscreteMeasure& lambda, const DiscreteMeasure& mu) {
  if (!(lambda.mass() > 0.0)) throw DomainError("normalize_tv_bound: lambda is zero");
  Grid g = Grid::merge(lambda.grid(), mu.grid());
  auto lw = lambda.weights_on(g);
  auto mw = mu.weights_on(g);
  for (std::size_t k = 0; k < lw.size(); ++k) {
    if (lw[k] > mw[k] + 1e-14 * mu.mass()) throw DomainError("normalize_tv_bound: lambda not <= mu");
  }
  TvBound out;
  out.tv = tv_distance(lambda.normalized(), mu.normalized());
  out.bound = (mu.mass() - lambda.mass()) / mu.mass();
  return out;
}

Kernel kernel_compose(const Kernel& m, const Kernel& q) {
  if (!(m.ygrid() == q.xgrid())) throw DomainError("kernel_compose: grid mismatch");
  const std::size_t nx = m.xgrid().size();
  const std::size_t nmid = m.ygrid().size();
  const std::size_t ny = q.ygrid().size();
  std::vector<double> rows(nx * ny, 0.0);
  for (std::size_t i = 0; i < nx; ++i)
    for (std::size_t k = 0; k < nmid; ++k) {
      double w = m(i, k);
      if (w == 0.0) continue;
      for (std::size_t j = 0; j < ny; ++j) rows[i * ny + j] += w * q(k, j);
    }
  return Kernel(m.xgrid(), q.ygrid(), std::move(rows));
}

double max_mean_defect(const Kernel& k, std::span<const double> row_weights) {
  double worst = 0.0;
  for (std::size_t i = 0; i < k.xgrid().size(); ++i) {
    if (row_weights[i] <= 0.0) continue;
    worst = std::max(worst, std::abs(k.row_barycenter(i) - k.xgrid()[i]));
  }
  return worst;
}

}  // namespace msb
