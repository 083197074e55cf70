#include "msbridge/random_instances.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "msbridge/errors.hpp"

namespace msb::random {
namespace {

double uniform(Engine& rng, double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); }

std::size_t count(Engine& rng, std::size_t lo, std::size_t hi) {
  return std::uniform_int_distribution<std::size_t>(lo, hi)(rng);
}

}  // namespace

Grid lattice_grid(Engine& rng, std::size_t n, int lo, int hi, double step) {
  if (hi - lo + 1 < static_cast<int>(n)) throw DomainError("lattice_grid: lattice too small");
  std::set<int> picks;
  std::uniform_int_distribution<int> d(lo, hi);
  while (picks.size() < n) picks.insert(d(rng));
  std::vector<double> pts;
  for (int k : picks) pts.push_back(k * step);
  return Grid(std::move(pts));
}

std::vector<double> simplex_weights(Engine& rng, std::size_t n, double mass) {
  std::vector<double> w(n);
  for (double& v : w) v = uniform(rng, 0.05, 1.0);
  double s = std::accumulate(w.begin(), w.end(), 0.0);
  for (double& v : w) v *= mass / s;
  return w;
}

std::vector<double> mean_row(Engine& rng, const Grid& ygrid, double x) {
  if (!(ygrid.front() < x && x < ygrid.back())) throw DomainError("mean_row: x outside the grid hull");
  std::vector<double> base = simplex_weights(rng, ygrid.size());
  auto tilted = [&](double t, std::vector<double>& row) {
    double m = -1e300;
    for (std::size_t j = 0; j < ygrid.size(); ++j) m = std::max(m, std::log(base[j]) + t * ygrid[j]);
    double s = 0.0, s1 = 0.0;
    row.resize(ygrid.size());
    for (std::size_t j = 0; j < ygrid.size(); ++j) {
      row[j] = std::exp(std::log(base[j]) + t * ygrid[j] - m);
      s += row[j];
      s1 += row[j] * ygrid[j];
    }
    for (double& v : row) v /= s;
    return s1 / s;
  };
  std::vector<double> row;
  double lo = -1.0, hi = 1.0;
  while (tilted(lo, row) > x) lo *= 2.0;
  while (tilted(hi, row) < x) hi *= 2.0;
  for (int it = 0; it < 200; ++it) {
    double mid = 0.5 * (lo + hi);
    (tilted(mid, row) < x ? lo : hi) = mid;
  }
  tilted(0.5 * (lo + hi), row);
  // Absorb the residual mean error in the two outermost cells.
  double err = 0.0;
  for (std::size_t j = 0; j < row.size(); ++j) err += row[j] * (ygrid[j] - x);
  const std::size_t last = row.size() - 1;
  double span = ygrid[last] - ygrid[0];
  double shift = err / span;
  row[0] += shift;
  row[last] -= shift;
  return row;
}

BridgeInstance feasible_instance(Engine& rng, std::size_t nx, std::size_t ny) {
  Grid ygrid = lattice_grid(rng, ny, -6, 6, 0.5);
  std::vector<double> xs;
  std::set<double> picked;
  while (xs.size() < nx) {
    double x = std::round(uniform(rng, ygrid.front(), ygrid.back()) * 8.0) / 8.0;
    if (x <= ygrid.front() || x >= ygrid.back() || !picked.insert(x).second) continue;
    xs.push_back(x);
  }
  std::sort(xs.begin(), xs.end());
  Grid xgrid(xs);
  std::vector<double> pw = simplex_weights(rng, nx * ny);
  JointMeasure p(xgrid, ygrid, std::move(pw));

  std::vector<double> nu(ny, 0.0);
  const double t = uniform(rng, 0.1, 0.5);
  for (double share : {1.0 - t, t}) {
    std::vector<double> mu = simplex_weights(rng, nx, share);
    for (std::size_t i = 0; i < nx; ++i) {
      auto row = mean_row(rng, ygrid, xgrid[i]);
      for (std::size_t j = 0; j < ny; ++j) nu[j] += mu[i] * row[j];
    }
  }
  double s = std::accumulate(nu.begin(), nu.end(), 0.0);
  for (double& v : nu) v /= s;
  return {std::move(p), DiscreteMeasure(ygrid, std::move(nu))};
}

std::pair<DiscreteMeasure, DiscreteMeasure> dilation_pair(Engine& rng, std::size_t max_atoms) {
  std::size_t nb = count(rng, 3, max_atoms);
  Grid bgrid = lattice_grid(rng, nb, -10, 10);
  const auto interior = static_cast<std::size_t>(std::lround((bgrid.back() - bgrid.front()) * 4.0)) - 1;
  std::size_t na = count(rng, 1, std::min(max_atoms, interior));
  std::set<double> pts;
  while (pts.size() < na) {
    double x = std::round(uniform(rng, bgrid.front(), bgrid.back()) * 4.0) / 4.0;
    if (x > bgrid.front() && x < bgrid.back()) pts.insert(x);
  }
  Grid agrid(std::vector<double>(pts.begin(), pts.end()));
  std::vector<double> aw = simplex_weights(rng, na);
  std::vector<double> bw(nb, 0.0);
  for (std::size_t i = 0; i < na; ++i) {
    auto row = mean_row(rng, bgrid, agrid[i]);
    for (std::size_t j = 0; j < nb; ++j) bw[j] += aw[i] * row[j];
  }
  return {DiscreteMeasure(agrid, std::move(aw)), DiscreteMeasure(bgrid, std::move(bw))};
}

std::pair<DiscreteMeasure, DiscreteMeasure> equal_mass_pair(Engine& rng, std::size_t max_atoms) {
  const double mass = uniform(rng, 0.2, 3.0);
  if (count(rng, 0, 1) == 0) {
    auto [a, b] = dilation_pair(rng, max_atoms);
    if (count(rng, 0, 1) == 0) std::swap(a, b);
    return {a.scaled(mass), b.scaled(mass * a.mass() / b.mass())};
  }
  Grid ga = lattice_grid(rng, count(rng, 1, max_atoms), -6, 6);
  Grid gb = lattice_grid(rng, count(rng, 1, max_atoms), -6, 6);
  return {DiscreteMeasure(ga, simplex_weights(rng, ga.size(), mass)),
          DiscreteMeasure(gb, simplex_weights(rng, gb.size(), mass))};
}

std::pair<JointMeasure, JointMeasure> entropy_pair(Engine& rng) {
  Grid xg = lattice_grid(rng, count(rng, 1, 5), -5, 5);
  Grid yg = lattice_grid(rng, count(rng, 1, 6), -5, 5);
  const std::size_t n = xg.size() * yg.size();
  std::vector<double> p = simplex_weights(rng, n);
  std::vector<double> q = simplex_weights(rng, n);
  for (std::size_t k = 0; k < n; ++k)
    if (n > 1 && count(rng, 0, 3) == 0) q[k] = 0.0;
  double s = std::accumulate(q.begin(), q.end(), 0.0);
  if (s == 0.0) q = p, s = 1.0;
  for (double& v : q) v /= s;
  return {JointMeasure(xg, yg, std::move(q)), JointMeasure(xg, yg, std::move(p))};
}

std::pair<DiscreteMeasure, DiscreteMeasure> dominated_pair(Engine& rng) {
  Grid g = lattice_grid(rng, count(rng, 1, 10), -10, 10);
  std::vector<double> mu = simplex_weights(rng, g.size(), uniform(rng, 0.1, 2.0));
  std::vector<double> lam(mu.size());
  for (std::size_t i = 0; i < mu.size(); ++i) lam[i] = count(rng, 0, 3) == 0 ? 0.0 : mu[i] * uniform(rng, 0.0, 1.0);
  if (std::accumulate(lam.begin(), lam.end(), 0.0) == 0.0) lam[0] = mu[0];
  return {DiscreteMeasure(g, std::move(lam)), DiscreteMeasure(g, std::move(mu))};
}

std::pair<DiscreteMeasure, std::vector<double>> measure_with_strikes(Engine& rng) {
  Grid strikes = lattice_grid(rng, count(rng, 3, 14), 0, 40, 2.5);
  std::vector<double> w(strikes.size(), 0.0);
  std::size_t used = 0;
  for (auto& v : w)
    if (count(rng, 0, 2) != 0) v = uniform(rng, 0.05, 1.0), ++used;
  if (used == 0) w[count(rng, 0, w.size() - 1)] = 1.0;
  double s = std::accumulate(w.begin(), w.end(), 0.0);
  for (double& v : w) v /= s;
  std::vector<double> ks(strikes.points().begin(), strikes.points().end());
  return {DiscreteMeasure(strikes, std::move(w)), std::move(ks)};
}

}  // namespace msb::random
