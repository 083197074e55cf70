#include "msbridge/bridge.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <string>

#include "msbridge/errors.hpp"
#include "msbridge/lp.hpp"

namespace msb {
namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double log_sum_exp(std::span<const double> v) {
  double m = kNegInf;
  for (double x : v) m = std::max(m, x);
  if (m == kNegInf) return kNegInf;
  double s = 0.0;
  for (double x : v) s += std::exp(x - m);
  return m + std::log(s);
}

struct Cells {
  std::vector<std::size_t> index;  // flat cell ids in supp P
};

Cells support_cells(const JointMeasure& p) {
  Cells c;
  auto w = p.weights();
  for (std::size_t k = 0; k < w.size(); ++k)
    if (w[k] > 0.0) c.index.push_back(k);
  return c;
}

struct PolytopeSystem {
  Eigen::MatrixXd a;
  Eigen::VectorXd b;
  Cells cells;
};

// Rows: one column-sum constraint per y_j, then one martingale constraint per x_i.
PolytopeSystem calibrated_martingale_system(const JointMeasure& p, std::span<const double> nu) {
  PolytopeSystem sys;
  sys.cells = support_cells(p);
  const std::size_t nx = p.rows();
  const std::size_t ny = p.cols();
  sys.a = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(ny + nx),
                                static_cast<Eigen::Index>(sys.cells.index.size()));
  sys.b = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(ny + nx));
  for (std::size_t j = 0; j < ny; ++j) sys.b[static_cast<Eigen::Index>(j)] = nu[j];
  for (std::size_t k = 0; k < sys.cells.index.size(); ++k) {
    std::size_t i = sys.cells.index[k] / ny;
    std::size_t j = sys.cells.index[k] % ny;
    auto col = static_cast<Eigen::Index>(k);
    sys.a(static_cast<Eigen::Index>(j), col) = 1.0;
    sys.a(static_cast<Eigen::Index>(ny + i), col) = p.ygrid()[j] - p.xgrid()[i];
  }
  return sys;
}

JointMeasure joint_from_cells(const JointMeasure& p, const Cells& cells, const Eigen::VectorXd& x) {
  std::vector<double> w(p.rows() * p.cols(), 0.0);
  for (std::size_t k = 0; k < cells.index.size(); ++k)
    w[cells.index[k]] = std::max(x[static_cast<Eigen::Index>(k)], 0.0);
  return JointMeasure(p.xgrid(), p.ygrid(), std::move(w));
}

void check_reference(const JointMeasure& p, std::span<const double> nu) {
  if (std::abs(p.mass() - 1.0) > 1e-12) throw DomainError("reference measure P must have mass 1");
  auto col = p.second_marginal();
  double total = 0.0;
  for (std::size_t j = 0; j < nu.size(); ++j) {
    total += nu[j];
    if (nu[j] > 0.0 && col.weight(j) <= 0.0)
      throw DomainError("nu charges y = " + std::to_string(p.ygrid()[j]) +
                        " where P has no mass; every calibrated measure has infinite entropy");
  }
  if (std::abs(total - 1.0) > 1e-12) throw DomainError("nu must be a probability measure");
}

/// Minimizer of t -> log sum_j exp(a_j + t d_j), i.e. the root of the
/// tilted mean of d. Safeguarded Newton inside a sign-change bracket.
double solve_row(std::span<const double> a, std::span<const double> d, double start,
                 const SolverOptions& opts, std::size_t row) {
  bool pos = false;
  bool neg = false;
  double scale = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) {
    if (a[j] == kNegInf) continue;
    pos |= d[j] > 0.0;
    neg |= d[j] < 0.0;
    scale = std::max(scale, std::abs(d[j]));
  }
  if (!pos && !neg) return start;  // all mass sits at y = x_i
  if (!(pos && neg))
    throw NumericalError("Newton in h: row " + std::to_string(row) +
                         " cannot satisfy the martingale condition (support on one side)");

  std::vector<double> e(a.size());
  auto moments = [&](double t, double& mean, double& var) {
    double m = kNegInf;
    for (std::size_t j = 0; j < a.size(); ++j) {
      e[j] = a[j] == kNegInf ? kNegInf : a[j] + t * d[j];
      m = std::max(m, e[j]);
    }
    double s = 0.0, s1 = 0.0, s2 = 0.0;
    for (std::size_t j = 0; j < a.size(); ++j) {
      if (e[j] == kNegInf) continue;
      double w = std::exp(e[j] - m);
      s += w;
      s1 += w * d[j];
      s2 += w * d[j] * d[j];
    }
    mean = s1 / s;
    var = std::max(s2 / s - mean * mean, 0.0);
  };

  const double tol = opts.newton_tol * std::max(scale, 1.0);
  double t = start;
  double mean = 0.0, var = 0.0;
  moments(t, mean, var);
  if (std::abs(mean) <= tol) return t;

  // Bracket: the tilted mean is increasing in t.
  double lo = t, hi = t;
  double step = 1.0 / std::max(scale, 1e-300);
  int steps = 0;
  if (mean > 0.0) {
    double m2 = mean, v2 = var;
    while (m2 > 0.0) {
      lo -= step;
      step *= 2.0;
      moments(lo, m2, v2);
      if (++steps > opts.newton_max_steps) throw NumericalError("Newton in h: bracketing failed at row " + std::to_string(row));
    }
  } else {
    double m2 = mean, v2 = var;
    while (m2 < 0.0) {
      hi += step;
      step *= 2.0;
      moments(hi, m2, v2);
      if (++steps > opts.newton_max_steps) throw NumericalError("Newton in h: bracketing failed at row " + std::to_string(row));
    }
  }

  for (int it = 0; it < opts.newton_max_steps; ++it) {
    moments(t, mean, var);
    if (std::abs(mean) <= tol) return t;
    if (mean > 0.0) hi = t;
    else lo = t;
    double next = var > 0.0 ? t - mean / var : 0.5 * (lo + hi);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (next == t) return t;
    t = next;
  }
  moments(t, mean, var);
  if (std::abs(mean) <= 1e3 * tol) return t;
  throw NumericalError("Newton in h diverged at row " + std::to_string(row) +
                       " (x = tilted mean defect " + std::to_string(mean) + ")");
}

}  // namespace

void SolverOptions::validate() const {
  if (max_iters <= 0 || newton_max_steps <= 0) throw DomainError("solver iteration limits must be positive");
  for (double t : {marginal_tol, martingale_tol, newton_tol})
    if (!(t > 0.0 && t < 1.0)) throw DomainError("solver tolerances must lie in (0, 1)");
  if (!(damping > 0.0 && damping <= 1.0)) throw DomainError("damping must lie in (0, 1]");
}

std::vector<double> align_to(const DiscreteMeasure& nu, const Grid& ygrid) {
  return nu.weights_on(ygrid);
}

FeasibilityResult feasibility_check(const JointMeasure& p, const DiscreteMeasure& nu) {
  auto nuv = align_to(nu, p.ygrid());
  check_reference(p, nuv);
  PolytopeSystem sys = calibrated_martingale_system(p, nuv);
  lp::InteriorPoint center;
  try {
    center = lp::analytic_center(sys.a, sys.b);
  } catch (const InfeasibleError& e) {
    throw InfeasibleError(
        "no calibrated martingale measure is absolutely continuous w.r.t. P "
        "(certificate: column constraints, then martingale rows)",
        e.certificate());
  }
  FeasibilityResult out;
  out.witness = joint_from_cells(p, sys.cells, center.x);
  out.support.assign(p.rows() * p.cols(), false);
  out.equivalent = true;
  for (std::size_t k = 0; k < sys.cells.index.size(); ++k) {
    out.support[sys.cells.index[k]] = center.support[k];
    out.equivalent = out.equivalent && center.support[k];
  }
  return out;
}

std::vector<JointMeasure> random_vertex_witnesses(const JointMeasure& p, const DiscreteMeasure& nu,
                                                  int count, std::uint64_t seed) {
  auto nuv = align_to(nu, p.ygrid());
  check_reference(p, nuv);
  PolytopeSystem sys = calibrated_martingale_system(p, nuv);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  std::vector<JointMeasure> out;
  for (int k = 0; k < count; ++k) {
    Eigen::VectorXd c(sys.a.cols());
    for (Eigen::Index i = 0; i < c.size(); ++i) c[i] = normal(rng);
    auto sol = lp::minimize(sys.a, sys.b, c);
    if (sol.status == lp::Status::kInfeasible)
      throw InfeasibleError("calibrated martingale polytope is empty");
    if (sol.status == lp::Status::kOptimal) out.push_back(joint_from_cells(p, sys.cells, sol.x));
  }
  return out;
}

JointMeasure primal_from_potentials(const JointMeasure& p, const Potentials& pot) {
  const std::size_t nx = p.rows(), ny = p.cols();
  if (pot.h.size() != nx || pot.g.size() != ny) throw DomainError("potentials do not match grids");
  std::vector<double> w(nx * ny, 0.0);
  for (std::size_t i = 0; i < nx; ++i)
    for (std::size_t j = 0; j < ny; ++j) {
      std::size_t k = i * ny + j;
      if (p(i, j) <= 0.0) continue;
      if (!pot.support.empty() && !pot.support[k]) continue;
      double e = std::log(p(i, j)) + pot.c + pot.h[i] * (p.ygrid()[j] - p.xgrid()[i]) + pot.g[j];
      double v = std::exp(e);
      if (!std::isfinite(v)) throw NumericalError("primal_from_potentials: density overflow");
      w[k] = v;
    }
  return JointMeasure(p.xgrid(), p.ygrid(), std::move(w));
}

double log_partition(const JointMeasure& p, const Potentials& pot) {
  const std::size_t nx = p.rows(), ny = p.cols();
  std::vector<double> e;
  e.reserve(nx * ny);
  for (std::size_t i = 0; i < nx; ++i)
    for (std::size_t j = 0; j < ny; ++j) {
      if (p(i, j) <= 0.0) continue;
      if (!pot.support.empty() && !pot.support[i * ny + j]) continue;
      e.push_back(std::log(p(i, j)) + pot.h[i] * (p.ygrid()[j] - p.xgrid()[i]) + pot.g[j]);
    }
  return log_sum_exp(e);
}

double martingale_defect(const JointMeasure& q) {
  double worst = 0.0;
  for (std::size_t i = 0; i < q.rows(); ++i) {
    double mass = 0.0, gain = 0.0;
    for (std::size_t j = 0; j < q.cols(); ++j) {
      mass += q(i, j);
      gain += q(i, j) * (q.ygrid()[j] - q.xgrid()[i]);
    }
    if (mass > 0.0) worst = std::max(worst, std::abs(gain / mass));
  }
  return worst;
}

BridgeSolution solve_bridge(const JointMeasure& p, const DiscreteMeasure& nu, const SolverOptions& opts) {
  opts.validate();
  auto nuv = align_to(nu, p.ygrid());
  FeasibilityResult feas = feasibility_check(p, nu);

  const std::size_t nx = p.rows(), ny = p.cols();
  std::vector<double> logp(nx * ny, kNegInf);
  std::vector<double> dist(nx * ny);
  bool full_support = true;
  for (std::size_t i = 0; i < nx; ++i)
    for (std::size_t j = 0; j < ny; ++j) {
      std::size_t k = i * ny + j;
      dist[k] = p.ygrid()[j] - p.xgrid()[i];
      if (p(i, j) > 0.0) {
        if (feas.support[k]) logp[k] = std::log(p(i, j));
        else full_support = false;
      }
    }

  Potentials pot;
  pot.h.assign(nx, 0.0);
  pot.g.assign(ny, 0.0);
  if (!full_support) pot.support = feas.support;

  std::vector<bool> active_row(nx, false);
  for (std::size_t k = 0; k < nx * ny; ++k)
    if (logp[k] != kNegInf) active_row[k / ny] = true;

  BridgeSolution sol;
  double damping = opts.damping;
  double prev_dual = std::numeric_limits<double>::infinity();
  std::vector<double> buf(std::max(nx, ny));
  std::vector<double> all(nx * ny);

  for (int it = 1; it <= opts.max_iters; ++it) {
    // (a) exact column projection: column masses become nu.
    for (std::size_t j = 0; j < ny; ++j) {
      if (nuv[j] <= 0.0) continue;
      for (std::size_t i = 0; i < nx; ++i) {
        std::size_t k = i * ny + j;
        buf[i] = logp[k] + pot.h[i] * dist[k];
      }
      double l = log_sum_exp(std::span<const double>(buf.data(), nx));
      pot.g[j] = std::log(nuv[j]) - l;
    }
    // (b) row-wise martingale condition.
    for (std::size_t i = 0; i < nx; ++i) {
      if (!active_row[i]) continue;
      std::vector<double> a(ny);
      for (std::size_t j = 0; j < ny; ++j) {
        std::size_t k = i * ny + j;
        a[j] = logp[k] == kNegInf ? kNegInf : logp[k] + pot.g[j];
      }
      double t = solve_row(a, std::span<const double>(dist).subspan(i * ny, ny), pot.h[i], opts, i);
      pot.h[i] += damping * (t - pot.h[i]);
    }
    // (c) gauge E^nu[g] = 0; c normalizes.
    double shift = 0.0;
    for (std::size_t j = 0; j < ny; ++j) shift += nuv[j] * pot.g[j];
    for (std::size_t j = 0; j < ny; ++j)
      if (nuv[j] > 0.0) pot.g[j] -= shift;
    for (std::size_t k = 0; k < nx * ny; ++k)
      all[k] = logp[k] == kNegInf ? kNegInf : logp[k] + pot.h[k / ny] * dist[k] + pot.g[k % ny];
    double dual = log_sum_exp(all);
    pot.c = -dual;
    sol.dual_trace.push_back(dual);
    if (dual > prev_dual + 1e-13 * (1.0 + std::abs(prev_dual)) && damping > 1.0 / 64.0) damping *= 0.5;
    prev_dual = dual;

    // Residuals of the current primal candidate.
    std::vector<double> col(ny, 0.0);
    double mart = 0.0;
    for (std::size_t i = 0; i < nx; ++i) {
      double mass = 0.0, gain = 0.0;
      for (std::size_t j = 0; j < ny; ++j) {
        std::size_t k = i * ny + j;
        if (all[k] == kNegInf) continue;
        double q = std::exp(all[k] + pot.c);
        col[j] += q;
        mass += q;
        gain += q * dist[k];
      }
      if (mass > 0.0) mart = std::max(mart, std::abs(gain / mass));
    }
    double pos = 0.0, neg = 0.0;
    for (std::size_t j = 0; j < ny; ++j) {
      double d = col[j] - nuv[j];
      if (d > 0.0) pos += d;
      else neg -= d;
    }
    sol.marginal_residual = std::max(pos, neg);
    sol.martingale_residual = mart;
    sol.iterations = it;
    if (sol.marginal_residual <= opts.marginal_tol && sol.martingale_residual <= opts.martingale_tol) {
      sol.converged = true;
      break;
    }
  }
  if (!sol.converged)
    throw NumericalError("martingale Sinkhorn did not converge within max_iters (marginal residual " +
                             std::to_string(sol.marginal_residual) + ", martingale residual " +
                             std::to_string(sol.martingale_residual) + ")",
                         sol.marginal_residual, sol.martingale_residual);

  sol.potentials = pot;
  sol.q_star = primal_from_potentials(p, pot);
  sol.entropy = relative_entropy(sol.q_star, p);
  return sol;
}

// ---------------------------------------------------------------------------

FiniteConstraintSolution finite_constraint_solution(const JointMeasure& p,
                                                    const std::vector<MomentConstraint>& constraints,
                                                    const SolverOptions& opts) {
  opts.validate();
  const std::size_t nx = p.rows(), ny = p.cols();
  const auto kdim = static_cast<Eigen::Index>(constraints.size());
  Cells cells = support_cells(p);
  const auto n = static_cast<Eigen::Index>(cells.index.size());

  // Feature matrix: phi(cell, k).
  Eigen::MatrixXd phi(n, kdim);
  Eigen::VectorXd logp(n);
  for (Eigen::Index c = 0; c < n; ++c) {
    std::size_t i = cells.index[static_cast<std::size_t>(c)] / ny;
    std::size_t j = cells.index[static_cast<std::size_t>(c)] % ny;
    logp[c] = std::log(p(i, j));
    for (Eigen::Index k = 0; k < kdim; ++k) {
      const auto& con = constraints[static_cast<std::size_t>(k)];
      if (con.kind == MomentConstraint::Kind::kStock) {
        if (con.f.size() != nx) throw DomainError("stock constraint must be indexed by xgrid");
        phi(c, k) = con.f[i] * (p.ygrid()[j] - p.xgrid()[i]);
      } else {
        if (con.f.size() != ny) throw DomainError("option constraint must be indexed by ygrid");
        phi(c, k) = con.f[j];
      }
    }
  }

  auto objective = [&](const Eigen::VectorXd& theta, Eigen::VectorXd* probs) {
    Eigen::VectorXd e = logp + phi * theta;
    double m = e.maxCoeff();
    Eigen::VectorXd w = (e.array() - m).exp();
    double s = w.sum();
    if (probs) *probs = w / s;
    return m + std::log(s);
  };

  Eigen::VectorXd theta = Eigen::VectorXd::Zero(kdim);
  Eigen::VectorXd q;
  double f = objective(theta, &q);
  double scale = 1.0;
  if (n > 0 && kdim > 0) scale = std::max(1.0, phi.cwiseAbs().maxCoeff());
  const double tol = 1e-13 * scale;
  int steps = 0;
  while (kdim > 0) {
    Eigen::VectorXd grad = phi.transpose() * q;
    if (grad.cwiseAbs().maxCoeff() <= tol) break;
    if (++steps > opts.newton_max_steps)
      throw NumericalError("finite-constraint Newton did not converge (constraints may be infeasible)");
    Eigen::MatrixXd centered = phi.rowwise() - grad.transpose();
    Eigen::MatrixXd hess = centered.transpose() * q.asDiagonal() * centered;
    Eigen::VectorXd dir = -hess.completeOrthogonalDecomposition().solve(grad);
    double slope = grad.dot(dir);
    if (!(slope < 0.0))
      throw NumericalError("finite-constraint Newton: no descent direction (infeasible constraint system)");
    double t = 1.0;
    Eigen::VectorXd qn;
    double fn = objective(theta + t * dir, &qn);
    while (fn > f + 1e-4 * t * slope && t > 1e-12) {
      t *= 0.5;
      fn = objective(theta + t * dir, &qn);
    }
    if (t <= 1e-12) {
      if (grad.cwiseAbs().maxCoeff() <= 1e3 * tol) break;
      throw NumericalError("finite-constraint Newton: line search failed (infeasible constraint system)");
    }
    theta += t * dir;
    f = fn;
    q = qn;
  }

  FiniteConstraintSolution out;
  out.newton_steps = steps;
  out.c = -f;
  out.coefficients.assign(theta.data(), theta.data() + theta.size());
  out.h_tilde.assign(nx, 0.0);
  out.g_tilde.assign(ny, 0.0);
  for (std::size_t k = 0; k < constraints.size(); ++k) {
    const auto& con = constraints[k];
    auto& target = con.kind == MomentConstraint::Kind::kStock ? out.h_tilde : out.g_tilde;
    for (std::size_t i = 0; i < target.size(); ++i) target[i] += theta[static_cast<Eigen::Index>(k)] * con.f[i];
  }
  Potentials pot{out.c, out.h_tilde, out.g_tilde, {}};
  out.q = primal_from_potentials(p, pot);
  return out;
}

std::vector<MomentConstraint> exhausting_basis(const JointMeasure& p, const DiscreteMeasure& nu) {
  auto nuv = align_to(nu, p.ygrid());
  std::vector<MomentConstraint> options;
  for (std::size_t k = 0; k + 1 < p.cols(); ++k) {
    std::vector<double> f(p.cols());
    for (std::size_t j = 0; j < p.cols(); ++j) f[j] = (j == k ? 1.0 : 0.0) - nuv[k];
    options.push_back({MomentConstraint::Kind::kOption, std::move(f)});
  }
  std::vector<MomentConstraint> stocks;
  for (std::size_t i = 0; i < p.rows(); ++i) {
    std::vector<double> f(p.rows(), 0.0);
    f[i] = 1.0;
    stocks.push_back({MomentConstraint::Kind::kStock, std::move(f)});
  }
  std::vector<MomentConstraint> out;
  std::size_t a = 0, b = 0;
  while (a < options.size() || b < stocks.size()) {
    if (a < options.size()) out.push_back(options[a++]);
    if (b < stocks.size()) out.push_back(stocks[b++]);
  }
  return out;
}

}  // namespace msb
