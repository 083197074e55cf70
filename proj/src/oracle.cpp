#include "msbridge/oracle.hpp"

#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include "msbridge/errors.hpp"
#include "msbridge/lp.hpp"

namespace msb::oracle {
namespace {

std::string fmt_num(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3e", x);
  return buf;
}

struct Problem {
  std::vector<std::size_t> cells;
  Eigen::MatrixXd a;
  Eigen::VectorXd b;
  Eigen::VectorXd logp;
};

Problem build(const JointMeasure& p, const std::vector<double>& nu, const std::vector<std::size_t>& cells) {
  const std::size_t nx = p.rows(), ny = p.cols();
  Problem pr;
  pr.cells = cells;
  const auto n = static_cast<Eigen::Index>(cells.size());
  Eigen::MatrixXd full = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(nx + ny), n);
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(nx + ny));
  pr.logp.resize(n);
  for (Eigen::Index k = 0; k < n; ++k) {
    std::size_t i = cells[static_cast<std::size_t>(k)] / ny;
    std::size_t j = cells[static_cast<std::size_t>(k)] % ny;
    full(static_cast<Eigen::Index>(i), k) = p.ygrid()[j] - p.xgrid()[i];
    full(static_cast<Eigen::Index>(nx + j), k) = 1.0;
    pr.logp[k] = std::log(p(i, j));
  }
  for (std::size_t j = 0; j < ny; ++j) rhs[static_cast<Eigen::Index>(nx + j)] = nu[j];
  std::vector<Eigen::Index> keep;
  for (Eigen::Index r = 0; r < full.rows(); ++r)
    if (full.row(r).cwiseAbs().maxCoeff() > 0.0 || rhs[r] != 0.0) keep.push_back(r);
  pr.a.resize(static_cast<Eigen::Index>(keep.size()), n);
  pr.b.resize(static_cast<Eigen::Index>(keep.size()));
  for (std::size_t r = 0; r < keep.size(); ++r) {
    pr.a.row(static_cast<Eigen::Index>(r)) = full.row(keep[r]);
    pr.b[static_cast<Eigen::Index>(r)] = rhs[keep[r]];
  }
  return pr;
}

double kkt_norm(const Eigen::VectorXd& dual, const Eigen::VectorXd& primal) {
  double d = dual.size() ? dual.cwiseAbs().maxCoeff() : 0.0;
  double p = primal.size() ? primal.cwiseAbs().maxCoeff() : 0.0;
  return std::max(d, p);
}

/// argmin sum q log(q/r) - q subject to A q = b by damped Newton on the
/// dual G(l) = sum r exp(A^T l) - b.l, warm-started at l.
Eigen::VectorXd kl_projection(const Problem& pr, const Eigen::VectorXd& logr, Eigen::VectorXd& lambda,
                              const OracleOptions& opts) {
  auto primal = [&](const Eigen::VectorXd& l) {
    return (logr + pr.a.transpose() * l).array().exp().matrix().eval();
  };
  auto objective = [&](const Eigen::VectorXd& q, const Eigen::VectorXd& l) { return q.sum() - pr.b.dot(l); };
  Eigen::VectorXd q = primal(lambda);
  double g = objective(q, lambda);
  for (int it = 0; it < opts.max_newton; ++it) {
    Eigen::VectorXd grad = pr.a * q - pr.b;
    double norm = grad.size() ? grad.cwiseAbs().maxCoeff() : 0.0;
    if (norm <= opts.kkt_tol) return q;
    Eigen::MatrixXd hess = pr.a * q.asDiagonal() * pr.a.transpose();
    Eigen::VectorXd dir = -hess.completeOrthogonalDecomposition().solve(grad);
    double slope = grad.dot(dir);
    if (!(slope < 0.0)) {
      if (norm <= 1e3 * opts.kkt_tol) return q;
      throw NumericalError("oracle: dual Newton lost descent at residual " + fmt_num(norm));
    }
    double t = 1.0;
    Eigen::VectorXd ln, qn;
    double gn = 0.0;
    while (true) {
      ln = lambda + t * dir;
      qn = primal(ln);
      gn = objective(qn, ln);
      if (t < 1e-14) break;
      if (std::isfinite(gn) && gn <= g + 1e-4 * t * slope) break;
      // Below the resolution of G, fall back to residual decrease.
      if (std::abs(t * slope) < 1e-12 * (1.0 + std::abs(g)) &&
          (pr.a * qn - pr.b).cwiseAbs().maxCoeff() <= (1.0 - 1e-4 * t) * norm)
        break;
      t *= 0.5;
    }
    if (t < 1e-14) {
      if (norm <= 1e3 * opts.kkt_tol) return q;
      throw NumericalError("oracle: dual Newton stalled at residual " + fmt_num(norm));
    }
    lambda = ln;
    q = qn;
    g = gn;
  }
  Eigen::VectorXd grad = pr.a * q - pr.b;
  double norm = grad.size() ? grad.cwiseAbs().maxCoeff() : 0.0;
  if (norm <= 1e3 * opts.kkt_tol) return q;
  throw NumericalError("oracle: dual Newton hit its iteration limit at residual " + fmt_num(norm));
}

/// Stationarity residual of min H(q|p) on the affine set: least-squares
/// multiplier fit of log(q/p), plus primal infeasibility.
double bridge_kkt(const Problem& pr, const Eigen::VectorXd& q) {
  Eigen::VectorXd grad = (q.array().log()).matrix() - pr.logp;
  Eigen::MatrixXd at = pr.a.transpose();
  Eigen::VectorXd lambda = at.completeOrthogonalDecomposition().solve(-grad);
  return kkt_norm(grad + at * lambda, pr.a * q - pr.b);
}

}  // namespace

OracleResult brute_force_bridge(const JointMeasure& p, const DiscreteMeasure& nu, const OracleOptions& opts) {
  if (!(opts.step > 0.0 && opts.step <= 1.0)) throw DomainError("oracle step must lie in (0, 1]");
  std::vector<double> nuv = nu.weights_on(p.ygrid());
  std::vector<std::size_t> cells;
  for (std::size_t k = 0; k < p.weights().size(); ++k)
    if (p.weights()[k] > 0.0) cells.push_back(k);
  if (cells.size() > opts.max_cells)
    throw DomainError("oracle: dimension too large (" + std::to_string(cells.size()) + " cells, limit " +
                      std::to_string(opts.max_cells) + ")");

  Problem all = build(p, nuv, cells);
  lp::InteriorPoint start = lp::relative_interior_point(all.a, all.b);
  std::vector<std::size_t> support;
  for (std::size_t k = 0; k < cells.size(); ++k)
    if (start.support[k]) support.push_back(cells[k]);
  Problem pr = build(p, nuv, support);

  Eigen::VectorXd q = pr.logp.array().exp().matrix();
  Eigen::VectorXd lambda = Eigen::VectorXd::Zero(pr.a.rows());
  OracleResult out;
  double kkt = bridge_kkt(pr, q);
  while (kkt > opts.kkt_tol) {
    if (++out.outer_iterations > opts.max_outer)
      throw NumericalError("oracle: proximal iteration limit reached at KKT residual " + std::to_string(kkt));
    Eigen::VectorXd logr = (1.0 - opts.step) * q.array().log().matrix() + opts.step * pr.logp;
    q = kl_projection(pr, logr, lambda, opts);
    double next = bridge_kkt(pr, q);
    if (next >= kkt && next <= 1e3 * opts.kkt_tol) {
      kkt = next;
      break;
    }
    kkt = next;
  }
  out.kkt_residual = kkt;

  std::vector<double> w(p.rows() * p.cols(), 0.0);
  double entropy = 0.0;
  for (std::size_t k = 0; k < support.size(); ++k) {
    double qk = q[static_cast<Eigen::Index>(k)];
    w[support[k]] = qk;
    entropy += qk * (std::log(qk) - pr.logp[static_cast<Eigen::Index>(k)]);
  }
  out.q = JointMeasure(p.xgrid(), p.ygrid(), std::move(w));
  out.entropy = entropy;
  return out;
}

Eigen::VectorXd lp_feasible_point(const Eigen::MatrixXd& a, const Eigen::VectorXd& b) {
  Eigen::VectorXd x = lp::feasible_point(a, b);
  double res = lp::residual(a, b, x);
  if (res > 1e-10) throw NumericalError("lp_feasible_point: residual " + std::to_string(res) + " exceeds 1e-10");
  return x;
}

}  // namespace msb::oracle
