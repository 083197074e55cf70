#include "msbridge/lp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "msbridge/errors.hpp"

namespace msb::lp {
namespace {

class Tableau {
 public:
  Tableau(const Eigen::MatrixXd& a, const Eigen::VectorXd& b, const Options& opts)
      : m_(a.rows()), n_(a.cols()), opts_(opts), sign_(m_) {
    t_ = Eigen::MatrixXd::Zero(m_ + 1, n_ + m_ + 1);
    basis_.resize(m_);
    for (Eigen::Index r = 0; r < m_; ++r) {
      sign_[r] = b[r] < 0.0 ? -1.0 : 1.0;
      t_.row(r).head(n_) = sign_[r] * a.row(r);
      t_(r, n_ + r) = 1.0;
      t_(r, rhs()) = sign_[r] * b[r];
      basis_[r] = n_ + r;
    }
  }

  Eigen::Index rhs() const { return n_ + m_; }

  /// Phase one: minimize the sum of artificials. Returns the optimal value.
  double phase_one() {
    t_.row(m_).setZero();
    for (Eigen::Index r = 0; r < m_; ++r) {
      t_.row(m_).head(n_) -= t_.row(r).head(n_);
      t_(m_, rhs()) -= t_(r, rhs());
    }
    run(n_ + m_);
    return -t_(m_, rhs());
  }

  /// y = c_B B^{-1} of the phase-one problem, mapped back to unflipped rows.
  Eigen::VectorXd farkas() const {
    Eigen::VectorXd y(m_);
    for (Eigen::Index r = 0; r < m_; ++r) y[r] = sign_[r] * (1.0 - t_(m_, n_ + r));
    return y;
  }

  void drive_out_artificials() {
    for (Eigen::Index r = 0; r < m_; ++r) {
      if (basis_[r] < n_) continue;
      for (Eigen::Index j = 0; j < n_; ++j) {
        if (std::abs(t_(r, j)) > opts_.pivot_tol) {
          pivot(r, j);
          break;
        }
      }
      // A row without any usable entry is redundant; its artificial stays
      // basic at zero and can never leave.
    }
  }

  /// Phase two. Returns false when unbounded.
  bool phase_two(const Eigen::VectorXd& c) {
    t_.row(m_).setZero();
    t_.row(m_).head(n_) = c.transpose();
    for (Eigen::Index r = 0; r < m_; ++r) {
      double cb = basis_[r] < n_ ? c[basis_[r]] : 0.0;
      if (cb != 0.0) t_.row(m_) -= cb * t_.row(r);
    }
    return run(n_);
  }

  Eigen::VectorXd solution() const {
    Eigen::VectorXd x = Eigen::VectorXd::Zero(n_);
    for (Eigen::Index r = 0; r < m_; ++r)
      if (basis_[r] < n_) x[basis_[r]] = std::max(t_(r, rhs()), 0.0);
    return x;
  }

  std::vector<Eigen::Index> basic_columns() const {
    std::vector<Eigen::Index> cols;
    for (auto k : basis_)
      if (k < n_) cols.push_back(k);
    return cols;
  }

  int pivots() const { return pivots_; }

 private:
  // Bland: entering = lowest index with negative reduced cost, leaving =
  // lowest basic index among minimum-ratio rows.
  bool run(Eigen::Index allowed) {
    while (true) {
      Eigen::Index enter = -1;
      for (Eigen::Index j = 0; j < allowed; ++j) {
        if (t_(m_, j) < -opts_.pivot_tol) {
          enter = j;
          break;
        }
      }
      if (enter < 0) return true;
      Eigen::Index leave = -1;
      double best = std::numeric_limits<double>::infinity();
      for (Eigen::Index r = 0; r < m_; ++r) {
        double coef = t_(r, enter);
        if (coef <= opts_.pivot_tol) continue;
        double ratio = t_(r, rhs()) / coef;
        if (leave < 0 || ratio < best - 1e-13) {
          leave = r;
          best = ratio;
        } else if (ratio <= best + 1e-13 && basis_[r] < basis_[leave]) {
          leave = r;
        }
      }
      if (leave < 0) return false;
      pivot(leave, enter);
      if (++pivots_ > opts_.max_pivots) throw NumericalError("simplex: pivot limit exceeded");
    }
  }

  void pivot(Eigen::Index r, Eigen::Index j) {
    t_.row(r) /= t_(r, j);
    for (Eigen::Index k = 0; k <= m_; ++k) {
      if (k == r) continue;
      double f = t_(k, j);
      if (f != 0.0) t_.row(k) -= f * t_.row(r);
    }
    basis_[r] = j;
  }

  Eigen::Index m_;
  Eigen::Index n_;
  Options opts_;
  Eigen::VectorXd sign_;
  Eigen::MatrixXd t_;
  std::vector<Eigen::Index> basis_;
  int pivots_ = 0;
};

double scale_of(const Eigen::VectorXd& b) { return 1.0 + (b.size() ? b.cwiseAbs().maxCoeff() : 0.0); }

/// Re-solves the basic columns against b to strip accumulated tableau error.
/// Degenerate basics left at round-off level are dropped to exact zeros.
Eigen::VectorXd polish(const Eigen::MatrixXd& a, const Eigen::VectorXd& b, const Eigen::VectorXd& x,
                       const std::vector<Eigen::Index>& cols) {
  if (cols.empty()) return x;
  const double tiny = 1e-14 * scale_of(b);
  std::vector<Eigen::Index> keep;
  for (Eigen::Index c : cols)
    if (x[c] > tiny) keep.push_back(c);
  Eigen::VectorXd out = Eigen::VectorXd::Zero(x.size());
  if (!keep.empty()) {
    Eigen::MatrixXd ab(a.rows(), static_cast<Eigen::Index>(keep.size()));
    for (std::size_t k = 0; k < keep.size(); ++k) ab.col(static_cast<Eigen::Index>(k)) = a.col(keep[k]);
    Eigen::VectorXd xb = ab.colPivHouseholderQr().solve(b);
    for (std::size_t k = 0; k < keep.size(); ++k) {
      if (xb[static_cast<Eigen::Index>(k)] < -1e-12) return x;
      out[keep[k]] = std::max(xb[static_cast<Eigen::Index>(k)], 0.0);
    }
  }
  return residual(a, b, out) <= std::max(residual(a, b, x), tiny) ? out : x;
}

}  // namespace

double residual(const Eigen::MatrixXd& a, const Eigen::VectorXd& b, const Eigen::VectorXd& x) {
  if (a.rows() == 0) return 0.0;
  return (a * x - b).cwiseAbs().maxCoeff();
}

Solution minimize(const Eigen::MatrixXd& a, const Eigen::VectorXd& b, const Eigen::VectorXd& c,
                  const Options& opts) {
  if (a.rows() != b.size() || a.cols() != c.size()) throw DomainError("lp: dimension mismatch");
  Tableau tab(a, b, opts);
  Solution out;
  double infeas = tab.phase_one();
  if (infeas > opts.feasibility_tol * scale_of(b)) {
    out.status = Status::kInfeasible;
    out.certificate = tab.farkas();
    out.pivots = tab.pivots();
    return out;
  }
  tab.drive_out_artificials();
  bool bounded = tab.phase_two(c);
  out.pivots = tab.pivots();
  if (!bounded) {
    out.status = Status::kUnbounded;
    return out;
  }
  out.status = Status::kOptimal;
  out.x = polish(a, b, tab.solution(), tab.basic_columns());
  out.objective = c.dot(out.x);
  return out;
}

Eigen::VectorXd feasible_point(const Eigen::MatrixXd& a, const Eigen::VectorXd& b, const Options& opts) {
  Solution s = minimize(a, b, Eigen::VectorXd::Zero(a.cols()), opts);
  if (s.status == Status::kInfeasible) {
    std::vector<double> cert(s.certificate.data(), s.certificate.data() + s.certificate.size());
    throw InfeasibleError("linear system A x = b, x >= 0 has no solution", std::move(cert));
  }
  return s.x;
}

InteriorPoint relative_interior_point(const Eigen::MatrixXd& a, const Eigen::VectorXd& b,
                                      const Options& opts) {
  // Any feasible point, then one LP maximizing each coordinate not yet seen
  // positive. The average of the collected vertices is positive on exactly
  // the maximal support.
  const Eigen::Index n = a.cols();
  const double positive = opts.feasibility_tol * scale_of(b);
  Eigen::VectorXd sum = feasible_point(a, b, opts);
  int count = 1;
  InteriorPoint out;
  out.support.assign(static_cast<std::size_t>(n), false);
  auto mark = [&](const Eigen::VectorXd& x) {
    for (Eigen::Index k = 0; k < n; ++k)
      if (x[k] > positive) out.support[static_cast<std::size_t>(k)] = true;
  };
  mark(sum);
  for (Eigen::Index k = 0; k < n; ++k) {
    if (out.support[static_cast<std::size_t>(k)]) continue;
    Eigen::VectorXd c = Eigen::VectorXd::Zero(n);
    c[k] = -1.0;
    Solution s = minimize(a, b, c, opts);
    if (s.status == Status::kUnbounded) throw DomainError("lp: relative interior needs a bounded polytope");
    if (s.status != Status::kOptimal) throw NumericalError("lp: support probe lost feasibility");
    if (s.x[k] > positive) {
      mark(s.x);
      sum += s.x;
      ++count;
    }
  }
  out.x = sum / count;
  for (Eigen::Index k = 0; k < n; ++k)
    if (!out.support[static_cast<std::size_t>(k)]) out.x[k] = 0.0;
  return out;
}

InteriorPoint analytic_center(const Eigen::MatrixXd& a, const Eigen::VectorXd& b, const Options& opts) {
  InteriorPoint start = relative_interior_point(a, b, opts);
  std::vector<Eigen::Index> idx;
  for (std::size_t k = 0; k < start.support.size(); ++k)
    if (start.support[k]) idx.push_back(static_cast<Eigen::Index>(k));
  const Eigen::Index ns = static_cast<Eigen::Index>(idx.size());
  if (ns == 0) return start;

  Eigen::MatrixXd as(a.rows(), ns);
  Eigen::VectorXd z(ns);
  for (Eigen::Index k = 0; k < ns; ++k) {
    as.col(k) = a.col(idx[static_cast<std::size_t>(k)]);
    z[k] = start.x[idx[static_cast<std::size_t>(k)]];
  }

  // Feasible-start Newton on sum(log z) restricted to {A z = b}; the damped
  // step 1/(1 + lambda) keeps z > 0 for this self-concordant barrier.
  for (int it = 0; it < 200; ++it) {
    Eigen::VectorXd z2 = z.cwiseProduct(z);
    Eigen::MatrixXd gram = as * z2.asDiagonal() * as.transpose();
    Eigen::VectorXd w = gram.completeOrthogonalDecomposition().solve(as * z);
    Eigen::VectorXd step = z - z2.cwiseProduct(as.transpose() * w);
    double dec = std::sqrt(step.cwiseQuotient(z).squaredNorm());
    double t = dec < 0.25 ? 1.0 : 1.0 / (1.0 + dec);
    Eigen::VectorXd next = z + t * step;
    if ((next.array() <= 0.0).any()) break;
    z = next;
    if (dec < 1e-13) break;
  }

  // Final projection onto A z = b when it keeps positivity.
  Eigen::VectorXd r = as * z - b;
  Eigen::MatrixXd aat = as * as.transpose();
  Eigen::VectorXd corr = as.transpose() * aat.completeOrthogonalDecomposition().solve(r);
  if (((z - corr).array() > 0.0).all()) z -= corr;

  InteriorPoint out;
  out.support = start.support;
  out.x = Eigen::VectorXd::Zero(a.cols());
  for (Eigen::Index k = 0; k < ns; ++k) out.x[idx[static_cast<std::size_t>(k)]] = z[k];
  return out;
}

}  // namespace msb::lp
