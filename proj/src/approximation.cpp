#include "msbridge/approximation.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "msbridge/errors.hpp"
#include "msbridge/lp.hpp"

namespace msb {
namespace {

constexpr double kDefectTol = 1e-10;

std::string fmt(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

double scale_of(const Grid& g) {
  double s = 1.0;
  for (double x : g.points()) s = std::max(s, std::abs(x));
  return s;
}

double first_moment(const DiscreteMeasure& m) {
  double s = 0.0;
  for (std::size_t i = 0; i < m.size(); ++i) s += m.weight(i) * m.point(i);
  return s;
}

/// H(q|p) for two probability rows on the same grid.
double row_entropy(std::span<const double> q, std::span<const double> p) {
  double h = 0.0;
  for (std::size_t j = 0; j < q.size(); ++j) {
    if (q[j] <= 0.0) continue;
    if (p[j] <= 0.0) return std::numeric_limits<double>::infinity();
    h += q[j] * std::log(q[j] / p[j]);
  }
  return h;
}

std::vector<double> row_probabilities(const JointMeasure& j, std::size_t i) {
  auto r = j.row(i);
  double s = std::accumulate(r.begin(), r.end(), 0.0);
  std::vector<double> out(r.begin(), r.end());
  if (s > 0.0)
    for (double& v : out) v /= s;
  return out;
}

/// (1/lambda(R) - 1) lambda and mu - lambda on mu's grid.
std::pair<DiscreteMeasure, DiscreteMeasure> split_pair(const DiscreteMeasure& mu, const DiscreteMeasure& lambda) {
  std::vector<double> wa(mu.size()), wb(mu.size());
  const double factor = 1.0 / lambda.mass() - 1.0;
  for (std::size_t i = 0; i < mu.size(); ++i) {
    wa[i] = factor * lambda.weight(i);
    wb[i] = std::max(mu.weight(i) - lambda.weight(i), 0.0);
  }
  return {DiscreteMeasure(mu.grid(), std::move(wa)), DiscreteMeasure(mu.grid(), std::move(wb))};
}

void check_centered_probability(const DiscreteMeasure& mu) {
  if (std::abs(mu.mass() - 1.0) > 1e-10) throw DomainError("mu must be a probability measure");
  if (std::abs(first_moment(mu)) > 1e-10 * scale_of(mu.grid()))
    throw DomainError("mu must have zero barycenter");
}

}  // namespace

DensityBounds density_bounds(const JointMeasure& p, const DiscreteMeasure& nu) {
  auto nuv = nu.weights_on(p.ygrid());
  DensityBounds out{std::numeric_limits<double>::infinity(), 0.0};
  bool any = false;
  for (std::size_t i = 0; i < p.rows(); ++i) {
    auto row = row_probabilities(p, i);
    if (std::accumulate(p.row(i).begin(), p.row(i).end(), 0.0) <= 0.0) continue;
    for (std::size_t j = 0; j < p.cols(); ++j) {
      if ((nuv[j] > 0.0) != (row[j] > 0.0))
        throw DomainError("density_bounds: row x = " + fmt(p.xgrid()[i]) + " is not equivalent to nu at y = " +
                          fmt(p.ygrid()[j]));
      if (nuv[j] <= 0.0) continue;
      double r = row[j] / nuv[j];
      out.lower = std::min(out.lower, r);
      out.upper = std::max(out.upper, r);
      any = true;
    }
  }
  if (!any) throw DomainError("density_bounds: P has no mass on the support of nu");
  return out;
}

DiscreteMeasure technical_bound(const JointMeasure& q, const JointMeasure& p) {
  if (!(q.xgrid() == p.xgrid()) || !(q.ygrid() == p.ygrid())) throw DomainError("technical_bound: grid mismatch");
  DensityBounds bounds = density_bounds(p, q.second_marginal());
  const double spread = std::log(bounds.upper / bounds.lower);
  const std::size_t nx = q.rows();
  std::vector<std::vector<double>> qrows(nx), prows(nx);
  std::vector<bool> qrow_on(nx), prow_on(nx);
  for (std::size_t i = 0; i < nx; ++i) {
    qrows[i] = row_probabilities(q, i);
    prows[i] = row_probabilities(p, i);
    qrow_on[i] = std::accumulate(q.row(i).begin(), q.row(i).end(), 0.0) > 0.0;
    prow_on[i] = std::accumulate(p.row(i).begin(), p.row(i).end(), 0.0) > 0.0;
  }
  std::vector<double> bound(nx, 0.0);
  for (std::size_t k = 0; k < nx; ++k) {
    if (!qrow_on[k]) continue;
    if (!prow_on[k]) throw DomainError("technical_bound: H(q|p) is infinite");
    double h = row_entropy(qrows[k], prows[k]);
    if (!std::isfinite(h)) throw DomainError("technical_bound: H(q|p) is infinite");
    bound[k] = h + spread;
    for (std::size_t i = 0; i < nx; ++i) {
      if (!prow_on[i]) continue;
      double cross = row_entropy(qrows[k], prows[i]);
      if (!(cross <= bound[k] + 1e-12))
        throw NumericalError("technical_bound: H(Q.(x')|P.(x)) exceeds I(x') at x = " + fmt(p.xgrid()[i]) +
                             ", x' = " + fmt(p.xgrid()[k]));
    }
  }
  return DiscreteMeasure(q.xgrid(), std::move(bound));
}

SplitResult split_interval(const DiscreteMeasure& mu, double delta) {
  check_centered_probability(mu);
  const std::size_t n = mu.size();
  std::vector<std::size_t> neg, pos;
  double c = std::numeric_limits<double>::infinity();
  double mass_neg = 0.0, mass_pos = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (mu.weight(i) <= 0.0) continue;
    double x = mu.point(i);
    if (x < 0.0) {
      neg.push_back(i);
      mass_neg += mu.weight(i);
    } else if (x > 0.0) {
      pos.push_back(i);
      mass_pos += mu.weight(i);
    }
    if (x != 0.0) c = std::min(c, std::abs(x));
  }
  if (neg.empty() || pos.empty()) throw DomainError("split_interval: mu is a point mass");
  const double delta_tilde = std::min(mass_neg, mass_pos);
  if (!(delta > 0.0 && delta < delta_tilde))
    throw DomainError("split_interval: delta must lie in (0, " + fmt(delta_tilde) + ")");

  struct Pair {
    std::size_t ia, ib;
  };
  std::vector<Pair> pairs;
  for (auto ia : neg)
    for (auto ib : pos) pairs.push_back({ia, ib});
  std::sort(pairs.begin(), pairs.end(), [&](const Pair& l, const Pair& r) {
    double wl = mu.point(l.ib) - mu.point(l.ia);
    double wr = mu.point(r.ib) - mu.point(r.ia);
    if (wl != wr) return wl < wr;
    return mu.point(l.ia) > mu.point(r.ia);
  });

  const double tiny = 1e-15 * scale_of(mu.grid());
  for (const Pair& pr : pairs) {
    const double a = mu.point(pr.ia);
    const double b = mu.point(pr.ib);
    std::vector<double> lam(n, 0.0);
    double outside = 0.0, beta = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      if (i < pr.ia || i > pr.ib) {
        outside += mu.weight(i);
      } else {
        lam[i] = mu.weight(i);
        beta += mu.weight(i) * mu.point(i);
      }
    }
    double removed = outside;
    if (outside == 0.0) {
      // [a, b] holds all of mu: take equal-barycenter slices off both ends.
      double s = std::min({delta, lam[pr.ia] * (b - a) / b, lam[pr.ib] * (b - a) / (-a),
                           (mass_neg - delta) * (b - a) / b, (mass_pos - delta) * (b - a) / (-a)});
      if (!(s > 0.0)) continue;
      lam[pr.ia] -= s * b / (b - a);
      lam[pr.ib] -= s * (-a) / (b - a);
      removed = s;
    } else if (beta > tiny) {
      double r = beta / b;
      if (r > lam[pr.ib]) continue;
      lam[pr.ib] -= r;
      removed += r;
    } else if (beta < -tiny) {
      double r = beta / a;
      if (r > lam[pr.ia]) continue;
      lam[pr.ia] -= r;
      removed += r;
    }
    if (!(removed > 0.0) || removed > delta) continue;
    double lneg = 0.0, lpos = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      if (mu.point(i) < 0.0) lneg += lam[i];
      if (mu.point(i) > 0.0) lpos += lam[i];
    }
    if (lneg < delta || lpos < delta) continue;

    SplitResult out;
    out.a = a;
    out.b = b;
    out.c = c;
    out.delta = delta;
    out.delta_tilde = delta_tilde;
    out.mu = mu;
    out.lambda_A = DiscreteMeasure(mu.grid(), std::move(lam));
    std::tie(out.mu_A, out.mu_B) = split_pair(mu, out.lambda_A);
    if (!convex_order_leq(out.mu_A, out.mu_B))
      throw NumericalError("split_interval: mu_A is not dominated by mu_B in convex order");
    return out;
  }
  throw NumericalError("split_interval: no admissible interval found");
}

RestrictResult restrict_bounded(const SplitResult& split, const std::vector<double>& h, double eps) {
  const DiscreteMeasure& mu = split.mu;
  const DiscreteMeasure& lambda = split.lambda_A;
  const std::size_t n = mu.size();
  if (h.size() != n) throw DomainError("restrict_bounded: h must be indexed by the grid of mu");
  if (!(eps > 0.0)) throw DomainError("restrict_bounded: eps must be positive");
  const double dm = std::min(split.delta, eps);
  RestrictResult out;
  out.bound = dm / 2.0 * std::min(1.0, split.c / std::max(std::abs(split.a), std::abs(split.b)));

  std::vector<double> levels;
  for (std::size_t i = 0; i < n; ++i) {
    if (lambda.weight(i) <= 0.0) continue;
    if (!std::isfinite(h[i])) throw DomainError("restrict_bounded: h is not finite on supp lambda_A");
    levels.push_back(std::abs(h[i]));
  }
  std::sort(levels.begin(), levels.end());
  levels.erase(std::unique(levels.begin(), levels.end()), levels.end());
  bool found = false;
  for (double tau : levels) {
    double excluded = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      if (lambda.weight(i) > 0.0 && std::abs(h[i]) > tau) excluded += mu.weight(i);
    if (excluded <= out.bound) {
      out.tau = tau;
      out.excluded_mass = excluded;
      found = true;
      break;
    }
  }
  if (!found) throw NumericalError("restrict_bounded: no threshold meets the mass bound");

  std::vector<double> lam(n);
  double beta = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    lam[i] = std::abs(h[i]) <= out.tau ? lambda.weight(i) : 0.0;
    beta += lam[i] * mu.point(i);
  }
  const double tiny = 1e-15 * scale_of(mu.grid());
  if (std::abs(beta) > tiny) {
    // Remove mass from the outermost atoms on the heavy side.
    double remaining = std::abs(beta);
    const bool right = beta > 0.0;
    for (std::size_t k = 0; k < n && remaining > 0.0; ++k) {
      std::size_t i = right ? n - 1 - k : k;
      double x = std::abs(mu.point(i));
      if ((right ? mu.point(i) <= 0.0 : mu.point(i) >= 0.0) || lam[i] <= 0.0) continue;
      double take = std::min(lam[i], remaining / x);
      lam[i] -= take;
      remaining -= take * x;
      if (remaining <= tiny) remaining = 0.0;
    }
    if (remaining > 0.0) throw NumericalError("restrict_bounded: cannot restore zero barycenter");
  }
  out.lambda_eps = DiscreteMeasure(mu.grid(), std::move(lam));
  double removed = lambda.mass() - out.lambda_eps.mass();
  if (removed > dm * (1.0 + 1e-12) + 1e-15)
    throw NumericalError("restrict_bounded: removed mass " + fmt(removed) + " exceeds delta min eps");
  if (out.lambda_eps.mass() < 1.0 - split.delta - dm - 1e-12)
    throw NumericalError("restrict_bounded: restricted mass below 1 - delta - delta min eps");
  return out;
}

Kernel strassen_coupling(const DiscreteMeasure& a, const DiscreteMeasure& b) {
  if (!(a.mass() > 0.0) || std::abs(a.mass() - b.mass()) > 1e-12 * std::max(1.0, a.mass()))
    throw DomainError("strassen_coupling: measures need equal positive mass");
  DiscreteMeasure an = a.normalized();
  DiscreteMeasure bn = b.normalized();
  if (!convex_order_leq(an, bn)) throw DomainError("strassen_coupling: convex order fails");

  Grid target = Grid::merge(a.grid(), b.grid());
  std::vector<std::size_t> sa, sb;
  for (std::size_t i = 0; i < an.size(); ++i)
    if (an.weight(i) > 0.0) sa.push_back(i);
  for (std::size_t j = 0; j < bn.size(); ++j)
    if (bn.weight(j) > 0.0) sb.push_back(j);
  const auto na = static_cast<Eigen::Index>(sa.size());
  const auto nb = static_cast<Eigen::Index>(sb.size());
  Eigen::MatrixXd lhs = Eigen::MatrixXd::Zero(2 * na + nb, na * nb);
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(2 * na + nb);
  for (Eigen::Index i = 0; i < na; ++i) {
    rhs[i] = an.weight(sa[static_cast<std::size_t>(i)]);
    for (Eigen::Index j = 0; j < nb; ++j) {
      Eigen::Index v = i * nb + j;
      lhs(i, v) = 1.0;
      lhs(na + j, v) = 1.0;
      lhs(na + nb + i, v) = bn.point(sb[static_cast<std::size_t>(j)]) - an.point(sa[static_cast<std::size_t>(i)]);
    }
  }
  for (Eigen::Index j = 0; j < nb; ++j) rhs[na + j] = bn.weight(sb[static_cast<std::size_t>(j)]);
  lp::InteriorPoint center;
  try {
    center = lp::analytic_center(lhs, rhs);
  } catch (const InfeasibleError& e) {
    throw InfeasibleError("strassen_coupling: no martingale coupling exists", e.certificate());
  }

  const std::size_t nt = target.size();
  std::vector<double> rows(a.size() * nt, 0.0);
  std::vector<std::size_t> col_of(sb.size());
  for (std::size_t j = 0; j < sb.size(); ++j) col_of[j] = *target.index_of(bn.point(sb[j]));
  for (std::size_t i = 0; i < a.size(); ++i)
    if (an.weight(i) <= 0.0) rows[i * nt + *target.index_of(a.point(i))] = 1.0;
  for (Eigen::Index i = 0; i < na; ++i) {
    std::size_t r = sa[static_cast<std::size_t>(i)];
    double s = 0.0;
    for (Eigen::Index j = 0; j < nb; ++j) s += center.x[i * nb + j];
    for (Eigen::Index j = 0; j < nb; ++j)
      rows[r * nt + col_of[static_cast<std::size_t>(j)]] = center.x[i * nb + j] / s;
  }
  Kernel m(a.grid(), target, std::move(rows));

  const double scale = scale_of(target);
  if (max_mean_defect(m, an.weights()) > kDefectTol * scale)
    throw NumericalError("strassen_coupling: row barycenter defect above tolerance");
  auto bt = bn.weights_on(target);
  for (std::size_t j = 0; j < nt; ++j) {
    double s = 0.0;
    for (std::size_t i = 0; i < an.size(); ++i) s += an.weight(i) * m(i, j);
    if (std::abs(s - bt[j]) > kDefectTol) throw NumericalError("strassen_coupling: marginal defect above tolerance");
  }
  return m;
}

ProbeResult convex_order_stability_probe(const DiscreteMeasure& a, const DiscreteMeasure& b,
                                         const std::vector<std::pair<DiscreteMeasure, DiscreteMeasure>>& schedule) {
  auto centered = [](const DiscreteMeasure& m, const char* what) {
    DiscreteMeasure out = m.normalized();
    if (std::abs(barycenter(out)) > 1e-10 * scale_of(out.grid()))
      throw DomainError(std::string("convex_order_stability_probe: ") + what + " must have zero barycenter");
    return out;
  };
  DiscreteMeasure an = centered(a, "a");
  DiscreteMeasure bn = centered(b, "b");
  Grid common = Grid::merge(an.grid(), bn.grid());
  if (an.weights_on(common) == bn.weights_on(common))
    throw DomainError("convex_order_stability_probe: a and b must differ");

  ProbeResult out;
  for (std::size_t n = 0; n < schedule.size(); ++n) {
    DiscreteMeasure x = centered(schedule[n].first, "a_n");
    DiscreteMeasure y = centered(schedule[n].second, "b_n");
    Grid g = Grid::merge(an.grid(), x.grid());
    auto wa = an.weights_on(g);
    auto wx = x.weights_on(g);
    for (std::size_t i = 0; i < g.size(); ++i)
      if (wx[i] > 0.0 && wa[i] <= 0.0) throw DomainError("convex_order_stability_probe: a_n is not << a");
    out.holds.push_back(convex_order_leq(x, y));
  }
  for (std::size_t n = out.holds.size(); n > 0 && out.holds[n - 1]; --n) out.stable_from = n;
  return out;
}

ApproxOutput build_q_tilde(const JointMeasure& q, const JointMeasure& p, const std::vector<double>& h,
                           double delta, const EpsSchedule& schedule) {
  if (!(q.xgrid() == p.xgrid()) || !(q.ygrid() == p.ygrid())) throw DomainError("build_q_tilde: grid mismatch");
  if (h.size() != q.rows()) throw DomainError("build_q_tilde: h must be indexed by xgrid");
  if (!(schedule.ratio > 0.0 && schedule.ratio < 1.0) || schedule.horizon < 1)
    throw DomainError("build_q_tilde: eps schedule needs ratio in (0, 1) and a positive horizon");
  const std::size_t nx = q.rows(), ny = q.cols();
  Disintegration dq = disintegrate(q);
  const double xscale = scale_of(q.xgrid()) + scale_of(q.ygrid());
  if (max_mean_defect(dq.kernel, dq.marginal.weights()) > kDefectTol * xscale)
    throw DomainError("build_q_tilde: q is not a martingale measure");
  DiscreteMeasure bound_i = technical_bound(q, p);

  // Work in coordinates where mu has zero barycenter.
  const DiscreteMeasure& mu = dq.marginal;
  const double shift = barycenter(mu);
  DiscreteMeasure mu_c(q.xgrid().shifted(-shift), std::vector<double>(mu.weights().begin(), mu.weights().end()));

  ApproxOutput out;
  out.delta = delta;
  out.split = split_interval(mu_c, delta);

  RestrictResult chosen;
  DiscreteMeasure mu_a_star, mu_b_star;
  double eps = delta;
  for (int n = 1; n <= schedule.horizon && out.n0 == 0; ++n) {
    eps *= schedule.ratio;
    RestrictResult r = restrict_bounded(out.split, h, eps);
    auto [ma, mb] = split_pair(mu_c, r.lambda_eps);
    if (convex_order_leq(ma, mb)) {
      out.n0 = static_cast<std::size_t>(n);
      chosen = std::move(r);
      mu_a_star = std::move(ma);
      mu_b_star = std::move(mb);
    }
  }
  if (out.n0 == 0)
    throw DomainError("build_q_tilde: convex order did not stabilize within the eps horizon (input outside hypotheses)");
  out.h_bound = chosen.tau;
  const DiscreteMeasure& lambda_star = chosen.lambda_eps;
  out.lambda_mass = lambda_star.mass();

  Kernel m_centered = strassen_coupling(mu_a_star, mu_b_star);
  std::vector<double> mrows;
  for (std::size_t i = 0; i < nx; ++i) mrows.insert(mrows.end(), m_centered.row(i).begin(), m_centered.row(i).end());
  Kernel m(q.xgrid(), q.xgrid(), std::move(mrows));
  Kernel q_delta = kernel_compose(m, dq.kernel);

  std::vector<double> w(nx * ny, 0.0);
  for (std::size_t i = 0; i < nx; ++i)
    for (std::size_t j = 0; j < ny; ++j)
      w[i * ny + j] = lambda_star.weight(i) * dq.kernel(i, j) + mu_a_star.weight(i) * q_delta(i, j);
  out.q_tilde = JointMeasure(q.xgrid(), q.ygrid(), std::move(w));

  if (tv_distance(out.q_tilde.second_marginal(), q.second_marginal()) > kDefectTol)
    throw NumericalError("build_q_tilde: second marginal differs from nu");
  Disintegration dt = disintegrate(out.q_tilde);
  if (max_mean_defect(dt.kernel, dt.marginal.weights()) > kDefectTol * xscale)
    throw NumericalError("build_q_tilde: martingale defect above tolerance");
  for (std::size_t i = 0; i < nx; ++i)
    if (dt.marginal.weight(i) > 0.0 && std::abs(h[i]) > out.h_bound)
      throw NumericalError("build_q_tilde: h exceeds its threshold on the first marginal");
  out.entropy = relative_entropy(out.q_tilde, p);
  if (!std::isfinite(out.entropy)) throw NumericalError("build_q_tilde: approximation has infinite entropy");
  out.tv_to_q = tv_distance(out.q_tilde, q);
  out.entropy_gap = std::abs(out.entropy - relative_entropy(q, p));

  // Convex-combination bound and the I-domination of the mixing term.
  DiscreteMeasure mu_bar = lambda_star.normalized();
  mu_bar = DiscreteMeasure(q.xgrid(), std::vector<double>(mu_bar.weights().begin(), mu_bar.weights().end()));
  const double lm = out.lambda_mass;
  out.convexity_rhs = lm * relative_entropy(compose(mu_bar, dq.kernel), p) +
                      (1.0 - lm) * relative_entropy(compose(mu_bar, q_delta), p);
  if (!(out.entropy <= out.convexity_rhs + 1e-10))
    throw NumericalError("build_q_tilde: convexity bound violated");
  for (std::size_t i = 0; i < nx; ++i) {
    if (mu_a_star.weight(i) > 0.0) {
      auto prow = row_probabilities(p, i);
      out.mixing_entropy += mu_a_star.weight(i) * row_entropy(q_delta.row(i), prow);
    }
    out.i_domination += mu_b_star.weight(i) * bound_i.weight(i);
  }
  if (!(out.mixing_entropy <= out.i_domination + 1e-10))
    throw NumericalError("build_q_tilde: mixing entropy exceeds E^{mu_B*}[I]");
  return out;
}

ConvergenceReport entropy_convergence_report(const JointMeasure& q, const JointMeasure& p,
                                             const std::vector<double>& h, const std::vector<double>& deltas,
                                             double tol, const EpsSchedule& schedule) {
  if (deltas.empty()) throw DomainError("entropy_convergence_report: empty delta list");
  for (std::size_t k = 1; k < deltas.size(); ++k)
    if (!(deltas[k] < deltas[k - 1])) throw DomainError("entropy_convergence_report: deltas must decrease");
  ConvergenceReport out;
  out.reference_entropy = relative_entropy(q, p);
  for (double d : deltas) out.rows.push_back(build_q_tilde(q, p, h, d, schedule));
  const ApproxOutput& last = out.rows.back();
  out.within_tol = last.tv_to_q <= tol && last.entropy_gap <= tol;
  return out;
}

}  // namespace msb
