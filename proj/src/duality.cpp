#include "msbridge/duality.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "msbridge/errors.hpp"

namespace msb {
namespace {

void check_gamma(double gamma) {
  if (!(gamma > 0.0) || !std::isfinite(gamma)) throw DomainError("risk aversion gamma must be positive");
}

void check_grids(const JointMeasure& p, const SemistaticPortfolio& v) {
  if (!(p.xgrid() == v.xgrid) || !(p.ygrid() == v.ygrid) || v.h.size() != v.xgrid.size() ||
      v.g.size() != v.ygrid.size())
    throw DomainError("portfolio grids do not match the measure");
}

}  // namespace

double certainty_equivalent(const JointMeasure& p, const SemistaticPortfolio& v, double gamma) {
  check_gamma(gamma);
  check_grids(p, v);
  double m = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < p.rows(); ++i)
    for (std::size_t j = 0; j < p.cols(); ++j)
      if (p(i, j) > 0.0) m = std::max(m, std::log(p(i, j)) - gamma * v.payoff(i, j));
  double s = 0.0;
  for (std::size_t i = 0; i < p.rows(); ++i)
    for (std::size_t j = 0; j < p.cols(); ++j)
      if (p(i, j) > 0.0) s += std::exp(std::log(p(i, j)) - gamma * v.payoff(i, j) - m);
  return -(m + std::log(s)) / gamma;
}

SemistaticPortfolio extract_optimal_portfolio(const BridgeSolution& sol, const DiscreteMeasure& nu,
                                              double gamma) {
  check_gamma(gamma);
  if (!sol.converged) throw DomainError("cannot extract a portfolio from an unconverged solution");
  const JointMeasure& q = sol.q_star;
  SemistaticPortfolio v;
  v.xgrid = q.xgrid();
  v.ygrid = q.ygrid();
  v.h.resize(q.rows());
  v.g.resize(q.cols());
  for (std::size_t i = 0; i < q.rows(); ++i) v.h[i] = -sol.potentials.h[i] / gamma;
  for (std::size_t j = 0; j < q.cols(); ++j) v.g[j] = -sol.potentials.g[j] / gamma;
  auto nuv = align_to(nu, q.ygrid());
  v.price = 0.0;
  for (std::size_t j = 0; j < nuv.size(); ++j) v.price += nuv[j] * v.g[j];
  return v;
}

AdmissibilityReport admissibility_check(const SemistaticPortfolio& v, const DiscreteMeasure& nu,
                                        const std::vector<JointMeasure>& witnesses, const JointMeasure& p,
                                        double tol) {
  check_grids(p, v);
  auto nuv = align_to(nu, v.ygrid);
  AdmissibilityReport out;
  for (std::size_t j = 0; j < nuv.size(); ++j) out.price_defect += nuv[j] * v.g[j];
  out.price_defect = std::abs(out.price_defect);
  DiscreteMeasure nu_on_grid(v.ygrid, nuv);

  for (std::size_t k = 0; k < witnesses.size(); ++k) {
    const JointMeasure& q = witnesses[k];
    const std::string name = "witness " + std::to_string(k);
    if (!(q.xgrid() == p.xgrid()) || !(q.ygrid() == p.ygrid())) throw DomainError(name + ": grid mismatch");
    if (std::abs(q.mass() - 1.0) > tol) throw DomainError(name + ": not a probability measure");
    if (!std::isfinite(relative_entropy(q, p))) throw DomainError(name + ": infinite entropy relative to P");
    WitnessDefect d;
    d.marginal = tv_distance(q.second_marginal(), nu_on_grid);
    d.martingale = martingale_defect(q);
    if (d.marginal > tol) throw DomainError(name + ": second marginal differs from nu by " + std::to_string(d.marginal));
    if (d.martingale > tol) throw DomainError(name + ": martingale defect " + std::to_string(d.martingale));
    double gain = 0.0;
    for (std::size_t i = 0; i < q.rows(); ++i)
      for (std::size_t j = 0; j < q.cols(); ++j) gain += q(i, j) * v.h[i] * (v.ygrid[j] - v.xgrid[i]);
    d.gain = std::abs(gain);
    out.max_gain_defect = std::max(out.max_gain_defect, d.gain);
    out.witnesses.push_back(d);
  }
  out.admissible = out.price_defect <= tol && out.max_gain_defect <= tol;
  return out;
}

DualityCertificate duality_gap(const JointMeasure& p, const DiscreteMeasure& nu, double gamma,
                               const CertifyOptions& opts) {
  check_gamma(gamma);
  DualityCertificate cert;
  cert.gamma = gamma;
  FeasibilityResult feas = feasibility_check(p, nu);
  if (!feas.equivalent)
    throw InfeasibleError("no calibrated martingale measure is equivalent to P; the duality requires one");
  cert.solution = solve_bridge(p, nu, opts.solver);
  cert.portfolio = extract_optimal_portfolio(cert.solution, nu, gamma);
  cert.primal_value = cert.solution.entropy / gamma;
  cert.dual_value = certainty_equivalent(p, cert.portfolio, gamma);
  cert.gap = cert.primal_value - cert.dual_value;

  std::vector<JointMeasure> witnesses{cert.solution.q_star, feas.witness};
  for (auto& w : random_vertex_witnesses(p, nu, opts.random_witnesses, opts.seed)) witnesses.push_back(std::move(w));
  cert.admissibility = admissibility_check(cert.portfolio, nu, witnesses, p);
  return cert;
}

}  // namespace msb
