// Acceptance run: one PASS/FAIL line per criterion. Exit status is nonzero
// when any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <json.hpp>
#include <string>

#include "msbridge/approximation.hpp"
#include "msbridge/bridge.hpp"
#include "msbridge/calibration.hpp"
#include "msbridge/duality.hpp"
#include "msbridge/errors.hpp"
#include "msbridge/oracle.hpp"
#include "msbridge/random_instances.hpp"

namespace {

using namespace msb;
using Json = nlohmann::json;

// Pinned tolerances.
constexpr double kOracleTv = 1e-6;
constexpr double kOracleEntropy = 1e-8;
constexpr double kOracleSeconds = 60.0;
constexpr double kGapTol = 1e-6;
constexpr double kGoldenTol = 1e-8;
constexpr double kDensityRel = 1e-10;
constexpr double kPotentialTol = 1e-8;
constexpr double kFiniteReach = 1e-6;
constexpr double kFiniteRatio = 1e-5;
constexpr double kFinitePartition = 1e-10;
constexpr double kMonotoneSlack = 1e-12;
constexpr double kQuantileTol = 1e-12;
constexpr double kEqualityTol = 1e-12;
constexpr double kStrassenTol = 1e-10;
constexpr double kStrassenExact = 1e-12;
constexpr double kApproxEntropy = 1e-3;
constexpr double kConvexitySlack = 1e-10;
constexpr double kCalibrationTol = 1e-10;
constexpr double kChainTol = 1e-10;
constexpr double kTvBoundSlack = 1e-12;

struct Outcome {
  bool pass = true;
  std::string detail;
};

std::string fmt(const char* f, double a) {
  char buf[128];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

JointMeasure fixture_p() {
  return JointMeasure(Grid({-0.5, 0.5}), Grid({-1.0, 0.0, 1.0}), {0.25, 0.15, 0.1, 0.1, 0.15, 0.25});
}
DiscreteMeasure fixture_nu() { return DiscreteMeasure(Grid({-1.0, 0.0, 1.0}), {0.3, 0.4, 0.3}); }

JointMeasure joint_from(const Json& j) {
  std::vector<double> w;
  for (const auto& row : j.at("weights"))
    for (double v : row) w.push_back(v);
  return JointMeasure(Grid(j.at("xgrid").get<std::vector<double>>()), Grid(j.at("ygrid").get<std::vector<double>>()),
                      w);
}

Outcome oracle_equivalence() {
  random::Engine rng(20240101);
  auto t0 = std::chrono::steady_clock::now();
  double max_tv = 0.0, max_dh = 0.0;
  for (int k = 0; k < 50; ++k) {
    auto inst = random::feasible_instance(rng, 4, 5);
    auto sol = solve_bridge(inst.p, inst.nu);
    auto ref = oracle::brute_force_bridge(inst.p, inst.nu);
    max_tv = std::max(max_tv, tv_distance(sol.q_star, ref.q));
    max_dh = std::max(max_dh, std::abs(sol.entropy - ref.entropy));
  }
  double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  Outcome o;
  o.pass = max_tv <= kOracleTv && max_dh <= kOracleEntropy && secs < kOracleSeconds;
  o.detail = "50 instances, max TV " + fmt("%.2e", max_tv) + ", max |dH| " + fmt("%.2e", max_dh) + ", " +
             fmt("%.2f", secs) + " s";
  return o;
}

Outcome duality_certificate() {
  std::ifstream in(std::string(MSBRIDGE_GOLDEN_DIR) + "/fixture_i1.json");
  if (!in) return {false, "golden file missing"};
  Json g = Json::parse(in);
  auto p = joint_from(g.at("p"));
  DiscreteMeasure nu(Grid(g.at("nu").at("points").get<std::vector<double>>()),
                     g.at("nu").at("weights").get<std::vector<double>>());
  double h_ref = g.at("entropy").get<double>();
  Outcome o;
  double worst = 0.0;
  for (double gamma : {0.5, 1.0, 5.0}) {
    auto cert = duality_gap(p, nu, gamma);
    worst = std::max(worst, std::abs(cert.gap));
    o.pass = o.pass && std::abs(cert.gap) <= kGapTol && cert.admissibility.admissible &&
             std::abs(cert.primal_value * gamma - h_ref) <= kGoldenTol;
  }
  o.detail = "gamma in {0.5, 1, 5}, max |gap| " + fmt("%.2e", worst) + ", golden H " + fmt("%.15g", h_ref);
  return o;
}

Outcome density_form() {
  std::vector<random::BridgeInstance> cases{{fixture_p(), fixture_nu()}};
  random::Engine rng(7);
  for (int k = 0; k < 20; ++k) cases.push_back(random::feasible_instance(rng, 4, 5));
  double worst_rel = 0.0, worst_c = 0.0;
  for (const auto& c : cases) {
    auto sol = solve_bridge(c.p, c.nu);
    const auto& pot = sol.potentials;
    for (std::size_t i = 0; i < c.p.rows(); ++i)
      for (std::size_t j = 0; j < c.p.cols(); ++j) {
        double q = sol.q_star(i, j);
        double rebuilt = c.p(i, j) * std::exp(pot.c + pot.h[i] * (c.p.ygrid()[j] - c.p.xgrid()[i]) + pot.g[j]);
        if (q > 0.0) worst_rel = std::max(worst_rel, std::abs(rebuilt - q) / q);
      }
    worst_c = std::max(worst_c, std::abs(sol.potentials.c - sol.entropy));
  }
  return {worst_rel <= kDensityRel && worst_c <= kPotentialTol,
          std::to_string(cases.size()) + " instances, max rel " + fmt("%.2e", worst_rel) + ", max |c - H| " +
              fmt("%.2e", worst_c)};
}

Outcome finite_constraints() {
  auto p = fixture_p();
  auto nu = fixture_nu();
  auto sol = solve_bridge(p, nu);
  auto basis = exhausting_basis(p, nu);
  const auto& xs = p.xgrid();
  const auto& ys = p.ygrid();
  bool monotone = true;
  double prev = 0.0, worst_partition = 0.0, ratio_dev = 0.0, h_n = 0.0;
  for (std::size_t n = 1; n <= basis.size(); ++n) {
    std::vector<MomentConstraint> sub(basis.begin(), basis.begin() + static_cast<long>(n));
    auto fc = finite_constraint_solution(p, sub);
    h_n = relative_entropy(fc.q, p);
    monotone = monotone && h_n >= prev - kMonotoneSlack;
    prev = h_n;
    double ep = 0.0;
    for (std::size_t i = 0; i < p.rows(); ++i)
      for (std::size_t j = 0; j < p.cols(); ++j)
        ep += p(i, j) * std::exp(fc.h_tilde[i] * (ys[j] - xs[i]) + fc.g_tilde[j]);
    worst_partition = std::max(worst_partition, std::abs(std::exp(-h_n) - ep));
    if (n == basis.size()) {
      const auto& pot = sol.potentials;
      for (std::size_t i = 0; i < p.rows(); ++i)
        for (std::size_t j = 0; j < p.cols(); ++j) {
          double d = ys[j] - xs[i];
          double vn = fc.c + fc.h_tilde[i] * d + fc.g_tilde[j];
          double vs = pot.c + pot.h[i] * d + pot.g[j];
          ratio_dev += sol.q_star(i, j) * std::abs(std::exp(vn - vs) - 1.0);
        }
    }
  }
  double reach = std::abs(h_n - sol.entropy);
  return {monotone && reach <= kFiniteReach && ratio_dev <= kFiniteRatio && worst_partition <= kFinitePartition,
          std::to_string(basis.size()) + " constraints, monotone " + (monotone ? "yes" : "no") + ", |H_n - H*| " +
              fmt("%.2e", reach) + ", E|ratio - 1| " + fmt("%.2e", ratio_dev) + ", partition " +
              fmt("%.2e", worst_partition)};
}

bool equality_structure(const DiscreteMeasure& a, const DiscreteMeasure& b) {
  auto e = equality_set(a, b);
  auto bp = quantile_breakpoints(a);
  auto bb = quantile_breakpoints(b);
  bp.insert(bp.end(), bb.begin(), bb.end());
  for (double u : bp) {
    if (u <= 0.0 || u >= 1.0) continue;
    if (e.equal || u <= e.alpha || u >= e.beta)
      if (std::abs(quantile_integral(a, u) - quantile_integral(b, u)) > kEqualityTol) return false;
  }
  if (!e.equal && e.alpha < e.beta) {
    double mid = 0.5 * (e.alpha + e.beta);
    if (!(quantile_integral(b, mid) - quantile_integral(a, mid) > 10 * kEqualityTol)) return false;
  }
  return true;
}

Outcome convex_order_suite() {
  random::Engine rng(5);
  int mismatches = 0;
  double worst_q0 = 0.0;
  for (int k = 0; k < 1000; ++k) {
    auto [a, b] = random::equal_mass_pair(rng, 12);
    if (convex_order_leq(a, b) != convex_order_oracle(a, b)) ++mismatches;
    for (const auto* m : {&a, &b})
      worst_q0 = std::max(worst_q0, std::abs(quantile_integral(*m, 0.0) - barycenter(*m)));
  }
  auto two = [](double x, double y) { return DiscreteMeasure(Grid({x, y}), {0.5, 0.5}); };
  auto e1 = equality_set(two(-1.0, 1.0), two(-1.0, 1.0));
  auto e2 = equality_set(DiscreteMeasure::dirac(0.0), two(-1.0, 1.0));
  auto a3 = DiscreteMeasure(Grid({-1.0, 0.0, 1.0}), {0.4, 0.2, 0.4});
  auto b3 = two(-1.0, 1.0);
  auto e3 = equality_set(a3, b3);
  bool examples = e1.equal && !e2.equal && e2.alpha == 0.0 && e2.beta == 1.0 && !e3.equal &&
                  std::abs(e3.alpha - 0.4) <= kEqualityTol && equality_structure(two(-1.0, 1.0), two(-1.0, 1.0)) &&
                  equality_structure(DiscreteMeasure::dirac(0.0), two(-1.0, 1.0)) && equality_structure(a3, b3);
  return {mismatches == 0 && worst_q0 <= kQuantileTol && examples,
          "1000 pairs, " + std::to_string(mismatches) + " mismatches, max |Q(0) - mean| " + fmt("%.2e", worst_q0) +
              ", equality-set examples " + (examples ? "ok" : "wrong")};
}

Outcome strassen() {
  random::Engine rng(9);
  double worst_marg = 0.0, worst_bary = 0.0;
  for (int k = 0; k < 1000; ++k) {
    auto [a, b] = random::dilation_pair(rng, 8);
    auto an = a.normalized();
    auto kern = strassen_coupling(a, b);
    worst_bary = std::max(worst_bary, max_mean_defect(kern, an.weights()));
    worst_marg = std::max(worst_marg, tv_distance(compose(an, kern).second_marginal(), b.normalized()));
  }
  auto kern = strassen_coupling(DiscreteMeasure(Grid({-1.0, 1.0}), {0.5, 0.5}),
                                DiscreteMeasure(Grid({-2.0, 2.0}), {0.5, 0.5}));
  // Target grid is {-2, -1, 1, 2}.
  bool exact = kern.ygrid() == Grid({-2.0, -1.0, 1.0, 2.0}) && std::abs(kern(0, 0) - 0.75) <= kStrassenExact &&
               std::abs(kern(0, 3) - 0.25) <= kStrassenExact && std::abs(kern(1, 0) - 0.25) <= kStrassenExact &&
               std::abs(kern(1, 3) - 0.75) <= kStrassenExact;
  return {worst_marg <= kStrassenTol && worst_bary <= kStrassenTol && exact,
          "1000 pairs, max marginal " + fmt("%.2e", worst_marg) + ", max barycenter " + fmt("%.2e", worst_bary) +
              ", two-point example " + (exact ? "exact" : "wrong")};
}

// Six x-atoms with a 0.002 atom at x = -0.5 carrying the spike of h.
JointMeasure spiked_martingale() {
  std::vector<double> xs{-2.0, -1.0, -0.5, 0.5, 1.0, 2.0};
  std::vector<double> mx{0.2, 0.25, 0.002, 0.148, 0.2, 0.2};
  Grid ys({-3.0, -2.0, -1.0, 0.0, 1.0, 2.0, 3.0});
  random::Engine rng(5);
  std::vector<double> w;
  for (std::size_t i = 0; i < xs.size(); ++i)
    for (double v : random::mean_row(rng, ys, xs[i])) w.push_back(mx[i] * v);
  return JointMeasure(Grid(xs), ys, w);
}

Outcome approximation() {
  auto p = fixture_p();
  auto sol = solve_bridge(p, fixture_nu());
  std::vector<double> h{1e6, 0.0};
  EpsSchedule sched;
  Outcome o;
  std::string rows;

  // The spike sits on an atom the construction cannot drop at delta = 0.1.
  auto rich = spiked_martingale();
  std::vector<double> rich_h(6, 1.0);
  rich_h[2] = 1e6;
  auto spike = build_q_tilde(rich, rich, rich_h, 1e-1, sched);
  bool excluded = spike.h_bound < 1e6 && spike.q_tilde.first_marginal().weight(2) == 0.0 &&
                  spike.tv_to_q <= 2.0 * 1e-1 + 1e-1 * std::pow(sched.ratio, static_cast<double>(spike.n0));
  o.pass = excluded;

  for (double delta : {1e-1, 1e-2, 1e-3}) {
    auto out = build_q_tilde(sol.q_star, p, h, delta, sched);
    auto m1 = out.q_tilde.first_marginal();
    bool bounded = true;
    for (std::size_t i = 0; i < m1.size(); ++i)
      if (m1.weight(i) > 0.0) bounded = bounded && std::abs(h[i]) <= out.h_bound;
    double slack = delta * std::pow(sched.ratio, static_cast<double>(out.n0));
    bool tv_ok = out.tv_to_q <= 2.0 * delta + slack;
    bool convex_ok = out.entropy <= out.convexity_rhs + kConvexitySlack;
    bool entropy_ok = delta != 1e-3 || std::abs(out.entropy - sol.entropy) <= kApproxEntropy;
    o.pass = o.pass && bounded && tv_ok && convex_ok && entropy_ok;
    rows += fmt(" d=%g", delta) + fmt(" tv %.1e", out.tv_to_q) + fmt(" dH %.1e", std::abs(out.entropy - sol.entropy)) +
            ";";
  }
  o.detail = "fixture with h spike:" + rows + " six-atom spike " + (excluded ? "excluded" : "kept") +
             fmt(" (tau %g)", spike.h_bound);
  return o;
}

Outcome calibration() {
  random::Engine rng(11);
  double worst = 0.0;
  int flagged = 0;
  for (int k = 0; k < 100; ++k) {
    auto [nu, strikes] = random::measure_with_strikes(rng);
    auto r = implied_marginal(price_calls(nu, strikes));
    if (!r.violations.empty()) ++flagged;
    auto ref = nu.weights_on(r.nu.grid());
    for (std::size_t i = 0; i < ref.size(); ++i) worst = std::max(worst, std::abs(ref[i] - r.nu.weight(i)));
  }
  using Kind = ArbitrageViolation::Kind;
  auto flags = [](std::vector<CallQuote> q, Kind kind) {
    for (const auto& v : check_static_arbitrage(q))
      if (v.kind == kind) return true;
    return false;
  };
  bool bad = flags({{0.0, 1.0}, {1.0, 1.2}, {2.0, 0.0}}, Kind::kMonotonicity) &&
             flags({{0.0, 3.0}, {1.0, 1.0}, {2.0, 0.0}}, Kind::kSlope) &&
             flags({{0.0, 1.0}, {1.0, 0.7}, {2.0, 0.0}}, Kind::kConvexity) &&
             flags({{0.0, 5.0}, {1.0, 4.5}, {2.0, 4.0}}, Kind::kBoundary) &&
             check_static_arbitrage({{0.0, 1.0}, {1.0, 0.5}, {2.0, 0.0}}).empty();
  return {worst <= kCalibrationTol && flagged == 0 && bad,
          "100 round trips, max error " + fmt("%.2e", worst) + ", bad sheets " + (bad ? "flagged" : "missed")};
}

Outcome chain_and_tv() {
  random::Engine rng(13);
  double worst_chain = 0.0, worst_excess = -1.0;
  for (int k = 0; k < 1000; ++k) {
    auto [q, p] = random::entropy_pair(rng);
    auto c = entropy_chain(q, p);
    worst_chain = std::max(worst_chain, std::abs(c.marginal + c.conditional - relative_entropy(q, p)));
    auto [lam, mu] = random::dominated_pair(rng);
    auto b = normalize_tv_bound(lam, mu);
    worst_excess = std::max(worst_excess, b.tv - b.bound);
  }
  return {worst_chain <= kChainTol && worst_excess <= kTvBoundSlack,
          "1000 pairs each, max chain error " + fmt("%.2e", worst_chain) + ", max tv - bound " +
              fmt("%.2e", worst_excess)};
}

}  // namespace

int main() {
  struct Criterion {
    const char* name;
    std::function<Outcome()> run;
  };
  const Criterion criteria[] = {
      {"oracle equivalence", oracle_equivalence}, {"duality certificate", duality_certificate},
      {"density form", density_form},             {"finite-constraint convergence", finite_constraints},
      {"convex order", convex_order_suite},       {"strassen couplings", strassen},
      {"approximation pipeline", approximation},  {"calibration round trip", calibration},
      {"chain rule and tv bound", chain_and_tv},
  };
  int failed = 0;
  int index = 0;
  for (const auto& c : criteria) {
    ++index;
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    std::printf("[%s] %d %s: %s\n", o.pass ? "PASS" : "FAIL", index, c.name, o.detail.c_str());
    failed += !o.pass;
  }
  std::printf("%d/%d criteria passed\n", index - failed, index);
  return failed == 0 ? 0 : 1;
}
