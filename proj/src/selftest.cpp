#include "msbridge/selftest.hpp"

#include <cmath>
#include <functional>

#include "msbridge/approximation.hpp"
#include "msbridge/bridge.hpp"
#include "msbridge/calibration.hpp"
#include "msbridge/duality.hpp"
#include "msbridge/errors.hpp"
#include "msbridge/io.hpp"
#include "msbridge/oracle.hpp"
#include "msbridge/random_instances.hpp"

namespace msb {
namespace {

JointMeasure fixture_p() {
  return JointMeasure(Grid({-0.5, 0.5}), Grid({-1.0, 0.0, 1.0}), {0.25, 0.15, 0.1, 0.1, 0.15, 0.25});
}

DiscreteMeasure fixture_nu() { return DiscreteMeasure(Grid({-1.0, 0.0, 1.0}), {0.3, 0.4, 0.3}); }

SelfCheck check(const std::string& name, const std::function<std::string(bool&)>& body) {
  SelfCheck out{name, false, ""};
  try {
    out.detail = body(out.passed);
  } catch (const std::exception& e) {
    out.passed = false;
    out.detail = std::string("exception: ") + e.what();
  }
  return out;
}

}  // namespace

std::vector<SelfCheck> run_selftest(std::uint64_t seed) {
  std::vector<SelfCheck> rows;
  random::Engine rng(seed);

  rows.push_back(check("solver matches oracle", [&](bool& ok) {
    double worst_tv = 0.0, worst_h = 0.0;
    for (int k = 0; k < 10; ++k) {
      auto inst = random::feasible_instance(rng, 4, 5);
      auto s = solve_bridge(inst.p, inst.nu);
      auto o = oracle::brute_force_bridge(inst.p, inst.nu);
      worst_tv = std::max(worst_tv, tv_distance(s.q_star, o.q));
      worst_h = std::max(worst_h, std::abs(s.entropy - o.entropy));
    }
    ok = worst_tv <= 1e-6 && worst_h <= 1e-8;
    return "max tv " + io::g17(worst_tv) + ", max |dH| " + io::g17(worst_h);
  }));

  rows.push_back(check("density form and c = H", [&](bool& ok) {
    auto s = solve_bridge(fixture_p(), fixture_nu());
    double rel = 0.0;
    auto back = primal_from_potentials(fixture_p(), s.potentials);
    for (std::size_t k = 0; k < back.weights().size(); ++k)
      rel = std::max(rel, std::abs(back.weights()[k] - s.q_star.weights()[k]) / s.q_star.weights()[k]);
    ok = rel <= 1e-10 && std::abs(s.potentials.c - s.entropy) <= 1e-8;
    return "max rel " + io::g17(rel) + ", |c - H| " + io::g17(std::abs(s.potentials.c - s.entropy));
  }));

  rows.push_back(check("duality gap", [&](bool& ok) {
    double worst = 0.0;
    for (double g : {0.5, 1.0, 5.0}) worst = std::max(worst, std::abs(duality_gap(fixture_p(), fixture_nu(), g).gap));
    ok = worst <= 1e-6;
    return "max |gap| " + io::g17(worst);
  }));

  rows.push_back(check("convex order oracles agree", [&](bool& ok) {
    int disagree = 0;
    for (int k = 0; k < 200; ++k) {
      auto [a, b] = random::equal_mass_pair(rng, 12);
      disagree += convex_order_leq(a, b) != convex_order_oracle(a, b);
    }
    ok = disagree == 0;
    return std::to_string(disagree) + " disagreements in 200";
  }));

  rows.push_back(check("strassen defects", [&](bool& ok) {
    double worst = 0.0;
    for (int k = 0; k < 100; ++k) {
      auto [a, b] = random::dilation_pair(rng, 8);
      Kernel m = strassen_coupling(a, b);
      worst = std::max(worst, max_mean_defect(m, a.weights()));
      auto bw = b.weights_on(m.ygrid());
      for (std::size_t j = 0; j < m.ygrid().size(); ++j) {
        double s = 0.0;
        for (std::size_t i = 0; i < a.size(); ++i) s += a.weight(i) * m(i, j);
        worst = std::max(worst, std::abs(s - bw[j]));
      }
    }
    ok = worst <= 1e-10;
    return "max defect " + io::g17(worst);
  }));

  rows.push_back(check("calibration round trip", [&](bool& ok) {
    double worst = 0.0;
    for (int k = 0; k < 50; ++k) {
      auto [nu, strikes] = random::measure_with_strikes(rng);
      auto report = implied_marginal(price_calls(nu, strikes));
      for (std::size_t i = 0; i < nu.size(); ++i) worst = std::max(worst, std::abs(report.nu.weight(i) - nu.weight(i)));
    }
    ok = worst <= 1e-10;
    return "max weight error " + io::g17(worst);
  }));

  rows.push_back(check("entropy chain and tv bound", [&](bool& ok) {
    double worst = 0.0;
    int tv_fail = 0;
    for (int k = 0; k < 200; ++k) {
      auto [q, p] = random::entropy_pair(rng);
      auto chain = entropy_chain(q, p);
      worst = std::max(worst, std::abs(chain.marginal + chain.conditional - relative_entropy(q, p)));
      auto [lam, mu] = random::dominated_pair(rng);
      auto b = normalize_tv_bound(lam, mu);
      tv_fail += b.tv > b.bound + 1e-12;
    }
    ok = worst <= 1e-10 && tv_fail == 0;
    return "max chain error " + io::g17(worst) + ", tv bound failures " + std::to_string(tv_fail);
  }));

  rows.push_back(check("finite constraints increase to the bridge", [&](bool& ok) {
    auto p = fixture_p();
    auto nu = fixture_nu();
    auto s = solve_bridge(p, nu);
    auto basis = exhausting_basis(p, nu);
    double prev = 0.0;
    bool monotone = true;
    FiniteConstraintSolution last;
    for (std::size_t n = 0; n <= basis.size(); ++n) {
      last = finite_constraint_solution(p, {basis.begin(), basis.begin() + static_cast<long>(n)});
      monotone = monotone && last.c >= prev - 1e-12;
      prev = last.c;
    }
    ok = monotone && std::abs(last.c - s.entropy) <= 1e-6;
    return "final |H_n - H*| " + io::g17(std::abs(last.c - s.entropy));
  }));

  rows.push_back(check("approximation pipeline", [&](bool& ok) {
    auto p = fixture_p();
    auto s = solve_bridge(p, fixture_nu());
    auto report = entropy_convergence_report(s.q_star, p, {1e6, 0.0}, {1e-1, 1e-2, 1e-3});
    ok = report.within_tol;
    for (const auto& r : report.rows) ok = ok && r.tv_to_q <= 2.0 * r.delta + 1e-12;
    return "final entropy gap " + io::g17(report.rows.back().entropy_gap);
  }));

  return rows;
}

}  // namespace msb
