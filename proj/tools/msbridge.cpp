#include <CLI11.hpp>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <json.hpp>
#include <optional>
#include <string>

#include "msbridge/approximation.hpp"
#include "msbridge/bridge.hpp"
#include "msbridge/calibration.hpp"
#include "msbridge/config.hpp"
#include "msbridge/duality.hpp"
#include "msbridge/errors.hpp"
#include "msbridge/io.hpp"
#include "msbridge/oracle.hpp"
#include "msbridge/selftest.hpp"

namespace {

using Json = nlohmann::ordered_json;
using namespace msb;

struct Overrides {
  std::string config, joint, nu, quotes, q, h, out, gammas, deltas;
  std::optional<std::uint64_t> seed;
};

Json to_json(const Grid& g) { return Json(std::vector<double>(g.points().begin(), g.points().end())); }

Json to_json(const DiscreteMeasure& m) {
  return Json{{"points", to_json(m.grid())}, {"weights", std::vector<double>(m.weights().begin(), m.weights().end())}};
}

Json to_json(const JointMeasure& j) {
  Json rows = Json::array();
  for (std::size_t i = 0; i < j.rows(); ++i) rows.push_back(std::vector<double>(j.row(i).begin(), j.row(i).end()));
  return Json{{"xgrid", to_json(j.xgrid())}, {"ygrid", to_json(j.ygrid())}, {"weights", rows}};
}

Json to_json(const BridgeSolution& s) {
  const auto& pot = s.potentials;
  Json out{{"converged", s.converged},
           {"iterations", s.iterations},
           {"entropy", s.entropy},
           {"marginal_residual", s.marginal_residual},
           {"martingale_residual", s.martingale_residual},
           {"potentials", {{"c", pot.c}, {"h", pot.h}, {"g", pot.g}}},
           {"restricted_support", !pot.support.empty()},
           {"final_dual_objective", s.dual_trace.empty() ? 0.0 : s.dual_trace.back()},
           {"q_star", to_json(s.q_star)}};
  return out;
}

void write_json(const std::string& path, const Json& j) { io::write_text(path, j.dump(2) + "\n"); }

std::string out_path(const RunConfig& cfg, const std::string& name) {
  return (std::filesystem::path(cfg.output_dir) / name).string();
}

RunConfig resolve(const Overrides& o) {
  RunConfig cfg = o.config.empty() ? RunConfig{} : load_run_config(o.config);
  if (!o.joint.empty()) cfg.joint_path = o.joint;
  if (!o.nu.empty()) cfg.nu_path = o.nu, cfg.quotes_path.clear();
  if (!o.quotes.empty()) cfg.quotes_path = o.quotes, cfg.nu_path.clear();
  if (!o.q.empty()) cfg.q_path = o.q;
  if (!o.h.empty()) cfg.h_path = o.h;
  if (!o.out.empty()) cfg.output_dir = o.out;
  if (!o.gammas.empty()) cfg.gammas = parse_number_list(o.gammas, "--gamma");
  if (!o.deltas.empty()) cfg.deltas = parse_number_list(o.deltas, "--delta");
  if (o.seed) cfg.seed = *o.seed;
  cfg.validate();
  std::filesystem::create_directories(cfg.output_dir);
  return cfg;
}

JointMeasure require_joint(const RunConfig& cfg) {
  if (cfg.joint_path.empty()) throw DomainError("no reference measure given (input.joint or --joint)");
  return io::read_joint(cfg.joint_path);
}

DiscreteMeasure require_nu(const RunConfig& cfg) {
  if (!cfg.nu_path.empty()) return io::read_measure(cfg.nu_path);
  if (!cfg.quotes_path.empty()) {
    auto report = implied_marginal(io::read_quotes(cfg.quotes_path));
    if (!report.violations.empty()) throw DomainError(cfg.quotes_path + ": quotes admit static arbitrage");
    return report.nu;
  }
  throw DomainError("no terminal marginal given (input.nu, input.quotes, --nu or --quotes)");
}

int cmd_calibrate(const RunConfig& cfg) {
  if (cfg.quotes_path.empty()) throw DomainError("calibrate needs quotes (input.quotes or --quotes)");
  auto report = implied_marginal(io::read_quotes(cfg.quotes_path));
  io::write_measure(out_path(cfg, "nu.csv"), report.nu.compacted());
  Json v = Json::array();
  for (const auto& x : report.violations)
    v.push_back({{"kind", to_string(x.kind)}, {"strike_lo", x.strike_lo}, {"strike_hi", x.strike_hi}, {"magnitude", x.magnitude}});
  write_json(out_path(cfg, "calibration.json"), Json{{"forward", report.forward},
                                                    {"upper_tail_collapsed", report.upper_tail_collapsed},
                                                    {"violations", v},
                                                    {"nu", to_json(report.nu)}});
  std::printf("calibrate: %zu violation(s), forward %s\n", report.violations.size(), io::g17(report.forward).c_str());
  return 0;
}

int cmd_solve(const RunConfig& cfg) {
  auto p = require_joint(cfg);
  auto nu = require_nu(cfg);
  auto sol = solve_bridge(p, nu, cfg.solver);
  write_json(out_path(cfg, "solution.json"), to_json(sol));
  io::write_joint(out_path(cfg, "q_star.csv"), sol.q_star);
  io::write_function(out_path(cfg, "h.csv"), p.xgrid(), sol.potentials.h, "h");
  io::write_function(out_path(cfg, "g.csv"), p.ygrid(), sol.potentials.g, "g");
  std::printf("solve: converged in %d sweeps, entropy %s\n", sol.iterations, io::g17(sol.entropy).c_str());
  return 0;
}

int cmd_certify(const RunConfig& cfg) {
  auto p = require_joint(cfg);
  auto nu = require_nu(cfg);
  CertifyOptions opts;
  opts.solver = cfg.solver;
  opts.random_witnesses = cfg.random_witnesses;
  opts.seed = cfg.seed;
  opts.gap_tol = cfg.gap_tol;
  Json certs = Json::array();
  bool ok = true;
  for (std::size_t k = 0; k < cfg.gammas.size(); ++k) {
    auto cert = duality_gap(p, nu, cfg.gammas[k], opts);
    const auto& adm = cert.admissibility;
    Json witnesses = Json::array();
    for (const auto& w : adm.witnesses)
      witnesses.push_back({{"gain", w.gain}, {"marginal", w.marginal}, {"martingale", w.martingale}});
    certs.push_back({{"gamma", cert.gamma},
                     {"primal_value", cert.primal_value},
                     {"dual_value", cert.dual_value},
                     {"gap", cert.gap},
                     {"within_tol", std::abs(cert.gap) <= cfg.gap_tol},
                     {"admissibility",
                      {{"admissible", adm.admissible},
                       {"price_defect", adm.price_defect},
                       {"max_gain_defect", adm.max_gain_defect},
                       {"witnesses", witnesses}}},
                     {"portfolio", {{"h", cert.portfolio.h}, {"g", cert.portfolio.g}, {"price", cert.portfolio.price}}}});
    io::write_function(out_path(cfg, "portfolio_h_" + std::to_string(k) + ".csv"), p.xgrid(), cert.portfolio.h, "h");
    io::write_function(out_path(cfg, "portfolio_g_" + std::to_string(k) + ".csv"), p.ygrid(), cert.portfolio.g, "g");
    ok = ok && std::abs(cert.gap) <= cfg.gap_tol && adm.admissible;
    std::printf("certify: gamma %s gap %s\n", io::g17(cert.gamma).c_str(), io::g17(cert.gap).c_str());
  }
  write_json(out_path(cfg, "certificate.json"), Json{{"gap_tol", cfg.gap_tol}, {"certificates", certs}});
  return ok ? 0 : 2;
}

int cmd_approx(const RunConfig& cfg) {
  auto p = require_joint(cfg);
  JointMeasure q;
  std::vector<double> h;
  std::optional<BridgeSolution> sol;
  if (cfg.q_path.empty() || cfg.h_path.empty()) sol = solve_bridge(p, require_nu(cfg), cfg.solver);
  q = cfg.q_path.empty() ? sol->q_star : io::read_joint(cfg.q_path);
  h = cfg.h_path.empty() ? sol->potentials.h : io::read_function(cfg.h_path, q.xgrid());
  auto report = entropy_convergence_report(q, p, h, cfg.deltas, cfg.approx_tol, cfg.schedule);
  std::string table = "delta,n0,h_bound,lambda_mass,tv_to_q,entropy,entropy_gap,convexity_rhs,mixing_entropy,i_domination\n";
  for (std::size_t k = 0; k < report.rows.size(); ++k) {
    const auto& r = report.rows[k];
    for (double v : {r.delta, static_cast<double>(r.n0), r.h_bound, r.lambda_mass, r.tv_to_q, r.entropy, r.entropy_gap,
                     r.convexity_rhs, r.mixing_entropy})
      table += io::g17(v) + ",";
    table += io::g17(r.i_domination) + "\n";
    if (cfg.write_q_tilde) io::write_joint(out_path(cfg, "q_tilde_" + std::to_string(k) + ".csv"), r.q_tilde);
  }
  io::write_text(out_path(cfg, "approx_table.csv"), table);
  write_json(out_path(cfg, "approx.json"), Json{{"reference_entropy", report.reference_entropy},
                                               {"tol", cfg.approx_tol},
                                               {"within_tol", report.within_tol}});
  std::printf("approx: %zu row(s), final entropy gap %s\n", report.rows.size(),
              io::g17(report.rows.back().entropy_gap).c_str());
  return report.within_tol ? 0 : 2;
}

int cmd_oracle(const RunConfig& cfg) {
  auto p = require_joint(cfg);
  auto nu = require_nu(cfg);
  auto res = oracle::brute_force_bridge(p, nu);
  write_json(out_path(cfg, "oracle.json"), Json{{"entropy", res.entropy},
                                               {"kkt_residual", res.kkt_residual},
                                               {"nu", to_json(nu)},
                                               {"p", to_json(p)},
                                               {"q", to_json(res.q)}});
  io::write_joint(out_path(cfg, "oracle_q.csv"), res.q);
  std::printf("oracle: entropy %s, KKT residual %s\n", io::g17(res.entropy).c_str(), io::g17(res.kkt_residual).c_str());
  return 0;
}

int cmd_selftest(const RunConfig& cfg) {
  auto rows = run_selftest(cfg.seed);
  bool ok = true;
  for (const auto& r : rows) {
    std::printf("%-4s %-45s %s\n", r.passed ? "PASS" : "FAIL", r.name.c_str(), r.detail.c_str());
    ok = ok && r.passed;
  }
  return ok ? 0 : 2;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Entropy-minimal calibrated martingale measures on discrete grids"};
  app.require_subcommand(1);
  Overrides o;
  int (*handler)(const RunConfig&) = nullptr;

  auto add = [&](const char* name, const char* help, int (*fn)(const RunConfig&)) {
    auto* sub = app.add_subcommand(name, help);
    sub->add_option("-c,--config", o.config, "config file (sectioned key = value)");
    sub->add_option("--joint", o.joint, "reference measure P as CSV x,y,weight");
    sub->add_option("--nu", o.nu, "terminal marginal as CSV point,weight");
    sub->add_option("--quotes", o.quotes, "call quotes as CSV strike,price");
    sub->add_option("--q", o.q, "measure to approximate as CSV x,y,weight");
    sub->add_option("--shares", o.h, "shares held h(x) as CSV point,value");
    sub->add_option("-o,--out", o.out, "output directory");
    sub->add_option("--gamma", o.gammas, "comma-separated risk aversions");
    sub->add_option("--delta", o.deltas, "comma-separated decreasing deltas");
    sub->add_option("--seed", o.seed, "seed for randomized checks");
    sub->callback([&handler, fn] { handler = fn; });
  };
  add("calibrate", "implied terminal marginal from call quotes", cmd_calibrate);
  add("solve", "martingale Schroedinger bridge", cmd_solve);
  add("certify", "duality certificate for exponential utility", cmd_certify);
  add("approx", "bounded-h approximation table", cmd_approx);
  add("oracle", "reference solution for golden files", cmd_oracle);
  add("selftest", "invariant suite", cmd_selftest);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    return handler(resolve(o));
  } catch (const InfeasibleError& e) {
    std::cerr << "infeasible: " << e.what() << "\n";
    return 3;
  } catch (const NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 2;
  } catch (const DomainError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
