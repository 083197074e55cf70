#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "msbridge/approximation.hpp"
#include "msbridge/bridge.hpp"
#include "msbridge/calibration.hpp"
#include "msbridge/duality.hpp"
#include "msbridge/errors.hpp"
#include "msbridge/oracle.hpp"
#include "msbridge/selftest.hpp"

namespace py = pybind11;
using namespace msb;

namespace {

using Matrix = std::vector<std::vector<double>>;

JointMeasure joint(const std::vector<double>& xs, const std::vector<double>& ys, const Matrix& w) {
  if (w.size() != xs.size()) throw DomainError("weights need one row per x point");
  std::vector<double> flat;
  for (const auto& row : w) {
    if (row.size() != ys.size()) throw DomainError("weights need one column per y point");
    flat.insert(flat.end(), row.begin(), row.end());
  }
  return JointMeasure(Grid(xs), Grid(ys), std::move(flat));
}

Matrix rows_of(const JointMeasure& j) {
  Matrix out;
  for (std::size_t i = 0; i < j.rows(); ++i) out.emplace_back(j.row(i).begin(), j.row(i).end());
  return out;
}

py::dict solution_dict(const BridgeSolution& s) {
  py::dict d;
  d["q"] = rows_of(s.q_star);
  d["entropy"] = s.entropy;
  d["c"] = s.potentials.c;
  d["h"] = s.potentials.h;
  d["g"] = s.potentials.g;
  d["iterations"] = s.iterations;
  d["marginal_residual"] = s.marginal_residual;
  d["martingale_residual"] = s.martingale_residual;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Discrete martingale Schroedinger bridge solver";

  py::register_exception<DomainError>(m, "DomainError", PyExc_ValueError);
  py::register_exception<NumericalError>(m, "NumericalError", PyExc_ArithmeticError);
  py::register_exception<InfeasibleError>(m, "InfeasibleError", PyExc_ValueError);

  m.def(
      "solve_bridge",
      [](const std::vector<double>& xs, const std::vector<double>& ys, const Matrix& p,
         const std::vector<double>& nu) {
        return solution_dict(solve_bridge(joint(xs, ys, p), DiscreteMeasure(Grid(ys), nu)));
      },
      py::arg("xgrid"), py::arg("ygrid"), py::arg("p"), py::arg("nu"));

  m.def(
      "oracle_bridge",
      [](const std::vector<double>& xs, const std::vector<double>& ys, const Matrix& p,
         const std::vector<double>& nu) {
        auto r = oracle::brute_force_bridge(joint(xs, ys, p), DiscreteMeasure(Grid(ys), nu));
        py::dict d;
        d["q"] = rows_of(r.q);
        d["entropy"] = r.entropy;
        d["kkt_residual"] = r.kkt_residual;
        return d;
      },
      py::arg("xgrid"), py::arg("ygrid"), py::arg("p"), py::arg("nu"));

  m.def(
      "duality_gap",
      [](const std::vector<double>& xs, const std::vector<double>& ys, const Matrix& p,
         const std::vector<double>& nu, double gamma) {
        auto c = duality_gap(joint(xs, ys, p), DiscreteMeasure(Grid(ys), nu), gamma);
        py::dict d;
        d["primal"] = c.primal_value;
        d["dual"] = c.dual_value;
        d["gap"] = c.gap;
        d["admissible"] = c.admissibility.admissible;
        d["h"] = c.portfolio.h;
        d["g"] = c.portfolio.g;
        return d;
      },
      py::arg("xgrid"), py::arg("ygrid"), py::arg("p"), py::arg("nu"), py::arg("gamma") = 1.0);

  m.def(
      "convex_order_leq",
      [](const std::vector<double>& xa, const std::vector<double>& wa, const std::vector<double>& xb,
         const std::vector<double>& wb) {
        return convex_order_leq(DiscreteMeasure(Grid(xa), wa), DiscreteMeasure(Grid(xb), wb));
      },
      py::arg("a_points"), py::arg("a_weights"), py::arg("b_points"), py::arg("b_weights"));

  m.def(
      "implied_marginal",
      [](const std::vector<double>& strikes, const std::vector<double>& prices) {
        if (strikes.size() != prices.size()) throw DomainError("strikes and prices differ in length");
        std::vector<CallQuote> q;
        for (std::size_t i = 0; i < strikes.size(); ++i) q.push_back({strikes[i], prices[i]});
        auto r = implied_marginal(q);
        std::vector<std::string> kinds;
        for (const auto& v : r.violations) kinds.emplace_back(to_string(v.kind));
        py::dict d;
        d["points"] = std::vector<double>(r.nu.grid().points().begin(), r.nu.grid().points().end());
        d["weights"] = std::vector<double>(r.nu.weights().begin(), r.nu.weights().end());
        d["forward"] = r.forward;
        d["violations"] = kinds;
        return d;
      },
      py::arg("strikes"), py::arg("prices"));

  m.def("selftest", [](std::uint64_t seed) {
    std::vector<std::tuple<std::string, bool, std::string>> out;
    for (const auto& c : run_selftest(seed)) out.emplace_back(c.name, c.passed, c.detail);
    return out;
  }, py::arg("seed") = 1);
}
