#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "minrel/cli.hpp"
#include "minrel/errors.hpp"
#include "minrel/geometry.hpp"

namespace py = pybind11;
using namespace minrel;

namespace {

using Values = std::vector<double>;
using OptMu = std::optional<Values>;

SpacePtr space_for(std::size_t n, const OptMu& mu) {
  if (mu && mu->size() != n) throw InvalidArgument("mu has " + std::to_string(mu->size()) + " entries, expected " + std::to_string(n));
  return FiniteSpace::make({}, mu ? *mu : Values(n, 1.0));
}

FeatureSet features_for(const SpacePtr& space, const std::vector<Values>& tables) {
  return FeatureSet(space, tables);
}

MomentSpec spec_for(const std::string& kind, const Values& targets, double q) {
  return MomentSpec{constraint_kind_from_string(kind), targets, QIndex(q)};
}

SolverOptions options_for(double tolerance, int max_iterations, const std::string& jacobian) {
  SolverOptions o;
  o.tolerance = tolerance;
  o.max_iterations = max_iterations;
  if (jacobian == "finite-difference") {
    o.jacobian = JacobianMode::finite_difference;
  } else if (jacobian != "analytic") {
    throw InvalidArgument("jacobian must be 'analytic' or 'finite-difference'");
  }
  return o;
}

Values values_of(const Density& d) { return {d.values().begin(), d.values().end()}; }

}  // namespace

PYBIND11_MODULE(_minrel, m) {
  m.doc() = "Minimum relative-entropy projections on finite spaces";

  auto base = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<DomainError>(m, "DomainError", base.ptr());
  py::register_exception<InvalidArgument>(m, "InvalidArgument", base.ptr());
  py::register_exception<InfeasibleError>(m, "InfeasibleError", base.ptr());
  py::register_exception<ConvergenceError>(m, "ConvergenceError", base.ptr());
  py::register_exception<PreconditionError>(m, "PreconditionError", base.ptr());

  m.def("q_log", [](double x, double q) { return q_log(x, QIndex(q)); }, py::arg("x"), py::arg("q"));
  m.def("q_exp", [](double x, double q) { return q_exp(x, QIndex(q)); }, py::arg("x"), py::arg("q"));
  m.def("q_product", [](double x, double y, double q) { return q_product(x, y, QIndex(q)); }, py::arg("x"),
        py::arg("y"), py::arg("q"));
  m.def("q_power_n", [](double x, std::int64_t n, double q) { return q_power_n(x, n, QIndex(q)); }, py::arg("x"),
        py::arg("n"), py::arg("q"));
  m.def("q_exp_by_limit", [](double x, std::int64_t n, double q) { return q_exp_by_limit(x, n, QIndex(q)); },
        py::arg("x"), py::arg("n"), py::arg("q"));

  m.def(
      "relative_entropy",
      [](const Values& p, const Values& r, double q, const OptMu& mu) {
        const auto space = space_for(p.size(), mu);
        return relative_entropy(Density(space, p), Density(space, r), QIndex(q));
      },
      py::arg("p"), py::arg("r"), py::arg("q") = 1.0, py::arg("mu") = py::none());
  m.def(
      "tsallis_entropy",
      [](const Values& p, double q, const OptMu& mu) { return tsallis_entropy(Density(space_for(p.size(), mu), p), QIndex(q)); },
      py::arg("p"), py::arg("q"), py::arg("mu") = py::none());

  py::class_<SolveResult>(m, "SolveResult")
      .def_property_readonly("kind", [](const SolveResult& r) { return std::string(to_string(r.kind)); })
      .def_property_readonly("q", [](const SolveResult& r) { return r.q.value(); })
      .def_property_readonly("posterior", [](const SolveResult& r) { return values_of(r.posterior); })
      .def_readonly("beta", &SolveResult::beta)
      .def_readonly("partition", &SolveResult::partition)
      .def_readonly("divergence", &SolveResult::divergence)
      .def_readonly("targets", &SolveResult::targets)
      .def_readonly("residuals", &SolveResult::residuals)
      .def_readonly("q_mass", &SolveResult::q_mass)
      .def_readonly("iterations", &SolveResult::iterations)
      .def_readonly("outer_iterations", &SolveResult::outer_iterations)
      .def_readonly("converged", &SolveResult::converged)
      .def_readonly("diagnostics", &SolveResult::diagnostics)
      .def("beta_q", &SolveResult::beta_q)
      .def("closed_form_minimum", &SolveResult::closed_form_minimum)
      .def("__repr__", [](const SolveResult& r) {
        std::ostringstream os;
        os << "SolveResult(kind='" << to_string(r.kind) << "', q=" << r.q.value() << ", divergence=" << r.divergence
           << ")";
        return os.str();
      });

  py::class_<GeometryReport>(m, "GeometryReport")
      .def_property_readonly("regime", [](const GeometryReport& g) { return std::string(to_string(g.regime)); })
      .def_property_readonly("q", [](const GeometryReport& g) { return g.q.value(); })
      .def_readonly("I_lr", &GeometryReport::I_lr)
      .def_readonly("I_lp", &GeometryReport::I_lp)
      .def_readonly("I_pr", &GeometryReport::I_pr)
      .def_readonly("triangle_residual", &GeometryReport::triangle_residual)
      .def_readonly("cross_term", &GeometryReport::cross_term)
      .def_readonly("matching_residuals", &GeometryReport::matching_residuals)
      .def_readonly("matching_holds", &GeometryReport::matching_holds)
      .def_readonly("solve", &GeometryReport::solve)
      .def("inequality_sign_consistent", &GeometryReport::inequality_sign_consistent);

  m.def(
      "solve",
      [](const Values& prior, const std::vector<Values>& features, const Values& targets, const std::string& kind,
         double q, const OptMu& mu, double tolerance, int max_iterations, const std::string& jacobian) {
        const auto space = space_for(prior.size(), mu);
        return solve(Density(space, prior), features_for(space, features), spec_for(kind, targets, q),
                     options_for(tolerance, max_iterations, jacobian));
      },
      py::arg("prior"), py::arg("features"), py::arg("targets"), py::arg("kind") = "classical", py::arg("q") = 1.0,
      py::arg("mu") = py::none(), py::arg("tolerance") = 1e-10, py::arg("max_iterations") = 200,
      py::arg("jacobian") = "analytic");

  m.def(
      "brute_force_primal",
      [](const Values& prior, const std::vector<Values>& features, const Values& targets, const std::string& kind,
         double q, const OptMu& mu, double grid_spacing) {
        const auto space = space_for(prior.size(), mu);
        return values_of(brute_force_primal(Density(space, prior), features_for(space, features),
                                            spec_for(kind, targets, q), grid_spacing));
      },
      py::arg("prior"), py::arg("features"), py::arg("targets"), py::arg("kind") = "classical", py::arg("q") = 1.0,
      py::arg("mu") = py::none(), py::arg("grid_spacing") = 1e-3);

  m.def(
      "triangle",
      [](const Values& prior, const std::vector<Values>& features, const Values& targets, const Values& l,
         const std::string& kind, double q, const OptMu& mu) {
        const auto space = space_for(prior.size(), mu);
        const Density r(space, prior);
        const auto u = features_for(space, features);
        return triangle_report(r, u, Density(space, l), solve(r, u, spec_for(kind, targets, q)));
      },
      py::arg("prior"), py::arg("features"), py::arg("targets"), py::arg("l"), py::arg("kind") = "classical",
      py::arg("q") = 1.0, py::arg("mu") = py::none(),
      "Projects the prior and reports the triangle equality for l without precondition checks.");

  m.def(
      "verify_classical_pythagoras",
      [](const Values& prior, const std::vector<Values>& features, const Values& targets, const Values& l,
         const OptMu& mu) {
        const auto space = space_for(prior.size(), mu);
        return verify_classical_pythagoras(Density(space, prior), features_for(space, features), targets,
                                           Density(space, l));
      },
      py::arg("prior"), py::arg("features"), py::arg("targets"), py::arg("l"), py::arg("mu") = py::none());

  m.def(
      "thermodynamic_checks",
      [](const Values& prior, const std::vector<Values>& features, const Values& targets, const std::string& kind,
         double q, const OptMu& mu, double h) {
        const auto space = space_for(prior.size(), mu);
        const Density r(space, prior);
        const auto u = features_for(space, features);
        const auto res = solve(r, u, spec_for(kind, targets, q));
        py::list out;
        for (const auto& c : check_thermodynamic_identities(r, u, res, h)) {
          py::dict d;
          d["identity"] = c.identity;
          d["index"] = c.index;
          d["finite_difference"] = c.finite_difference;
          d["expected"] = c.expected;
          d["residual"] = c.residual;
          out.append(d);
        }
        return out;
      },
      py::arg("prior"), py::arg("features"), py::arg("targets"), py::arg("kind") = "classical", py::arg("q") = 1.0,
      py::arg("mu") = py::none(), py::arg("h") = 1e-5);

  m.def(
      "run_cli",
      [](const std::vector<std::string>& args) {
        std::ostringstream out, err;
        std::vector<std::string> argv{"minrel"};
        argv.insert(argv.end(), args.begin(), args.end());
        const int code = cli::run(argv, out, err);
        return py::make_tuple(code, out.str(), err.str());
      },
      py::arg("args"), "Runs the command line in-process; returns (exit_code, stdout, stderr).");

  m.attr("__version__") = cli::kVersion;
}
