#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "cli.hpp"
#include "gstate/diagnostics.hpp"
#include "gstate/io.hpp"
#include "gstate/spectrum.hpp"

namespace py = pybind11;
using namespace gstate;

namespace {

// Configs cross the boundary as plain dicts in the artifact layout.
ExperimentConfig to_config(const py::object& obj) {
  if (obj.is_none()) return ExperimentConfig{};
  const std::string text = py::module_::import("json").attr("dumps")(obj).cast<std::string>();
  return config_from_json(Json::parse(text));
}

py::object to_py(const Json& j) { return py::module_::import("json").attr("loads")(j.dump()); }

py::dict report_dict(const IdentityReport& r) {
  py::dict d;
  d["id"] = r.id;
  d["lhs"] = r.lhs;
  d["rhs"] = r.rhs;
  d["rel_residual"] = r.rel_residual;
  d["tol"] = r.tol;
  d["pass"] = r.pass;
  d["inconclusive"] = r.inconclusive;
  d["note"] = r.note;
  return d;
}

py::list report_list(const std::vector<IdentityReport>& reps) {
  py::list out;
  for (const auto& r : reps) out.append(report_dict(r));
  return out;
}

py::dict solve(const py::object& config, bool spectrum) {
  ExperimentConfig cfg = to_config(config);
  cfg = resolve_config(cfg, cfg.lambda);
  const ProblemSpec spec = validate_config(cfg);
  const Model model(spec, make_grid(cfg, spec));
  Solution sol;
  std::optional<Vector> tangent;
  std::vector<IdentityReport> reports;
  int morse = -1;
  {
    py::gil_scoped_release release;
    sol = solve_ground_state(model, cfg.lambda, newton_options(cfg));
    if (sol.converged) {
      try {
        tangent = branch_tangent(model, sol, cfg.cond_limit);
      } catch (const DegeneracyError&) {
      }
      reports = identity_suite(model, sol, tangent);
      if (spectrum) morse = morse_count(model, sol, cfg.eig_tol);
    }
  }
  py::dict d;
  d["lambda"] = sol.lambda;
  d["r"] = Vector(model.grid().nodes());
  d["u"] = sol.u;
  d["v"] = tangent ? py::cast(*tangent) : py::none();
  d["mass"] = sol.mass;
  d["energy"] = sol.energy;
  d["u0"] = model.grid().value_at_origin(sol.u);
  d["residual"] = sol.residual_norm;
  d["converged"] = sol.converged;
  d["iterations"] = sol.iterations;
  d["morse_index"] = morse;
  d["identities"] = report_list(reports);
  d["config"] = to_py(config_to_json(cfg));
  d["config_hash"] = config_hash(cfg);
  return d;
}

py::dict branch(const py::object& config, bool morse) {
  ExperimentConfig cfg = to_config(config);
  if (!(cfg.lambda_start != cfg.lambda_end)) throw ValidationError("empty lambda range");
  cfg = resolve_config(cfg, std::max(cfg.lambda_start, cfg.lambda_end));
  const ProblemSpec spec = validate_config(cfg);
  const Model model(spec, make_grid(cfg, spec));
  StepControl ctrl;
  ctrl.initial_step = cfg.initial_step;
  ctrl.max_nodes = cfg.max_nodes;
  ctrl.compute_morse = morse;
  ctrl.newton = newton_options(cfg);
  Branch b;
  {
    py::gil_scoped_release release;
    b = continue_branch(model, cfg.lambda_start, cfg.lambda_end, ctrl);
  }
  const std::size_t n = b.nodes.size();
  Vector lambda(n), mass(n), energy(n), dmass(n), v0(n);
  std::vector<int> changes(n), morse_idx(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& node = b.nodes[i];
    lambda[i] = node.sol.lambda;
    mass[i] = node.sol.mass;
    energy[i] = node.sol.energy;
    dmass[i] = node.mass_derivative;
    v0[i] = node.tangent_at_origin;
    changes[i] = node.sign_changes;
    morse_idx[i] = node.morse_index;
  }
  py::dict d;
  d["lambda"] = lambda;
  d["mass"] = mass;
  d["energy"] = energy;
  d["mass_derivative"] = dmass;
  d["tangent_at_origin"] = v0;
  d["sign_changes"] = changes;
  d["morse_index"] = morse_idx;
  d["truncated"] = b.truncated;
  d["reason"] = b.reason;
  d["sign_pattern"] = n ? py::object(report_dict(tangent_sign_pattern(model, b))) : py::none();
  d["config_hash"] = config_hash(cfg);
  return d;
}

py::dict masscurve(const py::object& config, bool morse) {
  ExperimentConfig cfg = to_config(config);
  if (cfg.c_grid.empty()) throw ValidationError("empty c grid");
  cfg = resolve_config(cfg, -1.0);
  const ProblemSpec spec = validate_config(cfg);
  const Model model(spec, make_grid(cfg, spec));
  CurveOptions co;
  co.minimize = minimize_options(cfg);
  co.minimize.compute_morse = morse;
  co.jobs = cfg.jobs;
  MassCurve curve;
  {
    py::gil_scoped_release release;
    curve = mass_curve(model, cfg.c_grid, co);
  }
  py::dict d;
  d["c"] = curve.c;
  d["m"] = curve.m;
  d["lambda"] = curve.lambda;
  d["dq_left"] = curve.dq_left;
  d["dq_right"] = curve.dq_right;
  d["dq_center"] = curve.dq_center;
  d["n_clusters"] = curve.n_clusters;
  d["morse_index"] = curve.morse_index;
  py::list kinks;
  for (const auto& k : curve.kinks) {
    py::dict kd;
    kd["c"] = k.c;
    kd["gap"] = k.gap;
    kd["error"] = k.error;
    kd["at_sample"] = k.at_sample;
    kinks.append(kd);
  }
  d["kinks"] = kinks;
  d["config_hash"] = config_hash(cfg);
  return d;
}

py::dict verify(const std::string& path, const std::optional<std::string>& expected_hash) {
  VerifyResult res;
  {
    py::gil_scoped_release release;
    res = verify_artifact(path, expected_hash);
  }
  py::list rows;
  for (const auto& row : res.rows) {
    py::dict r = report_dict(row.report);
    r["item"] = row.item;
    rows.append(r);
  }
  py::dict d;
  d["kind"] = res.kind;
  d["config_hash"] = res.hash;
  d["rows"] = rows;
  d["reproduced"] = res.reproduced;
  d["all_pass"] = res.all_pass();
  return d;
}

py::tuple run_cli(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  int code;
  {
    py::gil_scoped_release release;
    code = cli::run(args, out, err);
  }
  return py::make_tuple(code, out.str(), err.str());
}

}  // namespace

PYBIND11_MODULE(_gstate, m) {
  m.doc() = "Radial ground states: solve, continue, mass curves and identity checks";

  py::register_exception<ValidationError>(m, "ValidationError", PyExc_ValueError);
  py::register_exception<ConvergenceError>(m, "ConvergenceError", PyExc_RuntimeError);
  py::register_exception<DegeneracyError>(m, "DegeneracyError", PyExc_RuntimeError);

  m.attr("format_version") = kFormatVersion;
  m.def("default_config", [] { return to_py(config_to_json(ExperimentConfig{})); });
  m.def("config_hash", [](const py::object& c) { return config_hash(to_config(c)); }, py::arg("config"));
  m.def("solve", &solve, py::arg("config") = py::none(), py::arg("spectrum") = true);
  m.def("continue_branch", &branch, py::arg("config") = py::none(), py::arg("morse") = true);
  m.def("mass_curve", &masscurve, py::arg("config") = py::none(), py::arg("morse") = false);
  m.def("verify", &verify, py::arg("path"), py::arg("expected_hash") = py::none());
  m.def("run_cli", &run_cli, py::arg("args"), "Run the command line in-process; returns (code, stdout, stderr)");
}
