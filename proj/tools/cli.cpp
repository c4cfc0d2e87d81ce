#include "cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <memory>

#include "CLI11.hpp"
#include "gstate/io.hpp"
#include "gstate/parallel.hpp"

namespace gstate::cli {

namespace {

namespace fs = std::filesystem;

std::string num(double x, int digits = 6) {
  if (std::isnan(x)) return "-";
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.*g", digits, x);
  return buf;
}

std::string pad(const std::string& s, std::size_t width) { return s.size() >= width ? s : s + std::string(width - s.size(), ' '); }

std::string status(const IdentityReport& r) {
  if (r.inconclusive) return "INCONCLUSIVE";
  return r.pass ? "PASS" : "FAIL";
}

bool any_failure(const std::vector<VerifyRow>& rows) {
  for (const auto& row : rows)
    if (!row.report.pass && !row.report.inconclusive) return true;
  return false;
}

// Full table for a few rows, one line per identity id otherwise (failures listed).
void print_reports(std::ostream& out, const std::vector<VerifyRow>& rows) {
  if (rows.size() <= 12) {
    out << pad("item", 14) << pad("identity", 28) << pad("lhs", 16) << pad("rhs", 16) << pad("rel.res", 12)
        << pad("tol", 10) << "status\n";
    for (const auto& row : rows) {
      const IdentityReport& r = row.report;
      out << pad(row.item, 14) << pad(r.id, 28) << pad(num(r.lhs, 10), 16) << pad(num(r.rhs, 10), 16)
          << pad(num(r.rel_residual, 3), 12) << pad(num(r.tol, 2), 10) << status(r) << '\n';
    }
    return;
  }
  struct Agg {
    int total = 0, pass = 0, inconclusive = 0;
    double worst = 0.0, tol = 0.0;
  };
  std::map<std::string, Agg> by_id;
  for (const auto& row : rows) {
    Agg& a = by_id[row.report.id];
    ++a.total;
    a.pass += row.report.pass;
    a.inconclusive += row.report.inconclusive;
    if (std::isfinite(row.report.rel_residual)) a.worst = std::max(a.worst, row.report.rel_residual);
    a.tol = row.report.tol;
  }
  out << pad("identity", 28) << pad("pass/total", 12) << pad("worst rel.res", 15) << "tol\n";
  for (const auto& [id, a] : by_id)
    out << pad(id, 28) << pad(std::to_string(a.pass) + "/" + std::to_string(a.total), 12) << pad(num(a.worst, 3), 15)
        << num(a.tol, 2) << (a.inconclusive ? "  (" + std::to_string(a.inconclusive) + " inconclusive)" : "") << '\n';
  int failed = 0;
  for (const auto& row : rows) {
    if (row.report.pass || row.report.inconclusive) continue;
    if (++failed <= 10)
      out << "  FAIL " << row.item << ' ' << row.report.id << " rel.res " << num(row.report.rel_residual, 3) << '\n';
  }
  if (failed > 10) out << "  ... and " << failed - 10 << " more failures\n";
}

Json stored_reports(const std::vector<VerifyRow>& rows) {
  Json a = Json::array();
  for (const auto& row : rows) a.push_back({{"item", row.item}, {"report", report_to_json(row.report)}});
  return a;
}

// Options are parsed into a staging config and copied onto the base config
// (defaults or --config file) only when given on the command line.
class Options {
 public:
  Options(CLI::App* app) : app_(app) {
    app_->add_option("--config", config_file_, "JSON experiment config; flags override its fields")
        ->check(CLI::ExistingFile);
    add("--preset", [](ExperimentConfig& c) -> auto& { return c.problem.id; },
        "frac_power | nls_potential | ball_hardy | appendixA | cubic_quintic");
    add("--s", [](ExperimentConfig& c) -> auto& { return c.problem.s; }, "order of the kinetic term");
    add("--N", [](ExperimentConfig& c) -> auto& { return c.problem.dim; }, "dimension");
    add("--p", [](ExperimentConfig& c) -> auto& { return c.problem.p; }, "power");
    add("--q", [](ExperimentConfig& c) -> auto& { return c.problem.q; }, "second power (appendixA)");
    add("--k", [](ExperimentConfig& c) -> auto& { return c.problem.k; }, "weight exponent (ball_hardy)");
    add("--weight", [](ExperimentConfig& c) -> auto& { return c.problem.weight; }, "one | decay");
    add("--weight-decay", [](ExperimentConfig& c) -> auto& { return c.problem.weight_decay; },
        "h = (1 + r^2)^(-a)");
    add("--potential", [](ExperimentConfig& c) -> auto& { return c.problem.potential; }, "none | well");
    add("--depth", [](ExperimentConfig& c) -> auto& { return c.problem.potential_depth; }, "potential well depth");
    add("--n", [](ExperimentConfig& c) -> auto& { return c.n; }, "grid cells");
    add("--R", [](ExperimentConfig& c) -> auto& { return c.outer_radius; }, "truncation radius (0 = default)");
    add("--tol", [](ExperimentConfig& c) -> auto& { return c.newton_tol; }, "Newton tolerance");
    add("--max-iters", [](ExperimentConfig& c) -> auto& { return c.max_iters; }, "Newton iteration budget");
    add("--cond-limit", [](ExperimentConfig& c) -> auto& { return c.cond_limit; }, "condition number limit");
    add("--eig-tol", [](ExperimentConfig& c) -> auto& { return c.eig_tol; }, "relative eigenvalue tolerance");
    add("--out", [](ExperimentConfig& c) -> auto& { return c.output_dir; },
        "output directory (default $GSTATE_OUTPUT_ROOT or ./gstate_out)");
    add("--jobs", [](ExperimentConfig& c) -> auto& { return c.jobs; }, "worker threads");
    app_->add_option("--name", name_, "artifact base name");
  }

  template <class Get>
  CLI::Option* add(const std::string& flag, Get get, const std::string& help) {
    CLI::Option* opt = app_->add_option(flag, get(staged_), help);
    copies_.emplace_back(opt, [this, get](ExperimentConfig& dst) { get(dst) = get(staged_); });
    return opt;
  }

  ExperimentConfig config() const {
    ExperimentConfig cfg;
    if (!config_file_.empty()) {
      std::ifstream in(config_file_);
      Json j;
      try {
        j = Json::parse(in);
      } catch (const Json::exception& e) {
        throw ValidationError("malformed config file " + config_file_ + ": " + e.what());
      }
      cfg = config_from_json(j.contains("config") ? j["config"] : j);
    }
    for (const auto& [opt, copy] : copies_)
      if (opt->count() > 0) copy(cfg);
    return cfg;
  }

  std::string name(const std::string& fallback) const { return name_.empty() ? fallback : name_; }

 private:
  CLI::App* app_;
  ExperimentConfig staged_;
  std::string config_file_;
  std::string name_;
  std::vector<std::pair<CLI::Option*, std::function<void(ExperimentConfig&)>>> copies_;
};

int cmd_solve(ExperimentConfig cfg, const std::string& name, bool spectrum, std::ostream& out, std::ostream& err) {
  cfg = resolve_config(cfg, cfg.lambda);
  const ProblemSpec spec = validate_config(cfg);
  const Model model(spec, make_grid(cfg, spec));
  const fs::path dir = output_root(cfg);
  const Solution sol = solve_ground_state(model, cfg.lambda, newton_options(cfg));
  if (!sol.converged) {
    const fs::path path = write_solution_artifact(dir, name, cfg, model, sol, std::nullopt, std::nullopt, {});
    err << "error: Newton did not converge at lambda = " << num(cfg.lambda) << " (residual "
        << num(sol.residual_norm, 3) << "); flagged artifact " << path.string() << '\n';
    return kNonconvergence;
  }
  std::optional<Vector> tangent;
  try {
    tangent = branch_tangent(model, sol, cfg.cond_limit);
  } catch (const DegeneracyError& e) {
    err << "warning: no tangent: " << e.what() << '\n';
  }
  std::optional<SpectrumReport> spec_report;
  if (spectrum) spec_report = morse_index(model, sol, cfg.eig_tol);
  const auto reports = identity_suite(model, sol, tangent);
  const fs::path path = write_solution_artifact(dir, name, cfg, model, sol, tangent, spec_report, reports);

  out << "solution at lambda = " << num(cfg.lambda) << "  (" << to_string(spec.family) << ", n = " << cfg.n
      << ", R = " << num(cfg.outer_radius) << ")\n";
  out << "  mass int u^2   " << num(sol.mass, 10) << '\n';
  out << "  energy         " << num(sol.energy, 10) << '\n';
  out << "  u(0)           " << num(model.grid().value_at_origin(sol.u), 10) << '\n';
  out << "  residual       " << num(sol.residual_norm, 3) << " after " << sol.iterations << " iterations\n";
  if (spec_report)
    out << "  Morse index    " << spec_report->morse_index << (spec_report->nondegenerate ? ", nondegenerate" : ", DEGENERATE")
        << " (radial sector)\n";
  std::vector<VerifyRow> rows;
  for (const auto& r : reports) rows.push_back({"solution", r});
  print_reports(out, rows);
  out << "artifact " << path.string() << "  config " << config_hash(cfg) << '\n';
  return kPass;
}

std::string monotonicity_summary(const Branch& b) {
  int negative = 0, positive = 0;
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (const auto& node : b.nodes) {
    negative += node.mass_derivative < 0.0;
    positive += node.mass_derivative > 0.0;
    lo = std::min(lo, node.mass_derivative);
    hi = std::max(hi, node.mass_derivative);
  }
  const int n = static_cast<int>(b.nodes.size());
  std::string s;
  if (negative == n)
    s = "mass_derivative < 0 on all " + std::to_string(n) + " nodes";
  else if (positive == n)
    s = "mass_derivative > 0 on all " + std::to_string(n) + " nodes";
  else
    s = "mass_derivative changes sign: " + std::to_string(negative) + " negative, " + std::to_string(positive) +
        " positive of " + std::to_string(n) + " nodes";
  return s + " (min " + num(lo) + ", max " + num(hi) + ")";
}

int cmd_continue(ExperimentConfig cfg, const std::string& name, bool verify, bool save_profiles, bool morse,
                 std::ostream& out, std::ostream& err) {
  if (!(cfg.lambda_start != cfg.lambda_end) || !std::isfinite(cfg.lambda_start) || !std::isfinite(cfg.lambda_end))
    throw ValidationError("empty lambda range [" + num(cfg.lambda_start) + ", " + num(cfg.lambda_end) + "]");
  cfg = resolve_config(cfg, std::max(cfg.lambda_start, cfg.lambda_end));
  const ProblemSpec spec = validate_config(cfg);
  const Model model(spec, make_grid(cfg, spec));
  StepControl ctrl;
  ctrl.initial_step = cfg.initial_step;
  ctrl.max_nodes = cfg.max_nodes;
  ctrl.compute_morse = morse;
  ctrl.newton = newton_options(cfg);
  const Branch branch = continue_branch(model, cfg.lambda_start, cfg.lambda_end, ctrl);

  std::vector<VerifyRow> rows;
  if (verify && !branch.nodes.empty()) {
    std::vector<std::vector<IdentityReport>> per_node(branch.nodes.size());
    detail::parallel_for(static_cast<int>(branch.nodes.size()), cfg.jobs, [&](int i) {
      per_node[i] = identity_suite(model, branch.nodes[i].sol, branch.nodes[i].tangent);
    });
    for (std::size_t i = 0; i < per_node.size(); ++i)
      for (const auto& r : per_node[i]) rows.push_back({"node " + std::to_string(i), r});
    if (spec.bounded_below_on_spheres) rows.push_back({"branch", tangent_sign_pattern(model, branch)});
  }
  Json extra;
  extra["monotonicity"] = branch.nodes.empty() ? "no nodes" : monotonicity_summary(branch);
  extra["reports"] = stored_reports(rows);
  const fs::path path =
      write_branch_artifact(output_root(cfg), name, cfg, model, branch, save_profiles, extra, cfg.jobs);

  out << "branch " << to_string(spec.family) << " from lambda = " << num(cfg.lambda_start) << " to "
      << num(cfg.lambda_end) << ": " << branch.nodes.size() << " nodes\n";
  if (!branch.nodes.empty()) {
    out << "  " << monotonicity_summary(branch) << '\n';
    int max_changes = 0, morse_min = 1 << 30, morse_max = -1;
    for (const auto& node : branch.nodes) {
      max_changes = std::max(max_changes, node.sign_changes);
      morse_min = std::min(morse_min, node.morse_index);
      morse_max = std::max(morse_max, node.morse_index);
    }
    out << "  tangent sign changes <= " << max_changes << '\n';
    if (morse) out << "  Morse index in [" << morse_min << ", " << morse_max << "] (radial sector)\n";
  }
  if (verify) print_reports(out, rows);
  out << "artifact " << path.string() << "  config " << config_hash(cfg) << '\n';
  if (branch.truncated) {
    err << "warning: branch truncated: " << branch.reason << '\n';
    return kNonconvergence;
  }
  return verify && any_failure(rows) ? kIdentityFailure : kPass;
}

int cmd_masscurve(ExperimentConfig cfg, const std::string& name, bool insert_crossing, bool morse, std::ostream& out,
                  std::ostream& err) {
  if (cfg.c_grid.empty()) throw ValidationError("empty c grid: give --c or --c-min/--c-max/--c-count");
  cfg = resolve_config(cfg, -1.0);
  const ProblemSpec spec = validate_config(cfg);
  const Model model(spec, make_grid(cfg, spec));
  MinimizeOptions mo = minimize_options(cfg);
  mo.compute_morse = morse;

  Json extra;
  std::optional<CrossingResult> crossing;
  if (spec.family == Family::Counterexample) {
    crossing = counterexample_crossing(spec.s, spec.dim, spec.p, spec.q, model.grid(), mo);
    extra["crossing"] = {{"m_plus_1", crossing->m_plus_1},       {"m_minus_1", crossing->m_minus_1},
                         {"alpha_plus", crossing->alpha_plus},   {"alpha_minus", crossing->alpha_minus},
                         {"c_hat_scaling", crossing->c_hat_scaling}, {"c_hat", crossing->c_hat},
                         {"dq_left", crossing->dq_left},         {"dq_right", crossing->dq_right},
                         {"bounded", crossing->bounded}};
    if (insert_crossing && crossing->bounded) {
      auto it = std::lower_bound(cfg.c_grid.begin(), cfg.c_grid.end(), crossing->c_hat);
      if (it == cfg.c_grid.end() || *it != crossing->c_hat) cfg.c_grid.insert(it, crossing->c_hat);
    }
  } else if (insert_crossing) {
    err << "warning: --insert-crossing applies to the appendixA preset only\n";
  }

  CurveOptions co;
  co.minimize = mo;
  co.jobs = cfg.jobs;
  const MassCurve curve = mass_curve(model, cfg.c_grid, co);

  double worst = std::numeric_limits<double>::quiet_NaN();
  for (std::size_t i = 0; i < curve.c.size(); ++i) {
    const double d = std::abs(curve.dq_center[i] - curve.lambda[i]) / std::abs(curve.lambda[i]);
    if (std::isfinite(d)) worst = std::isnan(worst) ? d : std::max(worst, d);
  }
  std::optional<ExpressionReport> expr;
  if (spec.s == 1.0 && spec.pure_power && curve.c.size() > 1) {
    expr = m_expression_check(model, curve);
    extra["expression_check"] = {{"max_ode_residual", expr->max_ode_residual},
                                 {"max_lambda_residual", expr->max_lambda_residual},
                                 {"conclusive", expr->conclusive},
                                 {"note", expr->note}};
  }
  extra["max_derivative_mismatch"] = std::isnan(worst) ? Json(nullptr) : Json(worst);
  const fs::path path = write_masscurve_artifact(output_root(cfg), name, cfg, model, curve, extra, cfg.jobs);

  out << pad("c", 14) << pad("m(c)", 16) << pad("lambda(c)", 16) << pad("m'(c)", 16) << pad("rel.diff", 12)
      << pad("clusters", 10) << "morse\n";
  for (std::size_t i = 0; i < curve.c.size(); ++i) {
    const double d = std::abs(curve.dq_center[i] - curve.lambda[i]) / std::abs(curve.lambda[i]);
    out << pad(num(curve.c[i], 8), 14) << pad(num(curve.m[i], 10), 16) << pad(num(curve.lambda[i], 10), 16)
        << pad(num(curve.dq_center[i], 10), 16) << pad(num(d, 3), 12) << pad(std::to_string(curve.n_clusters[i]), 10)
        << curve.morse_index[i] << '\n';
  }
  if (curve.c.size() == 1) {
    out << "single sample: derivative columns empty, no kink claims\n";
  } else {
    out << curve.kinks.size() << " kink" << (curve.kinks.size() == 1 ? "" : "s")
        << " detected; max |m'(c) - lambda(c)|/|lambda(c)| = " << num(worst, 3) << '\n';
  }
  for (const auto& k : curve.kinks)
    out << "  kink at c = " << num(k.c, 10) << (k.at_sample ? " (at a sample)" : " (between samples)")
        << "; dq gap = " << num(k.gap, 6) << " +- " << num(k.error, 2) << '\n';
  if (crossing)
    out << "predicted crossing c_hat = " << num(crossing->c_hat_scaling, 10) << " from m(1) = " << num(crossing->m_plus_1, 8)
        << ", " << num(crossing->m_minus_1, 8) << "; branch crossing " << num(crossing->c_hat, 10)
        << ", one-sided slopes " << num(crossing->dq_left, 8) << " / " << num(crossing->dq_right, 8) << '\n';
  if (expr && expr->conclusive)
    out << "m'(c) expression check: max residual " << num(expr->max_ode_residual, 3) << ", Pohozaev multiplier "
        << num(expr->max_lambda_residual, 3) << '\n';
  out << "artifact " << path.string() << "  config " << config_hash(cfg) << '\n';
  return kPass;
}

int cmd_verify(const std::string& artifact, const std::string& expect_hash, std::ostream& out) {
  std::optional<std::string> expected;
  if (!expect_hash.empty()) expected = expect_hash;
  const VerifyResult res = verify_artifact(artifact, expected);
  out << res.kind << " artifact " << artifact << "  config " << res.hash << '\n';
  print_reports(out, res.rows);
  out << (res.reproduced ? "stored diagnostics reproduced exactly\n" : "stored diagnostics NOT reproduced\n");
  const bool ok = res.all_pass() && res.reproduced;
  out << (ok ? "PASS" : "FAIL") << '\n';
  return ok ? kPass : kIdentityFailure;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Ground states of radial NLS-type equations: solve, continue, mass curves, identity checks", "gstate"};
  app.require_subcommand(1);

  CLI::App* solve = app.add_subcommand("solve", "solve at one lambda");
  Options solve_opts(solve);
  solve_opts.add("--lambda", [](ExperimentConfig& c) -> auto& { return c.lambda; }, "frequency");
  bool no_spectrum = false;
  solve->add_flag("--no-spectrum", no_spectrum, "skip the Morse index");

  CLI::App* cont = app.add_subcommand("continue", "follow the branch in lambda");
  Options cont_opts(cont);
  cont_opts.add("--lambda-start", [](ExperimentConfig& c) -> auto& { return c.lambda_start; }, "first lambda");
  cont_opts.add("--lambda-end", [](ExperimentConfig& c) -> auto& { return c.lambda_end; }, "last lambda");
  cont_opts.add("--step", [](ExperimentConfig& c) -> auto& { return c.initial_step; }, "initial step");
  cont_opts.add("--max-nodes", [](ExperimentConfig& c) -> auto& { return c.max_nodes; }, "node budget");
  bool verify_nodes = false, save_profiles = false, no_morse = false;
  cont->add_flag("--verify", verify_nodes, "run the identity suite on every node");
  cont->add_flag("--save-profiles", save_profiles, "store u and v for every node");
  cont->add_flag("--no-morse", no_morse, "skip Morse indices");

  CLI::App* curve = app.add_subcommand("masscurve", "constrained minima m(c) on a c grid");
  Options curve_opts(curve);
  curve_opts.add("--c", [](ExperimentConfig& c) -> auto& { return c.c_grid; }, "comma-separated c values")
      ->delimiter(',');
  curve_opts.add("--seed", [](ExperimentConfig& c) -> auto& { return c.seed; }, "multistart seed");
  curve_opts.add("--multistart", [](ExperimentConfig& c) -> auto& { return c.multistart; }, "starts per c");
  curve_opts.add("--flow-tol", [](ExperimentConfig& c) -> auto& { return c.flow_tol; }, "gradient-flow tolerance");
  curve_opts.add("--polish-tol", [](ExperimentConfig& c) -> auto& { return c.polish_tol; }, "polish tolerance");
  double c_min = 0.0, c_max = 0.0;
  int c_count = 0;
  curve->add_option("--c-min", c_min, "first c of an evenly spaced grid");
  curve->add_option("--c-max", c_max, "last c of an evenly spaced grid");
  curve->add_option("--c-count", c_count, "number of c values");
  std::string c_spacing = "linear";
  curve->add_option("--c-spacing", c_spacing, "linear | log")->check(CLI::IsMember({"linear", "log"}));
  bool insert_crossing = false, curve_no_morse = false;
  curve->add_flag("--insert-crossing", insert_crossing, "add the predicted crossing to the grid (appendixA)");
  curve->add_flag("--no-morse", curve_no_morse, "skip Morse indices");

  CLI::App* verify = app.add_subcommand("verify", "rerun the identities on a stored artifact");
  std::string artifact, expect_hash;
  verify->add_option("artifact", artifact, "artifact JSON")->required();
  verify->add_option("--expect-hash", expect_hash, "refuse artifacts with another config hash");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kPass : kValidation;
  }

  try {
    if (*solve) return cmd_solve(solve_opts.config(), solve_opts.name("solution"), !no_spectrum, out, err);
    if (*cont)
      return cmd_continue(cont_opts.config(), cont_opts.name("branch"), verify_nodes, save_profiles, !no_morse, out,
                          err);
    if (*curve) {
      ExperimentConfig cfg = curve_opts.config();
      if (c_count > 0) {
        if (!(c_max > c_min) || !(c_min > 0.0)) throw ValidationError("--c-min/--c-max/--c-count need 0 < c_min < c_max");
        cfg.c_grid.clear();
        for (int i = 0; i < c_count; ++i) {
          const double t = c_count == 1 ? 0.0 : i / (c_count - 1.0);
          cfg.c_grid.push_back(c_spacing == "log" ? c_min * std::pow(c_max / c_min, t) : c_min + (c_max - c_min) * t);
        }
      }
      return cmd_masscurve(cfg, curve_opts.name("masscurve"), insert_crossing, !curve_no_morse, out, err);
    }
    if (*verify) return cmd_verify(artifact, expect_hash, out);
  } catch (const ValidationError& e) {
    err << "validation error: " << e.what() << '\n';
    return kValidation;
  } catch (const ConvergenceError& e) {
    err << "nonconvergence: " << e.what() << '\n';
    return kNonconvergence;
  } catch (const DegeneracyError& e) {
    err << "nonconvergence (degenerate linearization): " << e.what() << '\n';
    return kNonconvergence;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kOther;
  }
  return kOther;
}

}  // namespace gstate::cli
