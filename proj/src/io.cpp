#include "gstate/io.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "gstate/parallel.hpp"

namespace gstate {

namespace fs = std::filesystem;

namespace {

void require(bool ok, const std::string& msg) {
  if (!ok) throw ValidationError(msg);
}

Json number_or_null(double x) { return std::isfinite(x) ? Json(x) : Json(nullptr); }

double number_from(const Json& j) { return j.is_null() ? std::numeric_limits<double>::quiet_NaN() : j.get<double>(); }

// shortest representation that reads back to the same double
std::string format_double(double x) {
  if (std::isnan(x)) return "";
  char buf[40];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

std::vector<double> to_std(const Vector& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

Vector to_eigen(const std::vector<double>& v) { return Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size())); }

std::string node_file(int i) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "node_%05d.csv", i);
  return buf;
}

void write_json(const fs::path& path, const Json& j) {
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot write " + path.string());
  out << j.dump(2) << '\n';
}

Json header(const std::string& kind, const ExperimentConfig& cfg) {
  Json j;
  j["format_version"] = kFormatVersion;
  j["kind"] = kind;
  j["config_hash"] = config_hash(cfg);
  j["config"] = config_to_json(cfg);
  return j;
}

Table profile_table(const Model& model, const Vector& u, const Vector* v) {
  Table t;
  t.header = {"r", "u"};
  t.columns = {to_std(model.grid().nodes()), to_std(u)};
  if (v) {
    t.header.push_back("v");
    t.columns.push_back(to_std(*v));
  }
  return t;
}

// The profile's r column must be the grid the config rebuilds.
void check_grid(const Model& model, const Table& t, const std::string& what) {
  require(t.has("r") && t.has("u"), what + ": profile lacks r or u column");
  const auto& r = t.column("r");
  const Vector& nodes = model.grid().nodes();
  require(static_cast<int>(r.size()) == nodes.size(), what + ": artifact does not match the problem grid");
  for (int i = 0; i < nodes.size(); ++i)
    require(std::abs(r[i] - nodes[i]) <= 1e-12 * model.grid().outer_radius(),
            what + ": artifact does not match the problem grid");
}

std::string kind_of(const Json& meta) { return meta.at("kind").get<std::string>(); }

template <class Artifact>
void read_header(const fs::path& path, Artifact& a, const std::string& kind) {
  a.meta = load_artifact_json(path);
  require(kind_of(a.meta) == kind, path.string() + " is a " + kind_of(a.meta) + " artifact, expected " + kind);
  a.config = config_from_json(a.meta.at("config"));
  a.hash = a.meta.at("config_hash").template get<std::string>();
}

}  // namespace

Json config_to_json(const ExperimentConfig& cfg) {
  const PresetParams& p = cfg.problem;
  Json j;
  j["problem"] = {{"id", p.id},         {"s", p.s},           {"N", p.dim},
                  {"p", p.p},           {"q", p.q},           {"k", p.k},
                  {"weight", p.weight}, {"weight_decay", p.weight_decay},
                  {"potential", p.potential}, {"potential_depth", p.potential_depth}};
  j["grid"] = {{"n", cfg.n}, {"outer_radius", cfg.outer_radius}};
  j["solver"] = {{"newton_tol", cfg.newton_tol},
                 {"max_iters", cfg.max_iters},
                 {"cond_limit", cfg.cond_limit},
                 {"eig_tol", cfg.eig_tol}};
  j["sweep"] = {{"lambda", cfg.lambda},         {"lambda_start", cfg.lambda_start}, {"lambda_end", cfg.lambda_end},
                {"initial_step", cfg.initial_step}, {"max_nodes", cfg.max_nodes},   {"c_grid", cfg.c_grid}};
  j["minimize"] = {{"seed", cfg.seed},
                   {"multistart", cfg.multistart},
                   {"flow_tol", cfg.flow_tol},
                   {"polish_tol", cfg.polish_tol}};
  j["output_dir"] = cfg.output_dir;
  j["jobs"] = cfg.jobs;
  return j;
}

ExperimentConfig config_from_json(const Json& j) {
  require(j.is_object(), "config must be a JSON object");
  ExperimentConfig cfg;
  try {
    if (j.contains("problem")) {
      const Json& p = j.at("problem");
      PresetParams& d = cfg.problem;
      d.id = p.value("id", d.id);
      d.s = p.value("s", d.s);
      d.dim = p.value("N", d.dim);
      d.p = p.value("p", d.p);
      d.q = p.value("q", d.q);
      d.k = p.value("k", d.k);
      d.weight = p.value("weight", d.weight);
      d.weight_decay = p.value("weight_decay", d.weight_decay);
      d.potential = p.value("potential", d.potential);
      d.potential_depth = p.value("potential_depth", d.potential_depth);
    }
    if (j.contains("grid")) {
      cfg.n = j["grid"].value("n", cfg.n);
      cfg.outer_radius = j["grid"].value("outer_radius", cfg.outer_radius);
    }
    if (j.contains("solver")) {
      const Json& s = j.at("solver");
      cfg.newton_tol = s.value("newton_tol", cfg.newton_tol);
      cfg.max_iters = s.value("max_iters", cfg.max_iters);
      cfg.cond_limit = s.value("cond_limit", cfg.cond_limit);
      cfg.eig_tol = s.value("eig_tol", cfg.eig_tol);
    }
    if (j.contains("sweep")) {
      const Json& s = j.at("sweep");
      cfg.lambda = s.value("lambda", cfg.lambda);
      cfg.lambda_start = s.value("lambda_start", cfg.lambda_start);
      cfg.lambda_end = s.value("lambda_end", cfg.lambda_end);
      cfg.initial_step = s.value("initial_step", cfg.initial_step);
      cfg.max_nodes = s.value("max_nodes", cfg.max_nodes);
      cfg.c_grid = s.value("c_grid", cfg.c_grid);
    }
    if (j.contains("minimize")) {
      const Json& m = j.at("minimize");
      cfg.seed = m.value("seed", cfg.seed);
      cfg.multistart = m.value("multistart", cfg.multistart);
      cfg.flow_tol = m.value("flow_tol", cfg.flow_tol);
      cfg.polish_tol = m.value("polish_tol", cfg.polish_tol);
    }
    cfg.output_dir = j.value("output_dir", cfg.output_dir);
    cfg.jobs = j.value("jobs", cfg.jobs);
  } catch (const Json::exception& e) {
    throw ValidationError(std::string("malformed config: ") + e.what());
  }
  return cfg;
}

std::string config_hash(const ExperimentConfig& cfg) {
  Json j = config_to_json(cfg);
  j.erase("output_dir");
  j.erase("jobs");
  j["format_version"] = kFormatVersion;
  const std::string text = j.dump();
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

ProblemSpec validate_config(const ExperimentConfig& cfg) {
  require(cfg.n >= 8, "grid needs at least 8 cells, got n = " + std::to_string(cfg.n));
  require(cfg.outer_radius >= 0.0 && std::isfinite(cfg.outer_radius), "outer radius must be >= 0 (0 = default)");
  require(cfg.newton_tol > 0.0 && cfg.cond_limit > 0.0 && cfg.eig_tol > 0.0, "solver tolerances must be positive");
  require(cfg.flow_tol > 0.0 && cfg.polish_tol > 0.0, "minimizer tolerances must be positive");
  require(cfg.max_iters > 0 && cfg.max_nodes > 0, "iteration budgets must be positive");
  require(cfg.initial_step > 0.0, "initial step must be positive");
  require(cfg.multistart >= 1, "multistart budget must be at least 1");
  require(cfg.jobs >= 1, "--jobs must be at least 1");
  for (std::size_t i = 0; i < cfg.c_grid.size(); ++i) {
    require(cfg.c_grid[i] > 0.0 && std::isfinite(cfg.c_grid[i]), "c grid entries must be positive");
    if (i > 0) require(cfg.c_grid[i] > cfg.c_grid[i - 1], "c grid must be strictly increasing");
  }
  return make_problem(cfg.problem);
}

ExperimentConfig resolve_config(ExperimentConfig cfg, double lambda_hint) {
  const ProblemSpec spec = validate_config(cfg);
  if (spec.domain == DomainKind::UnitBall)
    cfg.outer_radius = 1.0;
  else if (cfg.outer_radius == 0.0)
    cfg.outer_radius = default_outer_radius(lambda_hint, spec.s);
  return cfg;
}

RadialGrid make_grid(const ExperimentConfig& cfg, const ProblemSpec& spec) {
  if (spec.domain == DomainKind::UnitBall) return RadialGrid::unit_ball(spec.dim, cfg.n);
  require(cfg.outer_radius > 0.0, "outer radius not resolved");
  return RadialGrid::whole_space(spec.dim, cfg.n, cfg.outer_radius);
}

NewtonOptions newton_options(const ExperimentConfig& cfg) {
  NewtonOptions o;
  o.tol = cfg.newton_tol;
  o.max_iters = cfg.max_iters;
  o.cond_limit = cfg.cond_limit;
  return o;
}

MinimizeOptions minimize_options(const ExperimentConfig& cfg) {
  MinimizeOptions o;
  o.multistart = cfg.multistart;
  o.seed = cfg.seed;
  o.flow_tol = cfg.flow_tol;
  o.polish_tol = cfg.polish_tol;
  o.jobs = cfg.jobs;
  return o;
}

fs::path output_root(const ExperimentConfig& cfg) {
  if (!cfg.output_dir.empty()) return cfg.output_dir;
  if (const char* env = std::getenv("GSTATE_OUTPUT_ROOT"); env && *env) return env;
  return "gstate_out";
}

const std::vector<double>& Table::column(const std::string& name) const {
  for (std::size_t i = 0; i < header.size(); ++i)
    if (header[i] == name) return columns[i];
  throw ValidationError("missing column '" + name + "'");
}

bool Table::has(const std::string& name) const { return std::find(header.begin(), header.end(), name) != header.end(); }

void write_csv(const fs::path& path, const Table& table) {
  require(table.header.size() == table.columns.size(), "table header and columns differ in count");
  for (const auto& c : table.columns) require(c.size() == table.rows(), "table columns differ in length");
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot write " + path.string());
  for (std::size_t i = 0; i < table.header.size(); ++i) out << (i ? "," : "") << table.header[i];
  out << '\n';
  for (std::size_t r = 0; r < table.rows(); ++r) {
    for (std::size_t i = 0; i < table.columns.size(); ++i) out << (i ? "," : "") << format_double(table.columns[i][r]);
    out << '\n';
  }
}

Table read_csv(const fs::path& path) {
  std::ifstream in(path);
  require(static_cast<bool>(in), "cannot read " + path.string());
  Table t;
  std::string line;
  require(static_cast<bool>(std::getline(in, line)) && !line.empty(), path.string() + " is empty");
  {
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) t.header.push_back(cell);
  }
  t.columns.assign(t.header.size(), {});
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::size_t col = 0, start = 0;
    while (true) {
      const std::size_t end = line.find(',', start);
      const std::string cell = line.substr(start, end == std::string::npos ? std::string::npos : end - start);
      require(col < t.header.size(), path.string() + ": too many cells in a row");
      if (cell.empty()) {
        t.columns[col].push_back(std::numeric_limits<double>::quiet_NaN());
      } else {
        double x = 0.0;
        const auto res = std::from_chars(cell.data(), cell.data() + cell.size(), x);
        require(res.ec == std::errc() && res.ptr == cell.data() + cell.size(),
                path.string() + ": not a number '" + cell + "'");
        t.columns[col].push_back(x);
      }
      ++col;
      if (end == std::string::npos) break;
      start = end + 1;
    }
    require(col == t.header.size(), path.string() + ": short row");
  }
  return t;
}

Json report_to_json(const IdentityReport& r) {
  return {{"id", r.id},
          {"lhs", number_or_null(r.lhs)},
          {"rhs", number_or_null(r.rhs)},
          {"rel_residual", number_or_null(r.rel_residual)},
          {"tol", r.tol},
          {"pass", r.pass},
          {"inconclusive", r.inconclusive},
          {"equality", r.equality},
          {"ratio", number_or_null(r.ratio)},
          {"note", r.note}};
}

Json reports_to_json(const std::vector<IdentityReport>& reports) {
  Json a = Json::array();
  for (const auto& r : reports) a.push_back(report_to_json(r));
  return a;
}

Json spectrum_to_json(const SpectrumReport& s) {
  return {{"morse_index", s.morse_index},
          {"smallest_abs_eig", s.smallest_abs_eig},
          {"lowest_eigs", to_std(s.lowest_eigs)},
          {"nondegenerate", s.nondegenerate},
          {"tolerance", s.tolerance},
          {"note", "radial sector only"}};
}

fs::path write_solution_artifact(const fs::path& dir, const std::string& name, const ExperimentConfig& cfg,
                                 const Model& model, const Solution& sol, const std::optional<Vector>& tangent,
                                 const std::optional<SpectrumReport>& spectrum,
                                 const std::vector<IdentityReport>& reports) {
  fs::create_directories(dir);
  const std::string profile = name + "_profile.csv";
  write_csv(dir / profile, profile_table(model, sol.u, tangent ? &*tangent : nullptr));
  Json j = header("solution", cfg);
  j["lambda"] = sol.lambda;
  j["mass"] = sol.mass;
  j["energy"] = sol.energy;
  j["residual_norm"] = number_or_null(sol.residual_norm);
  j["converged"] = sol.converged;
  j["iterations"] = sol.iterations;
  j["u_at_origin"] = model.grid().value_at_origin(sol.u);
  j["sign_changes"] = sign_changes(sol.u);
  j["profile"] = profile;
  j["spectrum"] = spectrum ? spectrum_to_json(*spectrum) : Json(nullptr);
  Json stored = Json::array();
  for (const auto& r : reports) stored.push_back({{"item", "solution"}, {"report", report_to_json(r)}});
  j["reports"] = stored;
  const fs::path path = dir / (name + ".json");
  write_json(path, j);
  return path;
}

fs::path write_branch_artifact(const fs::path& dir, const std::string& name, const ExperimentConfig& cfg,
                               const Model& model, const Branch& branch, bool save_profiles, const Json& extra,
                               int jobs) {
  fs::create_directories(dir);
  const int count = static_cast<int>(branch.nodes.size());
  const std::string profile_dir = name + "_profiles";
  if (save_profiles) {
    fs::create_directories(dir / profile_dir);
    detail::parallel_for(count, jobs, [&](int i) {
      const BranchNode& node = branch.nodes[i];
      write_csv(dir / profile_dir / node_file(i),
                profile_table(model, node.sol.u, node.tangent.size() ? &node.tangent : nullptr));
    });
  }
  Table t;
  t.header = {"lambda", "mass", "energy", "mass_derivative", "residual", "tangent_at_origin",
              "sign_changes", "morse_index", "converged", "iterations"};
  t.columns.assign(t.header.size(), {});
  for (const auto& node : branch.nodes) {
    const double row[] = {node.sol.lambda,       node.sol.mass,          node.sol.energy,
                          node.mass_derivative,  node.sol.residual_norm, node.tangent_at_origin,
                          double(node.sign_changes), double(node.morse_index), node.sol.converged ? 1.0 : 0.0,
                          double(node.sol.iterations)};
    for (std::size_t i = 0; i < t.columns.size(); ++i) t.columns[i].push_back(row[i]);
  }
  const std::string nodes = name + "_nodes.csv";
  write_csv(dir / nodes, t);
  Json j = header("branch", cfg);
  j["lambda_start"] = branch.lambda_start;
  j["lambda_end"] = branch.lambda_end;
  j["truncated"] = branch.truncated;
  j["reason"] = branch.reason;
  j["node_count"] = count;
  j["nodes"] = nodes;
  j["profiles"] = save_profiles ? Json(profile_dir) : Json(nullptr);
  for (const auto& [key, value] : extra.items()) j[key] = value;
  const fs::path path = dir / (name + ".json");
  write_json(path, j);
  return path;
}

fs::path write_masscurve_artifact(const fs::path& dir, const std::string& name, const ExperimentConfig& cfg,
                                  const Model& model, const MassCurve& curve, const Json& extra, int jobs) {
  fs::create_directories(dir);
  Table t;
  t.header = {"c", "m", "lambda", "dq_left", "dq_right", "n_clusters", "morse_index",
              "dq_center", "dq_left_err", "dq_right_err"};
  t.columns.assign(t.header.size(), {});
  for (std::size_t i = 0; i < curve.c.size(); ++i) {
    const double row[] = {curve.c[i],          curve.m[i],           curve.lambda[i],         curve.dq_left[i],
                          curve.dq_right[i],   double(curve.n_clusters[i]), double(curve.morse_index[i]),
                          curve.dq_center[i],  curve.dq_left_err[i], curve.dq_right_err[i]};
    for (std::size_t k = 0; k < t.columns.size(); ++k) t.columns[k].push_back(row[k]);
  }
  const std::string csv = name + ".csv";
  write_csv(dir / csv, t);

  const std::string min_dir = name + "_minimizers";
  fs::create_directories(dir / min_dir);
  const int count = static_cast<int>(curve.minimizers.size());
  detail::parallel_for(count, jobs, [&](int i) {
    write_csv(dir / min_dir / node_file(i), profile_table(model, curve.minimizers[i].u, nullptr));
  });
  Json mins = Json::array();
  for (int i = 0; i < count; ++i) {
    const MinimizerResult& r = curve.minimizers[i];
    mins.push_back({{"c", r.c},
                    {"m", r.m},
                    {"lambda", r.lambda},
                    {"residual", r.residual},
                    {"converged", r.converged},
                    {"distinct_minima", r.distinct_minima.size()},
                    {"morse_index", r.morse_index},
                    {"profile", min_dir + "/" + node_file(i)}});
  }
  Json kinks = Json::array();
  for (const auto& k : curve.kinks)
    kinks.push_back({{"c", k.c}, {"lower", k.lower}, {"upper", k.upper}, {"at_sample", k.at_sample},
                     {"gap", k.gap}, {"error", k.error}});

  Json j = header("masscurve", cfg);
  j["curve"] = csv;
  j["probe_fraction"] = curve.probe_fraction;
  j["kinks"] = kinks;
  j["minimizers"] = mins;
  for (const auto& [key, value] : extra.items()) j[key] = value;
  const fs::path path = dir / (name + ".json");
  write_json(path, j);
  return path;
}

Json load_artifact_json(const fs::path& path) {
  std::ifstream in(path);
  require(static_cast<bool>(in), "cannot read artifact " + path.string());
  const std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  require(text.find_first_not_of(" \t\r\n") != std::string::npos, "empty artifact " + path.string());
  Json j;
  try {
    j = Json::parse(text);
  } catch (const Json::exception& e) {
    throw ValidationError("malformed artifact " + path.string() + ": " + e.what());
  }
  require(j.is_object() && j.contains("format_version") && j.contains("kind") && j.contains("config_hash") &&
              j.contains("config"),
          "artifact " + path.string() + " lacks format_version, kind, config_hash or config");
  require(j["format_version"] == kFormatVersion,
          "unsupported format_version " + j["format_version"].dump() + " in " + path.string());
  return j;
}

SolutionArtifact load_solution_artifact(const fs::path& path) {
  SolutionArtifact a;
  read_header(path, a, "solution");
  const Table t = read_csv(path.parent_path() / a.meta.at("profile").get<std::string>());
  a.sol.lambda = a.meta.at("lambda").get<double>();
  a.sol.u = to_eigen(t.column("u"));
  a.sol.mass = a.meta.at("mass").get<double>();
  a.sol.energy = a.meta.at("energy").get<double>();
  a.sol.residual_norm = number_from(a.meta.at("residual_norm"));
  a.sol.converged = a.meta.at("converged").get<bool>();
  a.sol.iterations = a.meta.at("iterations").get<int>();
  if (t.has("v")) a.tangent = to_eigen(t.column("v"));
  return a;
}

BranchArtifact load_branch_artifact(const fs::path& path) {
  BranchArtifact a;
  read_header(path, a, "branch");
  const fs::path dir = path.parent_path();
  const Table t = read_csv(dir / a.meta.at("nodes").get<std::string>());
  a.branch.lambda_start = a.meta.at("lambda_start").get<double>();
  a.branch.lambda_end = a.meta.at("lambda_end").get<double>();
  a.branch.truncated = a.meta.at("truncated").get<bool>();
  a.branch.reason = a.meta.at("reason").get<std::string>();
  a.has_profiles = !a.meta.at("profiles").is_null();
  for (std::size_t i = 0; i < t.rows(); ++i) {
    BranchNode node;
    node.sol.lambda = t.column("lambda")[i];
    node.sol.mass = t.column("mass")[i];
    node.sol.energy = t.column("energy")[i];
    node.mass_derivative = t.column("mass_derivative")[i];
    node.sol.residual_norm = t.column("residual")[i];
    node.tangent_at_origin = t.column("tangent_at_origin")[i];
    node.sign_changes = static_cast<int>(t.column("sign_changes")[i]);
    node.morse_index = static_cast<int>(t.column("morse_index")[i]);
    node.sol.converged = t.column("converged")[i] != 0.0;
    node.sol.iterations = static_cast<int>(t.column("iterations")[i]);
    if (a.has_profiles) {
      const Table p = read_csv(dir / a.meta["profiles"].get<std::string>() / node_file(static_cast<int>(i)));
      node.sol.u = to_eigen(p.column("u"));
      if (p.has("v")) node.tangent = to_eigen(p.column("v"));
    }
    a.branch.nodes.push_back(std::move(node));
  }
  return a;
}

MassCurveArtifact load_masscurve_artifact(const fs::path& path) {
  MassCurveArtifact a;
  read_header(path, a, "masscurve");
  const fs::path dir = path.parent_path();
  a.curve = read_csv(dir / a.meta.at("curve").get<std::string>());
  for (const auto& m : a.meta.at("minimizers")) {
    Solution sol;
    sol.lambda = m.at("lambda").get<double>();
    sol.u = to_eigen(read_csv(dir / m.at("profile").get<std::string>()).column("u"));
    sol.converged = m.at("converged").get<bool>();
    sol.residual_norm = m.at("residual").get<double>();
    a.minimizers.push_back(std::move(sol));
  }
  return a;
}

bool VerifyResult::all_pass() const {
  for (const auto& row : rows)
    if (!row.report.pass && !row.report.inconclusive) return false;
  return true;
}

namespace {

bool same_number(const Json& stored, double x) {
  if (stored.is_null()) return !std::isfinite(x);
  return stored.get<double>() == x;
}

bool reproduces(const Json& stored, const std::vector<VerifyRow>& rows) {
  if (!stored.is_array()) return true;
  for (const auto& s : stored) {
    const std::string item = s.at("item").get<std::string>();
    const Json& rep = s.at("report");
    bool found = false;
    for (const auto& row : rows) {
      if (row.item != item || row.report.id != rep.at("id").get<std::string>()) continue;
      found = true;
      if (!same_number(rep.at("lhs"), row.report.lhs) || !same_number(rep.at("rhs"), row.report.rhs)) return false;
    }
    if (!found) return false;
  }
  return true;
}

}  // namespace

VerifyResult verify_artifact(const fs::path& path, const std::optional<std::string>& expected_hash) {
  const Json meta = load_artifact_json(path);
  VerifyResult out;
  out.kind = kind_of(meta);
  out.hash = meta.at("config_hash").get<std::string>();
  const ExperimentConfig cfg = config_from_json(meta.at("config"));
  require(config_hash(cfg) == out.hash, "config hash mismatch: artifact records " + out.hash + ", its config hashes to " +
                                            config_hash(cfg));
  if (expected_hash) require(*expected_hash == out.hash, "config hash mismatch: expected " + *expected_hash +
                                                             ", artifact has " + out.hash);
  const ProblemSpec spec = validate_config(cfg);
  const Model model(spec, make_grid(cfg, spec));
  const fs::path dir = path.parent_path();

  auto add = [&](const std::string& item, const std::vector<IdentityReport>& reps) {
    for (const auto& r : reps) out.rows.push_back({item, r});
  };

  if (out.kind == "solution") {
    const SolutionArtifact a = load_solution_artifact(path);
    check_grid(model, read_csv(dir / meta.at("profile").get<std::string>()), "solution");
    add("solution", identity_suite(model, a.sol, a.tangent));
  } else if (out.kind == "branch") {
    const BranchArtifact a = load_branch_artifact(path);
    require(a.has_profiles, "branch artifact was saved without profiles; nothing to verify");
    require(!a.branch.nodes.empty(), "branch artifact has no nodes");
    check_grid(model, read_csv(dir / meta["profiles"].get<std::string>() / node_file(0)), "branch");
    bool tangents = true;
    for (std::size_t i = 0; i < a.branch.nodes.size(); ++i) {
      const BranchNode& node = a.branch.nodes[i];
      std::optional<Vector> v;
      if (node.tangent.size()) v = node.tangent;
      tangents = tangents && v.has_value();
      add("node " + std::to_string(i), identity_suite(model, node.sol, v));
    }
    if (tangents && spec.bounded_below_on_spheres) add("branch", {tangent_sign_pattern(model, a.branch)});
  } else if (out.kind == "masscurve") {
    const MassCurveArtifact a = load_masscurve_artifact(path);
    MassCurve curve;
    curve.c = a.curve.column("c");
    curve.m = a.curve.column("m");
    curve.lambda = a.curve.column("lambda");
    require(!a.minimizers.empty(), "mass-curve artifact has no minimizers");
    check_grid(model, read_csv(dir / meta.at("minimizers")[0].at("profile").get<std::string>()), "masscurve");
    for (std::size_t i = 0; i < a.minimizers.size(); ++i) {
      std::vector<IdentityReport> reps = pohozaev_residual(model, a.minimizers[i]);
      reps.push_back(nehari_bound_check(model, a.minimizers[i], curve));
      add("minimizer " + std::to_string(i), reps);
    }
  } else {
    throw ValidationError("unknown artifact kind '" + out.kind + "'");
  }
  out.reproduced = reproduces(meta.value("reports", Json()), out.rows);
  return out;
}

}  // namespace gstate
