#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "gstate/diagnostics.hpp"
#include "gstate/mass_min.hpp"
#include "gstate/solve.hpp"
#include "gstate/spectrum.hpp"

namespace gstate {

using Json = nlohmann::json;

inline constexpr int kFormatVersion = 1;

/// Everything a run depends on. Hashed (minus output_dir and jobs) into every artifact.
struct ExperimentConfig {
  PresetParams problem;
  int n = 4096;
  double outer_radius = 0.0;  // whole space only; 0 picks default_outer_radius
  double newton_tol = 1e-10;
  int max_iters = 50;
  double cond_limit = 1e12;
  double eig_tol = 1e-9;
  double lambda = -1.0;
  double lambda_start = -4.0;
  double lambda_end = -0.25;
  double initial_step = 0.05;
  int max_nodes = 5000;
  std::vector<double> c_grid;
  std::uint64_t seed = 20240611;
  int multistart = 8;
  double flow_tol = 1e-5;
  double polish_tol = 1e-9;
  std::string output_dir;
  int jobs = 1;
};

Json config_to_json(const ExperimentConfig& cfg);
ExperimentConfig config_from_json(const Json& j);

/// FNV-1a 64 of the canonical JSON of the hashed fields, as 16 hex digits.
std::string config_hash(const ExperimentConfig& cfg);

/// Validate tolerances and family parameters without computing anything.
/// Throws ValidationError.
ProblemSpec validate_config(const ExperimentConfig& cfg);

/// Fill in outer_radius from the frequency closest to the threshold when it is 0.
ExperimentConfig resolve_config(ExperimentConfig cfg, double lambda_hint);

RadialGrid make_grid(const ExperimentConfig& cfg, const ProblemSpec& spec);
NewtonOptions newton_options(const ExperimentConfig& cfg);
MinimizeOptions minimize_options(const ExperimentConfig& cfg);

/// Output directory: cfg.output_dir, else $GSTATE_OUTPUT_ROOT, else ./gstate_out.
std::filesystem::path output_root(const ExperimentConfig& cfg);

/// CSV with a header row; numbers at 17 significant digits, NaN as an empty cell.
struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<double>> columns;

  const std::vector<double>& column(const std::string& name) const;
  bool has(const std::string& name) const;
  std::size_t rows() const { return columns.empty() ? 0 : columns.front().size(); }
};

void write_csv(const std::filesystem::path& path, const Table& table);
Table read_csv(const std::filesystem::path& path);

Json report_to_json(const IdentityReport& r);
Json reports_to_json(const std::vector<IdentityReport>& reports);
Json spectrum_to_json(const SpectrumReport& s);

/// Artifacts are a JSON metadata file plus CSV payloads in the same directory.
/// Every JSON file carries format_version, kind and config_hash.
struct SolutionArtifact {
  ExperimentConfig config;
  std::string hash;
  Solution sol;
  std::optional<Vector> tangent;
  Json meta;  // the whole JSON document
};

struct BranchArtifact {
  ExperimentConfig config;
  std::string hash;
  Branch branch;  // tangents and profiles are present only when profiles were saved
  bool has_profiles = false;
  Json meta;
};

struct MassCurveArtifact {
  ExperimentConfig config;
  std::string hash;
  Table curve;
  std::vector<Solution> minimizers;  // sol.lambda is the multiplier
  Json meta;
};

std::filesystem::path write_solution_artifact(const std::filesystem::path& dir, const std::string& name,
                                              const ExperimentConfig& cfg, const Model& model, const Solution& sol,
                                              const std::optional<Vector>& tangent,
                                              const std::optional<SpectrumReport>& spectrum,
                                              const std::vector<IdentityReport>& reports);

/// Per-node profile files are written by up to `jobs` threads, one file each;
/// the node table and JSON index are written afterwards on the calling thread.
std::filesystem::path write_branch_artifact(const std::filesystem::path& dir, const std::string& name,
                                            const ExperimentConfig& cfg, const Model& model, const Branch& branch,
                                            bool save_profiles, const Json& extra, int jobs = 1);

std::filesystem::path write_masscurve_artifact(const std::filesystem::path& dir, const std::string& name,
                                               const ExperimentConfig& cfg, const Model& model,
                                               const MassCurve& curve, const Json& extra, int jobs = 1);

/// Read the kind of an artifact and check format_version. Throws ValidationError
/// on an empty or malformed file.
Json load_artifact_json(const std::filesystem::path& path);

SolutionArtifact load_solution_artifact(const std::filesystem::path& path);
BranchArtifact load_branch_artifact(const std::filesystem::path& path);
MassCurveArtifact load_masscurve_artifact(const std::filesystem::path& path);

struct VerifyRow {
  std::string item;  // "solution", "node 12", "minimizer 3", "branch"
  IdentityReport report;
};

struct VerifyResult {
  std::string kind;
  std::string hash;
  std::vector<VerifyRow> rows;
  bool reproduced = true;  // recomputed reports equal the stored ones bit for bit
  bool all_pass() const;
};

/// Reload an artifact, check its config hash (and expected_hash when given),
/// rebuild the model and rerun every applicable identity.
VerifyResult verify_artifact(const std::filesystem::path& path, const std::optional<std::string>& expected_hash = {});

}  // namespace gstate
