#pragma once

#include <optional>
#include <string>
#include <vector>

#include "gstate/problem.hpp"

namespace gstate {

enum class Verdict { Pass, Fail, Inconclusive };
std::string to_string(Verdict v);

struct Witness {
  double r = 0.0;
  double t = 0.0;
  double violation = 0.0;  // relative amount by which the inequality fails
};

struct ConditionResult {
  std::string name;  // h, V, f1, f2, f2', f3, H1, H2, H3, H3', H4
  Verdict verdict = Verdict::Inconclusive;
  std::string detail;
  std::optional<Witness> witness;  // always set when verdict == Fail
};

struct HypothesisReport {
  std::vector<ConditionResult> conditions;
  double theta_estimate = 0.0;

  const ConditionResult& get(const std::string& name) const;
};

/// Log-spaced (r, t) lattice on which the pointwise conditions are sampled.
struct SampleBox {
  double r_min = 1e-3;
  double r_max = 1e3;
  double t_min = 1e-3;
  double t_max = 1e3;
  int nr = 64;
  int nt = 64;
};

/// Sampled check of the structural hypotheses on V, h and f. A pass means "no
/// violation found on the lattice", never a proof.
HypothesisReport check_hypotheses(const ProblemSpec& spec, const SampleBox& box = {});

/// lim_{r -> inf} r h'(r)/h(r), estimated at r = 1e6 with one Richardson step.
std::optional<double> estimate_theta(const RadialFunction& h);

}  // namespace gstate
