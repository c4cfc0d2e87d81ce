#pragma once

#include <functional>
#include <optional>
#include <string>

#include "gstate/grid.hpp"
#include "gstate/operators.hpp"

namespace gstate {

enum class Family { FractionalPower, PotentialGeneral, BallInhomogeneous, Counterexample };

std::string to_string(Family family);

/// Radial profile with its derivative.
struct RadialFunction {
  std::function<double(double)> value;
  std::function<double(double)> derivative;  // may be empty
};

/// f(r, t) together with the partial derivatives and primitives the identities need.
/// Empty handles mean "not available"; checkers then report inconclusive.
struct Nonlinearity {
  std::function<double(double, double)> f;
  std::function<double(double, double)> f_t;
  std::function<double(double, double)> f_r;
  std::function<double(double, double)> F;
  std::function<double(double, double)> F_r;
  bool odd = true;
};

/// Parameters of a named preset. Only the fields the preset uses are read.
struct PresetParams {
  std::string id = "frac_power";  // frac_power | nls_potential | ball_hardy | appendixA | cubic_quintic
  double s = 1.0;
  int dim = 1;
  double p = 4.0;
  double q = 3.0;
  double k = 1.0;
  std::string weight = "one";  // one | decay: h = (1 + r^2)^(-weight_decay)
  double weight_decay = 0.25;
  std::string potential = "none";  // none | well: V = -potential_depth / (1 + r^2)
  double potential_depth = 1.0;
};

struct ProblemSpec {
  PresetParams params;
  Family family = Family::FractionalPower;
  double s = 1.0;
  int dim = 1;
  DomainKind domain = DomainKind::WholeSpace;
  double p = 4.0;
  double q = 0.0;  // second exponent (Appendix A); 0 when unused
  double k = 0.0;  // weight exponent (ball family)
  RadialFunction weight;                    // h(r)
  std::optional<RadialFunction> potential;  // V(r); empty means V = 0
  Nonlinearity nonlinearity;
  bool pure_power = false;  // f(r, t) = h(r) |t|^{p-2} t
  double theta = 0.0;       // lim r h'(r)/h(r)
  bool bounded_below_on_spheres = true;
};

/// Build and validate a preset. Throws ValidationError for parameters outside the
/// family's admissible range.
ProblemSpec make_problem(const PresetParams& params);

ProblemSpec frac_power(double s, int dim, double p, const std::string& weight = "one", double decay = 0.25);
ProblemSpec nls_potential(int dim, double p, const std::string& potential = "none", double depth = 1.0);
ProblemSpec ball_hardy(int dim, double k, double p);
ProblemSpec appendix_a(double s, int dim, double p, double q);
ProblemSpec cubic_quintic(int dim);

/// A problem discretized on a grid: kinetic operator plus sampled V, h, h'.
class Model {
 public:
  Model(ProblemSpec spec, RadialGrid grid);

  const ProblemSpec& spec() const { return spec_; }
  const RadialGrid& grid() const { return grid_; }
  const DiscreteOperator& kinetic() const { return kinetic_; }
  const Vector& potential() const { return v_; }
  const Vector& potential_slope() const { return dv_; }  // V'(r)
  const Vector& weight() const { return h_; }
  const Vector& weight_slope() const { return dh_; }  // h'(r)
  bool has_potential() const { return spec_.potential.has_value(); }

  Vector f(const Vector& u) const;
  Vector f_t(const Vector& u) const;
  Vector f_r(const Vector& u) const;
  Vector F(const Vector& u) const;
  Vector F_r(const Vector& u) const;

  /// int |(-Delta)^{s/2} u|^2 = <Au, u>.
  double kinetic_energy(const Vector& u) const;
  /// Bottom of the spectrum of the linear part A + V (0 is the threshold for whole space).
  double linear_threshold() const;
  /// Scaled symmetric matrix of A + V + diag(shift).
  SymMatrix linear_part(const Vector& shift) const;

 private:
  ProblemSpec spec_;
  RadialGrid grid_;
  DiscreteOperator kinetic_;
  Vector v_, dv_, h_, dh_;
  double threshold_ = 0.0;
};

void check_finite(const Vector& u);

/// E(u) = 1/2 <Au, u> + 1/2 int V u^2 - int F(|x|, u).
double eval_energy(const Model& model, const Vector& u);
/// Q(u) = 1/2 int u^2.
double eval_mass(const RadialGrid& grid, const Vector& u);
/// Phi_lambda(u) = E(u) - lambda Q(u).
double eval_action(const Model& model, const Vector& u, double lambda);
/// Gradient of Phi_lambda in the weighted inner product: Au + Vu - lambda u - f(|x|, u).
Vector eval_action_gradient(const Model& model, const Vector& u, double lambda);

}  // namespace gstate
