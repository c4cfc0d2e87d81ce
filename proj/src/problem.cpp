#include "gstate/problem.hpp"

#include <cmath>
#include <limits>
#include <sstream>

namespace gstate {

namespace {

std::string fmt(double x) {
  std::ostringstream os;
  os << x;
  return os.str();
}

double signed_power(double t, double e) { return std::copysign(std::pow(std::abs(t), e), t); }

RadialFunction constant_weight(double value) {
  return {[value](double) { return value; }, [](double) { return 0.0; }};
}

RadialFunction decaying_weight(double a) {
  return {[a](double r) { return std::pow(1.0 + r * r, -a); },
          [a](double r) { return -2.0 * a * r * std::pow(1.0 + r * r, -a - 1.0); }};
}

// f = h(r) |t|^{p-2} t with all partials and primitives.
Nonlinearity weighted_power(RadialFunction h, double p) {
  Nonlinearity n;
  n.f = [h, p](double r, double t) { return h.value(r) * signed_power(t, p - 1.0); };
  n.f_t = [h, p](double r, double t) { return (p - 1.0) * h.value(r) * std::pow(std::abs(t), p - 2.0); };
  n.f_r = [h, p](double r, double t) { return h.derivative(r) * signed_power(t, p - 1.0); };
  n.F = [h, p](double r, double t) { return h.value(r) * std::pow(std::abs(t), p) / p; };
  n.F_r = [h, p](double r, double t) { return h.derivative(r) * std::pow(std::abs(t), p) / p; };
  n.odd = true;
  return n;
}

void require(bool ok, const std::string& message) {
  if (!ok) throw ValidationError(message);
}

void require_whole_space_order(double s, int dim) {
  require(s > 0.0 && s <= 1.0, "operator order s must lie in (0, 1], got " + fmt(s));
  require(dim >= 1, "dimension must be >= 1");
  require(s == 1.0 || dim == 1, "fractional order s < 1 is only implemented for N = 1");
}

}  // namespace

std::string to_string(Family family) {
  switch (family) {
    case Family::FractionalPower: return "fractional_power";
    case Family::PotentialGeneral: return "potential_general_f";
    case Family::BallInhomogeneous: return "ball_inhomogeneous";
    case Family::Counterexample: return "custom_counterexample";
  }
  return "unknown";
}

ProblemSpec frac_power(double s, int dim, double p, const std::string& weight, double decay) {
  PresetParams params;
  params.id = "frac_power";
  params.s = s;
  params.dim = dim;
  params.p = p;
  params.weight = weight;
  params.weight_decay = decay;
  return make_problem(params);
}

ProblemSpec nls_potential(int dim, double p, const std::string& potential, double depth) {
  PresetParams params;
  params.id = "nls_potential";
  params.dim = dim;
  params.p = p;
  params.potential = potential;
  params.potential_depth = depth;
  return make_problem(params);
}

ProblemSpec ball_hardy(int dim, double k, double p) {
  PresetParams params;
  params.id = "ball_hardy";
  params.dim = dim;
  params.k = k;
  params.p = p;
  return make_problem(params);
}

ProblemSpec appendix_a(double s, int dim, double p, double q) {
  PresetParams params;
  params.id = "appendixA";
  params.s = s;
  params.dim = dim;
  params.p = p;
  params.q = q;
  return make_problem(params);
}

ProblemSpec cubic_quintic(int dim) {
  PresetParams params;
  params.id = "cubic_quintic";
  params.dim = dim;
  params.p = 4.0;
  params.q = 6.0;
  return make_problem(params);
}

ProblemSpec make_problem(const PresetParams& params) {
  ProblemSpec spec;
  spec.params = params;
  spec.dim = params.dim;
  const int dim = params.dim;

  if (params.id == "frac_power") {
    require_whole_space_order(params.s, dim);
    spec.family = Family::FractionalPower;
    spec.s = params.s;
    spec.p = params.p;
    if (params.weight == "one") {
      spec.weight = constant_weight(1.0);
      spec.theta = 0.0;
    } else if (params.weight == "decay") {
      require(params.weight_decay > 0.0, "weight decay exponent must be positive");
      spec.weight = decaying_weight(params.weight_decay);
      spec.theta = -2.0 * params.weight_decay;
    } else {
      throw ValidationError("unknown weight '" + params.weight + "' (expected one | decay)");
    }
    const double upper = 2.0 + (2.0 * spec.theta + 4.0 * spec.s) / dim;
    require(params.p > 2.0 && params.p < upper,
            "frac_power requires 2 < p < 2 + (2 theta + 4 s)/N = " + fmt(upper) + ", got p = " + fmt(params.p));
    spec.nonlinearity = weighted_power(spec.weight, spec.p);
    spec.pure_power = true;
    spec.bounded_below_on_spheres = true;
  } else if (params.id == "nls_potential") {
    require(dim >= 1, "dimension must be >= 1");
    spec.family = Family::PotentialGeneral;
    spec.p = params.p;
    require(params.p > 2.0, "nls_potential requires p > 2, got p = " + fmt(params.p));
    if (dim >= 3) {
      const double critical = 2.0 * dim / (dim - 2.0);
      require(params.p < critical, "nls_potential requires p < 2N/(N-2) = " + fmt(critical));
    }
    spec.weight = constant_weight(1.0);
    if (params.potential == "well") {
      require(params.potential_depth > 0.0, "potential depth must be positive");
      const double a = params.potential_depth;
      spec.potential = RadialFunction{[a](double r) { return -a / (1.0 + r * r); },
                                      [a](double r) { return 2.0 * a * r / ((1.0 + r * r) * (1.0 + r * r)); }};
    } else if (params.potential != "none") {
      throw ValidationError("unknown potential '" + params.potential + "' (expected none | well)");
    }
    spec.nonlinearity = weighted_power(spec.weight, spec.p);
    spec.pure_power = true;
    spec.bounded_below_on_spheres = params.p < 2.0 + 4.0 / dim;
  } else if (params.id == "ball_hardy") {
    require(dim >= 3, "ball_hardy requires N >= 3");
    require(params.k > 0.0 && params.k < 2.0, "ball_hardy requires 0 < k < 2, got k = " + fmt(params.k));
    const double upper = 2.0 + 2.0 * (2.0 - params.k) / dim;
    require(params.p > 2.0 && params.p < upper,
            "ball_hardy requires 2 < p < 2 + 2(2-k)/N = " + fmt(upper) + ", got p = " + fmt(params.p));
    spec.family = Family::BallInhomogeneous;
    spec.domain = DomainKind::UnitBall;
    spec.p = params.p;
    spec.k = params.k;
    const double k = params.k;
    spec.weight = RadialFunction{[k](double r) { return std::pow(r, -k); },
                                 [k](double r) { return -k * std::pow(r, -k - 1.0); }};
    spec.theta = -k;
    spec.nonlinearity = weighted_power(spec.weight, spec.p);
    spec.pure_power = true;
    spec.bounded_below_on_spheres = true;
  } else if (params.id == "appendixA") {
    require_whole_space_order(params.s, dim);
    const double upper = 2.0 + 4.0 * params.s / dim;
    require(params.p != params.q, "appendixA requires p != q");
    require(params.p > 2.0 && params.p < upper && params.q > 2.0 && params.q < upper,
            "appendixA requires 2 < p, q < 2 + 4s/N = " + fmt(upper));
    spec.family = Family::Counterexample;
    spec.s = params.s;
    spec.p = params.p;
    spec.q = params.q;
    spec.weight = constant_weight(1.0);
    const double p = params.p, q = params.q;
    // F(t) = t^p for t >= 0 and |t|^q for t < 0.
    Nonlinearity n;
    n.f = [p, q](double, double t) { return t >= 0.0 ? p * std::pow(t, p - 1.0) : -q * std::pow(-t, q - 1.0); };
    n.f_t = [p, q](double, double t) {
      return t >= 0.0 ? p * (p - 1.0) * std::pow(t, p - 2.0) : q * (q - 1.0) * std::pow(-t, q - 2.0);
    };
    n.f_r = [](double, double) { return 0.0; };
    n.F = [p, q](double, double t) { return t >= 0.0 ? std::pow(t, p) : std::pow(-t, q); };
    n.F_r = [](double, double) { return 0.0; };
    n.odd = false;
    spec.nonlinearity = n;
    spec.bounded_below_on_spheres = true;
  } else if (params.id == "cubic_quintic") {
    require(dim >= 1 && dim <= 3, "cubic_quintic requires 1 <= N <= 3");
    spec.family = Family::PotentialGeneral;
    spec.p = 4.0;
    spec.q = 6.0;
    spec.weight = constant_weight(1.0);
    Nonlinearity n;
    n.f = [](double, double t) { return t * t * t - t * t * t * t * t; };
    n.f_t = [](double, double t) { return 3.0 * t * t - 5.0 * t * t * t * t; };
    n.f_r = [](double, double) { return 0.0; };
    n.F = [](double, double t) { return std::pow(t, 4) / 4.0 - std::pow(t, 6) / 6.0; };
    n.F_r = [](double, double) { return 0.0; };
    n.odd = true;
    spec.nonlinearity = n;
    spec.bounded_below_on_spheres = true;
  } else {
    throw ValidationError("unknown preset '" + params.id +
                          "' (expected frac_power | nls_potential | ball_hardy | appendixA | cubic_quintic)");
  }
  return spec;
}

Model::Model(ProblemSpec spec, RadialGrid grid)
    : spec_(std::move(spec)), grid_(std::move(grid)), kinetic_(build_kinetic_operator(grid_, spec_.s)) {
  if (grid_.kind() != spec_.domain)
    throw ValidationError("grid domain " + to_string(grid_.kind()) + " does not match problem domain " +
                          to_string(spec_.domain));
  if (grid_.dim() != spec_.dim) throw ValidationError("grid dimension does not match problem dimension");
  const Vector& r = grid_.nodes();
  const int n = grid_.size();
  v_ = Vector::Zero(n);
  dv_ = Vector::Zero(n);
  h_ = Vector::Ones(n);
  dh_ = Vector::Zero(n);
  for (int i = 0; i < n; ++i) {
    if (spec_.potential) {
      v_[i] = spec_.potential->value(r[i]);
      dv_[i] = spec_.potential->derivative(r[i]);
    }
    if (spec_.weight.value) h_[i] = spec_.weight.value(r[i]);
    if (spec_.weight.derivative) dh_[i] = spec_.weight.derivative(r[i]);
  }
  // r^{-k} is averaged over each cell against r^{N-1} dr; point samples of the
  // singular weight cost an order of accuracy near the origin. r h' = -k h is kept exact.
  if (spec_.family == Family::BallInhomogeneous) {
    const double N = spec_.dim, k = spec_.k, dr = grid_.spacing();
    for (int i = 0; i < n; ++i) {
      const double a = i * dr, b = (i + 1) * dr;
      h_[i] = N / (N - k) * (std::pow(b, N - k) - std::pow(a, N - k)) / (std::pow(b, N) - std::pow(a, N));
      dh_[i] = -k * h_[i] / r[i];
    }
  }
  // Without a potential the whole-space kinetic operator is positive semidefinite, so the
  // threshold is 0 and no eigensolve is needed.
  if (grid_.kind() == DomainKind::UnitBall || spec_.potential) {
    const double lowest = lowest_eigenpairs(linear_part(Vector::Zero(n)), 1).values[0];
    threshold_ = grid_.kind() == DomainKind::UnitBall ? lowest : std::min(0.0, lowest);
  }
}

namespace {

template <class Fn>
Vector pointwise(const RadialGrid& grid, const Vector& u, const Fn& fn) {
  if (!fn) throw ValidationError("nonlinearity handle not available");
  Vector out(u.size());
  const Vector& r = grid.nodes();
  for (Eigen::Index i = 0; i < u.size(); ++i) out[i] = fn(r[i], u[i]);
  return out;
}

}  // namespace

Vector Model::f(const Vector& u) const {
  if (spec_.pure_power) {
    const double p = spec_.p;
    return h_.array() * u.array().abs().pow(p - 2.0) * u.array();
  }
  return pointwise(grid_, u, spec_.nonlinearity.f);
}

Vector Model::f_t(const Vector& u) const {
  if (spec_.pure_power) {
    const double p = spec_.p;
    return (p - 1.0) * h_.array() * u.array().abs().pow(p - 2.0);
  }
  return pointwise(grid_, u, spec_.nonlinearity.f_t);
}

Vector Model::f_r(const Vector& u) const {
  if (spec_.pure_power) {
    const double p = spec_.p;
    return dh_.array() * u.array().abs().pow(p - 2.0) * u.array();
  }
  return pointwise(grid_, u, spec_.nonlinearity.f_r);
}

Vector Model::F(const Vector& u) const {
  if (spec_.pure_power) {
    const double p = spec_.p;
    return h_.array() * u.array().abs().pow(p) / p;
  }
  return pointwise(grid_, u, spec_.nonlinearity.F);
}

Vector Model::F_r(const Vector& u) const {
  if (spec_.pure_power) {
    const double p = spec_.p;
    return dh_.array() * u.array().abs().pow(p) / p;
  }
  return pointwise(grid_, u, spec_.nonlinearity.F_r);
}

double Model::kinetic_energy(const Vector& u) const { return kinetic_.quadratic_form(u); }

SymMatrix Model::linear_part(const Vector& shift) const { return kinetic_.scaled().plus_diagonal(v_ + shift); }

double Model::linear_threshold() const { return threshold_; }

void check_finite(const Vector& u) {
  if (!u.allFinite()) throw ValidationError("grid-vector contains non-finite samples");
}

double eval_energy(const Model& model, const Vector& u) {
  check_finite(u);
  const RadialGrid& g = model.grid();
  double e = 0.5 * model.kinetic_energy(u) - g.integrate(model.F(u));
  if (model.has_potential()) e += 0.5 * g.integrate(model.potential().cwiseProduct(u.cwiseAbs2()));
  return e;
}

double eval_mass(const RadialGrid& grid, const Vector& u) { return 0.5 * grid.inner(u, u); }

double eval_action(const Model& model, const Vector& u, double lambda) {
  return eval_energy(model, u) - lambda * eval_mass(model.grid(), u);
}

Vector eval_action_gradient(const Model& model, const Vector& u, double lambda) {
  check_finite(u);
  return model.kinetic().apply(u) + (model.potential().array() - lambda).matrix().cwiseProduct(u) - model.f(u);
}

}  // namespace gstate
