#include "gstate/grid.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace gstate {

std::string to_string(DomainKind kind) {
  return kind == DomainKind::UnitBall ? "unit_ball" : "whole_space";
}

DomainKind domain_from_string(const std::string& name) {
  if (name == "unit_ball") return DomainKind::UnitBall;
  if (name == "whole_space") return DomainKind::WholeSpace;
  throw ValidationError("unknown domain kind '" + name + "'");
}

double sphere_area(int dim) {
  if (dim < 1) throw ValidationError("dimension must be >= 1");
  return 2.0 * std::pow(std::numbers::pi, 0.5 * dim) / std::tgamma(0.5 * dim);
}

RadialGrid::RadialGrid(DomainKind kind, int dim, int n, double radius)
    : kind_(kind), dim_(dim), radius_(radius), spacing_(radius / (n + 0.5)), nodes_(n), weights_(n) {
  const double area = sphere_area(dim);
  for (int i = 0; i < n; ++i) {
    const double inner = i * spacing_;
    const double outer = (i + 1) * spacing_;
    nodes_[i] = (i + 0.5) * spacing_;
    weights_[i] = area * (std::pow(outer, dim) - std::pow(inner, dim)) / dim;
  }
}

RadialGrid RadialGrid::whole_space(int dim, int n, double outer_radius) {
  if (dim < 1) throw ValidationError("dimension must be >= 1");
  if (n < 3) throw ValidationError("radial grid needs at least 3 nodes");
  if (!(outer_radius > 0.0) || !std::isfinite(outer_radius))
    throw ValidationError("outer radius must be positive and finite");
  return RadialGrid(DomainKind::WholeSpace, dim, n, outer_radius);
}

RadialGrid RadialGrid::unit_ball(int dim, int n) {
  if (dim < 1) throw ValidationError("dimension must be >= 1");
  if (n < 3) throw ValidationError("radial grid needs at least 3 nodes");
  return RadialGrid(DomainKind::UnitBall, dim, n, 1.0);
}

double RadialGrid::integrate(const Vector& samples) const {
  if (samples.size() != nodes_.size())
    throw ValidationError("sample vector length " + std::to_string(samples.size()) +
                          " does not match grid size " + std::to_string(nodes_.size()));
  return weights_.dot(samples);
}

double RadialGrid::inner(const Vector& a, const Vector& b) const {
  if (a.size() != nodes_.size() || b.size() != nodes_.size())
    throw ValidationError("inner product of vectors with wrong length");
  return (weights_.array() * a.array() * b.array()).sum();
}

double RadialGrid::norm(const Vector& a) const { return std::sqrt(inner(a, a)); }

double RadialGrid::value_at_origin(const Vector& u) const {
  return (9.0 * u[0] - u[1]) / 8.0;
}

double RadialGrid::boundary_slope(const Vector& u) const {
  const int n = size();
  return (u[n - 2] - 4.0 * u[n - 1]) / (2.0 * spacing_);
}

double default_outer_radius(double lambda, double s) {
  double radius = lambda == 0.0 ? 200.0 : 30.0 / std::sqrt(std::abs(lambda));
  radius = std::clamp(radius, 20.0, 200.0);
  if (s < 0.5) radius *= 4.0;
  return radius;
}

}  // namespace gstate
