#pragma once

#include <string>

#include "gstate/types.hpp"

namespace gstate {

enum class DomainKind { WholeSpace, UnitBall };

std::string to_string(DomainKind kind);
DomainKind domain_from_string(const std::string& name);

/// Surface area of the unit sphere in R^N (2 for N = 1, 2*pi for N = 2, 4*pi for N = 3).
double sphere_area(int dim);

/// Cell-centred radial mesh on [0, R].
///
/// Spacing h = R/(n + 1/2); node i sits at the centre (i + 1/2) h of the cell
/// [i h, (i + 1) h]. The function vanishes at r = R, which is the position of
/// the next node (Dirichlet for the unit ball, truncation for whole space), so
/// the boundary stencil is a regular one. Weights are omega_N times the exact
/// cell volume; the half cell [R - h/2, R] next to the boundary node carries no
/// weight and sum(weights) is the volume of the ball of radius R - h/2.
class RadialGrid {
 public:
  static RadialGrid whole_space(int dim, int n, double outer_radius);
  static RadialGrid unit_ball(int dim, int n);

  DomainKind kind() const { return kind_; }
  int dim() const { return dim_; }
  int size() const { return static_cast<int>(nodes_.size()); }
  double outer_radius() const { return radius_; }
  double spacing() const { return spacing_; }
  const Vector& nodes() const { return nodes_; }
  const Vector& weights() const { return weights_; }

  /// Integral over the whole domain of a radial function sampled at the nodes.
  double integrate(const Vector& samples) const;
  /// Weighted inner product sum_i w_i a_i b_i.
  double inner(const Vector& a, const Vector& b) const;
  double norm(const Vector& a) const;

  /// Value at r = 0 from the even quadratic through the first two nodes.
  double value_at_origin(const Vector& u) const;
  /// u'(R) from the one-sided quadratic through u(R) = 0 and the last two nodes
  /// (spacing h each).
  double boundary_slope(const Vector& u) const;

 private:
  RadialGrid(DomainKind kind, int dim, int n, double radius);

  DomainKind kind_;
  int dim_;
  double radius_;
  double spacing_;
  Vector nodes_;
  Vector weights_;
};

/// Default truncation radius for whole-space problems at frequency lambda:
/// 30/sqrt(|lambda|) clamped to [20, 200], times 4 when s < 1/2.
double default_outer_radius(double lambda, double s = 1.0);

}  // namespace gstate
