#pragma once

#include "gstate/grid.hpp"
#include "gstate/linalg.hpp"

namespace gstate {

enum class BoundaryKind { DecayAtR, Dirichlet };

/// Discrete (-Delta)^s acting on radial grid-vectors.
///
/// The operator A is self-adjoint in the weighted inner product
/// <u, w> = sum_i w_i u_i v_i. It is stored through its symmetric similarity
/// transform S = W^{1/2} A W^{-1/2}, which is what the factorizations and
/// eigensolvers see. Diagonal terms (potential, shift, f_t) commute with the
/// scaling and can be added to S directly.
class DiscreteOperator {
 public:
  DiscreteOperator(double order, BoundaryKind boundary, SymMatrix scaled, Vector sqrt_weights);

  double order() const { return order_; }
  BoundaryKind boundary() const { return boundary_; }
  int size() const { return scaled_.size(); }
  const SymMatrix& scaled() const { return scaled_; }
  const Vector& sqrt_weights() const { return sqrt_w_; }

  /// A u in nodal form.
  Vector apply(const Vector& u) const;
  /// <A u, u> in the weighted inner product, i.e. the discrete int |(-Delta)^{s/2} u|^2.
  double quadratic_form(const Vector& u) const;
  /// <A u, w> in the weighted inner product.
  double bilinear_form(const Vector& u, const Vector& w) const;
  /// Nodal matrix of A (dense; meant for tests and small grids).
  Eigen::MatrixXd nodal_matrix() const;

  /// Bring a nodal vector into the scaled frame (multiply by W^{1/2}) and back.
  Vector to_scaled(const Vector& u) const { return sqrt_w_.cwiseProduct(u); }
  Vector from_scaled(const Vector& y) const { return y.cwiseQuotient(sqrt_w_); }

 private:
  double order_;
  BoundaryKind boundary_;
  SymMatrix scaled_;
  Vector sqrt_w_;
};

/// Finite-volume discretization of -u'' - (N-1)/r u' on the cell-centred grid:
/// zero flux through r = 0 and u = 0 at the outer radius (mirror ghost cell).
DiscreteOperator build_radial_laplacian(const RadialGrid& grid);

/// (-d^2/dx^2)^s on the even 1D grid, 0 < s < 1, by fractional centred
/// differences: the s-th power of the 3-point Laplacian on the infinite lattice,
/// restricted to even functions and to |x| < R (u = 0 beyond R).
DiscreteOperator build_fractional_laplacian_1d(const RadialGrid& grid, double s);

/// Dispatch on the order: s = 1 gives the radial Laplacian.
DiscreteOperator build_kinetic_operator(const RadialGrid& grid, double s);

/// Lattice weights g_k (k = 0..count-1) of the fractional centred difference of order 2s.
Vector fractional_difference_weights(double s, int count);

}  // namespace gstate
