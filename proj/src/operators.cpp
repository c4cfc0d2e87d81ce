#include "gstate/operators.hpp"

#include <cmath>

namespace gstate {

DiscreteOperator::DiscreteOperator(double order, BoundaryKind boundary, SymMatrix scaled, Vector sqrt_weights)
    : order_(order), boundary_(boundary), scaled_(std::move(scaled)), sqrt_w_(std::move(sqrt_weights)) {
  if (sqrt_w_.size() != scaled_.size()) throw ValidationError("operator/weight size mismatch");
}

Vector DiscreteOperator::apply(const Vector& u) const {
  return from_scaled(scaled_.multiply(to_scaled(u)));
}

double DiscreteOperator::quadratic_form(const Vector& u) const {
  const Vector y = to_scaled(u);
  return y.dot(scaled_.multiply(y));
}

double DiscreteOperator::bilinear_form(const Vector& u, const Vector& w) const {
  return to_scaled(w).dot(scaled_.multiply(to_scaled(u)));
}

Eigen::MatrixXd DiscreteOperator::nodal_matrix() const {
  const Vector inv = sqrt_w_.cwiseInverse();
  return inv.asDiagonal() * scaled_.to_dense() * sqrt_w_.asDiagonal();
}

DiscreteOperator build_radial_laplacian(const RadialGrid& grid) {
  const int n = grid.size();
  if (n < 3) throw ValidationError("radial Laplacian needs at least 3 nodes");
  const int dim = grid.dim();
  const double h = grid.spacing();
  const double area = sphere_area(dim);
  const Vector& w = grid.weights();

  Vector kdiag = Vector::Zero(n);
  Vector koff(n - 1);
  for (int i = 0; i + 1 < n; ++i) {
    const double face = area * std::pow((i + 1) * h, dim - 1) / h;
    kdiag[i] += face;
    kdiag[i + 1] += face;
    koff[i] = -face;
  }
  // face at n h towards the zero boundary node at R = (n + 1/2) h
  kdiag[n - 1] += area * std::pow(n * h, dim - 1) / h;

  Vector sqrt_w = w.cwiseSqrt();
  Vector diag = kdiag.cwiseQuotient(w);
  Vector off(n - 1);
  for (int i = 0; i + 1 < n; ++i) off[i] = koff[i] / (sqrt_w[i] * sqrt_w[i + 1]);
  const BoundaryKind boundary =
      grid.kind() == DomainKind::UnitBall ? BoundaryKind::Dirichlet : BoundaryKind::DecayAtR;
  return DiscreteOperator(1.0, boundary, SymMatrix::tridiagonal(diag, off), sqrt_w);
}

Vector fractional_difference_weights(double s, int count) {
  Vector g(count);
  g[0] = std::tgamma(2.0 * s + 1.0) / std::pow(std::tgamma(s + 1.0), 2);
  for (int k = 0; k + 1 < count; ++k) g[k + 1] = g[k] * (k - s) / (k + s + 1.0);
  return g;
}

DiscreteOperator build_fractional_laplacian_1d(const RadialGrid& grid, double s) {
  if (!(s > 0.0 && s < 1.0)) throw ValidationError("fractional order s must lie in (0, 1)");
  if (grid.kind() != DomainKind::WholeSpace)
    throw ValidationError("fractional Laplacian is only available on the whole line (no ball domain)");
  if (grid.dim() != 1) throw ValidationError("fractional Laplacian is only implemented for N = 1");
  const int n = grid.size();
  const double h = grid.spacing();
  const Vector g = fractional_difference_weights(s, 2 * n + 1);
  const double scale = std::pow(h, -2.0 * s);
  Eigen::MatrixXd a(n, n);
  for (int j = 0; j < n; ++j)
    for (int k = 0; k < n; ++k) a(j, k) = scale * (g[std::abs(j - k)] + g[j + k + 1]);
  return DiscreteOperator(s, BoundaryKind::DecayAtR, SymMatrix::dense(std::move(a)), grid.weights().cwiseSqrt());
}

DiscreteOperator build_kinetic_operator(const RadialGrid& grid, double s) {
  if (s == 1.0) return build_radial_laplacian(grid);
  return build_fractional_laplacian_1d(grid, s);
}

}  // namespace gstate
