#include "gstate/spectrum.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace gstate {

namespace {

SymMatrix linearized_matrix(const Model& model, const Solution& sol) {
  if (sol.u.size() != model.grid().size()) throw ValidationError("solution has wrong length");
  check_finite(sol.u);
  return model.linear_part(Vector::Constant(sol.u.size(), -sol.lambda) - model.f_t(sol.u));
}

// eig_tol times the size of the zeroth-order part, floored at the rounding level
// of the eigensolver; ||L|| alone grows like 1/h^2 and would hide O(1) eigenvalues.
double eig_tolerance(const Model& model, const Solution& sol, const SymMatrix& L, double eig_tol) {
  const double scale = 1.0 + std::abs(sol.lambda) + model.potential().cwiseAbs().maxCoeff() +
                       model.f_t(sol.u).cwiseAbs().maxCoeff();
  return std::max(eig_tol * scale, 64.0 * std::numeric_limits<double>::epsilon() * L.norm_inf());
}

}  // namespace

DiscreteOperator linearized_operator(const Model& model, const Solution& sol) {
  const DiscreteOperator& A = model.kinetic();
  return DiscreteOperator(A.order(), A.boundary(), linearized_matrix(model, sol), A.sqrt_weights());
}

double linearized_form(const Model& model, const Solution& sol, const Vector& w) {
  return linearized_operator(model, sol).quadratic_form(w);
}

int morse_count(const Model& model, const Solution& sol, double eig_tol) {
  const SymMatrix L = linearized_matrix(model, sol);
  return count_eigenvalues_below(L, -eig_tolerance(model, sol, L, eig_tol));
}

SpectrumReport morse_index(const Model& model, const Solution& sol, double eig_tol, int min_pairs) {
  const SymMatrix L = linearized_matrix(model, sol);
  SpectrumReport rep;
  rep.tolerance = eig_tolerance(model, sol, L, eig_tol);
  rep.morse_index = count_eigenvalues_below(L, -rep.tolerance);
  const int count = std::min(L.size(), std::max(min_pairs, rep.morse_index + 2));
  const EigenPairs pairs = lowest_eigenpairs(L, count);
  rep.lowest_eigs = pairs.values;
  rep.lowest_vectors.resize(L.size(), count);
  const Vector& sw = model.kinetic().sqrt_weights();
  for (int j = 0; j < count; ++j) {
    Vector v = pairs.vectors.col(j).cwiseQuotient(sw);
    v /= model.grid().norm(v);
    rep.lowest_vectors.col(j) = v;
  }
  rep.smallest_abs_eig = pairs.values.cwiseAbs().minCoeff();
  rep.nondegenerate = rep.smallest_abs_eig > rep.tolerance;
  return rep;
}

}  // namespace gstate
