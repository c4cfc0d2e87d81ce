#pragma once

#include "gstate/solve.hpp"

namespace gstate {

struct SpectrumReport {
  int morse_index = 0;  // eigenvalues of L_lambda below -tolerance, radial sector only
  double smallest_abs_eig = 0.0;
  Vector lowest_eigs;              // ascending
  Eigen::MatrixXd lowest_vectors;  // nodal form, one column per eigenvalue
  bool nondegenerate = false;      // smallest |eig| > tolerance ("radial non-degeneracy")
  double tolerance = 0.0;
};

/// L_lambda = A + V - lambda - f_t(|x|, u), symmetric in the weighted inner product.
DiscreteOperator linearized_operator(const Model& model, const Solution& sol);

/// <L_lambda w, w> in the weighted inner product.
double linearized_form(const Model& model, const Solution& sol, const Vector& w);

/// Morse index alone (inertia count, no eigenvectors).
int morse_count(const Model& model, const Solution& sol, double eig_tol = 1e-9);

/// Morse index and lowest eigenpairs of L_lambda. Eigenvalues below -tolerance
/// count as negative, tolerance = max(eig_tol (1 + |lambda| + max|V| + max|f_t|),
/// 64 eps ||L||_inf).
SpectrumReport morse_index(const Model& model, const Solution& sol, double eig_tol = 1e-9, int min_pairs = 3);

}  // namespace gstate
