#pragma once

#include <vector>

#include "gstate/types.hpp"

namespace gstate {

/// Real symmetric matrix stored either as a tridiagonal (diagonal + first
/// off-diagonal) or as a full dense matrix.
class SymMatrix {
 public:
  static SymMatrix tridiagonal(Vector diag, Vector off);
  static SymMatrix dense(Eigen::MatrixXd m);

  bool is_tridiagonal() const { return tridiagonal_; }
  int size() const;

  Vector multiply(const Vector& x) const;
  SymMatrix plus_diagonal(const Vector& d) const;
  /// Infinity norm (equal to the 1-norm by symmetry).
  double norm_inf() const;

  const Vector& diag() const { return diag_; }
  const Vector& off() const { return off_; }
  const Eigen::MatrixXd& dense_matrix() const { return dense_; }
  Eigen::MatrixXd to_dense() const;

 private:
  bool tridiagonal_ = true;
  Vector diag_;
  Vector off_;
  Eigen::MatrixXd dense_;
};

/// LU factorization with a reciprocal condition estimate in the 1-norm.
class LinearSolver {
 public:
  explicit LinearSolver(const SymMatrix& m);

  bool singular() const { return singular_; }
  double rcond() const { return rcond_; }
  Vector solve(const Vector& b) const;

 private:
  bool tridiagonal_;
  bool singular_ = false;
  double rcond_ = 0.0;
  int n_;
  std::vector<double> dl_, d_, du_, du2_;
  std::vector<int> ipiv_;
  Eigen::MatrixXd lu_;  // dense LU factors
};

struct EigenPairs {
  Vector values;           // ascending
  Eigen::MatrixXd vectors;  // one column per value, unit Euclidean norm
};

/// The `count` smallest eigenvalues (and eigenvectors) of m.
EigenPairs lowest_eigenpairs(const SymMatrix& m, int count);

/// Number of eigenvalues of m strictly below `threshold` (Sturm count for
/// tridiagonal storage, Bunch-Kaufman inertia for dense storage).
int count_eigenvalues_below(const SymMatrix& m, double threshold);

}  // namespace gstate
