#include "gstate/linalg.hpp"

#include <lapacke.h>

#include <algorithm>
#include <cmath>
#include <limits>

namespace gstate {

SymMatrix SymMatrix::tridiagonal(Vector diag, Vector off) {
  if (off.size() + 1 != diag.size()) throw ValidationError("tridiagonal: off-diagonal length must be n-1");
  SymMatrix m;
  m.tridiagonal_ = true;
  m.diag_ = std::move(diag);
  m.off_ = std::move(off);
  return m;
}

SymMatrix SymMatrix::dense(Eigen::MatrixXd a) {
  if (a.rows() != a.cols()) throw ValidationError("dense symmetric matrix must be square");
  SymMatrix m;
  m.tridiagonal_ = false;
  m.dense_ = std::move(a);
  return m;
}

int SymMatrix::size() const {
  return static_cast<int>(tridiagonal_ ? diag_.size() : dense_.rows());
}

Vector SymMatrix::multiply(const Vector& x) const {
  if (x.size() != size()) throw ValidationError("matrix-vector size mismatch");
  if (!tridiagonal_) return dense_ * x;
  const Eigen::Index n = diag_.size();
  Vector y = diag_.cwiseProduct(x);
  y.head(n - 1) += off_.cwiseProduct(x.tail(n - 1));
  y.tail(n - 1) += off_.cwiseProduct(x.head(n - 1));
  return y;
}

SymMatrix SymMatrix::plus_diagonal(const Vector& d) const {
  if (d.size() != size()) throw ValidationError("diagonal shift size mismatch");
  SymMatrix m = *this;
  if (tridiagonal_) {
    m.diag_ += d;
  } else {
    m.dense_.diagonal() += d;
  }
  return m;
}

double SymMatrix::norm_inf() const {
  if (!tridiagonal_) return dense_.cwiseAbs().rowwise().sum().maxCoeff();
  Vector row = diag_.cwiseAbs();
  const Eigen::Index n = diag_.size();
  row.head(n - 1) += off_.cwiseAbs();
  row.tail(n - 1) += off_.cwiseAbs();
  return row.maxCoeff();
}

Eigen::MatrixXd SymMatrix::to_dense() const {
  if (!tridiagonal_) return dense_;
  const Eigen::Index n = diag_.size();
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);
  a.diagonal() = diag_;
  for (Eigen::Index i = 0; i + 1 < n; ++i) a(i, i + 1) = a(i + 1, i) = off_[i];
  return a;
}

LinearSolver::LinearSolver(const SymMatrix& m) : tridiagonal_(m.is_tridiagonal()), n_(m.size()) {
  const double anorm = m.norm_inf();
  if (tridiagonal_) {
    d_.assign(m.diag().data(), m.diag().data() + n_);
    dl_.assign(m.off().data(), m.off().data() + n_ - 1);
    du_ = dl_;
    du2_.assign(std::max(n_ - 2, 1), 0.0);
    ipiv_.assign(n_, 0);
    const lapack_int info = LAPACKE_dgttrf(n_, dl_.data(), d_.data(), du_.data(), du2_.data(), ipiv_.data());
    if (info < 0) throw Error("dgttrf: invalid argument");
    if (info > 0) {
      singular_ = true;
      return;
    }
    double rc = 0.0;
    LAPACKE_dgtcon('1', n_, dl_.data(), d_.data(), du_.data(), du2_.data(), ipiv_.data(), anorm, &rc);
    rcond_ = rc;
  } else {
    lu_ = m.dense_matrix();
    ipiv_.assign(n_, 0);
    const lapack_int info = LAPACKE_dgetrf(LAPACK_COL_MAJOR, n_, n_, lu_.data(), n_, ipiv_.data());
    if (info < 0) throw Error("dgetrf: invalid argument");
    if (info > 0) {
      singular_ = true;
      return;
    }
    double rc = 0.0;
    LAPACKE_dgecon(LAPACK_COL_MAJOR, '1', n_, lu_.data(), n_, anorm, &rc);
    rcond_ = rc;
  }
  if (rcond_ < std::numeric_limits<double>::epsilon()) singular_ = true;
}

Vector LinearSolver::solve(const Vector& b) const {
  if (singular_) throw DegeneracyError("degenerate point: singular linear system");
  if (b.size() != n_) throw ValidationError("right-hand side size mismatch");
  Vector x = b;
  if (!tridiagonal_) {
    const lapack_int info =
        LAPACKE_dgetrs(LAPACK_COL_MAJOR, 'N', n_, 1, lu_.data(), n_, ipiv_.data(), x.data(), n_);
    if (info != 0) throw Error("dgetrs failed");
    return x;
  }
  const lapack_int info = LAPACKE_dgttrs(LAPACK_COL_MAJOR, 'N', n_, 1, dl_.data(), d_.data(), du_.data(),
                                         du2_.data(), ipiv_.data(), x.data(), n_);
  if (info != 0) throw Error("dgttrs failed");
  return x;
}

EigenPairs lowest_eigenpairs(const SymMatrix& m, int count) {
  const int n = m.size();
  count = std::clamp(count, 1, n);
  EigenPairs out;
  if (m.is_tridiagonal()) {
    std::vector<double> d(m.diag().data(), m.diag().data() + n);
    std::vector<double> e(m.off().data(), m.off().data() + n - 1);
    e.push_back(0.0);
    std::vector<double> w(n);
    std::vector<lapack_int> iblock(n), isplit(n);
    lapack_int found = 0, nsplit = 0;
    lapack_int info = LAPACKE_dstebz('I', 'B', n, 0.0, 0.0, 1, count, 0.0, d.data(), e.data(), &found, &nsplit,
                                     w.data(), iblock.data(), isplit.data());
    if (info != 0) throw Error("dstebz failed (info " + std::to_string(info) + ")");
    out.values = Eigen::Map<Vector>(w.data(), found);
    out.vectors.resize(n, found);
    std::vector<lapack_int> ifail(found);
    info = LAPACKE_dstein(LAPACK_COL_MAJOR, n, d.data(), e.data(), found, w.data(), iblock.data(), isplit.data(),
                          out.vectors.data(), n, ifail.data());
    if (info != 0) throw Error("dstein failed (info " + std::to_string(info) + ")");
    // dstein wants eigenvalues grouped by split block; restore ascending order.
    std::vector<int> order(found);
    for (int i = 0; i < found; ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](int a, int b) { return out.values[a] < out.values[b]; });
    EigenPairs sorted;
    sorted.values.resize(found);
    sorted.vectors.resize(n, found);
    for (int i = 0; i < found; ++i) {
      sorted.values[i] = out.values[order[i]];
      sorted.vectors.col(i) = out.vectors.col(order[i]);
    }
    return sorted;
  }
  Eigen::MatrixXd a = m.dense_matrix();
  std::vector<double> w(n);
  std::vector<lapack_int> isuppz(2 * count);
  out.vectors.resize(n, count);
  lapack_int found = 0;
  const lapack_int info = LAPACKE_dsyevr(LAPACK_COL_MAJOR, 'V', 'I', 'L', n, a.data(), n, 0.0, 0.0, 1, count, 0.0,
                                         &found, w.data(), out.vectors.data(), n, isuppz.data());
  if (info != 0) throw Error("dsyevr failed (info " + std::to_string(info) + ")");
  out.values = Eigen::Map<Vector>(w.data(), found);
  out.vectors.conservativeResize(n, found);
  return out;
}

int count_eigenvalues_below(const SymMatrix& m, double threshold) {
  const int n = m.size();
  if (m.is_tridiagonal()) {
    std::vector<double> d(m.diag().data(), m.diag().data() + n);
    std::vector<double> e(m.off().data(), m.off().data() + n - 1);
    e.push_back(0.0);
    std::vector<double> w(n);
    std::vector<lapack_int> iblock(n), isplit(n);
    lapack_int found = 0, nsplit = 0;
    const double lower = -m.norm_inf() - 1.0;
    if (threshold <= lower) return 0;
    const lapack_int info = LAPACKE_dstebz('V', 'E', n, lower, threshold, 0, 0, 0.0, d.data(), e.data(), &found,
                                           &nsplit, w.data(), iblock.data(), isplit.data());
    if (info != 0) throw Error("dstebz failed (info " + std::to_string(info) + ")");
    return static_cast<int>(std::count_if(w.begin(), w.begin() + found, [&](double x) { return x < threshold; }));
  }
  Eigen::MatrixXd a = m.dense_matrix();
  a.diagonal().array() -= threshold;
  std::vector<lapack_int> ipiv(n);
  const lapack_int info = LAPACKE_dsytrf(LAPACK_COL_MAJOR, 'L', n, a.data(), n, ipiv.data());
  if (info < 0) throw Error("dsytrf: invalid argument");
  int negative = 0;
  for (int i = 0; i < n;) {
    if (ipiv[i] > 0) {
      if (a(i, i) < 0.0) ++negative;
      ++i;
    } else {
      // 2x2 block [a b; b c]: one negative eigenvalue if det < 0, else the sign of the trace.
      const double p = a(i, i), b = a(i + 1, i), c = a(i + 1, i + 1);
      const double det = p * c - b * b;
      if (det < 0.0) {
        negative += 1;
      } else if (p + c < 0.0) {
        negative += 2;
      }
      i += 2;
    }
  }
  return negative;
}

}  // namespace gstate
