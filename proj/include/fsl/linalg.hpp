#ifndef FSL_LINALG_HPP
#define FSL_LINALG_HPP

#include <Eigen/Dense>

#include <cmath>
#include <limits>
#include <string>
#include <utility>

#include "fsl/error.hpp"

namespace fsl {

using Index = Eigen::Index;

template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

using MatrixXd = Matrix<double>;
using VectorXd = Vector<double>;

template <typename Scalar>
struct SvdResult {
  Matrix<Scalar> u;                 // rows x r
  Vector<Scalar> singular_values;   // r = min(rows, cols), non-increasing
  Matrix<Scalar> v;                 // cols x r
};

template <typename Scalar>
struct SymEigResult {
  Vector<Scalar> eigenvalues;   // non-increasing
  Matrix<Scalar> eigenvectors;  // unit columns
};

template <typename Derived>
bool all_finite(const Eigen::MatrixBase<Derived>& a) {
  return a.allFinite();
}

template <typename Derived>
void require_finite(const Eigen::MatrixBase<Derived>& a, const char* what) {
  if (!a.allFinite()) throw_invalid(std::string(what) + ": non-finite entry");
}

template <typename Derived>
void require_nonempty(const Eigen::MatrixBase<Derived>& a, const char* what) {
  if (a.rows() < 1 || a.cols() < 1) throw_invalid(std::string(what) + ": empty matrix");
}

/// Flips the sign of a column so that its largest-magnitude entry is positive.
/// Returns true when the column was flipped. Ties pick the first such entry.
template <typename Derived>
bool canonicalize_sign(Eigen::MatrixBase<Derived>&& col) {
  Index arg = 0;
  col.cwiseAbs().maxCoeff(&arg);
  if (col(arg) < 0) {
    col = -col;
    return true;
  }
  return false;
}

template <typename Derived>
bool canonicalize_sign(Eigen::MatrixBase<Derived>& col) {
  return canonicalize_sign(std::move(col));
}

/// Thin SVD. Columns of v follow the sign convention, u is flipped to match.
template <typename Derived>
SvdResult<typename Derived::Scalar> svd_decompose(const Eigen::MatrixBase<Derived>& a) {
  using Scalar = typename Derived::Scalar;
  require_nonempty(a, "svd_decompose");
  require_finite(a, "svd_decompose");
  Eigen::BDCSVD<Matrix<Scalar>> svd(a.eval(), Eigen::ComputeThinU | Eigen::ComputeThinV);
  SvdResult<Scalar> out{svd.matrixU(), svd.singularValues(), svd.matrixV()};
  for (Index j = 0; j < out.v.cols(); ++j) {
    if (canonicalize_sign(out.v.col(j))) out.u.col(j) = -out.u.col(j);
  }
  return out;
}

/// Symmetric eigendecomposition of (A + A^T)/2, eigenvalues non-increasing.
template <typename Derived>
SymEigResult<typename Derived::Scalar> sym_eig(const Eigen::MatrixBase<Derived>& a) {
  using Scalar = typename Derived::Scalar;
  require_nonempty(a, "sym_eig");
  if (a.rows() != a.cols()) {
    throw_invalid("sym_eig: matrix is " + std::to_string(a.rows()) + "x" +
                  std::to_string(a.cols()) + ", expected square");
  }
  require_finite(a, "sym_eig");
  const Matrix<Scalar> sym = (a + a.transpose()) / Scalar(2);
  Eigen::SelfAdjointEigenSolver<Matrix<Scalar>> es(sym);
  if (es.info() != Eigen::Success) {
    throw Error(ErrorCode::NumericalFailure, "sym_eig: eigensolver did not converge");
  }
  const Index n = sym.rows();
  SymEigResult<Scalar> out{Vector<Scalar>(n), Matrix<Scalar>(n, n)};
  // Eigen returns ascending order.
  for (Index j = 0; j < n; ++j) {
    out.eigenvalues(j) = es.eigenvalues()(n - 1 - j);
    out.eigenvectors.col(j) = es.eigenvectors().col(n - 1 - j);
    canonicalize_sign(out.eigenvectors.col(j));
  }
  return out;
}

/// Cholesky factor of a symmetric positive definite matrix, reused across
/// right-hand sides. Throws NotPositiveDefinite when the factorization fails
/// or a pivot is negligible relative to the diagonal.
template <typename Scalar>
class SpdFactor {
 public:
  /// Smallest accepted pivot^2 relative to the largest diagonal entry.
  static constexpr Scalar kRelativePivotFloor = Scalar(1e-12);

  template <typename Derived>
  explicit SpdFactor(const Eigen::MatrixBase<Derived>& a) {
    require_nonempty(a, "solve_spd");
    if (a.rows() != a.cols()) throw_invalid("solve_spd: matrix is not square");
    require_finite(a, "solve_spd");
    llt_.compute(a);
    const Scalar diag_scale = a.diagonal().cwiseAbs().maxCoeff();
    const Scalar floor = kRelativePivotFloor * diag_scale;
    if (llt_.info() != Eigen::Success || !(diag_scale > 0)) {
      throw Error(ErrorCode::NotPositiveDefinite, "Cholesky factorization failed");
    }
    const Scalar min_pivot = llt_.matrixLLT().diagonal().minCoeff();
    if (!(min_pivot * min_pivot > floor)) {
      throw Error(ErrorCode::NotPositiveDefinite,
                  "Cholesky factorization failed: matrix is numerically singular");
    }
  }

  Index size() const { return llt_.rows(); }

  template <typename Derived>
  Matrix<Scalar> solve(const Eigen::MatrixBase<Derived>& b) const {
    if (b.rows() != size()) {
      throw_invalid("solve_spd: right-hand side has " + std::to_string(b.rows()) +
                    " rows, expected " + std::to_string(size()));
    }
    return llt_.solve(b);
  }

  /// Lower-triangular factor L with A = L L^T.
  auto lower() const { return llt_.matrixL(); }

 private:
  Eigen::LLT<Matrix<Scalar>> llt_;
};

template <typename DerivedA, typename DerivedB>
Matrix<typename DerivedA::Scalar> solve_spd(const Eigen::MatrixBase<DerivedA>& a,
                                            const Eigen::MatrixBase<DerivedB>& b) {
  return SpdFactor<typename DerivedA::Scalar>(a).solve(b);
}

}  // namespace fsl

#endif  // FSL_LINALG_HPP
