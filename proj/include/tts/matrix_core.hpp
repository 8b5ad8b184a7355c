#pragma once

// Dense kernels shared by every other module: spectral abscissa, Hurwitz
// tests, matrix exponential, guarded inversion and Lyapunov solves.
//
// All functions accept any Eigen dense expression and return plain objects of
// the same scalar type. Inputs must be finite; dimension problems raise
// tts::DimensionError.

#include <Eigen/Dense>
#include <unsupported/Eigen/MatrixFunctions>

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "tts/errors.hpp"

namespace tts {

template <typename Scalar>
using DynMatrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

/// Real parts of the spectrum of a square matrix together with its abscissa.
///
/// `lambda_gap` is the distance of the spectrum from the imaginary axis,
/// positive exactly when the matrix is Hurwitz.
template <typename Scalar>
struct SpectralSummary {
  std::vector<Scalar> eigen_real_parts;
  Scalar abscissa{};
  Scalar lambda_gap{};
};

namespace detail {

template <typename Derived>
void require_square(const Eigen::MatrixBase<Derived>& a, const char* op) {
  if (a.rows() != a.cols() || a.rows() == 0) {
    throw DimensionError(std::string(op) + ": expected a non-empty square matrix, got " +
                         std::to_string(a.rows()) + "x" + std::to_string(a.cols()));
  }
}

template <typename Derived>
void require_finite(const Eigen::MatrixBase<Derived>& a, const char* op) {
  if (!a.allFinite()) {
    throw DomainError(std::string(op) + ": matrix has non-finite entries");
  }
}

}  // namespace detail

template <typename Derived>
SpectralSummary<typename Derived::Scalar> lambda_of(const Eigen::MatrixBase<Derived>& a) {
  using Scalar = typename Derived::Scalar;
  detail::require_square(a, "lambda_of");
  detail::require_finite(a, "lambda_of");

  SpectralSummary<Scalar> out;
  const DynMatrix<Scalar> m = a;
  Eigen::EigenSolver<DynMatrix<Scalar>> solver(m, /*computeEigenvectors=*/false);
  if (solver.info() != Eigen::Success) {
    throw DomainError("lambda_of: eigenvalue iteration did not converge");
  }
  const auto& ev = solver.eigenvalues();
  out.eigen_real_parts.reserve(static_cast<std::size_t>(ev.size()));
  for (Eigen::Index i = 0; i < ev.size(); ++i) out.eigen_real_parts.push_back(ev[i].real());
  out.abscissa = *std::max_element(out.eigen_real_parts.begin(), out.eigen_real_parts.end());
  out.lambda_gap = -out.abscissa;
  return out;
}

/// True iff every eigenvalue has real part below `-margin`.
template <typename Derived>
bool is_hurwitz(const Eigen::MatrixBase<Derived>& a, typename Derived::Scalar margin = 0) {
  return lambda_of(a).lambda_gap > margin;
}

template <typename Derived>
typename Derived::PlainObject mat_exp(const Eigen::MatrixBase<Derived>& a) {
  detail::require_square(a, "mat_exp");
  detail::require_finite(a, "mat_exp");
  typename Derived::PlainObject e = a.derived().eval().exp();
  return e;
}

/// Inverse of `a`; throws SingularityError when the reciprocal condition
/// estimate falls below 1e-12.
template <typename Derived>
typename Derived::PlainObject invert(const Eigen::MatrixBase<Derived>& a) {
  using Scalar = typename Derived::Scalar;
  detail::require_square(a, "invert");
  detail::require_finite(a, "invert");
  const DynMatrix<Scalar> m = a;
  Eigen::PartialPivLU<DynMatrix<Scalar>> lu(m);
  const Scalar rcond = lu.rcond();
  if (!(rcond > Scalar(1e-12))) {
    throw SingularityError("invert: matrix is singular to working precision (rcond = " +
                           std::to_string(static_cast<double>(rcond)) + ")");
  }
  typename Derived::PlainObject inv = lu.inverse();
  return inv;
}

/// Solves A S + S A^T = -Q for S.
///
/// A must be Hurwitz and Q symmetric positive semidefinite. The d^2 x d^2
/// Kronecker system (I (x) A + A (x) I) vec(S) = -vec(Q) is solved densely,
/// which is fine for the d <= 16 sizes used here. The result is symmetrized.
template <typename DerivedA, typename DerivedQ>
typename DerivedA::PlainObject solve_lyapunov(const Eigen::MatrixBase<DerivedA>& a,
                                              const Eigen::MatrixBase<DerivedQ>& q) {
  using Scalar = typename DerivedA::Scalar;
  detail::require_square(a, "solve_lyapunov");
  detail::require_square(q, "solve_lyapunov");
  if (a.rows() != q.rows()) {
    throw DimensionError("solve_lyapunov: A is " + std::to_string(a.rows()) + "x" +
                         std::to_string(a.cols()) + " but Q is " + std::to_string(q.rows()) +
                         "x" + std::to_string(q.cols()));
  }
  detail::require_finite(q, "solve_lyapunov");

  const auto spectrum = lambda_of(a);
  if (!(spectrum.lambda_gap > Scalar(0))) {
    throw InfeasibilityError(
        "solve_lyapunov: A is not Hurwitz (max real eigenvalue part = " +
        std::to_string(static_cast<double>(spectrum.abscissa)) +
        "), the stationary covariance integral diverges");
  }

  const Scalar qscale = std::max<Scalar>(Scalar(1), q.norm());
  if ((q - q.transpose()).norm() > Scalar(1e-10) * qscale) {
    throw DomainError("solve_lyapunov: right-hand side is not symmetric");
  }

  const Eigen::Index d = a.rows();
  const DynMatrix<Scalar> am = a;
  const DynMatrix<Scalar> id = DynMatrix<Scalar>::Identity(d, d);
  DynMatrix<Scalar> kron(d * d, d * d);
  // column-major vec: vec(A S) = (I (x) A) vec(S), vec(S A^T) = (A (x) I) vec(S)
  for (Eigen::Index i = 0; i < d; ++i) {
    for (Eigen::Index j = 0; j < d; ++j) {
      kron.block(i * d, j * d, d, d) = id(i, j) * am + am(i, j) * id;
    }
  }
  const DynMatrix<Scalar> qm = q;
  const Eigen::Matrix<Scalar, Eigen::Dynamic, 1> rhs =
      -Eigen::Map<const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>>(qm.data(), d * d);
  const Eigen::Matrix<Scalar, Eigen::Dynamic, 1> x = kron.partialPivLu().solve(rhs);

  typename DerivedA::PlainObject s = Eigen::Map<const DynMatrix<Scalar>>(x.data(), d, d);
  s = (Scalar(0.5) * (s + s.transpose())).eval();
  return s;
}

/// Frobenius norm of A S + S A^T + Q.
template <typename DA, typename DS, typename DQ>
typename DA::Scalar lyapunov_residual(const Eigen::MatrixBase<DA>& a,
                                      const Eigen::MatrixBase<DS>& s,
                                      const Eigen::MatrixBase<DQ>& q) {
  return (a * s + s * a.transpose() + q).norm();
}

/// Smallest eigenvalue of the symmetric part.
template <typename Derived>
typename Derived::Scalar min_symmetric_eigenvalue(const Eigen::MatrixBase<Derived>& a) {
  using Scalar = typename Derived::Scalar;
  detail::require_square(a, "min_symmetric_eigenvalue");
  const DynMatrix<Scalar> sym = Scalar(0.5) * (a + a.transpose());
  Eigen::SelfAdjointEigenSolver<DynMatrix<Scalar>> es(sym, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

template <typename Derived>
bool is_symmetric_psd(const Eigen::MatrixBase<Derived>& a, typename Derived::Scalar tol = 1e-10) {
  using Scalar = typename Derived::Scalar;
  if (a.rows() != a.cols()) return false;
  const Scalar scale = std::max<Scalar>(Scalar(1), a.norm());
  if ((a - a.transpose()).norm() > tol * scale) return false;
  return min_symmetric_eigenvalue(a) >= -tol * scale;
}

/// F with F F^T = a for symmetric PSD `a`, via the symmetric eigendecomposition
/// (tiny negative eigenvalues are clipped to zero).
template <typename Derived>
typename Derived::PlainObject psd_factor(const Eigen::MatrixBase<Derived>& a) {
  using Scalar = typename Derived::Scalar;
  detail::require_square(a, "psd_factor");
  const DynMatrix<Scalar> sym = Scalar(0.5) * (a + a.transpose());
  Eigen::SelfAdjointEigenSolver<DynMatrix<Scalar>> es(sym);
  const auto root = es.eigenvalues().cwiseMax(Scalar(0)).cwiseSqrt();
  typename Derived::PlainObject f = es.eigenvectors() * root.asDiagonal();
  return f;
}

}  // namespace tts
