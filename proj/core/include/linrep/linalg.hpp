#pragma once

#include <Eigen/Dense>

namespace linrep {

// Dense row-major matrix; the numeric currency of the whole library.
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;

struct SvdResult {
  Matrix u;                // m x r, orthonormal columns
  Vector singular_values;  // length r = min(m, n), nonincreasing
  Matrix v;                // n x r, orthonormal columns
};

bool all_finite(const Matrix& a);
bool all_finite(const Vector& v);

/// Thin SVD. Columns are sign-normalized so that the first entry of each
/// left singular vector with magnitude above 1e-12 is positive; the matching
/// right singular vector is flipped with it. Deterministic for a fixed input.
/// Throws InvalidMatrix on empty or non-finite input.
SvdResult svd(const Matrix& a);

/// argmin_w (1/2n)||Xw - y||^2 + (lambda/2)||w||^2, i.e.
/// w = (X^T X + n lambda I)^{-1} X^T y.
/// Throws SingularSystem when lambda == 0 and X^T X is numerically singular.
Vector ridge_solve(const Matrix& x, const Vector& y, double lambda);

/// ridge_solve, except that with lambda == 0 a rank-deficient system yields
/// the minimal-norm least-squares solution instead of throwing.
Vector least_squares(const Matrix& x, const Vector& y, double lambda);

/// Smallest eigenvalue of a symmetric positive semi-definite matrix.
/// Throws InvalidMatrix if the input is not symmetric to 1e-10 or has an
/// eigenvalue below -1e-10 (relative to its largest magnitude).
double min_eigenvalue(const Matrix& s);

/// ||v - B (B^T v)||_2 for B with orthonormal columns.
/// Throws InvalidBasis if B^T B deviates from I by more than 1e-8.
double projection_residual_norm(const Matrix& b, const Vector& v);

/// max |B^T B - I| entry; zero for an exactly orthonormal basis.
double orthonormality_defect(const Matrix& b);

}  // namespace linrep
