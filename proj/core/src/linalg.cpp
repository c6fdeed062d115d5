#include "linrep/linalg.hpp"

#include <algorithm>
#include <cmath>

#include "linrep/errors.hpp"

namespace linrep {

namespace {

constexpr double kSignThreshold = 1e-12;
constexpr double kSingularRcond = 1e-12;
constexpr double kSymmetryTol = 1e-10;
constexpr double kPsdTol = 1e-10;
constexpr double kBasisTol = 1e-8;

}  // namespace

bool all_finite(const Matrix& a) { return a.allFinite(); }
bool all_finite(const Vector& v) { return v.allFinite(); }

SvdResult svd(const Matrix& a) {
  if (a.size() == 0) throw InvalidMatrix("svd: empty matrix");
  if (!a.allFinite()) throw InvalidMatrix("svd: non-finite entry");

  Eigen::JacobiSVD<Eigen::MatrixXd> solver(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
  SvdResult out{solver.matrixU(), solver.singularValues(), solver.matrixV()};

  for (Eigen::Index j = 0; j < out.u.cols(); ++j) {
    for (Eigen::Index i = 0; i < out.u.rows(); ++i) {
      const double x = out.u(i, j);
      if (std::abs(x) > kSignThreshold) {
        if (x < 0) {
          out.u.col(j) *= -1.0;
          out.v.col(j) *= -1.0;
        }
        break;
      }
    }
  }
  return out;
}

Vector ridge_solve(const Matrix& x, const Vector& y, double lambda) {
  if (x.rows() == 0) throw ShapeError("ridge_solve: design has no rows");
  if (x.rows() != y.size()) throw ShapeError("ridge_solve: label length does not match design rows");
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw std::invalid_argument("ridge_solve: lambda must be finite and >= 0");
  if (!x.allFinite() || !y.allFinite()) throw InvalidMatrix("ridge_solve: non-finite input");

  const auto n = static_cast<double>(x.rows());
  const Eigen::Index p = x.cols();
  Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(p, p);
  gram.selfadjointView<Eigen::Lower>().rankUpdate(x.transpose());
  gram = gram.selfadjointView<Eigen::Lower>();
  gram.diagonal().array() += n * lambda;
  const Vector rhs = x.transpose() * y;

  Eigen::LLT<Eigen::MatrixXd> llt(gram);
  if (lambda == 0.0 && (llt.info() != Eigen::Success || llt.rcond() < kSingularRcond)) {
    throw SingularSystem("ridge_solve: X^T X is singular and lambda = 0");
  }
  if (llt.info() != Eigen::Success) {
    // Only reachable through catastrophic cancellation with tiny lambda.
    Eigen::LDLT<Eigen::MatrixXd> ldlt(gram);
    return ldlt.solve(rhs);
  }
  return llt.solve(rhs);
}

Vector least_squares(const Matrix& x, const Vector& y, double lambda) {
  if (lambda > 0.0) return ridge_solve(x, y, lambda);
  try {
    return ridge_solve(x, y, 0.0);
  } catch (const SingularSystem&) {
    Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(x);
    return cod.solve(y);
  }
}

double min_eigenvalue(const Matrix& s) {
  if (s.rows() != s.cols() || s.size() == 0) throw InvalidMatrix("min_eigenvalue: matrix must be square and nonempty");
  if (!s.allFinite()) throw InvalidMatrix("min_eigenvalue: non-finite entry");
  if ((s - s.transpose()).cwiseAbs().maxCoeff() > kSymmetryTol) {
    throw InvalidMatrix("min_eigenvalue: matrix is not symmetric");
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(s, Eigen::EigenvaluesOnly);
  const double lo = solver.eigenvalues()(0);
  const double scale = std::max(1.0, solver.eigenvalues().cwiseAbs().maxCoeff());
  if (lo < -kPsdTol * scale) throw InvalidMatrix("min_eigenvalue: matrix is not positive semi-definite");
  return lo;
}

double orthonormality_defect(const Matrix& b) {
  const Eigen::MatrixXd gram = b.transpose() * b;
  return (gram - Eigen::MatrixXd::Identity(b.cols(), b.cols())).cwiseAbs().maxCoeff();
}

double projection_residual_norm(const Matrix& b, const Vector& v) {
  if (b.rows() != v.size()) throw ShapeError("projection_residual_norm: dimension mismatch");
  if (b.cols() > 0 && orthonormality_defect(b) > kBasisTol) {
    throw InvalidBasis("projection_residual_norm: columns are not orthonormal");
  }
  const Vector coeffs = b.transpose() * v;
  return (v - b * coeffs).norm();
}

}  // namespace linrep
