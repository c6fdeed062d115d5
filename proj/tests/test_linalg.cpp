#include <cmath>
#include <limits>

#include <gtest/gtest.h>

#include "linrep/errors.hpp"
#include "linrep/linalg.hpp"
#include "oracles.hpp"

using namespace linrep;

namespace {

double max_abs(const Matrix& m) { return m.cwiseAbs().maxCoeff(); }

TEST(Svd, IdentityHasUnitSingularValues) {
  const SvdResult r = svd(Matrix::Identity(2, 2));
  EXPECT_NEAR(r.singular_values(0), 1.0, 1e-15);
  EXPECT_NEAR(r.singular_values(1), 1.0, 1e-15);
  EXPECT_LE(max_abs(r.u.cwiseAbs() - Matrix::Identity(2, 2)), 1e-15);
  EXPECT_LE(max_abs(r.v.cwiseAbs() - Matrix::Identity(2, 2)), 1e-15);
}

TEST(Svd, DiagonalWithZero) {
  Matrix a(2, 2);
  a << 3, 0, 0, 0;
  const SvdResult r = svd(a);
  EXPECT_NEAR(r.singular_values(0), 3.0, 1e-15);
  EXPECT_NEAR(r.singular_values(1), 0.0, 1e-15);
}

TEST(Svd, SquaredSingularValuesMatchJacobiEigenvalues) {
  Rng rng(11);
  for (int rep = 0; rep < 20; ++rep) {
    const Matrix a = oracle::random_matrix(rng, 5, 3);
    const SvdResult r = svd(a);
    const auto ev = oracle::jacobi_eigenvalues(oracle::mat_mul(oracle::transpose(a), a));
    for (int i = 0; i < 3; ++i) EXPECT_NEAR(r.singular_values(i) * r.singular_values(i), ev[2 - i], 1e-8);
  }
}

TEST(Svd, OrthonormalFactorsAndReconstruction) {
  Rng rng(12);
  for (int rep = 0; rep < 50; ++rep) {
    std::uniform_int_distribution<int> dim(1, 9);
    const auto m = static_cast<std::size_t>(dim(rng)), n = static_cast<std::size_t>(dim(rng));
    const Matrix a = oracle::random_matrix(rng, m, n);
    const SvdResult r = svd(a);
    const auto k = static_cast<Eigen::Index>(std::min(m, n));
    EXPECT_LE(max_abs(r.u.transpose() * r.u - Matrix::Identity(k, k)), 1e-10);
    EXPECT_LE(max_abs(r.v.transpose() * r.v - Matrix::Identity(k, k)), 1e-10);
    const Matrix back = r.u * r.singular_values.asDiagonal() * r.v.transpose();
    EXPECT_LE((back - a).norm() / a.norm(), 1e-8);
    for (Eigen::Index i = 1; i < k; ++i) EXPECT_GE(r.singular_values(i - 1), r.singular_values(i));
  }
}

TEST(Svd, SignConventionAndDeterminism) {
  Rng rng(13);
  const Matrix a = oracle::random_matrix(rng, 6, 4);
  const SvdResult r1 = svd(a);
  const SvdResult r2 = svd(a);
  EXPECT_EQ(r1.u, r2.u);
  EXPECT_EQ(r1.v, r2.v);
  for (Eigen::Index j = 0; j < r1.u.cols(); ++j) {
    for (Eigen::Index i = 0; i < r1.u.rows(); ++i) {
      if (std::abs(r1.u(i, j)) > 1e-12) {
        EXPECT_GT(r1.u(i, j), 0.0);
        break;
      }
    }
  }
  // Flipping the input sign flips the right vectors only.
  const SvdResult neg = svd(-a);
  EXPECT_LE(max_abs(neg.u - r1.u), 1e-10);
  EXPECT_LE(max_abs(neg.v + r1.v), 1e-10);
}

TEST(Svd, RejectsNonFinite) {
  Matrix a = Matrix::Identity(2, 2);
  a(0, 1) = std::numeric_limits<double>::quiet_NaN();
  EXPECT_THROW(svd(a), InvalidMatrix);
  a(0, 1) = std::numeric_limits<double>::infinity();
  EXPECT_THROW(svd(a), InvalidMatrix);
  EXPECT_THROW(svd(Matrix(0, 0)), InvalidMatrix);
}

TEST(Ridge, IdentityDesign) {
  const Matrix x = Matrix::Identity(2, 2);
  Vector y(2);
  y << 1, 2;
  const Vector w0 = ridge_solve(x, y, 0.0);
  EXPECT_NEAR(w0(0), 1.0, 1e-15);
  EXPECT_NEAR(w0(1), 2.0, 1e-15);
  const Vector w = ridge_solve(x, y, 0.5);
  EXPECT_NEAR(w(0), 0.5, 1e-15);
  EXPECT_NEAR(w(1), 1.0, 1e-15);
}

TEST(Ridge, MatchesNormalEquationOracle) {
  Rng rng(21);
  for (int rep = 0; rep < 20; ++rep) {
    const Matrix x = oracle::random_matrix(rng, 20, 5);
    const Vector y = oracle::random_vector(rng, 20);
    const Vector w = ridge_solve(x, y, 0.01);
    const Vector ref = oracle::normal_equation_ridge(x, y, 0.01);
    EXPECT_LE((w - ref).cwiseAbs().maxCoeff(), 1e-8);
  }
}

TEST(Ridge, SingularWithoutPenaltyThrows) {
  Matrix x(3, 2);
  x << 1, 2, 2, 4, 3, 6;
  const Vector y = Vector::Ones(3);
  EXPECT_THROW(ridge_solve(x, y, 0.0), SingularSystem);
  EXPECT_NO_THROW(ridge_solve(x, y, 1e-6));
}

TEST(Ridge, NormShrinksWithLambda) {
  Rng rng(22);
  for (int rep = 0; rep < 30; ++rep) {
    const Matrix x = oracle::random_matrix(rng, 8, 12);  // underdetermined: needs lambda > 0
    const Vector y = oracle::random_vector(rng, 8);
    double prev = std::numeric_limits<double>::infinity();
    for (double lambda : {1e-6, 1e-3, 1e-1, 1.0, 10.0}) {
      const double norm = ridge_solve(x, y, lambda).norm();
      EXPECT_LE(norm, prev + 1e-12);
      prev = norm;
    }
  }
}

TEST(Ridge, ShapeAndValueChecks) {
  EXPECT_THROW(ridge_solve(Matrix::Identity(2, 2), Vector::Ones(3), 0.1), ShapeError);
  EXPECT_THROW(ridge_solve(Matrix::Identity(2, 2), Vector::Ones(2), -1.0), std::invalid_argument);
}

TEST(LeastSquares, MinimalNormWhenUnderdetermined) {
  Matrix x(1, 3);
  x << 1, 2, 2;
  Vector y(1);
  y << 9;
  const Vector w = least_squares(x, y, 0.0);
  // Minimal-norm solution is x^T (x x^T)^{-1} y = (1, 2, 2).
  EXPECT_NEAR(w(0), 1.0, 1e-12);
  EXPECT_NEAR(w(1), 2.0, 1e-12);
  EXPECT_NEAR(w(2), 2.0, 1e-12);
}

TEST(MinEigenvalue, Examples) {
  Matrix d = Matrix::Zero(2, 2);
  d(0, 0) = 2;
  d(1, 1) = 5;
  EXPECT_NEAR(min_eigenvalue(d), 2.0, 1e-15);
  EXPECT_NEAR(min_eigenvalue(Matrix::Identity(4, 4)), 1.0, 1e-15);
}

TEST(MinEigenvalue, MatchesJacobiOracle) {
  Rng rng(31);
  for (int rep = 0; rep < 20; ++rep) {
    const Matrix a = oracle::random_matrix(rng, 6, 6);
    const Matrix s = oracle::mat_mul(oracle::transpose(a), a);
    EXPECT_NEAR(min_eigenvalue(s), oracle::jacobi_eigenvalues(s).front(), 1e-9);
  }
}

TEST(MinEigenvalue, RayleighQuotientBound) {
  Rng rng(32);
  for (int rep = 0; rep < 10; ++rep) {
    const Matrix a = oracle::random_matrix(rng, 5, 5);
    const Matrix s = a.transpose() * a;
    const double lo = min_eigenvalue(s);
    for (int k = 0; k < 100; ++k) {
      const Vector v = oracle::random_vector(rng, 5);
      EXPECT_LE(lo, v.dot(s * v) / v.squaredNorm() + 1e-12);
    }
  }
}

TEST(MinEigenvalue, RejectsAsymmetricAndIndefinite) {
  Matrix a(2, 2);
  a << 1, 2, 0, 1;
  EXPECT_THROW(min_eigenvalue(a), InvalidMatrix);
  Matrix b(2, 2);
  b << 1, 0, 0, -1;
  EXPECT_THROW(min_eigenvalue(b), InvalidMatrix);
}

TEST(Projection, Examples) {
  Matrix b = Matrix::Zero(3, 1);
  b(0, 0) = 1;
  Vector e1 = Vector::Zero(3), e2 = Vector::Zero(3);
  e1(0) = 1;
  e2(1) = 1;
  EXPECT_NEAR(projection_residual_norm(b, e1), 0.0, 1e-15);
  EXPECT_NEAR(projection_residual_norm(b, e2), 1.0, 1e-15);
}

TEST(Projection, MatchesExplicitProjector) {
  Rng rng(41);
  for (int rep = 0; rep < 20; ++rep) {
    const Matrix b = oracle::random_orthonormal(rng, 8, 3);
    const Vector v = oracle::random_vector(rng, 8);
    const Matrix p = oracle::explicit_projector(b);
    const Vector r = v - p * v;
    EXPECT_NEAR(projection_residual_norm(b, v), r.norm(), 1e-10);
  }
}

TEST(Projection, InSpanVectorsHaveZeroResidual) {
  Rng rng(42);
  for (int rep = 0; rep < 20; ++rep) {
    const Matrix b = oracle::random_orthonormal(rng, 7, 3);
    const Vector u = oracle::random_vector(rng, 3);
    EXPECT_LE(projection_residual_norm(b, b * u), 1e-10);
  }
}

TEST(Projection, RejectsNonOrthonormalBasis) {
  Matrix b = Matrix::Zero(3, 1);
  b(0, 0) = 2;
  EXPECT_THROW(projection_residual_norm(b, Vector::Ones(3)), InvalidBasis);
  EXPECT_NEAR(orthonormality_defect(b), 3.0, 1e-15);
}

}  // namespace
