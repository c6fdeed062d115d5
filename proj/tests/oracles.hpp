#pragma once

// Slow, independent reference implementations. Nothing here calls an Eigen
// decomposition; matrices are only used as storage.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <random>
#include <stdexcept>
#include <utility>
#include <vector>

#include "linrep/gridworld.hpp"
#include "linrep/linalg.hpp"
#include "linrep/linear_mdp.hpp"
#include "linrep/rng.hpp"

namespace oracle {

using linrep::Matrix;
using linrep::Rng;
using linrep::Vector;

inline Matrix random_matrix(Rng& rng, std::size_t rows, std::size_t cols) {
  std::normal_distribution<double> g(0.0, 1.0);
  Matrix m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) m(i, j) = g(rng);
  return m;
}

inline Vector random_vector(Rng& rng, std::size_t n) {
  std::normal_distribution<double> g(0.0, 1.0);
  Vector v(static_cast<Eigen::Index>(n));
  for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = g(rng);
  return v;
}

inline Matrix mat_mul(const Matrix& a, const Matrix& b) {
  Matrix c = Matrix::Zero(a.rows(), b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index k = 0; k < a.cols(); ++k)
      for (Eigen::Index j = 0; j < b.cols(); ++j) c(i, j) += a(i, k) * b(k, j);
  return c;
}

inline Matrix transpose(const Matrix& a) {
  Matrix t(a.cols(), a.rows());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j) t(j, i) = a(i, j);
  return t;
}

// Gaussian elimination with partial pivoting; a is square.
inline Vector gauss_solve(Matrix a, Vector b) {
  const Eigen::Index n = a.rows();
  for (Eigen::Index col = 0; col < n; ++col) {
    Eigen::Index piv = col;
    for (Eigen::Index r = col + 1; r < n; ++r)
      if (std::abs(a(r, col)) > std::abs(a(piv, col))) piv = r;
    if (std::abs(a(piv, col)) < 1e-300) throw std::runtime_error("gauss_solve: singular");
    if (piv != col) {
      for (Eigen::Index j = 0; j < n; ++j) std::swap(a(col, j), a(piv, j));
      std::swap(b(col), b(piv));
    }
    for (Eigen::Index r = col + 1; r < n; ++r) {
      const double f = a(r, col) / a(col, col);
      for (Eigen::Index j = col; j < n; ++j) a(r, j) -= f * a(col, j);
      b(r) -= f * b(col);
    }
  }
  Vector x(n);
  for (Eigen::Index i = n - 1; i >= 0; --i) {
    double s = b(i);
    for (Eigen::Index j = i + 1; j < n; ++j) s -= a(i, j) * x(j);
    x(i) = s / a(i, i);
  }
  return x;
}

// (X^T X + n lambda I) w = X^T y by explicit normal equations.
inline Vector normal_equation_ridge(const Matrix& x, const Vector& y, double lambda) {
  Matrix xt = transpose(x);
  Matrix g = mat_mul(xt, x);
  for (Eigen::Index i = 0; i < g.rows(); ++i) g(i, i) += static_cast<double>(x.rows()) * lambda;
  Vector rhs = Vector::Zero(x.cols());
  for (Eigen::Index j = 0; j < x.cols(); ++j)
    for (Eigen::Index i = 0; i < x.rows(); ++i) rhs(j) += x(i, j) * y(i);
  return gauss_solve(g, rhs);
}

// Cyclic Jacobi rotations; returns eigenvalues in ascending order.
inline std::vector<double> jacobi_eigenvalues(Matrix a) {
  const Eigen::Index n = a.rows();
  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = 0; j < n; ++j)
        if (i != j) off += a(i, j) * a(i, j);
    if (off < 1e-26) break;
    for (Eigen::Index p = 0; p < n; ++p) {
      for (Eigen::Index q = p + 1; q < n; ++q) {
        if (std::abs(a(p, q)) < 1e-300) continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * a(p, q));
        const double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (Eigen::Index k = 0; k < n; ++k) {
          const double akp = a(k, p), akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (Eigen::Index k = 0; k < n; ++k) {
          const double apk = a(p, k), aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
      }
    }
  }
  std::vector<double> ev(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) ev[static_cast<std::size_t>(i)] = a(i, i);
  std::sort(ev.begin(), ev.end());
  return ev;
}

// P = B (B^T B)^{-1} B^T, B with full column rank.
inline Matrix explicit_projector(const Matrix& b) {
  const Matrix bt = transpose(b);
  const Matrix g = mat_mul(bt, b);
  Matrix ginv_bt(b.cols(), b.rows());
  for (Eigen::Index j = 0; j < b.rows(); ++j) {
    Vector col(b.cols());
    for (Eigen::Index i = 0; i < b.cols(); ++i) col(i) = bt(i, j);
    const Vector s = gauss_solve(g, col);
    for (Eigen::Index i = 0; i < b.cols(); ++i) ginv_bt(i, j) = s(i);
  }
  return mat_mul(b, ginv_bt);
}

// Gram-Schmidt on the columns of a random Gaussian matrix.
inline Matrix random_orthonormal(Rng& rng, std::size_t rows, std::size_t cols) {
  Matrix m = random_matrix(rng, rows, cols);
  for (Eigen::Index j = 0; j < m.cols(); ++j) {
    for (int pass = 0; pass < 2; ++pass) {
      for (Eigen::Index k = 0; k < j; ++k) {
        double dot = 0.0;
        for (Eigen::Index i = 0; i < m.rows(); ++i) dot += m(i, j) * m(i, k);
        for (Eigen::Index i = 0; i < m.rows(); ++i) m(i, j) -= dot * m(i, k);
      }
    }
    double norm = 0.0;
    for (Eigen::Index i = 0; i < m.rows(); ++i) norm += m(i, j) * m(i, j);
    norm = std::sqrt(norm);
    for (Eigen::Index i = 0; i < m.rows(); ++i) m(i, j) /= norm;
  }
  return m;
}

// A tabular MDP stored plainly: p[a][s][s'], r[a][s].
struct Tabular {
  std::size_t k = 0;
  std::size_t a = 0;
  std::vector<std::vector<std::vector<double>>> p;
  std::vector<std::vector<double>> r;

  linrep::LinearMdpSpec to_spec(std::size_t horizon, double noise = 0.0) const {
    Matrix trans(static_cast<Eigen::Index>(k * a), static_cast<Eigen::Index>(k));
    Vector rew(static_cast<Eigen::Index>(k * a));
    for (std::size_t act = 0; act < a; ++act)
      for (std::size_t s = 0; s < k; ++s) {
        rew(static_cast<Eigen::Index>(act * k + s)) = r[act][s];
        for (std::size_t n = 0; n < k; ++n) trans(static_cast<Eigen::Index>(act * k + s), static_cast<Eigen::Index>(n)) = p[act][s][n];
      }
    return linrep::make_tabular_mdp(k, a, horizon, trans, rew, noise);
  }
};

inline Tabular random_tabular(Rng& rng, std::size_t k, std::size_t a) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::bernoulli_distribution sparse(0.3);
  Tabular m;
  m.k = k;
  m.a = a;
  m.p.assign(a, std::vector<std::vector<double>>(k, std::vector<double>(k, 0.0)));
  m.r.assign(a, std::vector<double>(k, 0.0));
  for (std::size_t act = 0; act < a; ++act)
    for (std::size_t s = 0; s < k; ++s) {
      double total = 0.0;
      for (std::size_t n = 0; n < k; ++n) {
        m.p[act][s][n] = sparse(rng) ? 0.0 : u(rng);
        total += m.p[act][s][n];
      }
      if (total == 0.0) {
        m.p[act][s][s] = 1.0;
        total = 1.0;
      }
      for (std::size_t n = 0; n < k; ++n) m.p[act][s][n] /= total;
      m.r[act][s] = 2.0 * u(rng) - 1.0;
    }
  return m;
}

// Backward induction with plain loops: v[h][s], h = 0..H (v[H] = 0).
inline std::vector<std::vector<double>> dp_values(const Tabular& m, std::size_t horizon) {
  std::vector<std::vector<double>> v(horizon + 1, std::vector<double>(m.k, 0.0));
  for (std::size_t h = horizon; h-- > 0;) {
    for (std::size_t s = 0; s < m.k; ++s) {
      double best = -1e300;
      for (std::size_t act = 0; act < m.a; ++act) {
        double q = m.r[act][s];
        for (std::size_t n = 0; n < m.k; ++n) q += m.p[act][s][n] * v[h + 1][n];
        best = std::max(best, q);
      }
      v[h][s] = best;
    }
  }
  return v;
}

// Exhaustive search over every deterministic history-free policy
// pi[h][s] (|A|^(K H) of them); value of each computed by exact policy
// evaluation. Feasible only for tiny instances.
inline double brute_force_optimal(const Tabular& m, std::size_t horizon, std::size_t start) {
  const std::size_t slots = m.k * horizon;
  std::vector<std::size_t> pi(slots, 0);
  double best = -1e300;
  for (;;) {
    std::vector<double> v(m.k, 0.0);
    for (std::size_t h = horizon; h-- > 0;) {
      std::vector<double> nv(m.k, 0.0);
      for (std::size_t s = 0; s < m.k; ++s) {
        const std::size_t act = pi[h * m.k + s];
        double q = m.r[act][s];
        for (std::size_t n = 0; n < m.k; ++n) q += m.p[act][s][n] * v[n];
        nv[s] = q;
      }
      v = nv;
    }
    best = std::max(best, v[start]);
    std::size_t i = 0;
    while (i < slots && ++pi[i] == m.a) pi[i++] = 0;
    if (i == slots) break;
  }
  return best;
}

// Expectimax over the full history tree without memoization: every action
// choice at every reachable history is enumerated.
inline double history_tree_value(const Tabular& m, std::size_t levels_left, std::size_t state) {
  if (levels_left == 0) return 0.0;
  double best = -1e300;
  for (std::size_t act = 0; act < m.a; ++act) {
    double q = m.r[act][state];
    for (std::size_t n = 0; n < m.k; ++n)
      if (m.p[act][state][n] > 0.0) q += m.p[act][state][n] * history_tree_value(m, levels_left - 1, n);
    best = std::max(best, q);
  }
  return best;
}

// The grid-world kernel rebuilt from its rules by enumerating realized
// directions, independent of build_tabular_oracle.
inline Tabular grid_tabular(const linrep::GridWorld& grid) {
  Tabular m;
  m.k = grid.num_states();
  m.a = linrep::kNumActions;
  m.p.assign(m.a, std::vector<std::vector<double>>(m.k, std::vector<double>(m.k, 0.0)));
  m.r.assign(m.a, std::vector<double>(m.k, 0.0));
  const auto& layout = grid.config().layout;
  const double p = grid.deviation_prob();
  auto state_at = [&](std::size_t cell) {
    for (std::size_t s = 0; s < m.k; ++s)
      if (grid.cell_of_state(s) == cell) return s;
    throw std::logic_error("not a vacant cell");
  };
  for (std::size_t s = 0; s < m.k; ++s) {
    if (grid.is_terminal(s)) {
      for (std::size_t act = 0; act < m.a; ++act) m.p[act][s][s] = 1.0;
      continue;
    }
    const std::size_t cell = grid.cell_of_state(s);
    const long row = static_cast<long>(cell / layout.width), col = static_cast<long>(cell % layout.width);
    for (std::size_t act = 0; act < m.a; ++act) {
      for (std::size_t dir = 0; dir < 4; ++dir) {
        const double prob = dir == act ? 1.0 - p : p / 3.0;
        if (prob == 0.0) continue;
        const long dr[] = {-1, 1, 0, 0}, dc[] = {0, 0, -1, 1};
        const long nr = row + dr[dir], nc = col + dc[dir];
        std::size_t next = s;
        double reward = linrep::kGroundReward;
        if (nr >= 0 && nc >= 0 && nr < static_cast<long>(layout.height) && nc < static_cast<long>(layout.width)) {
          const auto ncell = static_cast<std::size_t>(nr) * layout.width + static_cast<std::size_t>(nc);
          const auto type = layout.cells[ncell];
          if (type != linrep::CellType::Wall) {
            next = state_at(ncell);
            reward = type == linrep::CellType::Fire ? linrep::kFireReward
                     : type == linrep::CellType::Destination ? linrep::kDestinationReward
                                                             : linrep::kGroundReward;
          }
        }
        m.p[act][s][next] += prob;
        m.r[act][s] += prob * reward;
      }
    }
  }
  return m;
}

}  // namespace oracle
