#pragma once

#include <cstddef>

#include "linrep/linalg.hpp"
#include "linrep/rng.hpp"

namespace linrep {

/// Finite linear MDP over hidden states [0, K):
///   P(s' | s, a) = <phi(s, a), psi(s')>,   r(s, a) = <phi(s, a), theta>.
/// Feature rows are indexed action-major, row = a * K + s, which lines up with
/// the column order of the grid-world ground-truth representation.
class LinearMdpSpec {
 public:
  /// features: (K * A) x d, psi: K x d, theta: d.
  /// Throws ShapeError on inconsistent dimensions and InvalidMatrix when the
  /// induced transition rows are not probability distributions (1e-9).
  LinearMdpSpec(std::size_t num_states, std::size_t num_actions, std::size_t horizon, Matrix features,
                Matrix psi, Vector theta, double reward_noise = 0.0);

  std::size_t num_states() const { return num_states_; }
  std::size_t num_actions() const { return num_actions_; }
  std::size_t horizon() const { return horizon_; }
  std::size_t feature_dim() const { return static_cast<std::size_t>(theta_.size()); }
  double reward_noise() const { return reward_noise_; }

  std::size_t pair_index(std::size_t state, std::size_t action) const { return action * num_states_ + state; }

  const Matrix& features() const { return features_; }
  const Matrix& psi() const { return psi_; }
  const Vector& theta() const { return theta_; }

  Vector feature(std::size_t state, std::size_t action) const;
  double reward(std::size_t state, std::size_t action) const;
  double transition_probability(std::size_t state, std::size_t action, std::size_t next) const;
  /// Row (s, a) of the (K * A) x K transition matrix.
  Vector transition_row(std::size_t state, std::size_t action) const;
  const Matrix& transition_matrix() const { return transitions_; }
  /// (K * A) vector of expected rewards.
  const Vector& rewards() const { return rewards_; }

  void check_indices(std::size_t state, std::size_t action) const;

 private:
  std::size_t num_states_;
  std::size_t num_actions_;
  std::size_t horizon_;
  Matrix features_;
  Matrix psi_;
  Vector theta_;
  double reward_noise_;
  Matrix transitions_;
  Vector rewards_;
};

/// Tabular MDP as a linear MDP with one-hot features (d = K * A).
/// transitions: (K * A) x K with row index a * K + s; rewards: K * A.
LinearMdpSpec make_tabular_mdp(std::size_t num_states, std::size_t num_actions, std::size_t horizon,
                               const Matrix& transitions, const Vector& rewards, double reward_noise = 0.0);

struct GenerativeReply {
  double reward;
  std::size_t next_state;
};

/// One generative-model call: next state drawn from P(. | s, a), reward
/// r(s, a) + z with z uniform on [-sigma, sigma]. Throws DomainError on
/// out-of-range indices.
GenerativeReply generative_query(const LinearMdpSpec& spec, std::size_t state, std::size_t action, Rng& rng);

/// theta + sum_{s'} v_next[s'] psi(s'): the weight vector whose inner product
/// with phi(s, a) is r(s, a) + E[v_next(s')]. Valid for any v_next.
/// Throws ShapeError on dimension mismatch.
Vector q_weight_from_value(const Vector& theta, const Matrix& psi, const Vector& v_next);

}  // namespace linrep
