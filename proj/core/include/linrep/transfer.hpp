#pragma once

#include <cstddef>
#include <vector>

#include "linrep/gridworld.hpp"
#include "linrep/linalg.hpp"
#include "linrep/representation.hpp"
#include "linrep/rng.hpp"
#include "linrep/sampling.hpp"

namespace linrep {

struct TransferLevel {
  Vector w_new;             // d
  double kappa = 0.0;       // LAFA kappa of the sampling distribution under b_hat_h
  bool kappa_infinite = false;
  double residual = 0.0;    // mean squared training residual
};

struct TransferResult {
  std::size_t n = 0;
  double ridge_lambda = 0.0;
  std::vector<TransferLevel> levels;  // levels[h - 1]

  const TransferLevel& level(std::size_t h) const { return levels.at(h - 1); }
};

/// Greedy policy pi_h(obs) = argmax_a xi(obs, a)^T B_h w_h, ties to the
/// lowest action index.
class GreedyPolicy {
 public:
  GreedyPolicy(const GridWorld& grid, std::vector<Matrix> b_hats, std::vector<Vector> weights);

  std::size_t horizon() const { return q_.size(); }
  std::size_t act(const Vector& observation, std::size_t level) const;
  const Matrix& b_hat(std::size_t level) const { return b_hat_.at(level - 1); }
  const Vector& weights(std::size_t level) const { return w_.at(level - 1); }
  const LinearQFunction& q_function(std::size_t level) const { return q_.at(level - 1); }

 private:
  std::vector<Matrix> b_hat_;
  std::vector<Vector> w_;
  std::vector<LinearQFunction> q_;
};

std::size_t greedy_action(const GreedyPolicy& policy, const Vector& observation, std::size_t level);

/// Learns per-level weights for a new task on top of the frozen b_hat_h:
/// backward over levels, n samples from `dist`, (H - h + 1)^2 queries each,
/// projected features z = b_hat_h^T x, then least_squares(Z, labels, lambda)
/// (minimal-norm when lambda == 0 and the system is rank deficient).
TransferResult transfer(const LearnedRepresentation& rep, const GridWorld& new_task, const SamplingDistribution& dist,
                        std::size_t n, double ridge_lambda, Rng& rng);

GreedyPolicy make_policy(const LearnedRepresentation& rep, const TransferResult& result, const GridWorld& grid);

/// Policy of training task `task` read straight off the representation
/// (B_h and w_hat_h[:, task]); used for the learn-from-scratch baseline.
GreedyPolicy task_policy(const LearnedRepresentation& rep, std::size_t task, const GridWorld& grid);

}  // namespace linrep
