#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "linrep/gridworld.hpp"
#include "linrep/linalg.hpp"
#include "linrep/rng.hpp"
#include "linrep/sampling.hpp"

namespace linrep {

struct StateAction {
  std::size_t state;
  std::size_t action;
};

/// Q(obs, a) = xi(obs, a)^T theta for an ambient weight vector theta
/// (4 * D_obs), and the greedy value V(obs) = max_a Q(obs, a).
class LinearQFunction {
 public:
  LinearQFunction(const GridWorld& grid, Vector theta);

  double q(const Vector& observation, std::size_t action) const;
  double value(const Vector& observation) const;
  /// Lowest action index among maximizers.
  std::size_t greedy_action(const Vector& observation) const;

  /// V at hidden state `state` under a fresh observation. The noise block
  /// enters the four Q-values only through g = (u_a^T o2)_a, which is drawn
  /// from its exact Gaussian law N(0, sigma'^2 U U^T) with four normals
  /// instead of materializing D_obs - K noise coordinates.
  double sample_value(std::size_t state, Rng& rng) const;

  const Vector& theta() const { return theta_; }

 private:
  std::size_t num_states_;
  std::size_t obs_dim_;
  Vector theta_;
  Eigen::Matrix4d noise_factor_;  // L with L L^T = sigma'^2 U U^T
  bool noisy_ = false;
};

/// V_{h+1}(s') for a next hidden state; empty means V == 0.
using NextValueFn = std::function<double(std::size_t, Rng&)>;

/// Monte Carlo Q targets. For each pair, m generative queries:
///   label = (1/m) sum_k [ r_k + V_{h+1}(s'_k) ],
/// with V_{h+1} = 0 once the episode has terminated.
Vector build_q_targets(std::span<const StateAction> samples, std::size_t m, const GridWorld& task,
                       const NextValueFn& next_value, Rng& rng);

/// Number of generative queries per sample at level h of horizon H: (H - h + 1)^2.
std::size_t queries_per_sample(std::size_t horizon, std::size_t level);

/// ridge_solve on the design whose rows are xi(observation_j, action_j),
/// exploiting that X^T X is block diagonal over action blocks. Same
/// normalization and SingularSystem behaviour as ridge_solve.
Vector ridge_solve_blocked(const GridWorld& grid, std::span<const DrawnSample> samples, const Vector& labels,
                           double lambda);

struct LevelFit {
  Matrix b_hat;        // D x d, orthonormal columns
  Matrix w_hat;        // d x T
  Matrix theta_stack;  // D x T
  Vector singular_values;
};

/// Top-d left singular vectors of theta_stack; w_hat = b_hat^T theta_stack.
LevelFit fit_subspace(Matrix theta_stack, std::size_t d);

/// Independent ridge regression per task, stacked, then fit_subspace.
LevelFit fit_level(std::span<const Matrix> designs, std::span<const Vector> labels, std::size_t d,
                   double ridge_lambda);

struct RepresentationLevel {
  Matrix b_hat;
  Matrix w_hat;
  Matrix theta_stack;
  Vector singular_values;
  double value_min = 0.0;  // range of clean-observation bootstrap values
  double value_max = 0.0;
};

struct LearnedRepresentation {
  std::size_t ambient_dim = 0;
  std::size_t rank = 0;
  std::size_t num_tasks = 0;
  std::size_t horizon = 0;
  std::uint64_t seed = 0;
  std::string config_hash;
  std::vector<RepresentationLevel> levels;  // levels[h - 1]

  const RepresentationLevel& level(std::size_t h) const;
  /// b_hat_h * w_hat_h[:, t].
  Vector task_weights(std::size_t h, std::size_t t) const;
};

/// B* at every level, no task weights.
LearnedRepresentation ground_truth_representation_levels(const GridWorld& grid);

struct TrainConfig {
  std::size_t samples_per_task = 0;  // N
  std::size_t rank = 0;              // d; clamped to min(D, T)
  double ridge_lambda = 0.0;
  std::uint64_t seed = 0;
  std::size_t workers = 1;
};

/// Representation learning over T tasks sharing geometry and observation
/// scheme. Levels run backward from H; each task draws N samples from `dist`
/// with its own stream child(seed, train, t, h).
LearnedRepresentation train(std::span<const GridWorld> tasks, const SamplingDistribution& dist,
                            const TrainConfig& config);

}  // namespace linrep
