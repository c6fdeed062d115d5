#pragma once

#include <cstddef>
#include <vector>

#include "linrep/gridworld.hpp"
#include "linrep/linalg.hpp"
#include "linrep/linear_mdp.hpp"
#include "linrep/rng.hpp"
#include "linrep/transfer.hpp"

namespace linrep {

/// Finite-horizon values: v row h - 1 holds V_h for h in [1, H], row H is
/// V_{H+1} == 0; q[h - 1] is the K x A matrix of Q_h.
struct ValueTable {
  Matrix v;
  std::vector<Matrix> q;

  std::size_t horizon() const { return q.size(); }
  double value(std::size_t level, std::size_t state) const;
  /// Lowest-index maximizer of Q_h(state, .).
  std::size_t best_action(std::size_t level, std::size_t state) const;
};

/// Exact backward induction: Q_h = r + P V_{h+1}, V_h = rowmax Q_h.
ValueTable optimal_values(const LinearMdpSpec& mdp, std::size_t horizon);

/// The optimal policy of `table` expressed as a greedy linear policy over B*.
GreedyPolicy oracle_policy(const GridWorld& grid, const ValueTable& table);

struct EvalReport {
  double mean_return = 0.0;
  double std_error = 0.0;
  double suboptimality_max = 0.0;    // max_s V*_1(s) - V^pi_1(s), Monte Carlo
  double suboptimality_start = 0.0;  // V*_1(start) - mean_return
  std::size_t episodes = 0;
};

struct EvalOptions {
  std::size_t episodes = 2000;
  /// Rollouts per non-terminal hidden state for suboptimality_max; 0 skips it.
  std::size_t state_episodes = 200;
  std::size_t workers = 1;
};

/// Monte Carlo return of a single rollout over the H levels from `state`,
/// with a fresh noisy observation at every step.
double rollout_return(const GreedyPolicy& policy, const GridWorld& grid, std::size_t state, Rng& rng);

/// Rollouts from the start cell; each episode e uses child(base, e) where
/// base is drawn once from `rng`, so the report does not depend on workers.
EvalReport evaluate_policy(const GreedyPolicy& policy, const GridWorld& grid, Rng& rng,
                           const EvalOptions& options = {});
EvalReport evaluate_policy(const GreedyPolicy& policy, const GridWorld& grid, std::size_t episodes, Rng& rng);

struct AlignmentReport {
  Vector coordinate_norms;  // ||b_hat^T e_i|| for each ambient coordinate i
  double aggregate = 0.0;   // ||P_{b_hat}^perp B*||_F
};

/// Throws ShapeError when the ambient dimensions differ and InvalidBasis
/// when either input lacks orthonormal columns.
AlignmentReport subspace_alignment(const Matrix& b_hat, const Matrix& b_star);

/// Coordinates selected by B* (rows with a nonzero entry).
std::vector<bool> informative_coordinates(const Matrix& b_star);

struct AlignmentSummary {
  double informative_mean = 0.0;
  double noise_mean = 0.0;
};

AlignmentSummary summarize_alignment(const AlignmentReport& report, const std::vector<bool>& informative);

struct PerturbationViolation {
  std::size_t level;
  std::size_t state;
  double gap;    // |V*_h(s) - V_hat_h(s)|
  double bound;  // sum_{k >= h} delta_k
};

struct PerturbationReport {
  std::vector<PerturbationViolation> violations;
  double max_ratio = 0.0;  // max gap / bound over entries with bound > 0
};

/// Perturbed backward induction: Q_hat_h = r + P V_hat_{h+1} + u with
/// u ~ U[-delta_h, delta_h] per (s, a), V_hat_h = rowmax Q_hat_h. Records every
/// (h, s) where |V*_h - V_hat_h| exceeds sum_{k >= h} delta_k (+1e-9).
/// deltas[h - 1] is delta_h.
PerturbationReport value_perturbation_check(const LinearMdpSpec& mdp, std::size_t horizon, const std::vector<double>& deltas,
                             Rng& rng);

}  // namespace linrep
