#include "linrep/evaluation.hpp"

#include <cmath>

#include <fmt/format.h>

#include "linrep/errors.hpp"
#include "linrep/parallel.hpp"

namespace linrep {

namespace {

constexpr double kBasisTol = 1e-8;
constexpr double kBoundSlack = 1e-9;

Matrix q_matrix(const LinearMdpSpec& mdp, const Vector& v_next) {
  const auto k = static_cast<Eigen::Index>(mdp.num_states());
  const auto actions = static_cast<Eigen::Index>(mdp.num_actions());
  const Vector flat = mdp.rewards() + mdp.transition_matrix() * v_next;
  Matrix q(k, actions);
  for (Eigen::Index a = 0; a < actions; ++a) q.col(a) = flat.segment(a * k, k);
  return q;
}

double mean_of(const std::vector<double>& xs) {
  double total = 0.0;
  for (double x : xs) total += x;
  return total / static_cast<double>(xs.size());
}

}  // namespace

double ValueTable::value(std::size_t level, std::size_t state) const {
  return v(static_cast<Eigen::Index>(level - 1), static_cast<Eigen::Index>(state));
}

std::size_t ValueTable::best_action(std::size_t level, std::size_t state) const {
  const auto& qh = q.at(level - 1);
  Eigen::Index best = 0;
  const auto s = static_cast<Eigen::Index>(state);
  for (Eigen::Index a = 1; a < qh.cols(); ++a) {
    if (qh(s, a) > qh(s, best)) best = a;
  }
  return static_cast<std::size_t>(best);
}

ValueTable optimal_values(const LinearMdpSpec& mdp, std::size_t horizon) {
  if (horizon == 0) throw std::invalid_argument("optimal_values: horizon must be >= 1");
  const auto k = static_cast<Eigen::Index>(mdp.num_states());
  ValueTable table;
  table.v = Matrix::Zero(static_cast<Eigen::Index>(horizon) + 1, k);
  table.q.resize(horizon);
  for (std::size_t h = horizon; h >= 1; --h) {
    const Vector v_next = table.v.row(static_cast<Eigen::Index>(h)).transpose();
    table.q[h - 1] = q_matrix(mdp, v_next);
    table.v.row(static_cast<Eigen::Index>(h) - 1) = table.q[h - 1].rowwise().maxCoeff().transpose();
  }
  return table;
}

GreedyPolicy oracle_policy(const GridWorld& grid, const ValueTable& table) {
  const Matrix b_star = ground_truth_representation(grid);
  const auto k = static_cast<Eigen::Index>(grid.num_states());
  std::vector<Matrix> b;
  std::vector<Vector> w;
  for (std::size_t h = 1; h <= table.horizon(); ++h) {
    const Matrix& qh = table.q[h - 1];
    Vector weights(static_cast<Eigen::Index>(kNumActions) * k);
    for (Eigen::Index a = 0; a < static_cast<Eigen::Index>(kNumActions); ++a) weights.segment(a * k, k) = qh.col(a);
    b.push_back(b_star);
    w.push_back(std::move(weights));
  }
  return GreedyPolicy(grid, std::move(b), std::move(w));
}

double rollout_return(const GreedyPolicy& policy, const GridWorld& grid, std::size_t state, Rng& rng) {
  double total = 0.0;
  const std::size_t horizon = std::min(policy.horizon(), grid.horizon());
  for (std::size_t h = 1; h <= horizon; ++h) {
    if (grid.is_terminal(state)) break;
    const Observation obs = grid.observe(state, rng);
    const StepResult step = grid.step(state, policy.act(obs.values, h), rng);
    total += step.reward;
    state = step.next_state;
  }
  return total;
}

EvalReport evaluate_policy(const GreedyPolicy& policy, const GridWorld& grid, Rng& rng, const EvalOptions& options) {
  if (options.episodes == 0) throw std::invalid_argument("evaluate_policy: episodes must be >= 1");
  const std::uint64_t base = rng();
  const ValueTable oracle = optimal_values(build_tabular_oracle(grid), grid.horizon());

  std::vector<double> returns(options.episodes);
  parallel_for(options.episodes, options.workers, [&](std::size_t e) {
    Rng episode_rng = child_rng(base, {0, e});
    returns[e] = rollout_return(policy, grid, grid.start_state(), episode_rng);
  });

  EvalReport report;
  report.episodes = options.episodes;
  report.mean_return = mean_of(returns);
  if (returns.size() > 1) {
    double ss = 0.0;
    for (double r : returns) ss += (r - report.mean_return) * (r - report.mean_return);
    const double var = ss / static_cast<double>(returns.size() - 1);
    report.std_error = std::sqrt(var / static_cast<double>(returns.size()));
  }
  report.suboptimality_start = oracle.value(1, grid.start_state()) - report.mean_return;

  report.suboptimality_max = report.suboptimality_start;
  if (options.state_episodes > 0) {
    const std::size_t k = grid.num_states();
    std::vector<double> gaps(k, 0.0);
    parallel_for(k, options.workers, [&](std::size_t s) {
      if (grid.is_terminal(s)) return;
      double total = 0.0;
      for (std::size_t e = 0; e < options.state_episodes; ++e) {
        Rng episode_rng = child_rng(base, {1 + s, e});
        total += rollout_return(policy, grid, s, episode_rng);
      }
      gaps[s] = oracle.value(1, s) - total / static_cast<double>(options.state_episodes);
    });
    for (double g : gaps) report.suboptimality_max = std::max(report.suboptimality_max, g);
  }
  return report;
}

EvalReport evaluate_policy(const GreedyPolicy& policy, const GridWorld& grid, std::size_t episodes, Rng& rng) {
  EvalOptions options;
  options.episodes = episodes;
  return evaluate_policy(policy, grid, rng, options);
}

AlignmentReport subspace_alignment(const Matrix& b_hat, const Matrix& b_star) {
  if (b_hat.rows() != b_star.rows()) {
    throw ShapeError(fmt::format("subspace_alignment: ambient dims differ ({} vs {})", b_hat.rows(), b_star.rows()));
  }
  if (orthonormality_defect(b_hat) > kBasisTol || orthonormality_defect(b_star) > kBasisTol) {
    throw InvalidBasis("subspace_alignment: inputs must have orthonormal columns");
  }
  AlignmentReport report;
  report.coordinate_norms = b_hat.rowwise().norm();
  report.aggregate = (b_star - b_hat * (b_hat.transpose() * b_star)).norm();
  return report;
}

std::vector<bool> informative_coordinates(const Matrix& b_star) {
  std::vector<bool> mask(static_cast<std::size_t>(b_star.rows()));
  for (Eigen::Index i = 0; i < b_star.rows(); ++i) mask[static_cast<std::size_t>(i)] = b_star.row(i).cwiseAbs().maxCoeff() > 0.0;
  return mask;
}

AlignmentSummary summarize_alignment(const AlignmentReport& report, const std::vector<bool>& informative) {
  if (informative.size() != static_cast<std::size_t>(report.coordinate_norms.size())) {
    throw ShapeError("summarize_alignment: mask length mismatch");
  }
  double info = 0.0;
  double noise = 0.0;
  std::size_t n_info = 0;
  std::size_t n_noise = 0;
  for (std::size_t i = 0; i < informative.size(); ++i) {
    const double x = report.coordinate_norms(static_cast<Eigen::Index>(i));
    if (informative[i]) {
      info += x;
      ++n_info;
    } else {
      noise += x;
      ++n_noise;
    }
  }
  return {n_info ? info / static_cast<double>(n_info) : 0.0, n_noise ? noise / static_cast<double>(n_noise) : 0.0};
}

PerturbationReport value_perturbation_check(const LinearMdpSpec& mdp, std::size_t horizon, const std::vector<double>& deltas,
                             Rng& rng) {
  if (deltas.size() != horizon) throw ShapeError("value_perturbation_check: need one delta per level");
  for (double d : deltas) {
    if (!(d >= 0.0)) throw std::invalid_argument("value_perturbation_check: deltas must be >= 0");
  }
  const ValueTable exact = optimal_values(mdp, horizon);
  const auto k = static_cast<Eigen::Index>(mdp.num_states());

  PerturbationReport report;
  Vector v_hat = Vector::Zero(k);
  double tail = 0.0;
  for (std::size_t h = horizon; h >= 1; --h) {
    const double delta = deltas[h - 1];
    tail += delta;
    Matrix q = q_matrix(mdp, v_hat);
    if (delta > 0.0) {
      std::uniform_real_distribution<double> u(-delta, delta);
      for (Eigen::Index i = 0; i < q.rows(); ++i) {
        for (Eigen::Index j = 0; j < q.cols(); ++j) q(i, j) += u(rng);
      }
    }
    v_hat = q.rowwise().maxCoeff();
    for (Eigen::Index s = 0; s < k; ++s) {
      const double gap = std::abs(exact.value(h, static_cast<std::size_t>(s)) - v_hat(s));
      if (tail > 0.0) report.max_ratio = std::max(report.max_ratio, gap / tail);
      if (gap > tail + kBoundSlack) report.violations.push_back({h, static_cast<std::size_t>(s), gap, tail});
    }
  }
  return report;
}

}  // namespace linrep
