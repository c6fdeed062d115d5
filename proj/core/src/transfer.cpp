#include "linrep/transfer.hpp"

#include <optional>

#include <fmt/format.h>

#include "linrep/errors.hpp"

namespace linrep {

GreedyPolicy::GreedyPolicy(const GridWorld& grid, std::vector<Matrix> b_hats, std::vector<Vector> weights)
    : b_hat_(std::move(b_hats)), w_(std::move(weights)) {
  if (b_hat_.size() != w_.size()) throw ShapeError("GreedyPolicy: level counts differ");
  q_.reserve(b_hat_.size());
  for (std::size_t i = 0; i < b_hat_.size(); ++i) {
    if (b_hat_[i].cols() != w_[i].size()) {
      throw ShapeError(fmt::format("GreedyPolicy: level {} has {} columns but {} weights", i + 1, b_hat_[i].cols(),
                                   w_[i].size()));
    }
    q_.emplace_back(grid, b_hat_[i] * w_[i]);
  }
}

std::size_t GreedyPolicy::act(const Vector& observation, std::size_t level) const {
  if (level == 0 || level > q_.size()) throw DomainError(fmt::format("level {} outside [1, {}]", level, q_.size()));
  return q_[level - 1].greedy_action(observation);
}

std::size_t greedy_action(const GreedyPolicy& policy, const Vector& observation, std::size_t level) {
  return policy.act(observation, level);
}

TransferResult transfer(const LearnedRepresentation& rep, const GridWorld& new_task, const SamplingDistribution& dist,
                        std::size_t n, double ridge_lambda, Rng& rng) {
  if (n == 0) throw std::invalid_argument("transfer: n must be >= 1");
  const std::size_t horizon = new_task.horizon();
  if (rep.levels.size() < horizon) {
    throw ShapeError(fmt::format("transfer: representation covers {} levels, task needs {}", rep.levels.size(),
                                 horizon));
  }
  if (rep.ambient_dim != new_task.ambient_dim()) throw ShapeError("transfer: ambient dimension mismatch");
  dist.validate(new_task);

  const auto d_obs = static_cast<Eigen::Index>(new_task.obs_dim());
  TransferResult out;
  out.n = n;
  out.ridge_lambda = ridge_lambda;
  out.levels.resize(horizon);

  std::optional<LinearQFunction> next;
  for (std::size_t h = horizon; h >= 1; --h) {
    const Matrix& b_hat = rep.level(h).b_hat;
    const std::size_t m = queries_per_sample(horizon, h);
    const auto samples = sample_observations(new_task, dist, n, rng, new_task.obs_noise_std());

    Matrix z(static_cast<Eigen::Index>(n), b_hat.cols());
    std::vector<StateAction> pairs;
    pairs.reserve(n);
    for (std::size_t j = 0; j < n; ++j) {
      const auto& s = samples[j];
      z.row(static_cast<Eigen::Index>(j)) =
          (b_hat.middleRows(static_cast<Eigen::Index>(s.action) * d_obs, d_obs).transpose() * s.observation).transpose();
      pairs.push_back({s.state, s.action});
    }

    NextValueFn next_value;
    if (next) {
      const LinearQFunction* vf = &*next;
      next_value = [vf](std::size_t s, Rng& r) { return vf->sample_value(s, r); };
    }
    const Vector labels = build_q_targets(pairs, m, new_task, next_value, rng);

    auto& lvl = out.levels[h - 1];
    lvl.w_new = least_squares(z, labels, ridge_lambda);
    lvl.residual = (z * lvl.w_new - labels).squaredNorm() / static_cast<double>(n);
    const KappaReport kappa = lafa_kappa(b_hat, new_task, dist);
    lvl.kappa = kappa.kappa;
    lvl.kappa_infinite = kappa.infinite;

    next.emplace(new_task, b_hat * lvl.w_new);
  }
  return out;
}

GreedyPolicy make_policy(const LearnedRepresentation& rep, const TransferResult& result, const GridWorld& grid) {
  std::vector<Matrix> b;
  std::vector<Vector> w;
  for (std::size_t h = 1; h <= result.levels.size(); ++h) {
    b.push_back(rep.level(h).b_hat);
    w.push_back(result.level(h).w_new);
  }
  return GreedyPolicy(grid, std::move(b), std::move(w));
}

GreedyPolicy task_policy(const LearnedRepresentation& rep, std::size_t task, const GridWorld& grid) {
  std::vector<Matrix> b;
  std::vector<Vector> w;
  for (std::size_t h = 1; h <= rep.levels.size(); ++h) {
    const auto& lvl = rep.level(h);
    if (task >= static_cast<std::size_t>(lvl.w_hat.cols())) throw DomainError("task_policy: task out of range");
    b.push_back(lvl.b_hat);
    w.push_back(lvl.w_hat.col(static_cast<Eigen::Index>(task)));
  }
  return GreedyPolicy(grid, std::move(b), std::move(w));
}

}  // namespace linrep
