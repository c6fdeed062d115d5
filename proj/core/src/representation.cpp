#include "linrep/representation.hpp"

#include <algorithm>
#include <array>
#include <limits>
#include <optional>

#include <fmt/format.h>

#include "linrep/errors.hpp"
#include "linrep/parallel.hpp"

namespace linrep {

namespace {
constexpr double kSingularRcond = 1e-12;
}

LinearQFunction::LinearQFunction(const GridWorld& grid, Vector theta)
    : num_states_(grid.num_states()), obs_dim_(grid.obs_dim()), theta_(std::move(theta)) {
  if (theta_.size() != static_cast<Eigen::Index>(grid.ambient_dim())) {
    throw ShapeError(fmt::format("LinearQFunction: weight length {} does not match ambient dim {}", theta_.size(),
                                 grid.ambient_dim()));
  }
  noise_factor_.setZero();
  const auto k = static_cast<Eigen::Index>(num_states_);
  const auto d_obs = static_cast<Eigen::Index>(obs_dim_);
  const double sigma = grid.obs_noise_std();
  if (sigma > 0.0 && d_obs > k) {
    Eigen::Matrix<double, 4, Eigen::Dynamic> u(4, d_obs - k);
    for (Eigen::Index a = 0; a < 4; ++a) u.row(a) = theta_.segment(a * d_obs + k, d_obs - k).transpose();
    const Eigen::Matrix4d gram = u * u.transpose();
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix4d> eig(gram);
    const Eigen::Vector4d roots = eig.eigenvalues().cwiseMax(0.0).cwiseSqrt();
    noise_factor_ = sigma * eig.eigenvectors() * roots.asDiagonal();
    noisy_ = true;
  }
}

double LinearQFunction::q(const Vector& observation, std::size_t action) const {
  const auto d_obs = static_cast<Eigen::Index>(obs_dim_);
  return theta_.segment(static_cast<Eigen::Index>(action) * d_obs, d_obs).dot(observation);
}

double LinearQFunction::value(const Vector& observation) const {
  double best = q(observation, 0);
  for (std::size_t a = 1; a < kNumActions; ++a) best = std::max(best, q(observation, a));
  return best;
}

std::size_t LinearQFunction::greedy_action(const Vector& observation) const {
  std::size_t best_a = 0;
  double best = q(observation, 0);
  for (std::size_t a = 1; a < kNumActions; ++a) {
    const double v = q(observation, a);
    if (v > best) {
      best = v;
      best_a = a;
    }
  }
  return best_a;
}

double LinearQFunction::sample_value(std::size_t state, Rng& rng) const {
  const auto d_obs = static_cast<Eigen::Index>(obs_dim_);
  const auto s = static_cast<Eigen::Index>(state);
  Eigen::Vector4d qs(theta_(s), theta_(d_obs + s), theta_(2 * d_obs + s), theta_(3 * d_obs + s));
  if (noisy_) {
    std::normal_distribution<double> normal(0.0, 1.0);
    Eigen::Vector4d eps;
    for (int i = 0; i < 4; ++i) eps(i) = normal(rng);
    qs.noalias() += noise_factor_ * eps;
  }
  return qs.maxCoeff();
}

std::size_t queries_per_sample(std::size_t horizon, std::size_t level) {
  if (level == 0 || level > horizon) throw DomainError(fmt::format("level {} outside [1, {}]", level, horizon));
  const std::size_t remaining = horizon - level + 1;
  return remaining * remaining;
}

Vector build_q_targets(std::span<const StateAction> samples, std::size_t m, const GridWorld& task,
                       const NextValueFn& next_value, Rng& rng) {
  if (m == 0) throw std::invalid_argument("build_q_targets: m must be >= 1");
  Vector labels(static_cast<Eigen::Index>(samples.size()));
  for (std::size_t j = 0; j < samples.size(); ++j) {
    double acc = 0.0;
    for (std::size_t k = 0; k < m; ++k) {
      const StepResult reply = task.query(samples[j].state, samples[j].action, rng);
      acc += reply.reward;
      if (!reply.done && next_value) acc += next_value(reply.next_state, rng);
    }
    labels(static_cast<Eigen::Index>(j)) = acc / static_cast<double>(m);
  }
  return labels;
}

Vector ridge_solve_blocked(const GridWorld& grid, std::span<const DrawnSample> samples, const Vector& labels,
                           double lambda) {
  if (samples.empty()) throw ShapeError("ridge_solve_blocked: no samples");
  if (labels.size() != static_cast<Eigen::Index>(samples.size())) {
    throw ShapeError("ridge_solve_blocked: label count does not match samples");
  }
  if (!(lambda >= 0.0)) throw std::invalid_argument("ridge_solve_blocked: lambda must be >= 0");
  const auto d_obs = static_cast<Eigen::Index>(grid.obs_dim());
  const double n = static_cast<double>(samples.size());

  std::array<Eigen::MatrixXd, kNumActions> gram;
  std::array<Vector, kNumActions> rhs;
  for (std::size_t a = 0; a < kNumActions; ++a) {
    gram[a] = Eigen::MatrixXd::Zero(d_obs, d_obs);
    rhs[a] = Vector::Zero(d_obs);
  }
  for (std::size_t j = 0; j < samples.size(); ++j) {
    const auto& s = samples[j];
    if (s.observation.size() != d_obs || s.action >= kNumActions) throw ShapeError("ridge_solve_blocked: bad sample");
    gram[s.action].selfadjointView<Eigen::Lower>().rankUpdate(s.observation);
    rhs[s.action].noalias() += labels(static_cast<Eigen::Index>(j)) * s.observation;
  }

  Vector theta(static_cast<Eigen::Index>(kNumActions) * d_obs);
  for (std::size_t a = 0; a < kNumActions; ++a) {
    Eigen::MatrixXd g = gram[a].selfadjointView<Eigen::Lower>();
    g.diagonal().array() += n * lambda;
    Eigen::LLT<Eigen::MatrixXd> llt(g);
    if (lambda == 0.0 && (llt.info() != Eigen::Success || llt.rcond() < kSingularRcond)) {
      throw SingularSystem(fmt::format("ridge_solve_blocked: action block {} is singular and lambda = 0", a));
    }
    theta.segment(static_cast<Eigen::Index>(a) * d_obs, d_obs) =
        llt.info() == Eigen::Success ? Vector(llt.solve(rhs[a])) : Vector(g.ldlt().solve(rhs[a]));
  }
  return theta;
}

LevelFit fit_subspace(Matrix theta_stack, std::size_t d) {
  if (d == 0) throw std::invalid_argument("fit_subspace: rank must be >= 1");
  const auto rank = static_cast<Eigen::Index>(
      std::min<std::size_t>(d, static_cast<std::size_t>(std::min(theta_stack.rows(), theta_stack.cols()))));
  const SvdResult dec = svd(theta_stack);
  LevelFit out;
  out.b_hat = dec.u.leftCols(rank);
  out.w_hat = out.b_hat.transpose() * theta_stack;
  out.singular_values = dec.singular_values;
  out.theta_stack = std::move(theta_stack);
  return out;
}

LevelFit fit_level(std::span<const Matrix> designs, std::span<const Vector> labels, std::size_t d,
                   double ridge_lambda) {
  if (designs.empty()) throw ShapeError("fit_level: no tasks");
  if (designs.size() != labels.size()) throw ShapeError("fit_level: design and label counts differ");
  const Eigen::Index dim = designs.front().cols();
  Matrix theta_stack(dim, static_cast<Eigen::Index>(designs.size()));
  for (std::size_t t = 0; t < designs.size(); ++t) {
    if (designs[t].cols() != dim) throw ShapeError("fit_level: designs disagree on ambient dimension");
    theta_stack.col(static_cast<Eigen::Index>(t)) = ridge_solve(designs[t], labels[t], ridge_lambda);
  }
  return fit_subspace(std::move(theta_stack), d);
}

const RepresentationLevel& LearnedRepresentation::level(std::size_t h) const {
  if (h == 0 || h > levels.size()) throw DomainError(fmt::format("level {} outside [1, {}]", h, levels.size()));
  return levels[h - 1];
}

Vector LearnedRepresentation::task_weights(std::size_t h, std::size_t t) const {
  const auto& lvl = level(h);
  if (t >= static_cast<std::size_t>(lvl.w_hat.cols())) throw DomainError(fmt::format("task {} out of range", t));
  return lvl.b_hat * lvl.w_hat.col(static_cast<Eigen::Index>(t));
}

LearnedRepresentation ground_truth_representation_levels(const GridWorld& grid) {
  LearnedRepresentation rep;
  const Matrix b = ground_truth_representation(grid);
  rep.ambient_dim = grid.ambient_dim();
  rep.rank = static_cast<std::size_t>(b.cols());
  rep.horizon = grid.horizon();
  rep.levels.resize(grid.horizon());
  for (auto& lvl : rep.levels) lvl.b_hat = b;
  return rep;
}

LearnedRepresentation train(std::span<const GridWorld> tasks, const SamplingDistribution& dist,
                            const TrainConfig& config) {
  if (tasks.empty()) throw std::invalid_argument("train: no tasks");
  if (config.samples_per_task == 0) throw std::invalid_argument("train: N must be >= 1");
  if (config.rank == 0) throw std::invalid_argument("train: rank must be >= 1");
  const GridWorld& ref = tasks.front();
  for (const auto& t : tasks) {
    if (t.num_states() != ref.num_states() || t.obs_dim() != ref.obs_dim() || t.horizon() != ref.horizon()) {
      throw ShapeError("train: tasks must share states, observation scheme and horizon");
    }
  }
  dist.validate(ref);

  const std::size_t horizon = ref.horizon();
  const std::size_t num_tasks = tasks.size();
  const auto dim = static_cast<Eigen::Index>(ref.ambient_dim());

  LearnedRepresentation rep;
  rep.ambient_dim = ref.ambient_dim();
  rep.rank = std::min<std::size_t>({config.rank, ref.ambient_dim(), num_tasks});
  rep.num_tasks = num_tasks;
  rep.horizon = horizon;
  rep.seed = config.seed;
  rep.levels.resize(horizon);

  // V_{H+1} == 0.
  std::vector<std::optional<LinearQFunction>> next(num_tasks);

  for (std::size_t h = horizon; h >= 1; --h) {
    const std::size_t m = queries_per_sample(horizon, h);
    Matrix theta_stack(dim, static_cast<Eigen::Index>(num_tasks));

    parallel_for(num_tasks, config.workers, [&](std::size_t t) {
      Rng rng = child_rng(config.seed, {stream::kTrain, t, h});
      const GridWorld& task = tasks[t];
      const auto samples = sample_observations(task, dist, config.samples_per_task, rng, task.obs_noise_std());
      std::vector<StateAction> pairs;
      pairs.reserve(samples.size());
      for (const auto& s : samples) pairs.push_back({s.state, s.action});
      NextValueFn next_value;
      if (next[t]) {
        const LinearQFunction* vf = &*next[t];
        next_value = [vf](std::size_t s, Rng& r) { return vf->sample_value(s, r); };
      }
      const Vector labels = build_q_targets(pairs, m, task, next_value, rng);
      theta_stack.col(static_cast<Eigen::Index>(t)) = ridge_solve_blocked(task, samples, labels, config.ridge_lambda);
    });

    LevelFit fit = fit_subspace(std::move(theta_stack), rep.rank);
    auto& lvl = rep.levels[h - 1];
    lvl.b_hat = std::move(fit.b_hat);
    lvl.w_hat = std::move(fit.w_hat);
    lvl.theta_stack = std::move(fit.theta_stack);
    lvl.singular_values = std::move(fit.singular_values);

    lvl.value_min = std::numeric_limits<double>::infinity();
    lvl.value_max = -std::numeric_limits<double>::infinity();
    for (std::size_t t = 0; t < num_tasks; ++t) {
      next[t].emplace(tasks[t], rep.task_weights(h, t));
      for (std::size_t s = 0; s < ref.num_states(); ++s) {
        if (tasks[t].is_terminal(s)) continue;
        const double v = next[t]->value(tasks[t].clean_observation(s).values);
        lvl.value_min = std::min(lvl.value_min, v);
        lvl.value_max = std::max(lvl.value_max, v);
      }
    }
  }
  return rep;
}

}  // namespace linrep
