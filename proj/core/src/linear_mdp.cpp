#include "linrep/linear_mdp.hpp"

#include <cmath>
#include <fmt/format.h>

#include "linrep/errors.hpp"

namespace linrep {

namespace {
constexpr double kProbTol = 1e-9;
}

LinearMdpSpec::LinearMdpSpec(std::size_t num_states, std::size_t num_actions, std::size_t horizon,
                             Matrix features, Matrix psi, Vector theta, double reward_noise)
    : num_states_(num_states),
      num_actions_(num_actions),
      horizon_(horizon),
      features_(std::move(features)),
      psi_(std::move(psi)),
      theta_(std::move(theta)),
      reward_noise_(reward_noise) {
  if (num_states_ == 0 || num_actions_ == 0) throw ShapeError("LinearMdpSpec: need at least one state and action");
  const auto pairs = static_cast<Eigen::Index>(num_states_ * num_actions_);
  const Eigen::Index d = theta_.size();
  if (features_.rows() != pairs || features_.cols() != d) {
    throw ShapeError(fmt::format("LinearMdpSpec: features must be {}x{}, got {}x{}", pairs, d, features_.rows(),
                                 features_.cols()));
  }
  if (psi_.rows() != static_cast<Eigen::Index>(num_states_) || psi_.cols() != d) {
    throw ShapeError(fmt::format("LinearMdpSpec: psi must be {}x{}, got {}x{}", num_states_, d, psi_.rows(),
                                 psi_.cols()));
  }
  if (!(reward_noise_ >= 0.0)) throw std::invalid_argument("LinearMdpSpec: reward noise must be >= 0");
  if (!features_.allFinite() || !psi_.allFinite() || !theta_.allFinite()) {
    throw InvalidMatrix("LinearMdpSpec: non-finite entry");
  }

  transitions_ = features_ * psi_.transpose();
  rewards_ = features_ * theta_;
  for (Eigen::Index r = 0; r < pairs; ++r) {
    const double total = transitions_.row(r).sum();
    if (std::abs(total - 1.0) > kProbTol) {
      throw InvalidMatrix(fmt::format("LinearMdpSpec: transition row {} sums to {}", r, total));
    }
    if (transitions_.row(r).minCoeff() < -kProbTol || transitions_.row(r).maxCoeff() > 1.0 + kProbTol) {
      throw InvalidMatrix(fmt::format("LinearMdpSpec: transition row {} has an entry outside [0, 1]", r));
    }
  }
}

void LinearMdpSpec::check_indices(std::size_t state, std::size_t action) const {
  if (state >= num_states_) throw DomainError(fmt::format("state {} out of range [0, {})", state, num_states_));
  if (action >= num_actions_) throw DomainError(fmt::format("action {} out of range [0, {})", action, num_actions_));
}

Vector LinearMdpSpec::feature(std::size_t state, std::size_t action) const {
  check_indices(state, action);
  return features_.row(static_cast<Eigen::Index>(pair_index(state, action))).transpose();
}

double LinearMdpSpec::reward(std::size_t state, std::size_t action) const {
  check_indices(state, action);
  return rewards_(static_cast<Eigen::Index>(pair_index(state, action)));
}

double LinearMdpSpec::transition_probability(std::size_t state, std::size_t action, std::size_t next) const {
  check_indices(state, action);
  if (next >= num_states_) throw DomainError("next state out of range");
  return transitions_(static_cast<Eigen::Index>(pair_index(state, action)), static_cast<Eigen::Index>(next));
}

Vector LinearMdpSpec::transition_row(std::size_t state, std::size_t action) const {
  check_indices(state, action);
  return transitions_.row(static_cast<Eigen::Index>(pair_index(state, action))).transpose();
}

LinearMdpSpec make_tabular_mdp(std::size_t num_states, std::size_t num_actions, std::size_t horizon,
                               const Matrix& transitions, const Vector& rewards, double reward_noise) {
  const auto pairs = static_cast<Eigen::Index>(num_states * num_actions);
  if (transitions.rows() != pairs || transitions.cols() != static_cast<Eigen::Index>(num_states)) {
    throw ShapeError("make_tabular_mdp: transitions must be (K*A) x K");
  }
  if (rewards.size() != pairs) throw ShapeError("make_tabular_mdp: rewards must have K*A entries");
  Matrix features = Matrix::Identity(pairs, pairs);
  Matrix psi = transitions.transpose();
  return LinearMdpSpec(num_states, num_actions, horizon, std::move(features), std::move(psi), rewards, reward_noise);
}

GenerativeReply generative_query(const LinearMdpSpec& spec, std::size_t state, std::size_t action, Rng& rng) {
  spec.check_indices(state, action);
  const auto row = static_cast<Eigen::Index>(spec.pair_index(state, action));
  const auto& p = spec.transition_matrix();

  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double u = unit(rng);
  double acc = 0.0;
  std::size_t next = spec.num_states() - 1;
  for (Eigen::Index s = 0; s < p.cols(); ++s) {
    acc += std::max(0.0, p(row, s));
    if (u < acc) {
      next = static_cast<std::size_t>(s);
      break;
    }
  }
  // Guard against a trailing zero-probability state absorbing rounding slack.
  while (next > 0 && p(row, static_cast<Eigen::Index>(next)) <= 0.0) --next;

  double reward = spec.rewards()(row);
  if (spec.reward_noise() > 0.0) {
    std::uniform_real_distribution<double> noise(-spec.reward_noise(), spec.reward_noise());
    reward += noise(rng);
  }
  return {reward, next};
}

Vector q_weight_from_value(const Vector& theta, const Matrix& psi, const Vector& v_next) {
  if (psi.cols() != theta.size()) throw ShapeError("q_weight_from_value: psi columns must equal feature dim");
  if (psi.rows() != v_next.size()) throw ShapeError("q_weight_from_value: v_next length must equal psi rows");
  return theta + psi.transpose() * v_next;
}

}  // namespace linrep
