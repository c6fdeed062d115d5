#include "linrep/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include <fmt/format.h>

#include "linrep/errors.hpp"

namespace linrep {

namespace {

constexpr double kBasisTol = 1e-8;

KappaReport report_from_covariance(Matrix covariance) {
  covariance = 0.5 * (covariance + covariance.transpose()).eval();
  KappaReport out;
  out.min_eig = min_eigenvalue(covariance);
  out.covariance = std::move(covariance);
  if (out.min_eig <= kKappaEigFloor) {
    out.infinite = true;
    out.kappa = std::numeric_limits<double>::infinity();
  } else {
    out.kappa = 1.0 / out.min_eig;
  }
  return out;
}

void check_basis(const Matrix& b_hat, const GridWorld& grid) {
  if (b_hat.rows() != static_cast<Eigen::Index>(grid.ambient_dim())) {
    throw ShapeError(fmt::format("kappa: representation has {} rows, ambient dim is {}", b_hat.rows(),
                                 grid.ambient_dim()));
  }
  if (orthonormality_defect(b_hat) > kBasisTol) throw InvalidBasis("kappa: representation columns are not orthonormal");
}

// B^T xi(obs, a) without materializing xi.
Vector project(const Matrix& b_hat, std::size_t obs_dim, std::size_t action, const Vector& observation) {
  const auto d_obs = static_cast<Eigen::Index>(obs_dim);
  return b_hat.middleRows(static_cast<Eigen::Index>(action) * d_obs, d_obs).transpose() * observation;
}

}  // namespace

SamplingDistribution SamplingDistribution::uniform(std::vector<SupportPoint> support) {
  SamplingDistribution dist;
  const double w = support.empty() ? 0.0 : 1.0 / static_cast<double>(support.size());
  dist.weights.assign(support.size(), w);
  dist.support = std::move(support);
  return dist;
}

void SamplingDistribution::validate() const {
  if (support.empty()) throw std::invalid_argument("sampling distribution: empty support");
  if (weights.size() != support.size()) throw std::invalid_argument("sampling distribution: weight count mismatch");
  double total = 0.0;
  for (double w : weights) {
    if (!(w >= 0.0) || !std::isfinite(w)) throw std::invalid_argument("sampling distribution: negative weight");
    total += w;
  }
  if (std::abs(total - 1.0) > 1e-9) {
    throw std::invalid_argument(fmt::format("sampling distribution: weights sum to {}", total));
  }
}

void SamplingDistribution::validate(const GridWorld& grid) const {
  validate();
  const std::size_t noise_dims = grid.obs_dim() - grid.num_states();
  for (const auto& p : support) {
    if (p.state >= grid.num_states()) throw DomainError("sampling distribution: state out of range");
    if (p.action >= kNumActions) throw DomainError("sampling distribution: action out of range");
    if (p.noise_coord && *p.noise_coord >= noise_dims) {
      throw DomainError("sampling distribution: noise coordinate out of range");
    }
  }
}

std::string_view to_string(BasisMode mode) { return mode == BasisMode::kBalanced ? "balanced" : "unbalanced"; }

BasisMode parse_basis_mode(std::string_view name) {
  if (name == "balanced") return BasisMode::kBalanced;
  if (name == "unbalanced") return BasisMode::kUnbalanced;
  throw ConfigError(fmt::format("unknown distribution mode '{}' (expected balanced|unbalanced)", name));
}

SamplingDistribution barycentric_basis(const GridWorld& grid, BasisMode mode) {
  const std::size_t k = grid.num_states();
  const std::size_t noise_dims = grid.obs_dim() - k;
  std::vector<SupportPoint> support;
  support.reserve(grid.ambient_dim());
  for (std::size_t a = 0; a < kNumActions; ++a) {
    for (std::size_t s = 0; s < k; ++s) support.push_back({s, a, std::nullopt});
    for (std::size_t j = 0; j < noise_dims; ++j) {
      const std::size_t owner = mode == BasisMode::kBalanced ? j % k : grid.start_state();
      support.push_back({owner, a, j});
    }
  }
  // Each template is e_s (+ e_{K+j}); ordering clean points before spikes makes
  // the support matrix unit triangular, so it is a basis by construction.
  return SamplingDistribution::uniform(std::move(support));
}

Vector template_observation(const GridWorld& grid, const SupportPoint& point) {
  Vector obs = grid.clean_observation(point.state).values;
  if (point.noise_coord) {
    const auto idx = static_cast<Eigen::Index>(grid.num_states() + *point.noise_coord);
    if (idx >= obs.size()) throw DomainError("template_observation: noise coordinate out of range");
    obs(idx) = 1.0;
  }
  return obs;
}

Vector template_vector(const GridWorld& grid, const SupportPoint& point) {
  return vectorize(template_observation(grid, point), point.action);
}

Matrix support_matrix(const GridWorld& grid, const SamplingDistribution& dist) {
  Matrix m(static_cast<Eigen::Index>(dist.support.size()), static_cast<Eigen::Index>(grid.ambient_dim()));
  for (std::size_t i = 0; i < dist.support.size(); ++i) {
    m.row(static_cast<Eigen::Index>(i)) = template_vector(grid, dist.support[i]).transpose();
  }
  return m;
}

std::vector<DrawnSample> sample_observations(const GridWorld& grid, const SamplingDistribution& dist, std::size_t n,
                                             Rng& rng, double noise_std) {
  dist.validate(grid);
  if (n == 0) throw std::invalid_argument("sample_observations: n must be >= 1");
  std::discrete_distribution<std::size_t> pick(dist.weights.begin(), dist.weights.end());
  std::normal_distribution<double> noise(0.0, noise_std > 0.0 ? noise_std : 1.0);
  const auto k = static_cast<Eigen::Index>(grid.num_states());

  std::vector<DrawnSample> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t idx = pick(rng);
    const auto& point = dist.support[idx];
    Vector obs = template_observation(grid, point);
    if (noise_std > 0.0) {
      for (Eigen::Index c = k; c < obs.size(); ++c) obs(c) += noise(rng);
    }
    out.push_back({idx, point.state, point.action, std::move(obs)});
  }
  return out;
}

Design sample_design(const GridWorld& grid, const SamplingDistribution& dist, std::size_t n, Rng& rng,
                     double noise_std) {
  Design design;
  design.samples = sample_observations(grid, dist, n, rng, noise_std);
  const auto d_obs = static_cast<Eigen::Index>(grid.obs_dim());
  design.x = Matrix::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(grid.ambient_dim()));
  for (std::size_t i = 0; i < n; ++i) {
    const auto& s = design.samples[i];
    design.x.row(static_cast<Eigen::Index>(i)).segment(static_cast<Eigen::Index>(s.action) * d_obs, d_obs) =
        s.observation.transpose();
  }
  return design;
}

KappaReport lafa_kappa(const Matrix& b_hat, const Matrix& rows, const std::vector<double>& weights) {
  if (rows.cols() != b_hat.rows() || static_cast<std::size_t>(rows.rows()) != weights.size()) {
    throw ShapeError("kappa: support rows do not match the representation or the weights");
  }
  if (orthonormality_defect(b_hat) > kBasisTol) throw InvalidBasis("kappa: representation columns are not orthonormal");
  const Matrix z = rows * b_hat;
  Matrix cov = Matrix::Zero(b_hat.cols(), b_hat.cols());
  for (Eigen::Index i = 0; i < z.rows(); ++i) {
    cov.noalias() += weights[static_cast<std::size_t>(i)] * (z.row(i).transpose() * z.row(i));
  }
  return report_from_covariance(std::move(cov));
}

KappaReport lafa_kappa(const Matrix& b_hat, const GridWorld& grid, const SamplingDistribution& dist) {
  dist.validate(grid);
  check_basis(b_hat, grid);
  Matrix cov = Matrix::Zero(b_hat.cols(), b_hat.cols());
  for (std::size_t i = 0; i < dist.support.size(); ++i) {
    const auto& p = dist.support[i];
    const Vector z = project(b_hat, grid.obs_dim(), p.action, template_observation(grid, p));
    cov.noalias() += dist.weights[i] * (z * z.transpose());
  }
  return report_from_covariance(std::move(cov));
}

KappaReport monte_carlo_kappa(const Matrix& b_hat, const GridWorld& grid, const SamplingDistribution& dist,
                              std::size_t draws, double noise_std, Rng& rng) {
  dist.validate(grid);
  check_basis(b_hat, grid);
  if (draws == 0) throw std::invalid_argument("monte_carlo_kappa: draws must be >= 1");
  Matrix cov = Matrix::Zero(b_hat.cols(), b_hat.cols());
  if (noise_std == 0.0) {
    // Clean draws repeat support templates: accumulate counts, then weight.
    std::discrete_distribution<std::size_t> pick(dist.weights.begin(), dist.weights.end());
    std::vector<std::size_t> counts(dist.support.size(), 0);
    for (std::size_t i = 0; i < draws; ++i) ++counts[pick(rng)];
    for (std::size_t i = 0; i < dist.support.size(); ++i) {
      if (counts[i] == 0) continue;
      const auto& p = dist.support[i];
      const Vector z = project(b_hat, grid.obs_dim(), p.action, template_observation(grid, p));
      cov.noalias() += static_cast<double>(counts[i]) * (z * z.transpose());
    }
  } else {
    constexpr std::size_t kChunk = 4096;
    for (std::size_t done = 0; done < draws; done += kChunk) {
      const auto samples = sample_observations(grid, dist, std::min(kChunk, draws - done), rng, noise_std);
      for (const auto& s : samples) {
        const Vector z = project(b_hat, grid.obs_dim(), s.action, s.observation);
        cov.selfadjointView<Eigen::Lower>().rankUpdate(z);
      }
    }
    cov = cov.selfadjointView<Eigen::Lower>();
  }
  cov /= static_cast<double>(draws);
  return report_from_covariance(std::move(cov));
}

nlohmann::json to_json(const SamplingDistribution& dist) {
  nlohmann::json support = nlohmann::json::array();
  for (const auto& p : dist.support) {
    nlohmann::json e = {{"state", p.state}, {"action", p.action}};
    e["noise_coord"] = p.noise_coord ? nlohmann::json(*p.noise_coord) : nlohmann::json(nullptr);
    support.push_back(std::move(e));
  }
  return {{"support", std::move(support)}, {"weights", dist.weights}};
}

SamplingDistribution distribution_from_json(const nlohmann::json& j) {
  SamplingDistribution dist;
  for (const auto& e : j.at("support")) {
    SupportPoint p;
    p.state = e.at("state").get<std::size_t>();
    p.action = e.at("action").get<std::size_t>();
    if (e.contains("noise_coord") && !e.at("noise_coord").is_null()) p.noise_coord = e.at("noise_coord").get<std::size_t>();
    dist.support.push_back(p);
  }
  dist.weights = j.at("weights").get<std::vector<double>>();
  dist.validate();
  return dist;
}

}  // namespace linrep
