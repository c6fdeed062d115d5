#pragma once

#include <cstddef>
#include <optional>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "linrep/gridworld.hpp"
#include "linrep/linalg.hpp"
#include "linrep/rng.hpp"

namespace linrep {

/// A support point of a sampling distribution: a hidden state, an action and
/// an observation template. The template is the clean observation e_state,
/// plus a unit spike on noise coordinate `noise_coord` (index into o2) when
/// present.
struct SupportPoint {
  std::size_t state = 0;
  std::size_t action = 0;
  std::optional<std::size_t> noise_coord;

  friend bool operator==(const SupportPoint&, const SupportPoint&) = default;
};

struct SamplingDistribution {
  std::vector<SupportPoint> support;
  std::vector<double> weights;  // nonnegative, sum to 1

  static SamplingDistribution uniform(std::vector<SupportPoint> support);
  /// Throws std::invalid_argument if empty, mismatched, negative or not summing to 1 (1e-9).
  void validate() const;
  /// Also checks that every point is addressable in `grid`.
  void validate(const GridWorld& grid) const;
};

enum class BasisMode { kBalanced, kUnbalanced };

std::string_view to_string(BasisMode mode);
BasisMode parse_basis_mode(std::string_view name);

/// Uniform distribution over 4 * D_obs template points whose vectorizations
/// form a basis of the ambient space. Every (state, action) pair appears once
/// with a clean template; each (noise coordinate j, action) pair appears once
/// attached to a position: round-robin over all positions (balanced), or
/// always the start position (unbalanced).
SamplingDistribution barycentric_basis(const GridWorld& grid, BasisMode mode);

Vector template_observation(const GridWorld& grid, const SupportPoint& point);
/// xi of the template observation: length 4 * D_obs.
Vector template_vector(const GridWorld& grid, const SupportPoint& point);
/// Rows are template vectors, one per support point.
Matrix support_matrix(const GridWorld& grid, const SamplingDistribution& dist);

/// One draw: the support point plus its observation, i.e. the template with
/// N(0, noise_std^2) added to every noise coordinate.
struct DrawnSample {
  std::size_t support_index;
  std::size_t state;
  std::size_t action;
  Vector observation;  // length D_obs
};

std::vector<DrawnSample> sample_observations(const GridWorld& grid, const SamplingDistribution& dist, std::size_t n,
                                             Rng& rng, double noise_std);

struct Design {
  Matrix x;  // n x (4 * D_obs), rows xi(observation, action)
  std::vector<DrawnSample> samples;
};

/// n i.i.d. design rows. Consumes the rng exactly like sample_observations.
Design sample_design(const GridWorld& grid, const SamplingDistribution& dist, std::size_t n, Rng& rng,
                     double noise_std);

inline constexpr double kKappaEigFloor = 1e-12;

struct KappaReport {
  double kappa = 0.0;  // +inf when `infinite`
  double min_eig = 0.0;
  Matrix covariance;   // d x d
  bool infinite = false;
};

/// Closed form over the support with noiseless templates:
///   Sigma = sum_i w_i (B^T x_i)(B^T x_i)^T,  kappa = 1 / lambda_min(Sigma).
/// Throws InvalidBasis when b_hat does not have orthonormal columns.
KappaReport lafa_kappa(const Matrix& b_hat, const GridWorld& grid, const SamplingDistribution& dist);
/// Same, for explicit ambient support rows (one per row) and their weights.
KappaReport lafa_kappa(const Matrix& b_hat, const Matrix& rows, const std::vector<double>& weights);

/// Monte Carlo estimate of the same quantity from `draws` samples, with
/// observation noise `noise_std` on the noise block.
KappaReport monte_carlo_kappa(const Matrix& b_hat, const GridWorld& grid, const SamplingDistribution& dist,
                              std::size_t draws, double noise_std, Rng& rng);

nlohmann::json to_json(const SamplingDistribution& dist);
SamplingDistribution distribution_from_json(const nlohmann::json& j);

}  // namespace linrep
