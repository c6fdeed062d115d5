#include <map>

#include <gtest/gtest.h>

#include "linrep/errors.hpp"
#include "linrep/sampling.hpp"
#include "oracles.hpp"

using namespace linrep;

namespace {

GridWorld make_grid(std::string_view map, std::size_t obs_dim, double obs_noise = 0.0) {
  GridConfig c;
  c.layout = parse_grid(map);
  c.obs_dim = obs_dim;
  c.obs_noise_std = obs_noise;
  c.horizon = 3;
  return GridWorld(c);
}

const char* kDesk = "S..#\n#F.#\n#..G\n##..\n";

TEST(Barycentric, BalancedSupportIsABasis) {
  const GridWorld g = make_grid(kDesk, 37);
  for (BasisMode mode : {BasisMode::kBalanced, BasisMode::kUnbalanced}) {
    const SamplingDistribution dist = barycentric_basis(g, mode);
    const Matrix m = support_matrix(g, dist);
    ASSERT_EQ(m.rows(), static_cast<Eigen::Index>(g.ambient_dim()));
    ASSERT_EQ(m.cols(), static_cast<Eigen::Index>(g.ambient_dim()));
    EXPECT_GT(svd(m).singular_values.minCoeff(), 1e-3);
  }
}

TEST(Barycentric, UnbalancedConcentratesOnStart) {
  const GridWorld g = make_grid(kDesk, 40);
  const SamplingDistribution dist = barycentric_basis(g, BasisMode::kUnbalanced);
  std::map<std::size_t, std::size_t> hist;
  for (const auto& p : dist.support) ++hist[p.state];
  const std::size_t k = g.num_states();
  const std::size_t per_position = kNumActions;  // one clean template per action
  EXPECT_EQ(hist[g.start_state()], g.ambient_dim() - (k - 1) * per_position);
  for (const auto& [s, c] : hist)
    if (s != g.start_state()) EXPECT_EQ(c, per_position);
  // Balanced spreads the spikes round-robin: counts differ by at most 4.
  std::map<std::size_t, std::size_t> bal;
  for (const auto& p : barycentric_basis(g, BasisMode::kBalanced).support) ++bal[p.state];
  std::size_t lo = SIZE_MAX, hi = 0;
  for (const auto& [s, c] : bal) {
    lo = std::min(lo, c);
    hi = std::max(hi, c);
  }
  EXPECT_LE(hi - lo, kNumActions);
}

TEST(Sample, PointMassGivesItsRow) {
  const GridWorld g = make_grid("S.G\n", 5);
  SamplingDistribution dist = SamplingDistribution::uniform({{1, 2, 1}});
  Rng rng(1);
  const Design d = sample_design(g, dist, 1, rng, 0.0);
  ASSERT_EQ(d.x.rows(), 1);
  EXPECT_EQ(Vector(d.x.row(0).transpose()), template_vector(g, dist.support[0]));
}

TEST(Sample, UniformFrequencies) {
  const GridWorld g = make_grid("S.G\n", 3);
  const auto dist = SamplingDistribution::uniform({{0, 0, {}}, {1, 1, {}}, {2, 2, {}}, {0, 3, {}}});
  Rng rng(2);
  const auto samples = sample_observations(g, dist, 100000, rng, 0.0);
  std::array<int, 4> counts{};
  for (const auto& s : samples) ++counts[s.support_index];
  for (int c : counts) EXPECT_NEAR(c / 100000.0, 0.25, 0.01);
}

TEST(Sample, CleanRowsEqualTemplates) {
  const GridWorld g = make_grid(kDesk, 16);
  const auto dist = barycentric_basis(g, BasisMode::kBalanced);
  Rng rng(3);
  const Design d = sample_design(g, dist, 500, rng, 0.0);
  for (std::size_t i = 0; i < d.samples.size(); ++i) {
    EXPECT_EQ(Vector(d.x.row(static_cast<Eigen::Index>(i)).transpose()),
              template_vector(g, dist.support[d.samples[i].support_index]));
  }
}

TEST(Sample, DesignMatchesObservationStream) {
  const GridWorld g = make_grid(kDesk, 16);
  const auto dist = barycentric_basis(g, BasisMode::kBalanced);
  Rng a(4), b(4);
  const Design d = sample_design(g, dist, 50, a, 0.7);
  const auto s = sample_observations(g, dist, 50, b, 0.7);
  for (std::size_t i = 0; i < s.size(); ++i) {
    EXPECT_EQ(Vector(d.x.row(static_cast<Eigen::Index>(i)).transpose()), vectorize(s[i].observation, s[i].action));
  }
}

TEST(Sample, RejectsBadDistributions) {
  const GridWorld g = make_grid("S.G\n", 3);
  SamplingDistribution dist;
  EXPECT_THROW(dist.validate(), std::invalid_argument);
  dist.support = {{0, 0, {}}, {1, 0, {}}};
  dist.weights = {0.7, 0.7};
  EXPECT_THROW(dist.validate(), std::invalid_argument);
  dist.weights = {1.5, -0.5};
  EXPECT_THROW(dist.validate(), std::invalid_argument);
  EXPECT_THROW(SamplingDistribution::uniform({{5, 0, {}}}).validate(g), DomainError);
  EXPECT_EQ(parse_basis_mode("unbalanced"), BasisMode::kUnbalanced);
  EXPECT_THROW(parse_basis_mode("lopsided"), ConfigError);
}

TEST(Kappa, UnitCaseIsFour) {
  const Matrix rows = Matrix::Identity(4, 4);
  Matrix b = Matrix::Zero(4, 2);
  b(0, 0) = 1;
  b(1, 1) = 1;
  const KappaReport r = lafa_kappa(b, rows, {0.25, 0.25, 0.25, 0.25});
  EXPECT_NEAR(r.kappa, 4.0, 1e-12);
  EXPECT_LE((r.covariance - 0.25 * Matrix::Identity(2, 2)).cwiseAbs().maxCoeff(), 1e-15);
  EXPECT_FALSE(r.infinite);
}

TEST(Kappa, ColumnOutsideSupportIsInfinite) {
  const GridWorld g = make_grid("S.G\n", 3);
  const auto dist = SamplingDistribution::uniform({{0, 0, {}}, {1, 1, {}}});
  Matrix b = Matrix::Zero(static_cast<Eigen::Index>(g.ambient_dim()), 2);
  b(0, 0) = 1;  // state 0, action 0: in support
  b(4, 1) = 1;  // state 1, action 1: in support
  EXPECT_FALSE(lafa_kappa(b, g, dist).infinite);
  b(4, 1) = 0;
  b(2, 1) = 1;  // state 2, action 0: never sampled
  const KappaReport r = lafa_kappa(b, g, dist);
  EXPECT_TRUE(r.infinite);
  EXPECT_TRUE(std::isinf(r.kappa));
}

TEST(Kappa, ClosedFormMatchesMonteCarlo) {
  const GridWorld g = make_grid(kDesk, 40);
  const Matrix b = ground_truth_representation(g);
  for (BasisMode mode : {BasisMode::kBalanced, BasisMode::kUnbalanced}) {
    const auto dist = barycentric_basis(g, mode);
    const double closed = lafa_kappa(b, g, dist).kappa;
    Rng rng(5);
    const double mc = monte_carlo_kappa(b, g, dist, 1000000, 0.0, rng).kappa;
    EXPECT_NEAR(mc / closed, 1.0, 0.05) << to_string(mode);
  }
}

TEST(Kappa, BalancedBeatsUnbalancedWithGroundTruth) {
  for (const char* map : {"S.G\n", kDesk, "S...#\n.#...\nF.#..\n.#.#.\n#...G\n"}) {
    for (std::size_t extra : {3u, 10u, 30u}) {
      const GridWorld g0 = make_grid(map, 0);
      const GridWorld g = make_grid(map, g0.num_states() + extra);
      const Matrix b = ground_truth_representation(g);
      const double bal = lafa_kappa(b, g, barycentric_basis(g, BasisMode::kBalanced)).kappa;
      const double unb = lafa_kappa(b, g, barycentric_basis(g, BasisMode::kUnbalanced)).kappa;
      // Spikes only spread over several owners once D_obs - K >= K.
      if (extra >= g0.num_states())
        EXPECT_LT(bal, unb) << map << " +" << extra;
      else
        EXPECT_EQ(bal, unb) << map << " +" << extra;
    }
  }
}

TEST(Kappa, TraceBoundAndRotationInvariance) {
  const GridWorld g = make_grid(kDesk, 20);
  Rng rng(6);
  const Matrix b = oracle::random_orthonormal(rng, g.ambient_dim(), 7);
  const Matrix q = oracle::random_orthonormal(rng, 7, 7);
  for (BasisMode mode : {BasisMode::kBalanced, BasisMode::kUnbalanced}) {
    const auto dist = barycentric_basis(g, mode);
    const KappaReport r = lafa_kappa(b, g, dist);
    EXPECT_GE(r.kappa, 7.0 / r.covariance.trace() - 1e-12);
    EXPECT_LE(r.min_eig, r.covariance.trace() / 7.0 + 1e-15);
    const KappaReport rotated = lafa_kappa(b * q, g, dist);
    EXPECT_NEAR(rotated.kappa / r.kappa, 1.0, 1e-8);
  }
}

TEST(Kappa, RejectsBadBasis) {
  const GridWorld g = make_grid("S.G\n", 3);
  const auto dist = barycentric_basis(g, BasisMode::kBalanced);
  EXPECT_THROW(lafa_kappa(Matrix::Ones(12, 2), g, dist), InvalidBasis);
  EXPECT_THROW(lafa_kappa(Matrix::Identity(10, 2), g, dist), ShapeError);
}

TEST(Distribution, JsonRoundTrip) {
  const GridWorld g = make_grid(kDesk, 13);
  const auto dist = barycentric_basis(g, BasisMode::kUnbalanced);
  const auto back = distribution_from_json(to_json(dist));
  EXPECT_EQ(back.support, dist.support);
  EXPECT_EQ(back.weights, dist.weights);
}

}  // namespace
