#pragma once

#include <cstdint>
#include <filesystem>
#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "linrep/gridworld.hpp"
#include "linrep/representation.hpp"
#include "linrep/sampling.hpp"

namespace linrep {

/// How training tasks are drawn: a random destination among the vacant
/// non-start cells, each remaining vacant cell set on fire independently with
/// probability fire_prob, deviation p ~ U[p_min, p_max].
struct TaskDistribution {
  double p_min = 0.0;
  double p_max = 0.2;
  double fire_prob = 0.15;
};

/// One JSON document. Keys (defaults in parentheses):
///   grid            path to the map, relative to the config file
///   K               optional consistency check against the map
///   D_obs, H, T     observation dim, horizon, number of training tasks
///   N               pretraining samples per task per level (number or list)
///   n_sweep         ascending list of per-level sample sizes for new tasks
///   d               representation rank (0 = 4K)
///   sigma           generative reward noise bound (0)
///   sigma_obs       observation noise std (0)
///   p_eval          deviation probability of the evaluation task (0.05)
///   ridge_lambda    transfer / scratch ridge penalty (0.01)
///   train_ridge_lambda  per-task penalty during pretraining (0)
///   dist_mode       balanced | unbalanced (balanced)
///   seeds           replicate seeds
///   episodes        evaluation rollouts per point (2000)
///   state_episodes  rollouts per hidden state for max sub-optimality (0 = skip)
///   alignment_level level reported by the alignment study (0 = H/2)
///   kappa_mc_draws  Monte Carlo draws for the kappa cross-check (1000000)
///   tasks           {"p_min", "p_max", "fire_prob"}
struct ExperimentConfig {
  std::filesystem::path grid_path;
  GridLayout layout;
  std::optional<std::size_t> expected_k;
  std::size_t obs_dim = 0;
  std::size_t horizon = 0;
  std::size_t num_tasks = 0;
  std::vector<std::size_t> pretrain_samples;
  std::vector<std::size_t> n_sweep;
  std::size_t rank = 0;
  double reward_noise = 0.0;
  double obs_noise_std = 0.0;
  double p_eval = 0.05;
  double ridge_lambda = 0.01;
  double train_ridge_lambda = 0.0;
  BasisMode dist_mode = BasisMode::kBalanced;
  std::vector<std::uint64_t> seeds;
  std::size_t episodes = 2000;
  std::size_t state_episodes = 0;
  std::size_t alignment_level = 0;
  std::size_t kappa_mc_draws = 1000000;
  TaskDistribution tasks;

  std::size_t num_states() const;
  std::size_t effective_rank() const;
  std::size_t effective_alignment_level() const;
};

/// Throws ConfigError; syntax errors and type errors carry a line number.
ExperimentConfig parse_config(std::string_view text, const std::filesystem::path& base_dir);
ExperimentConfig load_config(const std::filesystem::path& path);

/// Canonical echo of the resolved configuration (the map is embedded as text).
nlohmann::json to_json(const ExperimentConfig& config);
/// 16 hex digits of FNV-1a over the canonical echo.
std::string config_hash(const ExperimentConfig& config);
std::string hash_hex(std::string_view text);

GridWorld make_eval_task(const ExperimentConfig& config);
std::vector<GridWorld> sample_training_tasks(const ExperimentConfig& config, std::uint64_t seed);
/// V*_1(start) of the evaluation task.
double oracle_start_value(const ExperimentConfig& config);

struct ResultRow {
  std::string run_id;
  std::string study;
  std::string method;
  std::size_t pretrain_n = 0;
  std::size_t n = 0;
  std::uint64_t seed = 0;
  std::string level;  // level index or "all"
  double mean_return = std::numeric_limits<double>::quiet_NaN();
  double stderr_return = std::numeric_limits<double>::quiet_NaN();
  double kappa = std::numeric_limits<double>::quiet_NaN();
  double alignment_aggregate = std::numeric_limits<double>::quiet_NaN();
  double wall_time_s = 0.0;
};

struct AlignmentRow {
  std::string run_id;
  std::uint64_t seed = 0;
  std::size_t pretrain_n = 0;
  std::size_t level = 0;
  std::size_t coordinate = 0;
  double norm = 0.0;
  bool informative = false;
};

struct KappaRow {
  std::string run_id;
  std::string dist;
  double kappa = 0.0;
  double min_eig = 0.0;
  double kappa_mc_clean = 0.0;
  double kappa_mc_noisy = 0.0;
  std::size_t draws = 0;
};

inline constexpr std::string_view kResultsHeader =
    "run_id,study,method,pretrain_N,n,seed,level,mean_return,stderr,kappa,alignment_aggregate,wall_time_s";
inline constexpr std::string_view kAlignmentHeader = "run_id,seed,pretrain_N,level,coordinate,norm,informative";
inline constexpr std::string_view kKappaHeader = "run_id,dist,kappa,min_eig,kappa_mc_clean,kappa_mc_noisy,draws";

std::string format_number(double x);
std::string to_csv(const ResultRow& row);
std::string to_csv(const AlignmentRow& row);
std::string to_csv(const KappaRow& row);
std::vector<ResultRow> read_results_csv(const std::filesystem::path& path);

void sort_rows(std::vector<ResultRow>& rows);

struct StudyResult {
  std::vector<ResultRow> rows;
  std::vector<AlignmentRow> alignment;
  std::vector<KappaRow> kappa;
};

struct RunOptions {
  std::filesystem::path out_dir;  // empty: nothing written
  std::size_t workers = 1;
  std::optional<std::filesystem::path> representation;  // alignment: use this bundle
  bool ground_truth = false;                            // alignment: inject B*
};

/// Learn-from-scratch versus transfer over the n sweep, for every seed and
/// every pretraining size. Also records alignment of each pretrained B_h at
/// the alignment level.
StudyResult run_efficiency_study(const ExperimentConfig& config, const RunOptions& options);
/// Transfer with B_h = B* under the balanced and unbalanced bases.
StudyResult run_kappa_study(const ExperimentConfig& config, const RunOptions& options);
/// Per-coordinate ||B_h^T e_i|| at the chosen level.
StudyResult run_alignment_study(const ExperimentConfig& config, const RunOptions& options);

/// Writes results.csv (+ alignment.csv / kappa.csv when non-empty) and
/// manifest.json into options.out_dir. Rows are sorted first.
void write_study_outputs(const ExperimentConfig& config, std::string_view study, StudyResult result,
                         const std::filesystem::path& out_dir);
nlohmann::json make_manifest(const ExperimentConfig& config, std::string_view study);

/// Seed-averaged mean return per n for one (method, pretrain_N) curve, in
/// sweep order.
std::vector<std::pair<std::size_t, double>> mean_curve(const std::vector<ResultRow>& rows, std::string_view method,
                                                       std::size_t pretrain_n);
/// Smallest sweep n from which the seed-averaged return stays at or above
/// target for every larger n; +inf (as max size_t) when never reached.
std::size_t threshold_n(const std::vector<ResultRow>& rows, std::string_view method, std::size_t pretrain_n,
                        double target);
/// target = v - 0.1 |v|, i.e. 90% of a positive oracle value.
double ninety_percent_target(double oracle_value);

}  // namespace linrep
