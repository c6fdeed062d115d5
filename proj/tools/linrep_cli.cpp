#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "linrep/errors.hpp"
#include "linrep/evaluation.hpp"
#include "linrep/experiment.hpp"
#include "linrep/serialization.hpp"
#include "linrep/transfer.hpp"

namespace fs = std::filesystem;
using namespace linrep;

namespace {

struct Common {
  std::string config;
  std::string out = ".";
  std::size_t workers = 1;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> level;
};

void add_common(CLI::App* app, Common& c) {
  app->add_option("--config", c.config, "experiment config (JSON)")->required()->check(CLI::ExistingFile);
  app->add_option("--out", c.out, "output directory");
  app->add_option("--workers", c.workers, "worker threads")->check(CLI::PositiveNumber);
  app->add_option("--seed", c.seed, "replace the config seed list with this seed");
}

ExperimentConfig load(const Common& c) {
  ExperimentConfig config = load_config(c.config);
  if (c.seed) config.seeds = {*c.seed};
  if (c.level) {
    if (*c.level == 0 || *c.level > config.horizon) {
      throw ConfigError(fmt::format("--level {} outside [1, {}]", *c.level, config.horizon));
    }
    config.alignment_level = *c.level;
  }
  return config;
}

void write_manifest(const ExperimentConfig& config, std::string_view study, const fs::path& dir,
                    const nlohmann::json& extra = nlohmann::json::object()) {
  fs::create_directories(dir);
  nlohmann::json manifest = make_manifest(config, study);
  manifest.update(extra);
  std::ofstream(dir / "manifest.json") << manifest.dump(2) << '\n';
}

int cmd_train(const Common& c, std::optional<std::size_t> big_n) {
  const ExperimentConfig config = load(c);
  const std::uint64_t seed = config.seeds.front();
  const std::size_t n = big_n.value_or(config.pretrain_samples.back());
  const auto tasks = sample_training_tasks(config, seed);
  TrainConfig tc;
  tc.samples_per_task = n;
  tc.rank = config.effective_rank();
  tc.ridge_lambda = config.train_ridge_lambda;
  tc.seed = derive_seed(seed, {stream::kTrain, n});
  tc.workers = c.workers;
  LearnedRepresentation rep = train(tasks, barycentric_basis(tasks.front(), BasisMode::kBalanced), tc);
  rep.config_hash = config_hash(config);
  const fs::path dir = fs::path(c.out) / fmt::format("rep_{}", hash_hex(fmt::format("{}:{}:{}", rep.config_hash, seed, n)));
  save_representation(rep, dir);
  write_manifest(config, "train", c.out, {{"representation", dir.filename().string()}});
  std::cout << dir.string() << '\n';
  return 0;
}

int cmd_transfer(const Common& c, const std::string& rep_dir, std::optional<std::size_t> n_opt,
                 std::optional<std::string> dist_opt) {
  const ExperimentConfig config = load(c);
  const LearnedRepresentation rep = load_representation(rep_dir);
  const GridWorld eval = make_eval_task(config);
  if (rep.ambient_dim != eval.ambient_dim()) {
    throw ConfigError(fmt::format("representation ambient dim {} does not match config ({})", rep.ambient_dim,
                                  eval.ambient_dim()));
  }
  const BasisMode mode = dist_opt ? parse_basis_mode(*dist_opt) : config.dist_mode;
  const std::size_t n = n_opt.value_or(config.n_sweep.back());
  const std::uint64_t seed = config.seeds.front();
  Rng rng = child_rng(seed, {stream::kTransfer, rep.num_tasks, n});
  const TransferResult result = transfer(rep, eval, barycentric_basis(eval, mode), n, config.ridge_lambda, rng);
  const fs::path dir = fs::path(c.out) / "policy";
  save_transfer(result, rep, dir, {{"config_hash", config_hash(config)}, {"seed", seed}, {"dist", to_string(mode)}});
  write_manifest(config, "transfer", c.out);
  std::cout << dir.string() << '\n';
  return 0;
}

int cmd_eval(const Common& c, const std::string& policy_dir, bool oracle) {
  const ExperimentConfig config = load(c);
  const GridWorld eval = make_eval_task(config);
  const ValueTable table = optimal_values(build_tabular_oracle(eval), eval.horizon());
  std::optional<GreedyPolicy> policy;
  if (oracle) {
    policy.emplace(oracle_policy(eval, table));
  } else {
    if (policy_dir.empty()) throw ConfigError("eval: pass --policy <dir> or --oracle");
    PolicyBundle bundle = load_policy(policy_dir);
    policy.emplace(eval, std::move(bundle.b_hats), std::move(bundle.weights));
  }
  EvalOptions opts;
  opts.episodes = config.episodes;
  opts.state_episodes = config.state_episodes;
  opts.workers = c.workers;
  Rng rng = child_rng(config.seeds.front(), {stream::kEval});
  const EvalReport report = evaluate_policy(*policy, eval, rng, opts);
  const nlohmann::json out = {{"mean_return", report.mean_return},
                              {"stderr", report.std_error},
                              {"oracle_start_value", table.value(1, eval.start_state())},
                              {"suboptimality_start", report.suboptimality_start},
                              {"suboptimality_max", report.suboptimality_max},
                              {"episodes", report.episodes}};
  fs::create_directories(c.out);
  std::ofstream(fs::path(c.out) / "eval.json") << out.dump(2) << '\n';
  write_manifest(config, "eval", c.out);
  std::cout << out.dump(2) << '\n';
  return 0;
}

int cmd_study(const Common& c, std::string_view study, const RunOptions& extra) {
  const ExperimentConfig config = load(c);
  RunOptions opts = extra;
  opts.out_dir = c.out;
  opts.workers = c.workers;
  StudyResult result;
  if (study == "efficiency") {
    result = run_efficiency_study(config, opts);
  } else if (study == "kappa") {
    result = run_kappa_study(config, opts);
  } else {
    result = run_alignment_study(config, opts);
  }
  write_study_outputs(config, study, std::move(result), c.out);
  std::cout << (fs::path(c.out) / "results.csv").string() << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multitask representation learning and transfer on noisy grid worlds"};
  app.require_subcommand(1);

  Common train_c, transfer_c, eval_c, eff_c, kappa_c, align_c;
  std::optional<std::size_t> train_n, transfer_n;
  std::string rep_dir, policy_dir, align_rep;
  std::optional<std::string> dist;
  bool oracle = false, ground_truth = false;

  auto* train_cmd = app.add_subcommand("train", "pretrain a representation on sampled tasks");
  add_common(train_cmd, train_c);
  train_cmd->add_option("--N", train_n, "samples per task per level (default: last N in config)");

  auto* transfer_cmd = app.add_subcommand("transfer", "fit a new task on top of a representation");
  add_common(transfer_cmd, transfer_c);
  transfer_cmd->add_option("--rep", rep_dir, "representation bundle")->required()->check(CLI::ExistingDirectory);
  transfer_cmd->add_option("--n", transfer_n, "samples per level (default: last n in the sweep)");
  transfer_cmd->add_option("--dist", dist, "balanced | unbalanced");

  auto* eval_cmd = app.add_subcommand("eval", "Monte Carlo evaluation of a policy bundle");
  add_common(eval_cmd, eval_c);
  eval_cmd->add_option("--policy", policy_dir, "policy bundle")->check(CLI::ExistingDirectory);
  eval_cmd->add_flag("--oracle", oracle, "evaluate the DP-optimal policy instead");

  auto* eff_cmd = app.add_subcommand("efficiency", "scratch versus transfer over the n sweep");
  add_common(eff_cmd, eff_c);
  auto* kappa_cmd = app.add_subcommand("kappa", "transfer with the ground-truth basis, balanced vs unbalanced");
  add_common(kappa_cmd, kappa_c);
  auto* align_cmd = app.add_subcommand("alignment", "per-coordinate projected norms of a learned basis");
  add_common(align_cmd, align_c);
  align_cmd->add_option("--rep", align_rep, "use this representation bundle instead of training");
  align_cmd->add_flag("--ground-truth", ground_truth, "use the ground-truth basis");
  align_cmd->add_option("--level", align_c.level, "level to report (default: config alignment_level)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*train_cmd) return cmd_train(train_c, train_n);
    if (*transfer_cmd) return cmd_transfer(transfer_c, rep_dir, transfer_n, dist);
    if (*eval_cmd) return cmd_eval(eval_c, policy_dir, oracle);
    if (*eff_cmd) return cmd_study(eff_c, "efficiency", {});
    if (*kappa_cmd) return cmd_study(kappa_c, "kappa", {});
    if (*align_cmd) {
      RunOptions extra;
      if (!align_rep.empty()) {
        if (!fs::is_directory(align_rep)) throw ConfigError(fmt::format("representation '{}' not found", align_rep));
        extra.representation = align_rep;
      }
      extra.ground_truth = ground_truth;
      return cmd_study(align_c, "alignment", extra);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
