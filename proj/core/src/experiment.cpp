#include "linrep/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <tuple>

#include <fmt/format.h>

#include "linrep/errors.hpp"
#include "linrep/evaluation.hpp"
#include "linrep/serialization.hpp"
#include "linrep/transfer.hpp"

#ifndef LINREP_GIT_HASH
#define LINREP_GIT_HASH "unknown"
#endif
#ifndef LINREP_VERSION
#define LINREP_VERSION "0.0.0"
#endif

namespace linrep {

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

std::size_t line_of_offset(std::string_view text, std::size_t offset) {
  offset = std::min(offset, text.size());
  return 1 + static_cast<std::size_t>(std::count(text.begin(), text.begin() + static_cast<long>(offset), '\n'));
}

std::string where(std::string_view text, std::string_view key) {
  const std::string quoted = fmt::format("\"{}\"", key);
  const auto pos = text.find(quoted);
  if (pos == std::string_view::npos) return fmt::format("key '{}'", key);
  return fmt::format("line {}: key '{}'", line_of_offset(text, pos), key);
}

class Reader {
 public:
  Reader(const json& doc, std::string_view text) : doc_(doc), text_(text) {}

  bool has(std::string_view key) const { return doc_.contains(std::string(key)); }

  template <typename T>
  T get(std::string_view key) const {
    if (!has(key)) throw ConfigError(fmt::format("config: missing required key '{}'", key));
    return convert<T>(doc_.at(std::string(key)), key);
  }

  template <typename T>
  T get_or(std::string_view key, T fallback) const {
    return has(key) ? convert<T>(doc_.at(std::string(key)), key) : fallback;
  }

  std::size_t count(std::string_view key, bool required, std::size_t fallback = 0) const {
    const auto value = required ? get<long long>(key) : get_or<long long>(key, static_cast<long long>(fallback));
    if (value < 0) throw ConfigError(fmt::format("config {}: must be nonnegative", where(text_, key)));
    return static_cast<std::size_t>(value);
  }

  std::vector<std::size_t> counts(std::string_view key) const {
    if (!has(key)) throw ConfigError(fmt::format("config: missing required key '{}'", key));
    const json& v = doc_.at(std::string(key));
    std::vector<long long> raw;
    if (v.is_array()) {
      raw = convert<std::vector<long long>>(v, key);
    } else {
      raw.push_back(convert<long long>(v, key));
    }
    std::vector<std::size_t> out;
    for (long long x : raw) {
      if (x <= 0) throw ConfigError(fmt::format("config {}: counts must be positive", where(text_, key)));
      out.push_back(static_cast<std::size_t>(x));
    }
    return out;
  }

  std::string_view text() const { return text_; }

 private:
  template <typename T>
  T convert(const json& v, std::string_view key) const {
    try {
      if constexpr (std::is_integral_v<T>) {
        if (!v.is_number_integer()) throw ConfigError(fmt::format("config {}: expected an integer", where(text_, key)));
      }
      return v.get<T>();
    } catch (const json::exception& e) {
      throw ConfigError(fmt::format("config {}: {}", where(text_, key), e.what()));
    }
  }

  const json& doc_;
  std::string_view text_;
};

std::uint64_t fnv1a(std::string_view text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

GridConfig grid_config(const ExperimentConfig& config, GridLayout layout, double p) {
  GridConfig gc;
  gc.layout = std::move(layout);
  gc.obs_dim = config.obs_dim;
  gc.obs_noise_std = config.obs_noise_std;
  gc.deviation_prob = p;
  gc.horizon = config.horizon;
  gc.reward_noise = config.reward_noise;
  return gc;
}

std::string run_id(const ExperimentConfig& config, std::string_view study) {
  return fmt::format("{}-{}", study, config_hash(config).substr(0, 8));
}

EvalOptions eval_options(const ExperimentConfig& config, std::size_t workers) {
  EvalOptions o;
  o.episodes = config.episodes;
  o.state_episodes = config.state_episodes;
  o.workers = workers;
  return o;
}

double max_kappa(const TransferResult& result) {
  double k = 0.0;
  for (const auto& lvl : result.levels) k = std::max(k, lvl.kappa);
  return k;
}

void append_alignment(StudyResult& out, const std::string& id, std::uint64_t seed, std::size_t pretrain_n,
                      std::size_t level, const AlignmentReport& report, const std::vector<bool>& informative) {
  for (Eigen::Index i = 0; i < report.coordinate_norms.size(); ++i) {
    out.alignment.push_back({id, seed, pretrain_n, level, static_cast<std::size_t>(i), report.coordinate_norms(i),
                             informative[static_cast<std::size_t>(i)]});
  }
}

void write_lines(const fs::path& path, std::string_view header, const std::vector<std::string>& lines) {
  std::ofstream out(path);
  if (!out) throw ConfigError(fmt::format("cannot write '{}'", path.string()));
  out << header << '\n';
  for (const auto& l : lines) out << l << '\n';
}

}  // namespace

std::size_t ExperimentConfig::num_states() const {
  return static_cast<std::size_t>(
      std::count_if(layout.cells.begin(), layout.cells.end(), [](CellType c) { return c != CellType::Wall; }));
}

std::size_t ExperimentConfig::effective_rank() const { return rank == 0 ? kNumActions * num_states() : rank; }

std::size_t ExperimentConfig::effective_alignment_level() const {
  return alignment_level == 0 ? std::max<std::size_t>(1, horizon / 2) : alignment_level;
}

ExperimentConfig parse_config(std::string_view text, const fs::path& base_dir) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(fmt::format("config line {}: {}", line_of_offset(text, e.byte == 0 ? 0 : e.byte - 1), e.what()));
  }
  if (!doc.is_object()) throw ConfigError("config: top level must be a JSON object");
  const Reader r(doc, text);

  ExperimentConfig c;
  const auto grid = r.get<std::string>("grid");
  c.grid_path = fs::path(grid).is_absolute() ? fs::path(grid) : base_dir / grid;
  try {
    c.layout = load_grid(c.grid_path);
  } catch (const ConfigError& e) {
    throw ConfigError(fmt::format("config {}: {}", where(text, "grid"), e.what()));
  }
  if (r.has("K")) c.expected_k = r.count("K", true);
  c.obs_dim = r.count("D_obs", true);
  c.horizon = r.count("H", true);
  c.num_tasks = r.count("T", true);
  c.pretrain_samples = r.counts("N");
  c.n_sweep = r.counts("n_sweep");
  c.rank = r.count("d", false, 0);
  c.reward_noise = r.get_or<double>("sigma", 0.0);
  c.obs_noise_std = r.get_or<double>("sigma_obs", 0.0);
  c.p_eval = r.get_or<double>("p_eval", 0.05);
  c.ridge_lambda = r.get_or<double>("ridge_lambda", 0.01);
  c.train_ridge_lambda = r.get_or<double>("train_ridge_lambda", 0.0);
  try {
    c.dist_mode = parse_basis_mode(r.get_or<std::string>("dist_mode", "balanced"));
  } catch (const ConfigError& e) {
    throw ConfigError(fmt::format("config {}: {}", where(text, "dist_mode"), e.what()));
  }
  c.seeds = r.get<std::vector<std::uint64_t>>("seeds");
  c.episodes = r.count("episodes", false, 2000);
  c.state_episodes = r.count("state_episodes", false, 0);
  c.alignment_level = r.count("alignment_level", false, 0);
  c.kappa_mc_draws = r.count("kappa_mc_draws", false, 1000000);
  if (r.has("tasks")) {
    const Reader t(doc.at("tasks"), text);
    c.tasks.p_min = t.get_or<double>("p_min", c.tasks.p_min);
    c.tasks.p_max = t.get_or<double>("p_max", c.tasks.p_max);
    c.tasks.fire_prob = t.get_or<double>("fire_prob", c.tasks.fire_prob);
  }

  const std::size_t k = c.num_states();
  if (c.expected_k && *c.expected_k != k) {
    throw ConfigError(fmt::format("config {}: map has K = {} vacant cells", where(text, "K"), k));
  }
  if (c.obs_dim < k) throw ConfigError(fmt::format("config {}: D_obs must be >= K = {}", where(text, "D_obs"), k));
  if (c.horizon == 0) throw ConfigError(fmt::format("config {}: must be positive", where(text, "H")));
  if (c.num_tasks == 0) throw ConfigError(fmt::format("config {}: must be positive", where(text, "T")));
  if (!std::is_sorted(c.n_sweep.begin(), c.n_sweep.end()) ||
      std::adjacent_find(c.n_sweep.begin(), c.n_sweep.end()) != c.n_sweep.end()) {
    throw ConfigError(fmt::format("config {}: must be strictly ascending", where(text, "n_sweep")));
  }
  if (c.seeds.empty()) throw ConfigError(fmt::format("config {}: at least one seed is required", where(text, "seeds")));
  if (c.episodes == 0) throw ConfigError(fmt::format("config {}: must be positive", where(text, "episodes")));
  if (c.reward_noise < 0 || c.obs_noise_std < 0) throw ConfigError("config: noise levels must be >= 0");
  if (c.p_eval < 0 || c.p_eval > 1) throw ConfigError(fmt::format("config {}: must lie in [0, 1]", where(text, "p_eval")));
  if (c.ridge_lambda < 0 || c.train_ridge_lambda < 0) throw ConfigError("config: ridge penalties must be >= 0");
  if (c.tasks.p_min < 0 || c.tasks.p_max > 1 || c.tasks.p_min > c.tasks.p_max) {
    throw ConfigError(fmt::format("config {}: need 0 <= p_min <= p_max <= 1", where(text, "tasks")));
  }
  if (c.tasks.fire_prob < 0 || c.tasks.fire_prob > 1) {
    throw ConfigError(fmt::format("config {}: fire_prob must lie in [0, 1]", where(text, "tasks")));
  }
  if (c.alignment_level > c.horizon) {
    throw ConfigError(fmt::format("config {}: level must lie in [1, H]", where(text, "alignment_level")));
  }
  return c;
}

ExperimentConfig load_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(fmt::format("cannot open config '{}'", path.string()));
  std::stringstream buffer;
  buffer << in.rdbuf();
  try {
    return parse_config(buffer.str(), path.parent_path());
  } catch (const ConfigError& e) {
    throw ConfigError(fmt::format("{}: {}", path.string(), e.what()));
  }
}

json to_json(const ExperimentConfig& c) {
  return {{"grid_map", format_grid(c.layout)},
          {"K", c.num_states()},
          {"D_obs", c.obs_dim},
          {"H", c.horizon},
          {"T", c.num_tasks},
          {"N", c.pretrain_samples},
          {"n_sweep", c.n_sweep},
          {"d", c.effective_rank()},
          {"sigma", c.reward_noise},
          {"sigma_obs", c.obs_noise_std},
          {"p_eval", c.p_eval},
          {"ridge_lambda", c.ridge_lambda},
          {"train_ridge_lambda", c.train_ridge_lambda},
          {"dist_mode", std::string(to_string(c.dist_mode))},
          {"seeds", c.seeds},
          {"episodes", c.episodes},
          {"state_episodes", c.state_episodes},
          {"alignment_level", c.effective_alignment_level()},
          {"kappa_mc_draws", c.kappa_mc_draws},
          {"tasks", {{"p_min", c.tasks.p_min}, {"p_max", c.tasks.p_max}, {"fire_prob", c.tasks.fire_prob}}}};
}

std::string hash_hex(std::string_view text) { return fmt::format("{:016x}", fnv1a(text)); }

std::string config_hash(const ExperimentConfig& config) { return hash_hex(to_json(config).dump()); }

GridWorld make_eval_task(const ExperimentConfig& config) {
  return GridWorld(grid_config(config, config.layout, config.p_eval));
}

std::vector<GridWorld> sample_training_tasks(const ExperimentConfig& config, std::uint64_t seed) {
  std::vector<std::size_t> candidates;
  for (std::size_t i = 0; i < config.layout.cells.size(); ++i) {
    if (config.layout.cells[i] != CellType::Wall && i != config.layout.start_cell) candidates.push_back(i);
  }
  if (candidates.empty()) throw ConfigError("task sampling: no cell available for a destination");

  std::vector<GridWorld> tasks;
  tasks.reserve(config.num_tasks);
  for (std::size_t t = 0; t < config.num_tasks; ++t) {
    Rng rng = child_rng(seed, {stream::kTasks, t});
    GridLayout layout = config.layout;
    for (auto& cell : layout.cells) {
      if (cell != CellType::Wall) cell = CellType::Ground;
    }
    std::uniform_int_distribution<std::size_t> pick(0, candidates.size() - 1);
    const std::size_t goal = candidates[pick(rng)];
    layout.cells[goal] = CellType::Destination;
    std::bernoulli_distribution fire(config.tasks.fire_prob);
    for (std::size_t cell : candidates) {
      if (cell != goal && fire(rng)) layout.cells[cell] = CellType::Fire;
    }
    std::uniform_real_distribution<double> p(config.tasks.p_min, config.tasks.p_max);
    const double deviation = config.tasks.p_max > config.tasks.p_min ? p(rng) : config.tasks.p_min;
    tasks.emplace_back(grid_config(config, std::move(layout), deviation));
  }
  return tasks;
}

double oracle_start_value(const ExperimentConfig& config) {
  const GridWorld eval = make_eval_task(config);
  return optimal_values(build_tabular_oracle(eval), eval.horizon()).value(1, eval.start_state());
}

std::string format_number(double x) {
  if (std::isnan(x)) return "";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  return fmt::format("{:.10g}", x);
}

std::string to_csv(const ResultRow& r) {
  return fmt::format("{},{},{},{},{},{},{},{},{},{},{},{}", r.run_id, r.study, r.method, r.pretrain_n, r.n, r.seed,
                     r.level, format_number(r.mean_return), format_number(r.stderr_return), format_number(r.kappa),
                     format_number(r.alignment_aggregate), fmt::format("{:.3f}", r.wall_time_s));
}

std::string to_csv(const AlignmentRow& r) {
  return fmt::format("{},{},{},{},{},{},{}", r.run_id, r.seed, r.pretrain_n, r.level, r.coordinate,
                     format_number(r.norm), r.informative ? 1 : 0);
}

std::string to_csv(const KappaRow& r) {
  return fmt::format("{},{},{},{},{},{},{}", r.run_id, r.dist, format_number(r.kappa), format_number(r.min_eig),
                     format_number(r.kappa_mc_clean), format_number(r.kappa_mc_noisy), r.draws);
}

std::vector<ResultRow> read_results_csv(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(fmt::format("cannot open '{}'", path.string()));
  std::string line;
  if (!std::getline(in, line) || line != kResultsHeader) {
    throw ConfigError(fmt::format("'{}': header does not match the results schema", path.string()));
  }
  auto number = [](const std::string& s) {
    if (s.empty()) return std::numeric_limits<double>::quiet_NaN();
    return std::stod(s);
  };
  std::vector<ResultRow> rows;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) f.push_back(cell);
    if (!line.empty() && line.back() == ',') f.emplace_back();
    if (f.size() != 12) throw ConfigError(fmt::format("{}:{}: expected 12 fields", path.string(), line_no));
    ResultRow r;
    r.run_id = f[0];
    r.study = f[1];
    r.method = f[2];
    r.pretrain_n = std::stoull(f[3]);
    r.n = std::stoull(f[4]);
    r.seed = std::stoull(f[5]);
    r.level = f[6];
    r.mean_return = number(f[7]);
    r.stderr_return = number(f[8]);
    r.kappa = number(f[9]);
    r.alignment_aggregate = number(f[10]);
    r.wall_time_s = number(f[11]);
    rows.push_back(std::move(r));
  }
  return rows;
}

void sort_rows(std::vector<ResultRow>& rows) {
  std::stable_sort(rows.begin(), rows.end(), [](const ResultRow& a, const ResultRow& b) {
    return std::tie(a.study, a.method, a.pretrain_n, a.n, a.seed, a.level) <
           std::tie(b.study, b.method, b.pretrain_n, b.n, b.seed, b.level);
  });
}

StudyResult run_efficiency_study(const ExperimentConfig& config, const RunOptions& options) {
  const std::string id = run_id(config, "efficiency");
  const std::string hash = config_hash(config);
  const GridWorld eval = make_eval_task(config);
  const SamplingDistribution dist = barycentric_basis(eval, config.dist_mode);
  const Matrix b_star = ground_truth_representation(eval);
  const auto informative = informative_coordinates(b_star);
  const std::size_t level = config.effective_alignment_level();
  const EvalOptions eopts = eval_options(config, options.workers);

  StudyResult out;
  for (std::uint64_t seed : config.seeds) {
    const auto tasks = sample_training_tasks(config, seed);
    const SamplingDistribution train_dist = barycentric_basis(tasks.front(), BasisMode::kBalanced);

    for (std::size_t big_n : config.pretrain_samples) {
      TrainConfig tc;
      tc.samples_per_task = big_n;
      tc.rank = config.effective_rank();
      tc.ridge_lambda = config.train_ridge_lambda;
      tc.seed = derive_seed(seed, {stream::kTrain, big_n});
      tc.workers = options.workers;
      LearnedRepresentation rep = train(tasks, train_dist, tc);
      rep.config_hash = hash;
      if (!options.out_dir.empty()) {
        save_representation(rep, options.out_dir / fmt::format("rep_{}", hash_hex(fmt::format("{}:{}:{}", hash, seed, big_n))));
      }
      const AlignmentReport align = subspace_alignment(rep.level(level).b_hat, b_star);
      append_alignment(out, id, seed, big_n, level, align, informative);

      for (std::size_t n : config.n_sweep) {
        const auto t0 = std::chrono::steady_clock::now();
        Rng rng = child_rng(seed, {stream::kTransfer, big_n, n});
        const TransferResult result = transfer(rep, eval, dist, n, config.ridge_lambda, rng);
        const GreedyPolicy policy = make_policy(rep, result, eval);
        Rng erng = child_rng(seed, {stream::kEval, stream::kTransfer, big_n, n});
        const EvalReport report = evaluate_policy(policy, eval, erng, eopts);
        ResultRow row{id, "efficiency", "transfer", big_n, n, seed, "all"};
        row.mean_return = report.mean_return;
        row.stderr_return = report.std_error;
        row.kappa = max_kappa(result);
        row.alignment_aggregate = align.aggregate;
        row.wall_time_s = seconds_since(t0);
        out.rows.push_back(std::move(row));
      }
    }

    for (std::size_t n : config.n_sweep) {
      const auto t0 = std::chrono::steady_clock::now();
      TrainConfig tc;
      tc.samples_per_task = n;
      tc.rank = 1;
      tc.ridge_lambda = config.ridge_lambda;
      tc.seed = derive_seed(seed, {stream::kScratch, n});
      const std::vector<GridWorld> single{eval};
      const LearnedRepresentation rep = train(single, dist, tc);
      const GreedyPolicy policy = task_policy(rep, 0, eval);
      Rng erng = child_rng(seed, {stream::kEval, stream::kScratch, n});
      const EvalReport report = evaluate_policy(policy, eval, erng, eopts);
      ResultRow row{id, "efficiency", "scratch", 0, n, seed, "all"};
      row.mean_return = report.mean_return;
      row.stderr_return = report.std_error;
      row.wall_time_s = seconds_since(t0);
      out.rows.push_back(std::move(row));
    }
  }
  sort_rows(out.rows);
  return out;
}

StudyResult run_kappa_study(const ExperimentConfig& config, const RunOptions& options) {
  const std::string id = run_id(config, "kappa");
  const GridWorld eval = make_eval_task(config);
  const LearnedRepresentation rep = ground_truth_representation_levels(eval);
  const Matrix& b_star = rep.level(1).b_hat;
  const EvalOptions eopts = eval_options(config, options.workers);

  StudyResult out;
  for (BasisMode mode : {BasisMode::kBalanced, BasisMode::kUnbalanced}) {
    const auto tag = static_cast<std::uint64_t>(mode);
    const SamplingDistribution dist = barycentric_basis(eval, mode);
    const KappaReport closed = lafa_kappa(b_star, eval, dist);

    KappaRow krow{id, std::string(to_string(mode)), closed.kappa, closed.min_eig, 0.0, 0.0, config.kappa_mc_draws};
    Rng clean_rng = child_rng(config.seeds.front(), {stream::kKappa, tag, 0});
    krow.kappa_mc_clean = monte_carlo_kappa(b_star, eval, dist, config.kappa_mc_draws, 0.0, clean_rng).kappa;
    Rng noisy_rng = child_rng(config.seeds.front(), {stream::kKappa, tag, 1});
    krow.kappa_mc_noisy =
        monte_carlo_kappa(b_star, eval, dist, config.kappa_mc_draws, eval.obs_noise_std(), noisy_rng).kappa;
    out.kappa.push_back(std::move(krow));

    const std::string method = fmt::format("transfer_{}", to_string(mode));
    for (std::uint64_t seed : config.seeds) {
      for (std::size_t n : config.n_sweep) {
        const auto t0 = std::chrono::steady_clock::now();
        Rng rng = child_rng(seed, {stream::kKappa, tag, n});
        const TransferResult result = transfer(rep, eval, dist, n, config.ridge_lambda, rng);
        const GreedyPolicy policy = make_policy(rep, result, eval);
        Rng erng = child_rng(seed, {stream::kEval, stream::kKappa, tag, n});
        const EvalReport report = evaluate_policy(policy, eval, erng, eopts);
        ResultRow row{id, "kappa", method, 0, n, seed, "all"};
        row.mean_return = report.mean_return;
        row.stderr_return = report.std_error;
        row.kappa = closed.kappa;
        row.alignment_aggregate = 0.0;
        row.wall_time_s = seconds_since(t0);
        out.rows.push_back(std::move(row));
      }
    }
  }
  sort_rows(out.rows);
  return out;
}

StudyResult run_alignment_study(const ExperimentConfig& config, const RunOptions& options) {
  const std::string id = run_id(config, "alignment");
  const GridWorld eval = make_eval_task(config);
  const Matrix b_star = ground_truth_representation(eval);
  const auto informative = informative_coordinates(b_star);
  const std::size_t level = config.effective_alignment_level();
  if (level == 0 || level > config.horizon) {
    throw ConfigError(fmt::format("alignment level {} outside [1, {}]", level, config.horizon));
  }

  StudyResult out;
  auto record = [&](const LearnedRepresentation& rep, std::string method, std::uint64_t seed, std::size_t big_n,
                    double elapsed) {
    if (level > rep.levels.size()) {
      throw ConfigError(fmt::format("alignment level {} outside [1, {}]", level, rep.levels.size()));
    }
    const AlignmentReport report = subspace_alignment(rep.level(level).b_hat, b_star);
    append_alignment(out, id, seed, big_n, level, report, informative);
    ResultRow row{id, "alignment", std::move(method), big_n, 0, seed, std::to_string(level)};
    row.alignment_aggregate = report.aggregate;
    row.wall_time_s = elapsed;
    out.rows.push_back(std::move(row));
  };

  if (options.ground_truth) {
    record(ground_truth_representation_levels(eval), "ground_truth", 0, 0, 0.0);
  } else if (options.representation) {
    const LearnedRepresentation rep = load_representation(*options.representation);
    if (rep.ambient_dim != eval.ambient_dim()) {
      throw ConfigError(fmt::format("representation ambient dim {} does not match config ({})", rep.ambient_dim,
                                    eval.ambient_dim()));
    }
    record(rep, "loaded", rep.seed, 0, 0.0);
  } else {
    const std::size_t big_n = config.pretrain_samples.back();
    for (std::uint64_t seed : config.seeds) {
      const auto t0 = std::chrono::steady_clock::now();
      const auto tasks = sample_training_tasks(config, seed);
      TrainConfig tc;
      tc.samples_per_task = big_n;
      tc.rank = config.effective_rank();
      tc.ridge_lambda = config.train_ridge_lambda;
      tc.seed = derive_seed(seed, {stream::kTrain, big_n});
      tc.workers = options.workers;
      LearnedRepresentation rep = train(tasks, barycentric_basis(tasks.front(), BasisMode::kBalanced), tc);
      rep.config_hash = config_hash(config);
      if (!options.out_dir.empty()) {
        save_representation(
            rep, options.out_dir / fmt::format("rep_{}", hash_hex(fmt::format("{}:{}:{}", rep.config_hash, seed, big_n))));
      }
      record(rep, "learned", seed, big_n, seconds_since(t0));
    }
  }
  sort_rows(out.rows);
  return out;
}

json make_manifest(const ExperimentConfig& config, std::string_view study) {
  return {{"study", std::string(study)},
          {"config", to_json(config)},
          {"config_hash", config_hash(config)},
          {"git_hash", LINREP_GIT_HASH},
          {"versions",
           {{"linrep", LINREP_VERSION},
            {"eigen", fmt::format("{}.{}.{}", EIGEN_WORLD_VERSION, EIGEN_MAJOR_VERSION, EIGEN_MINOR_VERSION)},
            {"compiler", __VERSION__}}}};
}

void write_study_outputs(const ExperimentConfig& config, std::string_view study, StudyResult result,
                         const fs::path& out_dir) {
  fs::create_directories(out_dir);
  sort_rows(result.rows);
  std::vector<std::string> lines;
  for (const auto& r : result.rows) lines.push_back(to_csv(r));
  write_lines(out_dir / "results.csv", kResultsHeader, lines);
  if (!result.alignment.empty()) {
    lines.clear();
    for (const auto& r : result.alignment) lines.push_back(to_csv(r));
    write_lines(out_dir / "alignment.csv", kAlignmentHeader, lines);
  }
  if (!result.kappa.empty()) {
    lines.clear();
    for (const auto& r : result.kappa) lines.push_back(to_csv(r));
    write_lines(out_dir / "kappa.csv", kKappaHeader, lines);
  }
  std::ofstream(out_dir / "manifest.json") << make_manifest(config, study).dump(2) << '\n';
}

std::vector<std::pair<std::size_t, double>> mean_curve(const std::vector<ResultRow>& rows, std::string_view method,
                                                       std::size_t pretrain_n) {
  std::map<std::size_t, std::pair<double, std::size_t>> acc;
  for (const auto& r : rows) {
    if (r.method != method || r.pretrain_n != pretrain_n || std::isnan(r.mean_return)) continue;
    auto& slot = acc[r.n];
    slot.first += r.mean_return;
    ++slot.second;
  }
  std::vector<std::pair<std::size_t, double>> curve;
  for (const auto& [n, s] : acc) curve.emplace_back(n, s.first / static_cast<double>(s.second));
  return curve;
}

std::size_t threshold_n(const std::vector<ResultRow>& rows, std::string_view method, std::size_t pretrain_n,
                        double target) {
  const auto curve = mean_curve(rows, method, pretrain_n);
  std::size_t answer = std::numeric_limits<std::size_t>::max();
  for (auto it = curve.rbegin(); it != curve.rend(); ++it) {
    if (it->second < target) break;
    answer = it->first;
  }
  return answer;
}

double ninety_percent_target(double oracle_value) { return oracle_value - 0.1 * std::abs(oracle_value); }

}  // namespace linrep
