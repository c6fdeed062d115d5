#include "linrep/serialization.hpp"

#include <cerrno>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include <fmt/format.h>

#include "linrep/errors.hpp"

namespace linrep {

namespace fs = std::filesystem;

namespace {

constexpr int kFormatVersion = 1;

nlohmann::json read_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(fmt::format("cannot open '{}'", path.string()));
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(fmt::format("malformed '{}': {}", path.string(), e.what()));
  }
}

void write_json(const fs::path& path, const nlohmann::json& j) {
  std::ofstream out(path);
  if (!out) throw ConfigError(fmt::format("cannot write '{}'", path.string()));
  out << j.dump(2) << '\n';
}

std::string level_file(std::size_t h, const char* what) { return fmt::format("level_{}_{}.csv", h, what); }

}  // namespace

void write_matrix_csv(const fs::path& path, const Matrix& m) {
  std::ofstream out(path);
  if (!out) throw ConfigError(fmt::format("cannot write '{}'", path.string()));
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    std::string line;
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      if (j) line.push_back(',');
      line += fmt::format("{:.17g}", m(i, j));
    }
    out << line << '\n';
  }
}

Matrix read_matrix_csv(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(fmt::format("cannot open '{}'", path.string()));
  std::vector<std::vector<double>> rows;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      errno = 0;
      char* end = nullptr;
      const double x = std::strtod(cell.c_str(), &end);
      if (end == cell.c_str() || errno == ERANGE) {
        throw ConfigError(fmt::format("{}:{}: bad number '{}'", path.string(), line_no, cell));
      }
      row.push_back(x);
    }
    if (!rows.empty() && row.size() != rows.front().size()) {
      throw ConfigError(fmt::format("{}:{}: ragged row", path.string(), line_no));
    }
    rows.push_back(std::move(row));
  }
  Matrix m(static_cast<Eigen::Index>(rows.size()), rows.empty() ? 0 : static_cast<Eigen::Index>(rows.front().size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < rows[i].size(); ++j) m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
  }
  return m;
}

void save_representation(const LearnedRepresentation& rep, const fs::path& dir) {
  fs::create_directories(dir);
  nlohmann::json header = {{"format", "linrep-representation"},
                           {"version", kFormatVersion},
                           {"ambient_dim", rep.ambient_dim},
                           {"rank", rep.rank},
                           {"num_tasks", rep.num_tasks},
                           {"horizon", rep.horizon},
                           {"seed", rep.seed},
                           {"config_hash", rep.config_hash}};
  nlohmann::json levels = nlohmann::json::array();
  for (std::size_t h = 1; h <= rep.levels.size(); ++h) {
    const auto& lvl = rep.level(h);
    std::vector<double> sv(lvl.singular_values.data(), lvl.singular_values.data() + lvl.singular_values.size());
    levels.push_back({{"level", h},
                      {"b_hat", level_file(h, "b_hat")},
                      {"w_hat", level_file(h, "w_hat")},
                      {"theta", level_file(h, "theta")},
                      {"singular_values", sv},
                      {"value_min", lvl.value_min},
                      {"value_max", lvl.value_max}});
    write_matrix_csv(dir / level_file(h, "b_hat"), lvl.b_hat);
    write_matrix_csv(dir / level_file(h, "w_hat"), lvl.w_hat);
    write_matrix_csv(dir / level_file(h, "theta"), lvl.theta_stack);
  }
  header["levels"] = std::move(levels);
  write_json(dir / "rep.json", header);
}

LearnedRepresentation load_representation(const fs::path& dir) {
  if (!fs::exists(dir / "rep.json")) {
    throw ConfigError(fmt::format("no representation bundle at '{}' (missing rep.json)", dir.string()));
  }
  const nlohmann::json header = read_json(dir / "rep.json");
  try {
    if (header.at("format") != "linrep-representation") throw ConfigError("not a representation bundle");
    LearnedRepresentation rep;
    rep.ambient_dim = header.at("ambient_dim").get<std::size_t>();
    rep.rank = header.at("rank").get<std::size_t>();
    rep.num_tasks = header.at("num_tasks").get<std::size_t>();
    rep.horizon = header.at("horizon").get<std::size_t>();
    rep.seed = header.at("seed").get<std::uint64_t>();
    rep.config_hash = header.at("config_hash").get<std::string>();
    for (const auto& entry : header.at("levels")) {
      RepresentationLevel lvl;
      lvl.b_hat = read_matrix_csv(dir / entry.at("b_hat").get<std::string>());
      lvl.w_hat = read_matrix_csv(dir / entry.at("w_hat").get<std::string>());
      lvl.theta_stack = read_matrix_csv(dir / entry.at("theta").get<std::string>());
      const auto sv = entry.at("singular_values").get<std::vector<double>>();
      lvl.singular_values = Eigen::Map<const Vector>(sv.data(), static_cast<Eigen::Index>(sv.size()));
      lvl.value_min = entry.at("value_min").get<double>();
      lvl.value_max = entry.at("value_max").get<double>();
      if (lvl.b_hat.rows() != static_cast<Eigen::Index>(rep.ambient_dim)) {
        throw ConfigError(fmt::format("level {}: b_hat has {} rows, expected {}", rep.levels.size() + 1,
                                      lvl.b_hat.rows(), rep.ambient_dim));
      }
      rep.levels.push_back(std::move(lvl));
    }
    if (rep.levels.size() != rep.horizon) throw ConfigError("representation bundle: level count != horizon");
    return rep;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(fmt::format("malformed rep.json in '{}': {}", dir.string(), e.what()));
  }
}

void save_transfer(const TransferResult& result, const LearnedRepresentation& rep, const fs::path& dir,
                   const nlohmann::json& extra) {
  fs::create_directories(dir);
  nlohmann::json header = {{"format", "linrep-policy"},
                           {"version", kFormatVersion},
                           {"n", result.n},
                           {"ridge_lambda", result.ridge_lambda},
                           {"representation_hash", rep.config_hash},
                           {"extra", extra}};
  nlohmann::json levels = nlohmann::json::array();
  for (std::size_t h = 1; h <= result.levels.size(); ++h) {
    const auto& lvl = result.level(h);
    levels.push_back({{"level", h},
                      {"kappa", lvl.kappa_infinite ? nlohmann::json("inf") : nlohmann::json(lvl.kappa)},
                      {"residual", lvl.residual},
                      {"b_hat", level_file(h, "b_hat")},
                      {"w", level_file(h, "w")}});
    write_matrix_csv(dir / level_file(h, "b_hat"), rep.level(h).b_hat);
    write_matrix_csv(dir / level_file(h, "w"), Matrix(lvl.w_new));
  }
  header["levels"] = std::move(levels);
  write_json(dir / "transfer.json", header);
}

PolicyBundle load_policy(const fs::path& dir) {
  if (!fs::exists(dir / "transfer.json")) {
    throw ConfigError(fmt::format("no policy bundle at '{}' (missing transfer.json)", dir.string()));
  }
  PolicyBundle bundle;
  bundle.header = read_json(dir / "transfer.json");
  try {
    for (const auto& entry : bundle.header.at("levels")) {
      bundle.b_hats.push_back(read_matrix_csv(dir / entry.at("b_hat").get<std::string>()));
      const Matrix w = read_matrix_csv(dir / entry.at("w").get<std::string>());
      if (w.cols() != 1) throw ConfigError("policy bundle: weight file must be a single column");
      bundle.weights.push_back(w.col(0));
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(fmt::format("malformed transfer.json in '{}': {}", dir.string(), e.what()));
  }
  return bundle;
}

}  // namespace linrep
