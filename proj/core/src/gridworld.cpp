#include "linrep/gridworld.hpp"

#include <fstream>
#include <limits>
#include <sstream>

#include <fmt/format.h>

#include "linrep/errors.hpp"

namespace linrep {

namespace {

constexpr std::size_t kNone = std::numeric_limits<std::size_t>::max();

bool is_vacant(CellType t) { return t != CellType::Wall; }

}  // namespace

double cell_reward(CellType type) {
  switch (type) {
    case CellType::Ground:
      return kGroundReward;
    case CellType::Fire:
      return kFireReward;
    case CellType::Destination:
      return kDestinationReward;
    case CellType::Wall:
      break;
  }
  throw DomainError("cell_reward: walls cannot be entered");
}

GridLayout parse_grid(std::string_view text) {
  GridLayout layout;
  std::vector<std::string> rows;
  std::vector<std::size_t> row_lines;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t end = std::min(text.find('\n', pos), text.size());
    std::string line(text.substr(pos, end - pos));
    ++line_no;
    pos = end + 1;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) {
      if (end == text.size()) break;
      continue;
    }
    rows.push_back(std::move(line));
    row_lines.push_back(line_no);
    if (end == text.size()) break;
  }
  if (rows.empty()) throw ConfigError("grid: no rows");

  layout.height = rows.size();
  layout.width = rows.front().size();
  bool have_start = false;
  bool have_goal = false;
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (rows[r].size() != layout.width) {
      throw ConfigError(fmt::format("grid line {}: expected {} cells, found {}", row_lines[r], layout.width,
                                    rows[r].size()));
    }
    for (std::size_t c = 0; c < layout.width; ++c) {
      const char ch = rows[r][c];
      switch (ch) {
        case '#':
          layout.cells.push_back(CellType::Wall);
          break;
        case '.':
          layout.cells.push_back(CellType::Ground);
          break;
        case 'F':
          layout.cells.push_back(CellType::Fire);
          break;
        case 'G':
          if (have_goal) throw ConfigError(fmt::format("grid line {}: second destination", row_lines[r]));
          have_goal = true;
          layout.cells.push_back(CellType::Destination);
          break;
        case 'S':
          if (have_start) throw ConfigError(fmt::format("grid line {}: second start", row_lines[r]));
          have_start = true;
          layout.start_cell = r * layout.width + c;
          layout.cells.push_back(CellType::Ground);
          break;
        default:
          throw ConfigError(fmt::format("grid line {}: unknown cell character '{}'", row_lines[r], ch));
      }
    }
  }
  if (!have_goal) throw ConfigError("grid: no destination 'G'");
  if (!have_start) {
    bool found = false;
    for (std::size_t i = 0; i < layout.cells.size() && !found; ++i) {
      if (layout.cells[i] == CellType::Ground || layout.cells[i] == CellType::Fire) {
        layout.start_cell = i;
        found = true;
      }
    }
    if (!found) throw ConfigError("grid: no vacant cell for the start position");
  }
  return layout;
}

GridLayout load_grid(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(fmt::format("cannot open grid file '{}'", path.string()));
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_grid(buffer.str());
}

std::string format_grid(const GridLayout& layout) {
  std::string out;
  for (std::size_t r = 0; r < layout.height; ++r) {
    for (std::size_t c = 0; c < layout.width; ++c) {
      const std::size_t i = r * layout.width + c;
      out.push_back(i == layout.start_cell ? 'S' : static_cast<char>(layout.cells[i]));
    }
    out.push_back('\n');
  }
  return out;
}

GridWorld::GridWorld(GridConfig config) : config_(std::move(config)) {
  const auto& layout = config_.layout;
  if (layout.width == 0 || layout.height == 0 || layout.cells.size() != layout.width * layout.height) {
    throw ConfigError("GridWorld: inconsistent layout dimensions");
  }
  if (!(config_.deviation_prob >= 0.0 && config_.deviation_prob <= 1.0)) {
    throw ConfigError("GridWorld: deviation probability must lie in [0, 1]");
  }
  if (!(config_.obs_noise_std >= 0.0) || !(config_.reward_noise >= 0.0)) {
    throw ConfigError("GridWorld: noise levels must be >= 0");
  }
  if (config_.horizon == 0) throw ConfigError("GridWorld: horizon must be >= 1");

  state_of_cell_.assign(layout.cells.size(), kNone);
  std::size_t goals = 0;
  for (std::size_t i = 0; i < layout.cells.size(); ++i) {
    if (!is_vacant(layout.cells[i])) continue;
    state_of_cell_[i] = cell_of_state_.size();
    if (layout.cells[i] == CellType::Destination) {
      destination_state_ = cell_of_state_.size();
      ++goals;
    }
    cell_of_state_.push_back(i);
  }
  if (goals != 1) throw ConfigError("GridWorld: exactly one destination is required");
  if (layout.start_cell >= layout.cells.size() || state_of_cell_[layout.start_cell] == kNone) {
    throw ConfigError("GridWorld: start must be a vacant cell");
  }
  start_state_ = state_of_cell_[layout.start_cell];
  if (start_state_ == destination_state_) throw ConfigError("GridWorld: start coincides with the destination");

  const std::size_t k = cell_of_state_.size();
  obs_dim_ = config_.obs_dim == 0 ? k : config_.obs_dim;
  if (obs_dim_ < k) throw ConfigError(fmt::format("GridWorld: obs_dim {} is below K = {}", obs_dim_, k));

  neighbor_.resize(k);
  move_reward_.resize(k);
  for (std::size_t s = 0; s < k; ++s) {
    const std::size_t cell = cell_of_state_[s];
    const auto row = static_cast<long>(cell / layout.width);
    const auto col = static_cast<long>(cell % layout.width);
    constexpr std::array<long, kNumActions> dr{-1, 1, 0, 0};
    constexpr std::array<long, kNumActions> dc{0, 0, -1, 1};
    for (std::size_t d = 0; d < kNumActions; ++d) {
      const long nr = row + dr[d];
      const long nc = col + dc[d];
      const bool inside =
          nr >= 0 && nc >= 0 && nr < static_cast<long>(layout.height) && nc < static_cast<long>(layout.width);
      const std::size_t ncell = inside ? static_cast<std::size_t>(nr) * layout.width + static_cast<std::size_t>(nc) : 0;
      if (inside && is_vacant(layout.cells[ncell])) {
        neighbor_[s][d] = state_of_cell_[ncell];
        move_reward_[s][d] = cell_reward(layout.cells[ncell]);
      } else {
        neighbor_[s][d] = s;
        move_reward_[s][d] = kGroundReward;
      }
    }
  }
}

CellType GridWorld::state_type(std::size_t state) const {
  return config_.layout.cells[cell_of_state_.at(state)];
}

std::pair<std::size_t, double> GridWorld::move(std::size_t state, std::size_t direction) const {
  if (state >= num_states()) throw DomainError(fmt::format("state {} out of range", state));
  if (direction >= kNumActions) throw DomainError(fmt::format("action {} out of range", direction));
  return {neighbor_[state][direction], move_reward_[state][direction]};
}

Observation GridWorld::clean_observation(std::size_t state) const {
  if (state >= num_states()) throw DomainError(fmt::format("state {} out of range [0, {})", state, num_states()));
  Observation obs{Vector::Zero(static_cast<Eigen::Index>(obs_dim_)), num_states()};
  obs.values(static_cast<Eigen::Index>(state)) = 1.0;
  return obs;
}

Observation GridWorld::observe(std::size_t state, Rng& rng) const {
  Observation obs = clean_observation(state);
  if (config_.obs_noise_std > 0.0) {
    std::normal_distribution<double> noise(0.0, config_.obs_noise_std);
    for (auto i = static_cast<Eigen::Index>(num_states()); i < obs.values.size(); ++i) obs.values(i) = noise(rng);
  }
  return obs;
}

std::size_t GridWorld::sample_direction(std::size_t action, Rng& rng) const {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  if (unit(rng) >= config_.deviation_prob) return action;
  std::uniform_int_distribution<std::size_t> other(0, kNumActions - 2);
  const std::size_t k = other(rng);
  return k < action ? k : k + 1;
}

StepResult GridWorld::step(std::size_t state, std::size_t action, Rng& rng) const {
  if (state >= num_states()) throw DomainError(fmt::format("state {} out of range", state));
  if (action >= kNumActions) throw DomainError(fmt::format("action {} out of range", action));
  if (is_terminal(state)) throw InvalidTransition("step: episode already terminated at the destination");
  const std::size_t dir = sample_direction(action, rng);
  const std::size_t next = neighbor_[state][dir];
  return {move_reward_[state][dir], next, is_terminal(next)};
}

StepResult GridWorld::query(std::size_t state, std::size_t action, Rng& rng) const {
  if (state >= num_states()) throw DomainError(fmt::format("state {} out of range", state));
  if (action >= kNumActions) throw DomainError(fmt::format("action {} out of range", action));
  if (is_terminal(state)) return {0.0, state, true};
  StepResult out = step(state, action, rng);
  if (config_.reward_noise > 0.0) {
    std::uniform_real_distribution<double> noise(-config_.reward_noise, config_.reward_noise);
    out.reward += noise(rng);
  }
  return out;
}

Vector vectorize(const Vector& observation, std::size_t action) {
  if (action >= kNumActions) throw DomainError(fmt::format("action {} out of range", action));
  const Eigen::Index d = observation.size();
  Vector x = Vector::Zero(static_cast<Eigen::Index>(kNumActions) * d);
  x.segment(static_cast<Eigen::Index>(action) * d, d) = observation;
  return x;
}

Vector vectorize(const Observation& observation, std::size_t action) { return vectorize(observation.values, action); }

Matrix ground_truth_representation(const GridWorld& grid) {
  const auto k = static_cast<Eigen::Index>(grid.num_states());
  const auto d_obs = static_cast<Eigen::Index>(grid.obs_dim());
  Matrix b = Matrix::Zero(static_cast<Eigen::Index>(grid.ambient_dim()), static_cast<Eigen::Index>(kNumActions) * k);
  for (Eigen::Index a = 0; a < static_cast<Eigen::Index>(kNumActions); ++a) {
    for (Eigen::Index s = 0; s < k; ++s) b(a * d_obs + s, a * k + s) = 1.0;
  }
  return b;
}

LinearMdpSpec build_tabular_oracle(const GridWorld& grid) {
  const std::size_t k = grid.num_states();
  const double p = grid.deviation_prob();
  Matrix transitions = Matrix::Zero(static_cast<Eigen::Index>(k * kNumActions), static_cast<Eigen::Index>(k));
  Vector rewards = Vector::Zero(static_cast<Eigen::Index>(k * kNumActions));
  for (std::size_t a = 0; a < kNumActions; ++a) {
    for (std::size_t s = 0; s < k; ++s) {
      const auto row = static_cast<Eigen::Index>(a * k + s);
      if (grid.is_terminal(s)) {
        transitions(row, static_cast<Eigen::Index>(s)) = 1.0;
        continue;
      }
      for (std::size_t dir = 0; dir < kNumActions; ++dir) {
        const double prob = dir == a ? 1.0 - p : p / 3.0;
        if (prob == 0.0) continue;
        const auto [next, reward] = grid.move(s, dir);
        transitions(row, static_cast<Eigen::Index>(next)) += prob;
        rewards(row) += prob * reward;
      }
    }
  }
  return make_tabular_mdp(k, kNumActions, grid.horizon(), transitions, rewards, grid.config().reward_noise);
}

}  // namespace linrep
