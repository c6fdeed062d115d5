#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "linrep/linalg.hpp"
#include "linrep/linear_mdp.hpp"
#include "linrep/rng.hpp"

namespace linrep {

enum class CellType : char { Wall = '#', Ground = '.', Fire = 'F', Destination = 'G' };

inline constexpr std::size_t kNumActions = 4;

// Action indices. Up decreases the row, Left decreases the column.
enum Direction : std::size_t { kUp = 0, kDown = 1, kLeft = 2, kRight = 3 };

inline constexpr double kGroundReward = -1.0;
inline constexpr double kFireReward = -10.0;
inline constexpr double kDestinationReward = 100.0;

double cell_reward(CellType type);

/// A parsed map. Text format, one character per cell:
///   '#' wall, '.' ground, 'F' fire, 'G' destination, 'S' start (ground).
/// Exactly one 'G' is required; without an 'S' the first vacant
/// non-destination cell in row-major order is the start.
struct GridLayout {
  std::size_t width = 0;
  std::size_t height = 0;
  std::vector<CellType> cells;  // row-major, height * width
  std::size_t start_cell = 0;   // index into cells

  CellType at(std::size_t row, std::size_t col) const { return cells[row * width + col]; }
};

/// Throws ConfigError with a line number on malformed input.
GridLayout parse_grid(std::string_view text);
GridLayout load_grid(const std::filesystem::path& path);
std::string format_grid(const GridLayout& layout);

struct GridConfig {
  GridLayout layout;
  std::size_t obs_dim = 0;        // D_obs >= K; 0 means D_obs = K
  double obs_noise_std = 0.0;     // sigma' of the noise block o2
  double deviation_prob = 0.0;    // p
  std::size_t horizon = 1;        // H
  double reward_noise = 0.0;      // sigma of the generative model
};

/// Observation s_o = [o1, o2]: o1 one-hot of the hidden position (length K),
/// o2 the noise block (length D_obs - K).
struct Observation {
  Vector values;  // length D_obs
  std::size_t num_states = 0;

  auto o1() const { return values.head(static_cast<Eigen::Index>(num_states)); }
  auto o2() const { return values.tail(values.size() - static_cast<Eigen::Index>(num_states)); }
};

struct StepResult {
  double reward;
  std::size_t next_state;
  bool done;
};

/// Noisy grid world over hidden states [0, K), one per vacant cell in
/// row-major order. With probability 1 - p the intended direction is taken,
/// otherwise one of the other three uniformly. Bumping into a wall or the
/// boundary keeps the position and pays the ground reward; otherwise the
/// reward of the entered cell is paid. Entering the destination ends the
/// episode; the destination is absorbing with zero reward.
class GridWorld {
 public:
  explicit GridWorld(GridConfig config);

  const GridConfig& config() const { return config_; }
  std::size_t num_states() const { return cell_of_state_.size(); }
  std::size_t obs_dim() const { return obs_dim_; }
  std::size_t ambient_dim() const { return kNumActions * obs_dim_; }
  std::size_t horizon() const { return config_.horizon; }
  std::size_t start_state() const { return start_state_; }
  std::size_t destination_state() const { return destination_state_; }
  double deviation_prob() const { return config_.deviation_prob; }
  double obs_noise_std() const { return config_.obs_noise_std; }

  CellType state_type(std::size_t state) const;
  std::size_t cell_of_state(std::size_t state) const { return cell_of_state_.at(state); }
  bool is_terminal(std::size_t state) const { return state == destination_state_; }

  /// Deterministic move in a realized direction: (next state, reward).
  std::pair<std::size_t, double> move(std::size_t state, std::size_t direction) const;

  /// o1 = e_state, o2 ~ N(0, sigma'^2 I). Throws DomainError.
  Observation observe(std::size_t state, Rng& rng) const;
  /// Noise-free observation (o2 = 0).
  Observation clean_observation(std::size_t state) const;

  /// Episode step. Throws InvalidTransition from the (terminal) destination.
  StepResult step(std::size_t state, std::size_t action, Rng& rng) const;

  /// Generative-model query: a step with reward noise uniform on
  /// [-sigma, sigma]; at the destination it returns (0, destination, done).
  StepResult query(std::size_t state, std::size_t action, Rng& rng) const;

 private:
  std::size_t sample_direction(std::size_t action, Rng& rng) const;

  GridConfig config_;
  std::size_t obs_dim_;
  std::vector<std::size_t> cell_of_state_;
  std::vector<std::size_t> state_of_cell_;  // npos for walls
  std::vector<std::array<std::size_t, kNumActions>> neighbor_;
  std::vector<std::array<double, kNumActions>> move_reward_;
  std::size_t start_state_ = 0;
  std::size_t destination_state_ = 0;
};

/// xi(s_o, a): the observation placed in block `action` of a 4 * D_obs vector.
Vector vectorize(const Observation& observation, std::size_t action);
Vector vectorize(const Vector& observation, std::size_t action);

/// B* = [e_1..e_K, e_{D+1}..e_{D+K}, e_{2D+1}.., e_{3D+1}..]: (4 D_obs) x (4 K).
/// Column a * K + s selects the position coordinate s of action block a.
Matrix ground_truth_representation(const GridWorld& grid);

/// Exact hidden-state model: K states, 4 actions, expected rewards, the
/// deviation kernel and wall bumps; the destination is absorbing with zero
/// reward. Feature index a * K + s matches the columns of B*.
LinearMdpSpec build_tabular_oracle(const GridWorld& grid);

}  // namespace linrep
