#pragma once

#include <filesystem>
#include <string>

#include <nlohmann/json.hpp>

#include "linrep/linalg.hpp"
#include "linrep/representation.hpp"
#include "linrep/transfer.hpp"

namespace linrep {

// Matrices are stored as headerless CSV, one row per line, values printed
// with 17 significant digits so they round-trip exactly.
void write_matrix_csv(const std::filesystem::path& path, const Matrix& m);
Matrix read_matrix_csv(const std::filesystem::path& path);

/// Representation bundle:
///   <dir>/rep.json                header (dims, seed, config hash, per-level metadata)
///   <dir>/level_<h>_b_hat.csv     D x d
///   <dir>/level_<h>_w_hat.csv     d x T
///   <dir>/level_<h>_theta.csv     D x T
void save_representation(const LearnedRepresentation& rep, const std::filesystem::path& dir);
/// Throws ConfigError for a missing or malformed bundle.
LearnedRepresentation load_representation(const std::filesystem::path& dir);

/// Policy bundle for a transferred task:
///   <dir>/transfer.json           n, lambda, per-level kappa and residual
///   <dir>/level_<h>_b_hat.csv     D x d
///   <dir>/level_<h>_w.csv         d x 1
void save_transfer(const TransferResult& result, const LearnedRepresentation& rep, const std::filesystem::path& dir,
                   const nlohmann::json& extra = nlohmann::json::object());

struct PolicyBundle {
  std::vector<Matrix> b_hats;
  std::vector<Vector> weights;
  nlohmann::json header;
};

PolicyBundle load_policy(const std::filesystem::path& dir);

}  // namespace linrep
