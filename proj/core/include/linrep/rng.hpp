#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace linrep {

using Rng = std::mt19937_64;

/// splitmix64 finalizer.
std::uint64_t mix64(std::uint64_t x);

/// Derives a child seed from a parent seed and a path of tags:
///   s <- mix64(s ^ mix64(tag + 0x9e3779b97f4a7c15)) for each tag in order.
/// Every random stream in the library is keyed by such a path (for example
/// master -> study -> task -> level), so results never depend on the order in
/// which independent streams are consumed.
std::uint64_t derive_seed(std::uint64_t parent, std::initializer_list<std::uint64_t> path);

inline Rng child_rng(std::uint64_t parent, std::initializer_list<std::uint64_t> path) {
  return Rng(derive_seed(parent, path));
}

// Stream tags used by the studies.
namespace stream {
inline constexpr std::uint64_t kTasks = 1;
inline constexpr std::uint64_t kTrain = 2;
inline constexpr std::uint64_t kTransfer = 3;
inline constexpr std::uint64_t kEval = 4;
inline constexpr std::uint64_t kScratch = 5;
inline constexpr std::uint64_t kKappa = 6;
}  // namespace stream

}  // namespace linrep
