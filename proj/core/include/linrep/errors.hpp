#pragma once

#include <stdexcept>
#include <string>

namespace linrep {

// Non-finite entries or a matrix that violates a structural precondition
// (symmetry, positive semi-definiteness).
class InvalidMatrix : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class SingularSystem : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Columns expected to be orthonormal are not.
class InvalidBasis : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class ShapeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// State, action or other index outside its domain.
class DomainError : public std::out_of_range {
 public:
  using std::out_of_range::out_of_range;
};

class InvalidTransition : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace linrep
