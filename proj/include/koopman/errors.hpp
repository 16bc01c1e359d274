#pragma once

#include <stdexcept>
#include <string>

namespace koopman {

/// Base class for all library errors.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// Mismatched vector/matrix dimensions between operands.
class DimensionError : public Error {
 public:
  explicit DimensionError(const std::string& what) : Error(what) {}
};

/// A data matrix that must have full row rank does not.
class RankDeficiencyError : public Error {
 public:
  RankDeficiencyError(const std::string& block, int numerical_rank, int required_rank)
      : Error("block [" + block + "] is rank deficient: numerical rank " +
              std::to_string(numerical_rank) + " < required " + std::to_string(required_rank)),
        block_name(block),
        rank(numerical_rank),
        required(required_rank) {}

  std::string block_name;
  int rank;
  int required;
};

/// A constrained problem has no (strictly) feasible point.
class InfeasibleError : public Error {
 public:
  explicit InfeasibleError(const std::string& what) : Error(what) {}
};

/// Numerical breakdown: solver failure, non-finite values, blowup.
class NumericalError : public Error {
 public:
  explicit NumericalError(const std::string& what) : Error(what) {}
};

}  // namespace koopman
