#pragma once

#include <Eigen/Core>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "koopman/errors.hpp"

namespace koopman::conic {

/// Index map of a symmetric matrix variable. Entry (i,j) and (j,i) share
/// one scalar variable, stored in upper-triangle (row-major) order.
struct SymMatrixVar {
  int offset = 0;
  int n = 0;

  int operator()(int i, int j) const {
    if (i > j) std::swap(i, j);
    // entries (0,0)..(0,n-1), (1,1)..(1,n-1), ...
    return offset + i * n - i * (i - 1) / 2 + (j - i);
  }
  int count() const { return n * (n + 1) / 2; }
};

/// Index map of a general matrix variable, row-major.
struct MatrixVar {
  int offset = 0;
  int rows = 0;
  int cols = 0;

  int operator()(int i, int j) const { return offset + i * cols + j; }
  int count() const { return rows * cols; }
};

/// A convex program
///   minimize  q'x + ||L x - b||^2 + const
///   subject to F0_k + sum_i x_i Fi_k  >= 0   (positive semidefinite), k = 1..nb
/// in scalar variables x. Matrix variables are registered through the
/// add_*_matrix_var helpers, which hand out index maps used by all builders.
class ConicProblem {
 public:
  SymMatrixVar add_symmetric_matrix_var(int n);
  MatrixVar add_matrix_var(int rows, int cols);
  int add_scalar_var();
  int num_vars() const { return num_vars_; }

  /// Starts a new LMI block with constant term f0 (symmetric); returns its index.
  int add_lmi_block(const Eigen::MatrixXd& f0);
  /// Accumulates the coefficient of variable `var` in block `block`.
  void add_coefficient(int block, int var, const Eigen::MatrixXd& df);

  int num_blocks() const { return static_cast<int>(blocks_.size()); }
  int block_size(int block) const { return static_cast<int>(blocks_[block].f0.rows()); }
  int total_block_size() const;

  void set_linear_objective(Eigen::VectorXd q);
  /// Objective term ||L x - b||^2 + constant, kept in factored form.
  void set_quadratic_objective(Eigen::MatrixXd L, Eigen::VectorXd b, double constant = 0.0);
  bool has_objective() const;

  double objective_value_at(const Eigen::Ref<const Eigen::VectorXd>& x) const;
  Eigen::MatrixXd block_value(int block, const Eigen::Ref<const Eigen::VectorXd>& x) const;
  /// Smallest eigenvalue over all blocks at x (self-adjoint eigensolver,
  /// independent of the solve path).
  double min_block_eigenvalue(const Eigen::Ref<const Eigen::VectorXd>& x) const;

  /// Debug dump, one line per nonzero: `block row col var value`, with
  /// var = -1 for the constant term. Upper triangle only.
  void dump(std::ostream& os) const;

  struct Block {
    Eigen::MatrixXd f0;
    // Per registered variable: symmetric coefficient matrix, dense
    // (empty when the variable does not enter the block).
    std::vector<Eigen::MatrixXd> coeffs;
  };
  const std::vector<Block>& blocks() const { return blocks_; }
  const Eigen::VectorXd& linear_objective() const { return q_; }
  const Eigen::MatrixXd& quadratic_L() const { return L_; }
  const Eigen::VectorXd& quadratic_b() const { return b_; }
  double objective_constant() const { return constant_; }

 private:
  int num_vars_ = 0;
  std::vector<Block> blocks_;
  Eigen::VectorXd q_;    // empty until set
  Eigen::MatrixXd L_;    // empty until set
  Eigen::VectorXd b_;
  double constant_ = 0.0;
};

enum class SolveStatus { Optimal, Infeasible, NumericalFailure };

std::string to_string(SolveStatus status);

struct ConicSolution {
  Eigen::VectorXd x;
  double objective_value = 0.0;
  SolveStatus status = SolveStatus::NumericalFailure;
  /// max(0, -eigmin) over all blocks, recomputed independently after the solve.
  double max_constraint_violation = 0.0;
  int newton_steps = 0;
  std::string diagnostic;
};

struct SolverOptions {
  /// Relative objective tolerance (duality-gap based).
  double tol = 1e-8;
  /// Feasibility tolerance for the independent post-solve recheck.
  double feasibility_tol = 1e-7;
  /// Barrier parameter multiplier per outer iteration.
  double mu = 20.0;
  int max_outer = 80;
  int max_newton_per_center = 80;
  /// Phase-1 early exit: accept as strictly feasible once the uniform
  /// margin exceeds this value.
  double phase1_margin = 1e-4;
  /// Radius of the trust ball that keeps centering bounded; <= 0 picks a
  /// scale-aware default far outside any expected solution.
  double trust_radius = 0.0;
};

/// Barrier interior-point solve. Strictly feasible iterates throughout;
/// an Optimal result always satisfies every block strictly.
ConicSolution solve(const ConicProblem& prob, const SolverOptions& opts = {});

/// Same, but starting from a caller-supplied strictly feasible point
/// (falls back to phase 1 if the point is not strictly feasible).
ConicSolution solve(const ConicProblem& prob, const Eigen::VectorXd& warm_start,
                    const SolverOptions& opts = {});

}  // namespace koopman::conic
