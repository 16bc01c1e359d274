#pragma once

#include <Eigen/Core>
#include <string>
#include <vector>

#include "koopman/conic.hpp"
#include "koopman/dissipativity.hpp"
#include "koopman/edmd.hpp"

namespace koopman {

/// One iterate of the sequential refinement: a strictly feasible
/// (P, A, B) for the dissipation LMI together with the shaping matrix H
/// (H + H' > 0) used to build the next convex subproblem.
struct IterateState {
  Eigen::MatrixXd P;
  Eigen::MatrixXd A;
  Eigen::MatrixXd B;
  Eigen::MatrixXd H;
  double j1 = 0.0;
  int iteration = 0;

  /// Checks eigmin(P) > 0, eigmin(H+H') > 0 and strict feasibility of
  /// (P,A,B) for the dissipation LMI under (C, sr).
  void validate(const Eigen::MatrixXd& C, const SupplyRate& sr) const;
};

struct AlgorithmOptions {
  double epsilon_margin = 1e-6;
  int max_iterations = 30;
  double rel_descent_tol = 1e-6;
  double solver_tol = 1e-8;
  /// Rescale Psi rows to unit RMS before solving; the inverse similarity
  /// transform is applied to (A, B, P) afterward. Thin-plate-spline
  /// features vary over orders of magnitude, which this tames.
  bool rescale_psi_rows = true;
  /// Keep every iterate (in solver coordinates) in the result.
  bool keep_iterates = false;

  void validate() const;
};

double j1_weighted(const Eigen::MatrixXd& P, const Eigen::MatrixXd& R, const Eigen::MatrixXd& S,
                   const DataMatrices& dm);

struct Problem2Result {
  Eigen::MatrixXd P, R, S;
  double j1w = 0.0;
  conic::ConicSolution solution;
};

/// Convex initialization: minimize J1_W(P,R,S) = ||P PsiNext - [R S][Psi;U]||_F^2
/// subject to P >= eps*I and the 3x3-block LMI
///   [[P - C'Xi11 C, -C'Xi12, R'], [-Xi12'C, -Xi22, S'], [R, S, P]] >= eps*I.
Problem2Result solve_problem2(const Eigen::MatrixXd& C, const SupplyRate& sr,
                              const DataMatrices& dm, double eps,
                              const conic::SolverOptions& solver_opts = {});

/// A = P^{-1} R, B = P^{-1} S via a Cholesky factorization of P; the
/// round trip P*A = R, P*B = S is verified to 1e-8 relative.
std::pair<Eigen::MatrixXd, Eigen::MatrixXd> recover_ab(const Eigen::MatrixXd& P,
                                                       const Eigen::MatrixXd& R,
                                                       const Eigen::MatrixXd& S);

/// Dense evaluation of the overbounding constraint matrix He(M) at a given
/// step (dP,dA,dB,G) around the iterate, with M the (4N+m)-square block
/// matrix [[Q, [0;dP], 0], [0, -G, G], [-H[dA dB 0], 0, -H]]. Feasible
/// steps keep this negative definite.
Eigen::MatrixXd he_constraint(const IterateState& it, const Eigen::MatrixXd& C,
                              const SupplyRate& sr, const Eigen::MatrixXd& dP,
                              const Eigen::MatrixXd& dA, const Eigen::MatrixXd& dB,
                              const Eigen::MatrixXd& G);

struct Problem3Build {
  conic::ConicProblem problem;
  conic::SymMatrixVar dP;
  conic::MatrixVar dA;
  conic::MatrixVar dB;
  conic::MatrixVar G;
  int he_block = 0;
  int pd_block = 0;
  /// (dP,dA,dB,G) = (0,0,0,(H+H')/2), feasible whenever the iterate is
  /// strictly feasible with enough margin.
  Eigen::VectorXd feasible_point;
};

/// Refinement subproblem: minimize J1(A_hat+dA, B_hat+dB) subject to
/// He(M(dP,dA,dB,G)) <= -eps*I and P_hat + dP >= eps*I, all affine in the
/// step for the fixed H of the iterate.
Problem3Build build_problem3(const IterateState& it, const Eigen::MatrixXd& C,
                             const SupplyRate& sr, const DataMatrices& dm, double eps);

struct Problem3Solution {
  Eigen::MatrixXd dP, dA, dB, G;
  double j1_new = 0.0;
  conic::ConicSolution raw;
};

Problem3Solution solve_problem3(const IterateState& it, const Eigen::MatrixXd& C,
                                const SupplyRate& sr, const DataMatrices& dm, double eps,
                                const conic::SolverOptions& solver_opts = {});

struct IterationRecord {
  int iteration = 0;
  double j1 = 0.0;
  /// -eigmax of the dissipation-LMI left side: positive when strictly feasible.
  double lmi_margin = 0.0;
  double eigmin_P = 0.0;
  double eigmin_H_sym = 0.0;  // eigmin(H + H')
  std::string solver_status;
};

struct AlgorithmResult {
  KoopmanModel model;  // original coordinates, certificate attached
  std::vector<IterationRecord> log;
  std::string stop_reason;
  /// Worst post-solve eigenvalue-recheck violation over all conic solves.
  double worst_recheck_violation = 0.0;

  /// Solver-coordinate artifacts, populated when keep_iterates is set:
  /// the iterates themselves, the rescaled output map they refer to, and
  /// the row scaling t (psi_scaled = t .* psi).
  std::vector<IterateState> iterates;
  Eigen::MatrixXd scaled_C;
  Eigen::VectorXd psi_row_scale;
};

/// Full sequential learning: convex initialization (Problem 2), then
/// repeated overbounding refinements (Problem 3) with the update law
/// (P,A,B,H) <- (P+dP, A+dA, B+dB, G), starting from H = I. Stops at
/// max_iterations, when the relative descent falls below rel_descent_tol,
/// or when descent stalls at solver resolution.
AlgorithmResult run_algorithm(const DataMatrices& dm, const Eigen::MatrixXd& C,
                              const SupplyRate& sr, const AlgorithmOptions& opts,
                              const LiftingDictionary& dict);

}  // namespace koopman
