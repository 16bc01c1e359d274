#pragma once

#include <Eigen/Core>
#include <optional>
#include <vector>

#include "koopman/dynsim.hpp"
#include "koopman/lifting.hpp"

namespace koopman {

/// Snapshot matrices assembled from a trajectory: inputs U (m x M),
/// outputs Y (l x M), lifted states Psi (N x M) and their one-step
/// successors PsiNext (N x M).
struct DataMatrices {
  Eigen::MatrixXd U;
  Eigen::MatrixXd Y;
  Eigen::MatrixXd Psi;
  Eigen::MatrixXd PsiNext;

  int num_samples() const { return static_cast<int>(U.cols()); }
  int lifted_dim() const { return static_cast<int>(Psi.rows()); }
  int input_dim() const { return static_cast<int>(U.rows()); }
  int output_dim() const { return static_cast<int>(Y.rows()); }
  void validate() const;
};

DataMatrices assemble(const TrajectoryDataset& dataset, const LiftingDictionary& dict);

/// Multi-trajectory variant: per-trajectory snapshot pairs are concatenated
/// horizontally; no pair ever spans a trajectory boundary.
DataMatrices assemble(const std::vector<TrajectoryDataset>& datasets, const LiftingDictionary& dict);

/// The lifted linear model psi(k+1) = A psi(k) + B u(k), y(k) = C psi(k),
/// together with the dictionary that defines psi and, for models produced
/// by the constrained learner, the storage certificate P.
struct KoopmanModel {
  Eigen::MatrixXd A;
  Eigen::MatrixXd B;
  Eigen::MatrixXd C;
  LiftingDictionary dictionary = LiftingDictionary::identity(1);
  std::optional<Eigen::MatrixXd> certificate;  // symmetric positive definite when present

  int lifted_dim() const { return static_cast<int>(A.rows()); }
  int input_dim() const { return static_cast<int>(B.cols()); }
  int output_dim() const { return static_cast<int>(C.rows()); }
  void validate() const;
};

/// Squared-Frobenius fitting costs of the two least-squares subproblems.
double j1(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B, const DataMatrices& dm);
double j2(const Eigen::MatrixXd& C, const DataMatrices& dm);

/// Least-squares fit of C alone from Y ~ C Psi.
Eigen::MatrixXd fit_output_map(const DataMatrices& dm);

/// Unconstrained model fit: (A,B) from PsiNext ~ [A B][Psi;U] and C from
/// Y ~ C Psi, solved independently. Both stacked matrices must have full
/// row rank (singular values below 1e-10 * sigma_max count as zero).
KoopmanModel fit_unconstrained(const DataMatrices& dm, const LiftingDictionary& dict);

struct Prediction {
  std::vector<Eigen::VectorXd> lifted;   // psi(0..M)
  std::vector<Eigen::VectorXd> outputs;  // y(0..M), y(k) = C psi(k)
};

/// Rolls the lifted linear model forward from psi0 under the given inputs.
Prediction predict(const KoopmanModel& model, const Eigen::VectorXd& psi0,
                   const std::vector<Eigen::VectorXd>& inputs);

}  // namespace koopman
