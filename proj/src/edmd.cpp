#include "koopman/edmd.hpp"

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

namespace koopman {

namespace {

constexpr double kRankTolerance = 1e-10;  // relative to sigma_max

// Solves min_X ||Target - X Z||_F for X, requiring Z to have full row rank.
// `block` names Z in the rank-deficiency diagnostic.
Eigen::MatrixXd solve_row_least_squares(const Eigen::MatrixXd& Z, const Eigen::MatrixXd& target,
                                        const std::string& block) {
  Eigen::BDCSVD<Eigen::MatrixXd> svd(Z.transpose(), Eigen::ComputeThinU | Eigen::ComputeThinV);
  svd.setThreshold(kRankTolerance);
  const int rank = static_cast<int>(svd.rank());
  if (rank < Z.rows()) {
    throw RankDeficiencyError(block, rank, static_cast<int>(Z.rows()));
  }
  // X^T solves Z^T X^T = Target^T in the least-squares sense.
  return svd.solve(target.transpose()).transpose();
}

}  // namespace

void DataMatrices::validate() const {
  const auto M = U.cols();
  if (Y.cols() != M || Psi.cols() != M || PsiNext.cols() != M) {
    throw DimensionError("DataMatrices: inconsistent column counts");
  }
  if (Psi.rows() != PsiNext.rows()) {
    throw DimensionError("DataMatrices: Psi and PsiNext row counts differ");
  }
}

void KoopmanModel::validate() const {
  const int N = lifted_dim();
  if (A.cols() != N || B.rows() != N || C.cols() != N) {
    throw DimensionError("KoopmanModel: A/B/C dimensions are inconsistent");
  }
  if (dictionary.lifted_dim() != N) {
    throw DimensionError("KoopmanModel: dictionary lifted_dim " +
                         std::to_string(dictionary.lifted_dim()) + " != A dimension " +
                         std::to_string(N));
  }
  if (certificate) {
    if (certificate->rows() != N || certificate->cols() != N) {
      throw DimensionError("KoopmanModel: certificate P has wrong size");
    }
    if (!certificate->isApprox(certificate->transpose(), 1e-10)) {
      throw Error("KoopmanModel: certificate P is not symmetric");
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(*certificate);
    if (es.eigenvalues().minCoeff() <= 0.0) {
      throw Error("KoopmanModel: certificate P is not positive definite");
    }
  }
}

DataMatrices assemble(const TrajectoryDataset& dataset, const LiftingDictionary& dict) {
  return assemble(std::vector<TrajectoryDataset>{dataset}, dict);
}

DataMatrices assemble(const std::vector<TrajectoryDataset>& datasets, const LiftingDictionary& dict) {
  int total = 0;
  int m = -1, l = -1;
  for (const auto& ds : datasets) {
    ds.validate();
    if (ds.states.size() < 2) throw Error("assemble: dataset needs at least 2 states");
    if (static_cast<int>(ds.states[0].size()) != dict.state_dim()) {
      throw DimensionError("assemble: dataset state dim " + std::to_string(ds.states[0].size()) +
                           " != dictionary state dim " + std::to_string(dict.state_dim()));
    }
    if (m < 0) {
      m = static_cast<int>(ds.inputs[0].size());
      l = static_cast<int>(ds.outputs[0].size());
    }
    total += ds.num_steps();
  }
  if (total == 0) throw Error("assemble: no snapshot pairs");

  const int N = dict.lifted_dim();
  DataMatrices dm;
  dm.U.resize(m, total);
  dm.Y.resize(l, total);
  dm.Psi.resize(N, total);
  dm.PsiNext.resize(N, total);

  int col = 0;
  for (const auto& ds : datasets) {
    Eigen::VectorXd lifted = dict.lift(ds.states[0]);
    for (int k = 0; k < ds.num_steps(); ++k, ++col) {
      dm.U.col(col) = ds.inputs[k];
      dm.Y.col(col) = ds.outputs[k];
      dm.Psi.col(col) = lifted;
      lifted = dict.lift(ds.states[k + 1]);
      dm.PsiNext.col(col) = lifted;
    }
  }
  dm.validate();
  return dm;
}

double j1(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B, const DataMatrices& dm) {
  if (A.rows() != dm.lifted_dim() || A.cols() != dm.lifted_dim() || B.rows() != dm.lifted_dim() ||
      B.cols() != dm.input_dim()) {
    throw DimensionError("j1: (A,B) dimensions do not match the data matrices");
  }
  return (dm.PsiNext - A * dm.Psi - B * dm.U).squaredNorm();
}

double j2(const Eigen::MatrixXd& C, const DataMatrices& dm) {
  if (C.cols() != dm.lifted_dim() || C.rows() != dm.output_dim()) {
    throw DimensionError("j2: C dimensions do not match the data matrices");
  }
  return (dm.Y - C * dm.Psi).squaredNorm();
}

Eigen::MatrixXd fit_output_map(const DataMatrices& dm) {
  return solve_row_least_squares(dm.Psi, dm.Y, "Psi");
}

KoopmanModel fit_unconstrained(const DataMatrices& dm, const LiftingDictionary& dict) {
  dm.validate();
  if (dict.lifted_dim() != dm.lifted_dim()) {
    throw DimensionError("fit_unconstrained: dictionary does not match data matrices");
  }
  const int N = dm.lifted_dim();
  Eigen::MatrixXd Z(N + dm.input_dim(), dm.num_samples());
  Z.topRows(N) = dm.Psi;
  Z.bottomRows(dm.input_dim()) = dm.U;

  const Eigen::MatrixXd AB = solve_row_least_squares(Z, dm.PsiNext, "Psi;U");

  KoopmanModel model{AB.leftCols(N), AB.rightCols(dm.input_dim()), fit_output_map(dm), dict,
                     std::nullopt};
  model.validate();
  return model;
}

Prediction predict(const KoopmanModel& model, const Eigen::VectorXd& psi0,
                   const std::vector<Eigen::VectorXd>& inputs) {
  if (psi0.size() != model.lifted_dim()) {
    throw DimensionError("predict: psi0 has length " + std::to_string(psi0.size()) +
                         ", model expects " + std::to_string(model.lifted_dim()));
  }
  Prediction out;
  out.lifted.reserve(inputs.size() + 1);
  out.outputs.reserve(inputs.size() + 1);
  out.lifted.push_back(psi0);
  out.outputs.push_back(model.C * psi0);
  for (const auto& u : inputs) {
    out.lifted.push_back(model.A * out.lifted.back() + model.B * u);
    out.outputs.push_back(model.C * out.lifted.back());
  }
  return out;
}

}  // namespace koopman
