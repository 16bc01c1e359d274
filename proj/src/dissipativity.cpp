#include "koopman/dissipativity.hpp"

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <cmath>

namespace koopman {

namespace {

void require_symmetric(const Eigen::MatrixXd& m, const std::string& name) {
  if (m.rows() != m.cols()) throw DimensionError(name + " must be square");
  if (m.size() > 0 &&
      (m - m.transpose()).cwiseAbs().maxCoeff() > 1e-10 * (1.0 + m.cwiseAbs().maxCoeff())) {
    throw Error(name + " must be symmetric");
  }
}

double eigmin_sym(const Eigen::MatrixXd& m) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

}  // namespace

SupplyRate::SupplyRate(Eigen::MatrixXd xi11_in, Eigen::MatrixXd xi12_in, Eigen::MatrixXd xi22_in)
    : xi11(std::move(xi11_in)), xi12(std::move(xi12_in)), xi22(std::move(xi22_in)) {
  require_symmetric(xi11, "Xi11");
  require_symmetric(xi22, "Xi22");
  if (xi12.rows() != xi11.rows() || xi12.cols() != xi22.rows()) {
    throw DimensionError("Xi12 must be l x m to match Xi11 and Xi22");
  }
}

SupplyRate SupplyRate::scalar(double xi11, double xi12, double xi22) {
  return SupplyRate(Eigen::MatrixXd::Constant(1, 1, xi11), Eigen::MatrixXd::Constant(1, 1, xi12),
                    Eigen::MatrixXd::Constant(1, 1, xi22));
}

Eigen::MatrixXd SupplyRate::assembled() const {
  const int l = output_dim(), m = input_dim();
  Eigen::MatrixXd xi(l + m, l + m);
  xi.topLeftCorner(l, l) = xi11;
  xi.topRightCorner(l, m) = xi12;
  xi.bottomLeftCorner(m, l) = xi12.transpose();
  xi.bottomRightCorner(m, m) = xi22;
  return xi;
}

bool SupplyRate::usable_for_strict_pipeline(double eps, std::string* why) const {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(xi22, Eigen::EigenvaluesOnly);
  const double eigmax = es.eigenvalues().maxCoeff();
  if (eigmax > -eps) {
    if (why) {
      *why = "the strict dissipation LMI has -Xi22 as a diagonal block, so it needs "
             "-Xi22 >= eps*I (eps=" + std::to_string(eps) + "); got eigmax(Xi22) = " +
             std::to_string(eigmax) +
             ". Pure passivity (Xi22 = 0) must be relaxed, e.g. to (0, -1, -0.2).";
    }
    return false;
  }
  return true;
}

double supply_value(const SupplyRate& sr, const Eigen::Ref<const Eigen::VectorXd>& u,
                    const Eigen::Ref<const Eigen::VectorXd>& y) {
  if (u.size() != sr.input_dim() || y.size() != sr.output_dim()) {
    throw DimensionError("supply_value: (u,y) dimensions do not match the supply rate");
  }
  Eigen::VectorXd z(y.size() + u.size());
  z << y, u;
  return -z.dot(sr.assembled() * z);
}

Eigen::MatrixXd theta(const Eigen::MatrixXd& C, const SupplyRate& sr) {
  if (C.rows() != sr.output_dim()) {
    throw DimensionError("theta: C row count does not match the supply rate output dimension");
  }
  const int N = static_cast<int>(C.cols());
  const int m = sr.input_dim();
  Eigen::MatrixXd th(N + m, N + m);
  th.topLeftCorner(N, N) = C.transpose() * sr.xi11 * C;
  th.topRightCorner(N, m) = C.transpose() * sr.xi12;
  th.bottomLeftCorner(m, N) = sr.xi12.transpose() * C;
  th.bottomRightCorner(m, m) = sr.xi22;
  return th;
}

Eigen::MatrixXd lemma_lmi_lhs(const Eigen::MatrixXd& P, const Eigen::MatrixXd& A,
                              const Eigen::MatrixXd& B, const Eigen::MatrixXd& C,
                              const SupplyRate& sr) {
  const int N = static_cast<int>(A.rows());
  const int m = sr.input_dim();
  require_symmetric(P, "P");
  if (A.cols() != N || P.rows() != N || B.rows() != N || B.cols() != m || C.cols() != N) {
    throw DimensionError("lemma_lmi_lhs: inconsistent dimensions");
  }
  Eigen::MatrixXd ab(N, N + m);
  ab << A, B;
  Eigen::MatrixXd lhs = ab.transpose() * P * ab + theta(C, sr);
  lhs.topLeftCorner(N, N) -= P;
  return lhs;
}

std::optional<Eigen::MatrixXd> certify(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B,
                                       const Eigen::MatrixXd& C, const SupplyRate& sr,
                                       double margin, const conic::SolverOptions& solver_opts) {
  const int N = static_cast<int>(A.rows());
  const int m = sr.input_dim();
  if (margin <= 0.0) throw Error("certify: margin must be positive");

  conic::ConicProblem prob;
  const conic::SymMatrixVar pv = prob.add_symmetric_matrix_var(N);
  const int pd_block = prob.add_lmi_block(-margin * Eigen::MatrixXd::Identity(N, N));
  const int lmi_block = prob.add_lmi_block(
      (-theta(C, sr) - margin * Eigen::MatrixXd::Identity(N + m, N + m)).eval());

  Eigen::MatrixXd ab(N, N + m);
  ab << A, B;
  for (int i = 0; i < N; ++i) {
    for (int j = i; j < N; ++j) {
      Eigen::MatrixXd e = Eigen::MatrixXd::Zero(N, N);
      e(i, j) = 1.0;
      e(j, i) = 1.0;
      prob.add_coefficient(pd_block, pv(i, j), e);
      // d(lemma_lhs)/dP = [A B]' E [A B] - blkdiag(E, 0); negate for the block.
      Eigen::MatrixXd d = -(ab.transpose() * e * ab);
      d.topLeftCorner(N, N) += e;
      prob.add_coefficient(lmi_block, pv(i, j), d);
    }
  }

  const conic::ConicSolution sol = conic::solve(prob, solver_opts);
  if (sol.status == conic::SolveStatus::Infeasible) return std::nullopt;
  if (sol.status != conic::SolveStatus::Optimal) {
    throw NumericalError("certify: solver failed: " + sol.diagnostic);
  }
  Eigen::MatrixXd P(N, N);
  for (int i = 0; i < N; ++i)
    for (int j = i; j < N; ++j) P(i, j) = P(j, i) = sol.x[pv(i, j)];
  return P;
}

std::vector<FrequencyPoint> frequency_sweep(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B,
                                            const Eigen::MatrixXd& C,
                                            const std::vector<double>& omegas, double T) {
  if (B.cols() != 1 || C.rows() != 1) {
    throw Error("frequency_sweep: SISO model required (B one column, C one row)");
  }
  const Eigen::VectorXcd eigs = A.eigenvalues();

  std::vector<FrequencyPoint> pts;
  pts.reserve(omegas.size());
  for (double w : omegas) {
    const std::complex<double> z = std::polar(1.0, w * T);
    for (int i = 0; i < eigs.size(); ++i) {
      if (std::abs(z - eigs[i]) < 1e-12 * (1.0 + std::abs(eigs[i]))) {
        throw NumericalError("frequency_sweep: resolvent singular at omega=" + std::to_string(w));
      }
    }
    Eigen::MatrixXcd zIA = -A.cast<std::complex<double>>();
    zIA.diagonal().array() += z;
    const Eigen::VectorXcd sol = zIA.partialPivLu().solve(B.cast<std::complex<double>>());
    pts.push_back({w, (C.cast<std::complex<double>>() * sol)(0, 0)});
  }
  return pts;
}

std::vector<double> default_frequency_grid(double T, int points) {
  if (T <= 0.0) throw Error("default_frequency_grid: T must be positive");
  if (points < 2) throw Error("default_frequency_grid: need at least 2 points");
  const double lo = 1e-2 / T;
  const double hi = M_PI / T;
  std::vector<double> grid;
  grid.reserve(points + 2);
  grid.push_back(0.0);
  for (int i = 0; i < points; ++i) {
    const double f = static_cast<double>(i) / (points - 1);
    grid.push_back(lo * std::pow(hi / lo, f));
  }
  grid.push_back(hi);
  return grid;
}

double frequency_margin(const KoopmanModel& model, const SupplyRate& sr,
                        const std::vector<double>& omegas, double T) {
  if (sr.input_dim() != 1 || sr.output_dim() != 1) {
    throw Error("frequency_margin: SISO supply rate required");
  }
  if (std::abs(sr.xi11(0, 0)) > 1e-12 || std::abs(sr.xi12(0, 0) + 1.0) > 1e-12 ||
      sr.xi22(0, 0) > 1e-12) {
    throw Error("frequency_margin: supply rate must be of relaxed-passivity form "
                "(Xi11=0, Xi12=-1, Xi22=-beta<=0)");
  }
  const auto pts = frequency_sweep(model.A, model.B, model.C, omegas, T);
  double margin = std::numeric_limits<double>::infinity();
  for (const auto& p : pts) margin = std::min(margin, p.g.real());
  return margin;
}

double trajectory_audit(const KoopmanModel& model, const Eigen::MatrixXd& P,
                        const TrajectoryDataset& dataset, const SupplyRate& sr) {
  dataset.validate();
  require_symmetric(P, "P");
  if (P.rows() != model.lifted_dim()) {
    throw DimensionError("trajectory_audit: P does not match the model dimension");
  }
  if (eigmin_sym(P) <= 0.0) throw Error("trajectory_audit: P must be positive definite");
  if (static_cast<int>(dataset.inputs[0].size()) != model.input_dim() ||
      static_cast<int>(dataset.states[0].size()) != model.dictionary.state_dim()) {
    throw DimensionError("trajectory_audit: dataset dimensions do not match the model");
  }

  Eigen::VectorXd psi = model.dictionary.lift(dataset.states[0]);
  const double v0 = psi.dot(P * psi);
  double accumulated = 0.0;
  double margin = std::numeric_limits<double>::infinity();
  for (int k = 0; k < dataset.num_steps(); ++k) {
    const Eigen::VectorXd y = model.C * psi;
    accumulated += supply_value(sr, dataset.inputs[k], y);
    psi = model.A * psi + model.B * dataset.inputs[k];
    const double v = psi.dot(P * psi);
    margin = std::min(margin, accumulated - (v - v0));
  }
  return margin;
}

}  // namespace koopman
