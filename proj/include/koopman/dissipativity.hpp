#pragma once

#include <Eigen/Core>
#include <complex>
#include <optional>
#include <string>
#include <vector>

#include "koopman/conic.hpp"
#include "koopman/dynsim.hpp"
#include "koopman/edmd.hpp"

namespace koopman {

/// Quadratic supply rate s(u,y) = -[y;u]' Xi [y;u] with
/// Xi = [[Xi11, Xi12],[Xi12', Xi22]]. (0,-1,0) encodes passivity,
/// (1,0,-gamma) a bounded L2 gain.
struct SupplyRate {
  Eigen::MatrixXd xi11;  // l x l, symmetric
  Eigen::MatrixXd xi12;  // l x m
  Eigen::MatrixXd xi22;  // m x m, symmetric

  SupplyRate(Eigen::MatrixXd xi11_in, Eigen::MatrixXd xi12_in, Eigen::MatrixXd xi22_in);

  /// Scalar (l = m = 1) supply rate from the three numbers.
  static SupplyRate scalar(double xi11, double xi12, double xi22);
  /// (0, -1, -beta): passivity relaxed by beta, the benchmark's constraint.
  static SupplyRate relaxed_passivity(double beta) { return scalar(0.0, -1.0, -beta); }

  int output_dim() const { return static_cast<int>(xi11.rows()); }
  int input_dim() const { return static_cast<int>(xi22.rows()); }

  /// The full symmetric (l+m) x (l+m) matrix Xi.
  Eigen::MatrixXd assembled() const;

  /// The strict LMI pipeline needs -Xi22 >= eps I; pure passivity
  /// (Xi22 = 0) makes the strict inequalities infeasible. Returns false
  /// with an explanation when this supply rate cannot be used for learning.
  bool usable_for_strict_pipeline(double eps, std::string* why = nullptr) const;
};

double supply_value(const SupplyRate& sr, const Eigen::Ref<const Eigen::VectorXd>& u,
                    const Eigen::Ref<const Eigen::VectorXd>& y);

/// Theta = [C 0; 0 I]' Xi [C 0; 0 I], the output-feedthrough face of the
/// supply rate on the lifted state.
Eigen::MatrixXd theta(const Eigen::MatrixXd& C, const SupplyRate& sr);

/// Left side of the dissipation LMI
///   [A B; I 0]' diag(P, -P) [A B; I 0] + Theta;
/// the model is certified dissipative iff this is negative definite for
/// some P > 0.
Eigen::MatrixXd lemma_lmi_lhs(const Eigen::MatrixXd& P, const Eigen::MatrixXd& A,
                              const Eigen::MatrixXd& B, const Eigen::MatrixXd& C,
                              const SupplyRate& sr);

/// Searches for a storage certificate: P >= margin*I with
/// lemma_lmi_lhs <= -margin*I. Returns the certificate, or nullopt when the
/// feasibility program is infeasible (the model is not certifiably
/// dissipative at this margin).
std::optional<Eigen::MatrixXd> certify(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B,
                                       const Eigen::MatrixXd& C, const SupplyRate& sr,
                                       double margin = 1e-6,
                                       const conic::SolverOptions& solver_opts = {});

struct FrequencyPoint {
  double omega = 0.0;
  std::complex<double> g;
};

/// G(e^{j w T}) = C (e^{j w T} I - A)^{-1} B over the grid; SISO only.
/// Throws when e^{j w T} coincides with an eigenvalue of A at a grid point.
std::vector<FrequencyPoint> frequency_sweep(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B,
                                            const Eigen::MatrixXd& C,
                                            const std::vector<double>& omegas, double T);

/// 400 logarithmically spaced points in [1e-2/T, pi/T] plus the endpoints
/// 0 and pi/T.
std::vector<double> default_frequency_grid(double T, int points = 400);

/// min over the grid of Re[G(e^{j w T})]. Requires the relaxed-passivity
/// form (Xi11 = 0, Xi12 = -1, Xi22 = -beta <= 0) and a SISO model; the
/// dissipativity bound to compare against is Re[G] >= -beta/2.
double frequency_margin(const KoopmanModel& model, const SupplyRate& sr,
                        const std::vector<double>& omegas, double T);

/// Dissipation-inequality audit along a model rollout driven by the
/// dataset inputs, with storage V(psi) = psi' P psi: returns
///   min_k [ sum_{tau<=k} s(u(tau), y(tau)) - (V(psi(k+1)) - V(psi(0))) ],
/// the accumulated-supply slack at the state reached after each input.
/// Nonnegative margin means the inequality holds at every step.
double trajectory_audit(const KoopmanModel& model, const Eigen::MatrixXd& P,
                        const TrajectoryDataset& dataset, const SupplyRate& sr);

/// Aggregated verification result.
struct DissipativityReport {
  double lmi_eigmax = 0.0;
  std::optional<Eigen::MatrixXd> certificate;
  std::optional<double> frequency_margin;
  std::optional<double> trajectory_margin;
  /// Which P lmi_eigmax was evaluated at: "fresh", "stored", or "identity".
  std::string certificate_source;
  std::vector<FrequencyPoint> sweep;
  std::string notes;
};

}  // namespace koopman
