#include "koopman/sequential.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <cmath>

namespace koopman {

namespace {

double eigmin_sym(const Eigen::MatrixXd& m) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

double eigmax_sym(const Eigen::MatrixXd& m) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m, Eigen::EigenvaluesOnly);
  return es.eigenvalues().maxCoeff();
}

// Symmetric factor G with Gram = G G' (eigenvalue based, tolerates PSD
// rank deficiency; negative roundoff eigenvalues are clamped to zero).
Eigen::MatrixXd psd_factor(const Eigen::MatrixXd& gram) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(gram);
  return es.eigenvectors() * es.eigenvalues().cwiseMax(0.0).cwiseSqrt().asDiagonal();
}

// Pseudo-inverse transpose helper for the objective compression:
// columns of gram's null space are dropped.
Eigen::MatrixXd psd_factor_pinv(const Eigen::MatrixXd& gram) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(gram);
  const Eigen::VectorXd ev = es.eigenvalues();
  const double cutoff = 1e-14 * std::max(ev.maxCoeff(), 0.0);
  Eigen::VectorXd inv_sqrt = Eigen::VectorXd::Zero(ev.size());
  for (int i = 0; i < ev.size(); ++i) {
    if (ev[i] > cutoff && ev[i] > 0.0) inv_sqrt[i] = 1.0 / std::sqrt(ev[i]);
  }
  return es.eigenvectors() * inv_sqrt.asDiagonal();
}

void check_pipeline_inputs(const Eigen::MatrixXd& C, const SupplyRate& sr, const DataMatrices& dm,
                           double eps) {
  dm.validate();
  if (eps <= 0.0) throw Error("epsilon margin must be positive");
  if (C.cols() != dm.lifted_dim() || C.rows() != sr.output_dim() ||
      sr.input_dim() != dm.input_dim()) {
    throw DimensionError("C / supply rate / data matrix dimensions are inconsistent");
  }
  std::string why;
  if (!sr.usable_for_strict_pipeline(eps, &why)) throw InfeasibleError(why);
}

}  // namespace

void IterateState::validate(const Eigen::MatrixXd& C, const SupplyRate& sr) const {
  if (eigmin_sym(P) <= 0.0) throw Error("iterate: P is not positive definite");
  if (eigmin_sym(H + H.transpose()) <= 0.0) throw Error("iterate: H + H' is not positive definite");
  if (eigmax_sym(lemma_lmi_lhs(P, A, B, C, sr)) >= 0.0) {
    throw Error("iterate: (P,A,B) is not strictly feasible for the dissipation LMI");
  }
}

void AlgorithmOptions::validate() const {
  if (epsilon_margin <= 0.0 || max_iterations < 1 || rel_descent_tol <= 0.0 || solver_tol <= 0.0) {
    throw Error("AlgorithmOptions: epsilon_margin, max_iterations, rel_descent_tol and "
                "solver_tol must all be positive");
  }
}

double j1_weighted(const Eigen::MatrixXd& P, const Eigen::MatrixXd& R, const Eigen::MatrixXd& S,
                   const DataMatrices& dm) {
  return (P * dm.PsiNext - R * dm.Psi - S * dm.U).squaredNorm();
}

Problem2Result solve_problem2(const Eigen::MatrixXd& C, const SupplyRate& sr,
                              const DataMatrices& dm, double eps,
                              const conic::SolverOptions& solver_opts) {
  check_pipeline_inputs(C, sr, dm, eps);
  const int N = dm.lifted_dim();
  const int m = dm.input_dim();

  conic::ConicProblem prob;
  const conic::SymMatrixVar pv = prob.add_symmetric_matrix_var(N);
  const conic::MatrixVar rv = prob.add_matrix_var(N, N);
  const conic::MatrixVar sv = prob.add_matrix_var(N, m);
  const int d = prob.num_vars();

  // P >= eps I
  const int pd_block = prob.add_lmi_block(-eps * Eigen::MatrixXd::Identity(N, N));
  // 3x3 block LMI >= eps I; rows/cols ordered (psi, u, schur).
  const int s3 = 2 * N + m;
  Eigen::MatrixXd f0 = Eigen::MatrixXd::Zero(s3, s3);
  f0.topLeftCorner(N, N) = -C.transpose() * sr.xi11 * C;
  f0.block(0, N, N, m) = -C.transpose() * sr.xi12;
  f0.block(N, 0, m, N) = -sr.xi12.transpose() * C;
  f0.block(N, N, m, m) = -sr.xi22;
  f0 -= eps * Eigen::MatrixXd::Identity(s3, s3);
  const int lmi_block = prob.add_lmi_block(f0);

  for (int i = 0; i < N; ++i) {
    for (int j = i; j < N; ++j) {
      Eigen::MatrixXd e = Eigen::MatrixXd::Zero(N, N);
      e(i, j) = 1.0;
      e(j, i) = 1.0;
      prob.add_coefficient(pd_block, pv(i, j), e);
      Eigen::MatrixXd df = Eigen::MatrixXd::Zero(s3, s3);
      df.topLeftCorner(N, N) = e;
      df.block(N + m, N + m, N, N) = e;
      prob.add_coefficient(lmi_block, pv(i, j), df);
    }
  }
  for (int i = 0; i < N; ++i) {
    for (int j = 0; j < N; ++j) {
      Eigen::MatrixXd df = Eigen::MatrixXd::Zero(s3, s3);
      df(N + m + i, j) = 1.0;
      df(j, N + m + i) = 1.0;
      prob.add_coefficient(lmi_block, rv(i, j), df);
    }
    for (int j = 0; j < m; ++j) {
      Eigen::MatrixXd df = Eigen::MatrixXd::Zero(s3, s3);
      df(N + m + i, N + j) = 1.0;
      df(N + j, N + m + i) = 1.0;
      prob.add_coefficient(lmi_block, sv(i, j), df);
    }
  }

  // Objective ||P PsiNext - [R S][Psi;U]||_F^2 = ||Y D||_F^2 with
  // Y = [P, -R, -S] and D = [PsiNext; Psi; U]; compressed through the
  // Gram factor of D so problem size is independent of the sample count.
  Eigen::MatrixXd D(2 * N + m, dm.num_samples());
  D.topRows(N) = dm.PsiNext;
  D.middleRows(N, N) = dm.Psi;
  D.bottomRows(m) = dm.U;
  const Eigen::MatrixXd gamma = psd_factor(D * D.transpose());
  const int gcols = static_cast<int>(gamma.cols());

  Eigen::MatrixXd L = Eigen::MatrixXd::Zero(N * gcols, d);
  for (int i = 0; i < N; ++i) {
    for (int t = 0; t < gcols; ++t) {
      const int row = i * gcols + t;
      for (int c = 0; c < N; ++c) L(row, pv(i, c)) += gamma(c, t);
      for (int c = 0; c < N; ++c) L(row, rv(i, c)) -= gamma(N + c, t);
      for (int c = 0; c < m; ++c) L(row, sv(i, c)) -= gamma(2 * N + c, t);
    }
  }
  prob.set_quadratic_objective(std::move(L), Eigen::VectorXd::Zero(N * gcols), 0.0);

  conic::ConicSolution sol = conic::solve(prob, solver_opts);
  if (sol.status == conic::SolveStatus::Infeasible) {
    std::string why;
    sr.usable_for_strict_pipeline(eps, &why);
    throw InfeasibleError(
        "Problem 2 is infeasible: no dissipative model of this structure exists at margin " +
        std::to_string(eps) + " for the given C." + (why.empty() ? "" : " (" + why + ")"));
  }
  if (sol.status != conic::SolveStatus::Optimal) {
    throw NumericalError("Problem 2 solver failure: " + sol.diagnostic);
  }

  Problem2Result res;
  res.P.resize(N, N);
  for (int i = 0; i < N; ++i)
    for (int j = i; j < N; ++j) res.P(i, j) = res.P(j, i) = sol.x[pv(i, j)];
  res.R.resize(N, N);
  res.S.resize(N, m);
  for (int i = 0; i < N; ++i) {
    for (int j = 0; j < N; ++j) res.R(i, j) = sol.x[rv(i, j)];
    for (int j = 0; j < m; ++j) res.S(i, j) = sol.x[sv(i, j)];
  }
  res.j1w = sol.objective_value;
  res.solution = std::move(sol);
  return res;
}

std::pair<Eigen::MatrixXd, Eigen::MatrixXd> recover_ab(const Eigen::MatrixXd& P,
                                                       const Eigen::MatrixXd& R,
                                                       const Eigen::MatrixXd& S) {
  if (P.rows() != P.cols() || R.rows() != P.rows() || S.rows() != P.rows()) {
    throw DimensionError("recover_ab: inconsistent dimensions");
  }
  Eigen::LLT<Eigen::MatrixXd> llt(0.5 * (P + P.transpose()));
  if (llt.info() != Eigen::Success) throw Error("recover_ab: P is not positive definite");
  Eigen::MatrixXd A = llt.solve(R);
  Eigen::MatrixXd B = llt.solve(S);
  if ((P * A - R).norm() > 1e-8 * std::max(1.0, R.norm()) ||
      (P * B - S).norm() > 1e-8 * std::max(1.0, S.norm())) {
    throw NumericalError("recover_ab: round-trip P*A=R, P*B=S failed; P is too ill-conditioned");
  }
  return {std::move(A), std::move(B)};
}

Eigen::MatrixXd he_constraint(const IterateState& it, const Eigen::MatrixXd& C,
                              const SupplyRate& sr, const Eigen::MatrixXd& dP,
                              const Eigen::MatrixXd& dA, const Eigen::MatrixXd& dB,
                              const Eigen::MatrixXd& G) {
  const int N = static_cast<int>(it.P.rows());
  const int m = static_cast<int>(it.B.cols());
  const int q = 2 * N + m;

  // F(dP): the 3x3 LMI's leading 2x2 block at P = P_hat + dP.
  Eigen::MatrixXd f = Eigen::MatrixXd::Zero(N + m, N + m);
  f.topLeftCorner(N, N) = it.P + dP - C.transpose() * sr.xi11 * C;
  f.topRightCorner(N, m) = -C.transpose() * sr.xi12;
  f.bottomLeftCorner(m, N) = -sr.xi12.transpose() * C;
  f.bottomRightCorner(m, m) = -sr.xi22;

  // Q: linearization of -1/2 * (the Schur LMI) around the iterate; the
  // second-order dP*[dA dB] term is absorbed by the (G, H) rows below.
  Eigen::MatrixXd Q = Eigen::MatrixXd::Zero(q, q);
  Q.topLeftCorner(N + m, N + m) = -0.5 * f;
  Q.block(N + m, N + m, N, N) = -0.5 * (it.P + dP);
  Eigen::MatrixXd ab(N, N + m);
  ab << it.A, it.B;
  Eigen::MatrixXd dab(N, N + m);
  dab << dA, dB;
  Q.block(N + m, 0, N, N + m) = -(it.P + dP) * ab - it.P * dab;

  Eigen::MatrixXd M = Eigen::MatrixXd::Zero(4 * N + m, 4 * N + m);
  M.topLeftCorner(q, q) = Q;
  M.block(N + m, q, N, N) = dP;
  M.block(q, q, N, N) = -G;
  M.block(q, q + N, N, N) = G;
  M.block(q + N, 0, N, N + m) = -it.H * dab;
  M.block(q + N, q + N, N, N) = -it.H;

  return M + M.transpose();
}

Problem3Build build_problem3(const IterateState& it, const Eigen::MatrixXd& C,
                             const SupplyRate& sr, const DataMatrices& dm, double eps) {
  check_pipeline_inputs(C, sr, dm, eps);
  const int N = dm.lifted_dim();
  const int m = dm.input_dim();
  if (it.P.rows() != N || it.A.rows() != N || it.B.cols() != m || it.H.rows() != N) {
    throw DimensionError("build_problem3: iterate dimensions do not match the data");
  }

  Problem3Build build;
  conic::ConicProblem& prob = build.problem;
  build.dP = prob.add_symmetric_matrix_var(N);
  build.dA = prob.add_matrix_var(N, N);
  build.dB = prob.add_matrix_var(N, m);
  build.G = prob.add_matrix_var(N, N);
  const int d = prob.num_vars();

  const Eigen::MatrixXd zN = Eigen::MatrixXd::Zero(N, N);
  const Eigen::MatrixXd zB = Eigen::MatrixXd::Zero(N, m);
  const Eigen::MatrixXd he0 = he_constraint(it, C, sr, zN, zN, zB, zN);
  const int hsize = 4 * N + m;

  // He(M) <= -eps I
  build.he_block = prob.add_lmi_block((-he0 - eps * Eigen::MatrixXd::Identity(hsize, hsize)).eval());
  // P_hat + dP >= eps I
  build.pd_block = prob.add_lmi_block((it.P - eps * Eigen::MatrixXd::Identity(N, N)).eval());

  // Coefficients from the dense evaluator: He is affine in the step, so the
  // per-variable derivative is He(unit) - He(0).
  const auto he_coeff = [&](const Eigen::MatrixXd& edP, const Eigen::MatrixXd& edA,
                            const Eigen::MatrixXd& edB, const Eigen::MatrixXd& eG) {
    return (-(he_constraint(it, C, sr, edP, edA, edB, eG) - he0)).eval();
  };

  for (int i = 0; i < N; ++i) {
    for (int j = i; j < N; ++j) {
      Eigen::MatrixXd e = zN;
      e(i, j) = 1.0;
      e(j, i) = 1.0;
      prob.add_coefficient(build.he_block, build.dP(i, j), he_coeff(e, zN, zB, zN));
      Eigen::MatrixXd ep = zN;
      ep(i, j) = 1.0;
      ep(j, i) = 1.0;
      prob.add_coefficient(build.pd_block, build.dP(i, j), ep);
    }
  }
  for (int i = 0; i < N; ++i) {
    for (int j = 0; j < N; ++j) {
      Eigen::MatrixXd e = zN;
      e(i, j) = 1.0;
      prob.add_coefficient(build.he_block, build.dA(i, j), he_coeff(zN, e, zB, zN));
    }
    for (int j = 0; j < m; ++j) {
      Eigen::MatrixXd e = zB;
      e(i, j) = 1.0;
      prob.add_coefficient(build.he_block, build.dB(i, j), he_coeff(zN, zN, e, zN));
    }
    for (int j = 0; j < N; ++j) {
      Eigen::MatrixXd e = zN;
      e(i, j) = 1.0;
      prob.add_coefficient(build.he_block, build.G(i, j), he_coeff(zN, zN, zB, e));
    }
  }

  // Objective J1(A_hat + dA, B_hat + dB) = ||E - [dA dB] Z||_F^2 with
  // E = PsiNext - [A_hat B_hat][Psi;U], compressed through the Gram factor
  // of Z: ||X Gamma - K||^2 + (||E||^2 - ||K||^2), K = E Z' Gamma^{-T}.
  Eigen::MatrixXd Z(N + m, dm.num_samples());
  Z.topRows(N) = dm.Psi;
  Z.bottomRows(m) = dm.U;
  const Eigen::MatrixXd E = dm.PsiNext - it.A * dm.Psi - it.B * dm.U;
  const Eigen::MatrixXd gram = Z * Z.transpose();
  const Eigen::MatrixXd gamma = psd_factor(gram);
  const Eigen::MatrixXd K = E * Z.transpose() * psd_factor_pinv(gram);
  const int gcols = static_cast<int>(gamma.cols());

  Eigen::MatrixXd L = Eigen::MatrixXd::Zero(N * gcols, d);
  Eigen::VectorXd b(N * gcols);
  for (int i = 0; i < N; ++i) {
    for (int t = 0; t < gcols; ++t) {
      const int row = i * gcols + t;
      for (int c = 0; c < N; ++c) L(row, build.dA(i, c)) += gamma(c, t);
      for (int c = 0; c < m; ++c) L(row, build.dB(i, c)) += gamma(N + c, t);
      b[row] = K(i, t);
    }
  }
  const double constant = E.squaredNorm() - K.squaredNorm();
  prob.set_quadratic_objective(std::move(L), std::move(b), constant);

  build.feasible_point = Eigen::VectorXd::Zero(d);
  const Eigen::MatrixXd hs = 0.5 * (it.H + it.H.transpose());
  for (int i = 0; i < N; ++i)
    for (int j = 0; j < N; ++j) build.feasible_point[build.G(i, j)] = hs(i, j);

  return build;
}

Problem3Solution solve_problem3(const IterateState& it, const Eigen::MatrixXd& C,
                                const SupplyRate& sr, const DataMatrices& dm, double eps,
                                const conic::SolverOptions& solver_opts) {
  Problem3Build build = build_problem3(it, C, sr, dm, eps);
  conic::ConicSolution sol = conic::solve(build.problem, build.feasible_point, solver_opts);
  if (sol.status == conic::SolveStatus::Infeasible) {
    // cannot happen for a strictly feasible iterate with H+H' > 0
    throw NumericalError(
        "Problem 3 reported infeasible despite a strictly feasible iterate; this indicates a "
        "solver tolerance failure (diagnostic: " + sol.diagnostic + ")");
  }
  if (sol.status != conic::SolveStatus::Optimal) {
    throw NumericalError("Problem 3 solver failure: " + sol.diagnostic);
  }

  const int N = dm.lifted_dim();
  const int m = dm.input_dim();
  Problem3Solution res;
  res.dP.resize(N, N);
  for (int i = 0; i < N; ++i)
    for (int j = i; j < N; ++j) res.dP(i, j) = res.dP(j, i) = sol.x[build.dP(i, j)];
  res.dA.resize(N, N);
  res.dB.resize(N, m);
  res.G.resize(N, N);
  for (int i = 0; i < N; ++i) {
    for (int j = 0; j < N; ++j) res.dA(i, j) = sol.x[build.dA(i, j)];
    for (int j = 0; j < m; ++j) res.dB(i, j) = sol.x[build.dB(i, j)];
    for (int j = 0; j < N; ++j) res.G(i, j) = sol.x[build.G(i, j)];
  }
  res.j1_new = sol.objective_value;
  res.raw = std::move(sol);
  return res;
}

AlgorithmResult run_algorithm(const DataMatrices& dm, const Eigen::MatrixXd& C,
                              const SupplyRate& sr, const AlgorithmOptions& opts,
                              const LiftingDictionary& dict) {
  opts.validate();
  check_pipeline_inputs(C, sr, dm, opts.epsilon_margin);
  if (dict.lifted_dim() != dm.lifted_dim()) {
    throw DimensionError("run_algorithm: dictionary does not match the data matrices");
  }
  const int N = dm.lifted_dim();

  // Row scaling: a diagonal similarity transform that preserves both the
  // unconstrained J1 minimizers and dissipativity.
  Eigen::VectorXd scale = Eigen::VectorXd::Ones(N);
  if (opts.rescale_psi_rows) {
    for (int i = 0; i < N; ++i) {
      const double rms = std::sqrt(dm.Psi.row(i).squaredNorm() / dm.num_samples());
      if (rms > 1e-300) scale[i] = 1.0 / rms;
    }
  }
  DataMatrices sdm = dm;
  sdm.Psi = scale.asDiagonal() * dm.Psi;
  sdm.PsiNext = scale.asDiagonal() * dm.PsiNext;
  const Eigen::MatrixXd sC = C * scale.cwiseInverse().asDiagonal();

  conic::SolverOptions solver_opts;
  solver_opts.tol = opts.solver_tol;

  AlgorithmResult result;
  result.psi_row_scale = scale;
  result.scaled_C = sC;

  // Step 0: convex initialization.
  Problem2Result p2 = solve_problem2(sC, sr, sdm, opts.epsilon_margin, solver_opts);
  result.worst_recheck_violation = p2.solution.max_constraint_violation;

  IterateState it;
  std::tie(it.A, it.B) = recover_ab(p2.P, p2.R, p2.S);
  it.P = p2.P;
  it.H = Eigen::MatrixXd::Identity(N, N);
  it.j1 = j1(it.A, it.B, sdm);
  it.iteration = 0;
  it.validate(sC, sr);

  const auto record = [&](const IterateState& state, const std::string& status) {
    IterationRecord rec;
    rec.iteration = state.iteration;
    rec.j1 = state.j1;
    rec.lmi_margin = -eigmax_sym(lemma_lmi_lhs(state.P, state.A, state.B, sC, sr));
    rec.eigmin_P = eigmin_sym(state.P);
    rec.eigmin_H_sym = eigmin_sym(state.H + state.H.transpose());
    rec.solver_status = status;
    result.log.push_back(rec);
    if (opts.keep_iterates) result.iterates.push_back(state);
  };
  record(it, conic::to_string(p2.solution.status));

  result.stop_reason = "max iterations reached";
  for (int i = 1; i <= opts.max_iterations; ++i) {
    Problem3Solution p3 = solve_problem3(it, sC, sr, sdm, opts.epsilon_margin, solver_opts);
    result.worst_recheck_violation =
        std::max(result.worst_recheck_violation, p3.raw.max_constraint_violation);

    IterateState next;
    next.P = 0.5 * ((it.P + p3.dP) + (it.P + p3.dP).transpose());
    next.A = it.A + p3.dA;
    next.B = it.B + p3.dB;
    next.j1 = j1(next.A, next.B, sdm);
    next.iteration = i;

    // Feasibility of the recovered point for the original LMI is part of
    // the overbounding guarantee; re-verify it on every accepted step.
    if (eigmax_sym(lemma_lmi_lhs(next.P, next.A, next.B, sC, sr)) >= 0.0) {
      throw NumericalError("iteration " + std::to_string(i) +
                           ": updated iterate failed the dissipation-LMI recheck");
    }
    if (next.j1 > it.j1) {
      result.stop_reason = "descent stalled at solver resolution";
      break;
    }

    // Update law H <- G, guarded so eigmin(H+H') stays positive when the
    // solver returns a marginal G.
    next.H = p3.G;
    const double w = eigmin_sym(next.H + next.H.transpose());
    if (w <= 0.0) {
      next.H = 0.5 * (p3.G + p3.G.transpose()) +
               (1e-8 + std::abs(w)) * Eigen::MatrixXd::Identity(N, N);
    }

    const double prev = it.j1;
    it = std::move(next);
    record(it, conic::to_string(p3.raw.status));

    if ((prev - it.j1) / std::max(prev, 1e-12) < opts.rel_descent_tol) {
      result.stop_reason = "relative descent below tolerance";
      break;
    }
  }

  // Map back to original coordinates: A = T^{-1} As T, B = T^{-1} Bs,
  // P = T Ps T with T = diag(scale).
  const Eigen::VectorXd inv = scale.cwiseInverse();
  KoopmanModel model{inv.asDiagonal() * it.A * scale.asDiagonal(), inv.asDiagonal() * it.B, C,
                     dict, Eigen::MatrixXd(scale.asDiagonal() * it.P * scale.asDiagonal())};
  model.validate();
  if (eigmax_sym(lemma_lmi_lhs(*model.certificate, model.A, model.B, C, sr)) >= 0.0) {
    throw NumericalError("final model failed the dissipation-LMI recheck in original coordinates");
  }
  result.model = std::move(model);
  return result;
}

}  // namespace koopman
