#include "koopman/conic.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <cmath>
#include <functional>
#include <limits>
#include <ostream>
#include <sstream>

namespace koopman::conic {

SymMatrixVar ConicProblem::add_symmetric_matrix_var(int n) {
  if (n < 1) throw Error("add_symmetric_matrix_var: size must be >= 1");
  SymMatrixVar v{num_vars_, n};
  num_vars_ += v.count();
  return v;
}

MatrixVar ConicProblem::add_matrix_var(int rows, int cols) {
  if (rows < 1 || cols < 1) throw Error("add_matrix_var: sizes must be >= 1");
  MatrixVar v{num_vars_, rows, cols};
  num_vars_ += v.count();
  return v;
}

int ConicProblem::add_scalar_var() { return num_vars_++; }

int ConicProblem::add_lmi_block(const Eigen::MatrixXd& f0) {
  if (f0.rows() != f0.cols()) throw DimensionError("add_lmi_block: f0 must be square");
  if ((f0 - f0.transpose()).cwiseAbs().maxCoeff() > 1e-10 * (1.0 + f0.cwiseAbs().maxCoeff())) {
    throw Error("add_lmi_block: f0 must be symmetric");
  }
  blocks_.push_back(Block{f0, {}});
  return static_cast<int>(blocks_.size()) - 1;
}

void ConicProblem::add_coefficient(int block, int var, const Eigen::MatrixXd& df) {
  if (block < 0 || block >= num_blocks()) throw Error("add_coefficient: bad block index");
  if (var < 0 || var >= num_vars_) throw Error("add_coefficient: unregistered variable index");
  Block& blk = blocks_[block];
  if (df.rows() != blk.f0.rows() || df.cols() != blk.f0.cols()) {
    throw DimensionError("add_coefficient: coefficient size does not match block");
  }
  if ((df - df.transpose()).cwiseAbs().maxCoeff() > 1e-10 * (1.0 + df.cwiseAbs().maxCoeff())) {
    throw Error("add_coefficient: coefficient must be symmetric");
  }
  if (var >= static_cast<int>(blk.coeffs.size())) blk.coeffs.resize(var + 1);
  if (blk.coeffs[var].size() == 0) {
    blk.coeffs[var] = df;
  } else {
    blk.coeffs[var] += df;
  }
}

int ConicProblem::total_block_size() const {
  int total = 0;
  for (const auto& b : blocks_) total += static_cast<int>(b.f0.rows());
  return total;
}

void ConicProblem::set_linear_objective(Eigen::VectorXd q) {
  if (q.size() != num_vars_) throw DimensionError("set_linear_objective: wrong length");
  q_ = std::move(q);
}

void ConicProblem::set_quadratic_objective(Eigen::MatrixXd L, Eigen::VectorXd b, double constant) {
  if (L.cols() != num_vars_) throw DimensionError("set_quadratic_objective: L has wrong column count");
  if (b.size() != L.rows()) throw DimensionError("set_quadratic_objective: b does not match L");
  L_ = std::move(L);
  b_ = std::move(b);
  constant_ = constant;
}

bool ConicProblem::has_objective() const { return q_.size() > 0 || L_.size() > 0; }

double ConicProblem::objective_value_at(const Eigen::Ref<const Eigen::VectorXd>& x) const {
  if (x.size() != num_vars_) throw DimensionError("objective_value_at: x has wrong length");
  double value = constant_;
  if (q_.size() > 0) value += q_.dot(x);
  if (L_.size() > 0) value += (L_ * x - b_).squaredNorm();
  return value;
}

Eigen::MatrixXd ConicProblem::block_value(int block, const Eigen::Ref<const Eigen::VectorXd>& x) const {
  if (block < 0 || block >= num_blocks()) throw Error("block_value: bad block index");
  if (x.size() != num_vars_) throw DimensionError("block_value: x has wrong length");
  const Block& blk = blocks_[block];
  Eigen::MatrixXd f = blk.f0;
  for (int v = 0; v < static_cast<int>(blk.coeffs.size()); ++v) {
    if (blk.coeffs[v].size() > 0 && x[v] != 0.0) f += x[v] * blk.coeffs[v];
  }
  return f;
}

double ConicProblem::min_block_eigenvalue(const Eigen::Ref<const Eigen::VectorXd>& x) const {
  double worst = std::numeric_limits<double>::infinity();
  for (int k = 0; k < num_blocks(); ++k) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(block_value(k, x), Eigen::EigenvaluesOnly);
    worst = std::min(worst, es.eigenvalues().minCoeff());
  }
  return worst;
}

void ConicProblem::dump(std::ostream& os) const {
  const auto saved = os.precision(17);
  os << "# conic problem: vars=" << num_vars_ << " blocks=" << num_blocks() << "\n";
  os << "# line format: block row col var value   (var =-1: constant term; upper triangle)\n";
  for (int k = 0; k < num_blocks(); ++k) {
    const Block& blk = blocks_[k];
    const int s = static_cast<int>(blk.f0.rows());
    os << "block " << k << " " << s << "\n";
    for (int i = 0; i < s; ++i)
      for (int j = i; j < s; ++j)
        if (blk.f0(i, j) != 0.0) os << k << " " << i << " " << j << " -1 " << blk.f0(i, j) << "\n";
    for (int v = 0; v < static_cast<int>(blk.coeffs.size()); ++v) {
      if (blk.coeffs[v].size() == 0) continue;
      for (int i = 0; i < s; ++i)
        for (int j = i; j < s; ++j)
          if (blk.coeffs[v](i, j) != 0.0)
            os << k << " " << i << " " << j << " " << v << " " << blk.coeffs[v](i, j) << "\n";
    }
  }
  os.precision(saved);
}

std::string to_string(SolveStatus status) {
  switch (status) {
    case SolveStatus::Optimal: return "Optimal";
    case SolveStatus::Infeasible: return "Infeasible";
    case SolveStatus::NumericalFailure: return "NumericalFailure";
  }
  return "unknown";
}

// ---------------------------------------------------------------------------
// Barrier interior-point backend.
//
// Phase 1 minimizes the uniform margin s over {F_k(x) + s I >= 0}; phase 2
// follows the central path of t*f(x) - sum_k log det F_k(x) with the usual
// gap bound (total block size)/t.
// ---------------------------------------------------------------------------

namespace {

struct Triplet {
  int r, c;
  double v;
};

struct CompiledBlock {
  int size = 0;
  Eigen::MatrixXd f0;
  std::vector<int> vars;                       // global variable ids
  std::vector<std::vector<Triplet>> entries;   // upper-triangle triplets per local var
};

struct Compiled {
  int dim = 0;
  std::vector<CompiledBlock> blocks;
  int total_size = 0;

  Eigen::VectorXd q;       // empty if unset
  Eigen::MatrixXd L;       // empty if unset
  Eigen::VectorXd b;
  double constant = 0.0;
  Eigen::MatrixXd obj_hess;  // 2 L'L, empty if no quadratic part

  bool has_objective() const { return q.size() > 0 || L.size() > 0; }

  double obj(const Eigen::VectorXd& x) const {
    double value = constant;
    if (q.size() > 0) value += q.dot(x);
    if (L.size() > 0) value += (L * x - b).squaredNorm();
    return value;
  }

  Eigen::VectorXd obj_grad(const Eigen::VectorXd& x) const {
    Eigen::VectorXd g = Eigen::VectorXd::Zero(dim);
    if (q.size() > 0) g += q;
    if (L.size() > 0) g.noalias() += 2.0 * L.transpose() * (L * x - b);
    return g;
  }

  Eigen::MatrixXd block_at(int k, const Eigen::VectorXd& x) const {
    const CompiledBlock& blk = blocks[k];
    Eigen::MatrixXd f = blk.f0;
    for (std::size_t lv = 0; lv < blk.vars.size(); ++lv) {
      const double xv = x[blk.vars[lv]];
      if (xv == 0.0) continue;
      for (const Triplet& t : blk.entries[lv]) {
        f(t.r, t.c) += xv * t.v;
        if (t.r != t.c) f(t.c, t.r) += xv * t.v;
      }
    }
    return f;
  }
};

Compiled compile(const ConicProblem& p) {
  Compiled c;
  c.dim = p.num_vars();
  c.q = p.linear_objective();
  c.L = p.quadratic_L();
  c.b = p.quadratic_b();
  c.constant = p.objective_constant();
  if (c.L.size() > 0) c.obj_hess = 2.0 * c.L.transpose() * c.L;
  for (const auto& blk : p.blocks()) {
    CompiledBlock cb;
    cb.size = static_cast<int>(blk.f0.rows());
    cb.f0 = blk.f0;
    for (int v = 0; v < static_cast<int>(blk.coeffs.size()); ++v) {
      if (blk.coeffs[v].size() == 0) continue;
      std::vector<Triplet> tri;
      for (int i = 0; i < cb.size; ++i)
        for (int j = i; j < cb.size; ++j)
          if (blk.coeffs[v](i, j) != 0.0) tri.push_back({i, j, blk.coeffs[v](i, j)});
      if (!tri.empty()) {
        cb.vars.push_back(v);
        cb.entries.push_back(std::move(tri));
      }
    }
    c.total_size += cb.size;
    c.blocks.push_back(std::move(cb));
  }
  return c;
}

// Extends the problem with one margin variable s: blocks F_k(x) + s I,
// objective min s.
Compiled phase1_extend(const Compiled& c) {
  Compiled e = c;
  const int s_var = e.dim;
  e.dim += 1;
  e.q = Eigen::VectorXd::Zero(e.dim);
  e.q[s_var] = 1.0;
  e.L.resize(0, 0);
  e.b.resize(0);
  e.obj_hess.resize(0, 0);
  e.constant = 0.0;
  for (auto& blk : e.blocks) {
    std::vector<Triplet> eye;
    eye.reserve(blk.size);
    for (int i = 0; i < blk.size; ++i) eye.push_back({i, i, 1.0});
    blk.vars.push_back(s_var);
    blk.entries.push_back(std::move(eye));
  }
  return e;
}

// Trust ball ||x - center|| <= radius. The solver always adds this barrier
// so the centering subproblems stay bounded even when the feasible set has
// recession directions the objective does not control (phase 1 always has
// them). The radius is far outside any solution scale, and a solution that
// ends up hugging the ball is reported, never silently returned.
struct Ball {
  Eigen::VectorXd center;
  double radius = 0.0;

  double slack(const Eigen::VectorXd& x) const {
    return radius * radius - (x - center).squaredNorm();
  }
};

// Sum of log det F_k(x) plus the ball term; nullopt when x is not strictly
// inside every constraint.
std::optional<double> logdet_sum(const Compiled& c, const Ball& ball, const Eigen::VectorXd& x) {
  double total = 0.0;
  for (int k = 0; k < static_cast<int>(c.blocks.size()); ++k) {
    Eigen::MatrixXd f = c.block_at(k, x);
    Eigen::LLT<Eigen::MatrixXd> llt(f);
    if (llt.info() != Eigen::Success) return std::nullopt;
    total += 2.0 * llt.matrixLLT().diagonal().array().log().sum();
  }
  const double slack = ball.slack(x);
  if (slack <= 0.0) return std::nullopt;
  return total + std::log(slack);
}

bool strictly_feasible(const Compiled& c, const Eigen::VectorXd& x) {
  for (int k = 0; k < static_cast<int>(c.blocks.size()); ++k) {
    Eigen::LLT<Eigen::MatrixXd> llt(c.block_at(k, x));
    if (llt.info() != Eigen::Success) return false;
  }
  return true;
}

struct CenterResult {
  bool converged = false;
  bool stopped_early = false;
  bool failed = false;
  std::string note;
  int newton_steps = 0;
};

// Damped Newton centering of phi_t(x) = t*f(x) - sum log det F_k(x) - ball.
// `stop_early`, when given, is checked after every accepted step.
CenterResult center(const Compiled& c, const Ball& ball, double t, Eigen::VectorXd& x,
                    const SolverOptions& opts,
                    const std::function<bool(const Eigen::VectorXd&)>& stop_early = nullptr) {
  CenterResult res;
  const int d = c.dim;

  for (int iter = 0; iter < opts.max_newton_per_center; ++iter) {
    Eigen::VectorXd grad = t * c.obj_grad(x);
    Eigen::MatrixXd hess = c.obj_hess.size() > 0
                               ? Eigen::MatrixXd(t * c.obj_hess)
                               : Eigen::MatrixXd::Zero(d, d);
    double logdet_total = 0.0;

    {
      const double slack = ball.slack(x);
      if (slack <= 0.0) {
        res.failed = true;
        res.note = "iterate left the trust ball";
        return res;
      }
      const Eigen::VectorXd v = x - ball.center;
      grad += (2.0 / slack) * v;
      hess += (2.0 / slack) * Eigen::MatrixXd::Identity(d, d);
      hess += (4.0 / (slack * slack)) * (v * v.transpose());
      logdet_total += std::log(slack);
    }

    for (const CompiledBlock& blk : c.blocks) {
      Eigen::MatrixXd f = [&] {
        Eigen::MatrixXd fb = blk.f0;
        for (std::size_t lv = 0; lv < blk.vars.size(); ++lv) {
          const double xv = x[blk.vars[lv]];
          if (xv == 0.0) continue;
          for (const Triplet& tr : blk.entries[lv]) {
            fb(tr.r, tr.c) += xv * tr.v;
            if (tr.r != tr.c) fb(tr.c, tr.r) += xv * tr.v;
          }
        }
        return fb;
      }();
      Eigen::LLT<Eigen::MatrixXd> llt(f);
      if (llt.info() != Eigen::Success) {
        res.failed = true;
        res.note = "iterate left the cone interior";
        return res;
      }
      logdet_total += 2.0 * llt.matrixLLT().diagonal().array().log().sum();
      const Eigen::MatrixXd W = llt.solve(Eigen::MatrixXd::Identity(blk.size, blk.size));

      const int nlocal = static_cast<int>(blk.vars.size());
      std::vector<Eigen::MatrixXd> wins(nlocal);  // W A_i W per local var
      for (int i = 0; i < nlocal; ++i) {
        Eigen::MatrixXd WA = Eigen::MatrixXd::Zero(blk.size, blk.size);
        double tr_wa = 0.0;
        for (const Triplet& tr : blk.entries[i]) {
          WA.col(tr.c) += tr.v * W.col(tr.r);
          tr_wa += tr.v * (tr.r == tr.c ? W(tr.r, tr.r) : 2.0 * W(tr.r, tr.c));
          if (tr.r != tr.c) WA.col(tr.r) += tr.v * W.col(tr.c);
        }
        grad[blk.vars[i]] -= tr_wa;
        wins[i].noalias() = WA * W;
      }
      for (int i = 0; i < nlocal; ++i) {
        const Eigen::MatrixXd& Si = wins[i];
        for (int j = 0; j <= i; ++j) {
          double hij = 0.0;
          for (const Triplet& tr : blk.entries[j]) {
            hij += tr.v * (tr.r == tr.c ? Si(tr.r, tr.r) : 2.0 * Si(tr.r, tr.c));
          }
          hess(blk.vars[i], blk.vars[j]) += hij;
          if (i != j) hess(blk.vars[j], blk.vars[i]) += hij;
        }
      }
    }

    if (!grad.allFinite()) {
      res.failed = true;
      res.note = "non-finite gradient";
      return res;
    }

    // Newton direction, with diagonal regularization fallback.
    Eigen::VectorXd dx;
    double decrement_sq = -1.0;
    double reg = 0.0;
    for (int attempt = 0; attempt < 8; ++attempt) {
      Eigen::MatrixXd h = hess;
      if (reg > 0.0) h.diagonal().array() += reg;
      Eigen::LDLT<Eigen::MatrixXd> ldlt(h);
      dx = ldlt.solve(-grad);
      decrement_sq = -grad.dot(dx);
      if (dx.allFinite() && decrement_sq > 0.0) break;
      reg = (reg == 0.0) ? 1e-12 * (1.0 + hess.diagonal().cwiseAbs().maxCoeff()) : reg * 100.0;
      decrement_sq = -1.0;
    }
    if (decrement_sq < 0.0) {
      res.failed = true;
      res.note = "Newton system unsolvable";
      return res;
    }
    if (0.5 * decrement_sq <= 1e-10) {
      res.converged = true;
      return res;
    }

    // Backtracking line search on phi_t, staying strictly inside the cone.
    const double phi0 = t * c.obj(x) - logdet_total;
    const double slope = grad.dot(dx);
    double step = 1.0;
    bool accepted = false;
    for (int ls = 0; ls < 60; ++ls, step *= 0.5) {
      const Eigen::VectorXd cand = x + step * dx;
      const std::optional<double> ld = logdet_sum(c, ball, cand);
      if (!ld) continue;
      const double phi = t * c.obj(cand) - *ld;
      if (phi <= phi0 + 0.01 * step * slope) {
        x = cand;
        accepted = true;
        break;
      }
    }
    ++res.newton_steps;
    if (!accepted) {
      // Progress stalled at numerical resolution; current point is the
      // best available center.
      res.converged = true;
      res.note = "line search stalled";
      return res;
    }
    if (stop_early && stop_early(x)) {
      res.stopped_early = true;
      return res;
    }
  }
  res.note = "max Newton steps reached";
  return res;
}

// Unconstrained quadratic/linear minimization (no LMI blocks).
ConicSolution solve_unconstrained(const ConicProblem& prob, const Compiled& c) {
  ConicSolution sol;
  if (c.L.size() == 0) {
    if (c.q.size() == 0 || c.q.isZero(0.0)) {
      sol.x = Eigen::VectorXd::Zero(c.dim);
      sol.status = SolveStatus::Optimal;
      sol.objective_value = prob.objective_value_at(sol.x);
      return sol;
    }
    sol.status = SolveStatus::NumericalFailure;
    sol.diagnostic = "unbounded: linear objective with no constraints";
    return sol;
  }
  // minimize ||Lx-b||^2 + q'x  =>  2L'L x = 2L'b - q
  Eigen::MatrixXd h = c.obj_hess;
  Eigen::VectorXd rhs = 2.0 * c.L.transpose() * c.b;
  if (c.q.size() > 0) rhs -= c.q;
  Eigen::LDLT<Eigen::MatrixXd> ldlt(h);
  Eigen::VectorXd x = ldlt.solve(rhs);
  if (!x.allFinite() || (h * x - rhs).norm() > 1e-6 * (1.0 + rhs.norm())) {
    // singular normal equations: fall back to a minimum-norm least squares
    x = c.L.bdcSvd(Eigen::ComputeThinU | Eigen::ComputeThinV).solve(c.b);
    if (c.q.size() > 0 && !c.q.isZero(0.0)) {
      sol.status = SolveStatus::NumericalFailure;
      sol.diagnostic = "possibly unbounded: singular quadratic with linear term";
      sol.x = x;
      return sol;
    }
  }
  sol.x = x;
  sol.status = SolveStatus::Optimal;
  sol.objective_value = prob.objective_value_at(x);
  return sol;
}

ConicSolution solve_impl(const ConicProblem& prob, const Eigen::VectorXd* warm,
                         const SolverOptions& opts) {
  const Compiled c = compile(prob);
  ConicSolution sol;

  if (c.blocks.empty()) return solve_unconstrained(prob, c);

  int total_newton = 0;
  Eigen::VectorXd x;
  bool have_start = false;
  if (warm && warm->size() == c.dim && strictly_feasible(c, *warm)) {
    x = *warm;
    have_start = true;
  }

  if (!have_start) {
    // Phase 1: minimize the uniform margin s inside a trust ball. When the
    // outcome looks radius-limited the ball is enlarged and phase 1 rerun.
    Compiled c1 = phase1_extend(c);
    const int s_var = c.dim;
    double radius = opts.trust_radius;
    if (radius <= 0.0) {
      const double base = (warm && warm->size() == c.dim) ? warm->norm() : 0.0;
      radius = std::max(1e5, 1e3 * (1.0 + base));
    }

    bool feasible = false;
    for (int attempt = 0; attempt < 3 && !feasible; ++attempt, radius *= 100.0) {
      Eigen::VectorXd x1 = Eigen::VectorXd::Zero(c1.dim);
      if (warm && warm->size() == c.dim) x1.head(c.dim) = *warm;

      double worst_eig = std::numeric_limits<double>::infinity();
      for (int k = 0; k < static_cast<int>(c.blocks.size()); ++k) {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(c.block_at(k, x1.head(c.dim)),
                                                          Eigen::EigenvaluesOnly);
        worst_eig = std::min(worst_eig, es.eigenvalues().minCoeff());
      }
      x1[s_var] = -worst_eig + std::max(1.0, 0.1 * std::abs(worst_eig));
      if (!strictly_feasible(c1, x1)) {
        x1[s_var] = -worst_eig + std::max(10.0, std::abs(worst_eig));
      }
      const Ball ball{x1, radius};

      const auto margin_reached = [&](const Eigen::VectorXd& p) {
        return p[s_var] < -opts.phase1_margin;
      };

      const double m1 = static_cast<double>(c1.total_size) + 2.0;
      double t = 1.0 / std::max(1.0, std::abs(x1[s_var]));
      bool radius_limited = false;
      for (int outer = 0; outer < opts.max_outer; ++outer) {
        CenterResult cr = center(c1, ball, t, x1, opts, margin_reached);
        total_newton += cr.newton_steps;
        if (cr.failed) {
          sol.status = SolveStatus::NumericalFailure;
          sol.diagnostic = "phase 1: " + cr.note;
          sol.newton_steps = total_newton;
          return sol;
        }
        const double s = x1[s_var];
        if (cr.stopped_early || s < -opts.phase1_margin) {
          feasible = true;
          break;
        }
        const double gap = m1 / t;
        const bool near_ball = (x1 - ball.center).norm() > 0.3 * radius;
        if (cr.converged && gap <= std::max(1e-12, opts.tol * std::max(1.0, std::abs(s)))) {
          feasible = s < 0.0;
          if (!feasible) {
            if (near_ball) {
              radius_limited = true;  // retry with a larger ball
              break;
            }
            sol.status = SolveStatus::Infeasible;
            sol.diagnostic = "phase 1 converged with margin " + std::to_string(-s) +
                             ": no strictly feasible point at solver tolerance";
            sol.newton_steps = total_newton;
            return sol;
          }
          break;
        }
        if (cr.converged && s - gap > 0.0 && !near_ball) {
          sol.status = SolveStatus::Infeasible;
          sol.diagnostic = "phase 1 lower bound " + std::to_string(s - gap) +
                           " > 0: no positive semidefinite point exists";
          sol.newton_steps = total_newton;
          return sol;
        }
        t *= opts.mu;
      }
      if (feasible) {
        x = x1.head(c.dim);
      } else if (!radius_limited) {
        sol.status = SolveStatus::NumericalFailure;
        sol.diagnostic = "phase 1 did not converge in " + std::to_string(opts.max_outer) +
                         " outer iterations";
        sol.newton_steps = total_newton;
        return sol;
      }
    }
    if (!feasible) {
      sol.status = SolveStatus::Infeasible;
      sol.diagnostic = "phase 1 found no strictly feasible point inside the trust ball";
      sol.newton_steps = total_newton;
      return sol;
    }
  }

  if (c.has_objective()) {
    // Phase 2: follow the central path from the strictly feasible start.
    double radius = opts.trust_radius;
    if (radius <= 0.0) radius = std::max(1e6, 1e4 * (1.0 + x.norm()));
    const Ball ball{x, radius};
    const double m2 = static_cast<double>(c.total_size) + 2.0;
    double t = 1.0;
    bool reached = false;
    for (int outer = 0; outer < opts.max_outer; ++outer) {
      CenterResult cr = center(c, ball, t, x, opts);
      total_newton += cr.newton_steps;
      if (cr.failed) {
        sol.status = SolveStatus::NumericalFailure;
        sol.diagnostic = "phase 2: " + cr.note + " at t=" + std::to_string(t);
        sol.newton_steps = total_newton;
        sol.x = x;
        return sol;
      }
      const double gap = m2 / t;
      if (gap <= opts.tol * std::max(1.0, std::abs(c.obj(x)))) {
        reached = true;
        break;
      }
      t *= opts.mu;
    }
    if (!reached) {
      sol.status = SolveStatus::NumericalFailure;
      sol.diagnostic = "phase 2 gap target not reached in " + std::to_string(opts.max_outer) +
                       " outer iterations";
      sol.newton_steps = total_newton;
      sol.x = x;
      return sol;
    }
    if ((x - ball.center).norm() > 0.9 * radius) {
      sol.status = SolveStatus::NumericalFailure;
      sol.diagnostic = "solution ended on the trust ball: objective appears unbounded "
                       "or badly scaled (radius " + std::to_string(radius) + ")";
      sol.newton_steps = total_newton;
      sol.x = x;
      return sol;
    }
  }

  sol.x = x;
  sol.status = SolveStatus::Optimal;
  sol.objective_value = prob.objective_value_at(x);
  sol.newton_steps = total_newton;
  const double eigmin = prob.min_block_eigenvalue(x);
  sol.max_constraint_violation = std::max(0.0, -eigmin);
  if (sol.max_constraint_violation > opts.feasibility_tol) {
    sol.status = SolveStatus::NumericalFailure;
    sol.diagnostic = "post-solve eigenvalue recheck failed: violation " +
                     std::to_string(sol.max_constraint_violation);
  }
  return sol;
}

}  // namespace

ConicSolution solve(const ConicProblem& prob, const SolverOptions& opts) {
  return solve_impl(prob, nullptr, opts);
}

ConicSolution solve(const ConicProblem& prob, const Eigen::VectorXd& warm_start,
                    const SolverOptions& opts) {
  return solve_impl(prob, &warm_start, opts);
}

}  // namespace koopman::conic
