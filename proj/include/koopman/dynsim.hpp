#pragma once

#include <Eigen/Core>
#include <cmath>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "koopman/errors.hpp"

namespace koopman {

/// One sampled trajectory: states x(0..M), inputs u(0..M-1), outputs
/// y(0..M-1), all at a fixed sampling period dt.
struct TrajectoryDataset {
  double dt = 0.0;
  std::vector<Eigen::VectorXd> states;
  std::vector<Eigen::VectorXd> inputs;
  std::vector<Eigen::VectorXd> outputs;

  std::string system_name;
  std::string input_kind;
  std::uint64_t seed = 0;

  int num_steps() const { return static_cast<int>(inputs.size()); }
  void validate() const;
};

/// A continuous-time controlled vector field dx/dt = rhs(x,u) with a
/// static output map y = output(x).
struct System {
  std::string name;
  int state_dim = 0;
  int input_dim = 0;
  int output_dim = 0;
  std::function<Eigen::VectorXd(const Eigen::VectorXd&, const Eigen::VectorXd&)> rhs;
  std::function<Eigen::VectorXd(const Eigen::VectorXd&)> output;
};

/// Right-hand side of the two-state benchmark oscillator:
///   dx1 = x2,  dx2 = -2 x2 + x1 cos(x1 + x2) + u,  y = x2.
Eigen::VectorXd benchmark_rhs(const Eigen::Ref<const Eigen::VectorXd>& x,
                              const Eigen::Ref<const Eigen::VectorXd>& u);

System benchmark_system();

/// Classical fourth-order Runge-Kutta update under zero-order-hold input.
template <typename F>
Eigen::VectorXd rk4_step(F&& f, const Eigen::VectorXd& x, const Eigen::VectorXd& u, double dt) {
  if (dt <= 0.0) throw Error("rk4_step: dt must be positive");
  const Eigen::VectorXd k1 = f(x, u);
  const Eigen::VectorXd k2 = f(x + 0.5 * dt * k1, u);
  const Eigen::VectorXd k3 = f(x + 0.5 * dt * k2, u);
  const Eigen::VectorXd k4 = f(x + dt * k3, u);
  Eigen::VectorXd next = x + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  if (!next.allFinite()) throw NumericalError("rk4_step: state became non-finite");
  return next;
}

enum class InputKind { UniformRandom, Sine, Zero };

InputKind input_kind_from_string(const std::string& s);
std::string to_string(InputKind kind);

struct InputParams {
  double lo = -1.0;
  double hi = 1.0;
  double amplitude = 1.0;
  double omega = 1.0;  // rad per time unit, sine only
  double dt = 0.01;    // sample period, sine only
  int dim = 1;
};

/// u(k) for k = 0..steps-1. uniform_random entries are i.i.d. in [lo, hi];
/// sine is amplitude*sin(omega*k*dt) in every channel; zero is zero.
/// Deterministic for a given seed.
std::vector<Eigen::VectorXd> generate_input(InputKind kind, const InputParams& params, int steps,
                                            std::uint64_t seed);

/// Integrates the system with rk4_step under zero-order-hold inputs and
/// samples the output map at every step instant.
TrajectoryDataset simulate(const System& system, const Eigen::VectorXd& x0,
                           const std::vector<Eigen::VectorXd>& inputs, double dt);

}  // namespace koopman
