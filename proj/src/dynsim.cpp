#include "koopman/dynsim.hpp"

#include "koopman/rng.hpp"

namespace koopman {

void TrajectoryDataset::validate() const {
  if (dt <= 0.0) throw Error("TrajectoryDataset: dt must be positive");
  if (states.size() != inputs.size() + 1 || states.size() != outputs.size() + 1) {
    throw DimensionError("TrajectoryDataset: need len(states) == len(inputs)+1 == len(outputs)+1, got " +
                         std::to_string(states.size()) + "/" + std::to_string(inputs.size()) + "/" +
                         std::to_string(outputs.size()));
  }
}

Eigen::VectorXd benchmark_rhs(const Eigen::Ref<const Eigen::VectorXd>& x,
                              const Eigen::Ref<const Eigen::VectorXd>& u) {
  if (x.size() != 2 || u.size() != 1) {
    throw DimensionError("benchmark_rhs: expects state dim 2 and input dim 1");
  }
  Eigen::VectorXd dx(2);
  dx[0] = x[1];
  dx[1] = -2.0 * x[1] + x[0] * std::cos(x[0] + x[1]) + u[0];
  return dx;
}

System benchmark_system() {
  System sys;
  sys.name = "benchmark";
  sys.state_dim = 2;
  sys.input_dim = 1;
  sys.output_dim = 1;
  sys.rhs = [](const Eigen::VectorXd& x, const Eigen::VectorXd& u) { return benchmark_rhs(x, u); };
  sys.output = [](const Eigen::VectorXd& x) { return Eigen::VectorXd::Constant(1, x[1]); };
  return sys;
}

InputKind input_kind_from_string(const std::string& s) {
  if (s == "uniform_random") return InputKind::UniformRandom;
  if (s == "sine") return InputKind::Sine;
  if (s == "zero") return InputKind::Zero;
  throw Error("unknown input kind: '" + s + "' (expected uniform_random, sine, or zero)");
}

std::string to_string(InputKind kind) {
  switch (kind) {
    case InputKind::UniformRandom: return "uniform_random";
    case InputKind::Sine: return "sine";
    case InputKind::Zero: return "zero";
  }
  return "unknown";
}

std::vector<Eigen::VectorXd> generate_input(InputKind kind, const InputParams& params, int steps,
                                            std::uint64_t seed) {
  if (steps < 1) throw Error("generate_input: steps must be >= 1");
  if (params.dim < 1) throw Error("generate_input: input dim must be >= 1");
  std::vector<Eigen::VectorXd> u(steps);
  Rng rng(seed);
  for (int k = 0; k < steps; ++k) {
    Eigen::VectorXd uk(params.dim);
    switch (kind) {
      case InputKind::UniformRandom:
        for (int j = 0; j < params.dim; ++j) uk[j] = rng.uniform(params.lo, params.hi);
        break;
      case InputKind::Sine:
        uk.setConstant(params.amplitude * std::sin(params.omega * k * params.dt));
        break;
      case InputKind::Zero:
        uk.setZero();
        break;
    }
    u[k] = std::move(uk);
  }
  return u;
}

TrajectoryDataset simulate(const System& system, const Eigen::VectorXd& x0,
                           const std::vector<Eigen::VectorXd>& inputs, double dt) {
  if (dt <= 0.0) throw Error("simulate: dt must be positive");
  if (x0.size() != system.state_dim) {
    throw DimensionError("simulate: x0 has length " + std::to_string(x0.size()) + ", system expects " +
                         std::to_string(system.state_dim));
  }
  TrajectoryDataset ds;
  ds.dt = dt;
  ds.system_name = system.name;
  ds.states.reserve(inputs.size() + 1);
  ds.inputs.reserve(inputs.size());
  ds.outputs.reserve(inputs.size());
  ds.states.push_back(x0);
  for (std::size_t k = 0; k < inputs.size(); ++k) {
    if (inputs[k].size() != system.input_dim) {
      throw DimensionError("simulate: input " + std::to_string(k) + " has length " +
                           std::to_string(inputs[k].size()) + ", system expects " +
                           std::to_string(system.input_dim));
    }
    ds.outputs.push_back(system.output(ds.states.back()));
    ds.inputs.push_back(inputs[k]);
    try {
      ds.states.push_back(rk4_step(system.rhs, ds.states.back(), inputs[k], dt));
    } catch (const NumericalError& e) {
      throw NumericalError("simulate: blowup at step " + std::to_string(k) + ": " + e.what());
    }
  }
  ds.validate();
  return ds;
}

}  // namespace koopman
