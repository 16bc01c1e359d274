#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "koopman/dynsim.hpp"

using namespace koopman;

namespace {

Eigen::VectorXd vec2(double a, double b) {
  Eigen::VectorXd v(2);
  v << a, b;
  return v;
}

Eigen::VectorXd vec1(double a) { return Eigen::VectorXd::Constant(1, a); }

// Scalar linear test system dx = rate*x with closed-form solution.
System linear_system(double rate) {
  System sys;
  sys.name = "linear";
  sys.state_dim = 1;
  sys.input_dim = 1;
  sys.output_dim = 1;
  sys.rhs = [rate](const Eigen::VectorXd& x, const Eigen::VectorXd&) {
    return Eigen::VectorXd(rate * x);
  };
  sys.output = [](const Eigen::VectorXd& x) { return x; };
  return sys;
}

}  // namespace

TEST_CASE("benchmark rhs at the origin is an equilibrium") {
  CHECK(benchmark_rhs(vec2(0, 0), vec1(0)).isZero(0.0));
}

TEST_CASE("benchmark rhs direct substitution x=(1,0)") {
  const Eigen::VectorXd dx = benchmark_rhs(vec2(1, 0), vec1(0));
  CHECK(dx[0] == 0.0);
  CHECK(dx[1] == doctest::Approx(std::cos(1.0)).epsilon(1e-15));
}

TEST_CASE("benchmark rhs direct substitution x=(0,1), u=1") {
  const Eigen::VectorXd dx = benchmark_rhs(vec2(0, 1), vec1(1));
  CHECK(dx[0] == 1.0);
  CHECK(dx[1] == doctest::Approx(-1.0).epsilon(1e-15));  // -2*1 + 0*cos(1) + 1
}

TEST_CASE("rk4 with a zero field leaves the state unchanged") {
  const auto zero_field = [](const Eigen::VectorXd& x, const Eigen::VectorXd&) {
    return Eigen::VectorXd(Eigen::VectorXd::Zero(x.size()));
  };
  const Eigen::VectorXd x = vec2(1.5, -0.25);
  CHECK(rk4_step(zero_field, x, vec1(0), 0.01) == x);
}

TEST_CASE("rk4 one-step accuracy against the exponential") {
  const auto decay = [](const Eigen::VectorXd& x, const Eigen::VectorXd&) {
    return Eigen::VectorXd(-x);
  };
  const auto growth = [](const Eigen::VectorXd& x, const Eigen::VectorXd&) {
    return Eigen::VectorXd(x);
  };
  const Eigen::VectorXd one = vec1(1.0);
  CHECK(std::abs(rk4_step(decay, one, vec1(0), 0.01)[0] - std::exp(-0.01)) < 1e-9);
  CHECK(std::abs(rk4_step(growth, one, vec1(0), 0.01)[0] - std::exp(0.01)) < 1e-9);
}

TEST_CASE("generate_input: zero kind") {
  const auto u = generate_input(InputKind::Zero, {}, 10, 3);
  REQUIRE(u.size() == 10);
  for (const auto& uk : u) CHECK(uk.isZero(0.0));
}

TEST_CASE("generate_input: uniform stays in the default [-1,1]") {
  const auto u = generate_input(InputKind::UniformRandom, {}, 500, 11);
  for (const auto& uk : u) {
    CHECK(uk[0] >= -1.0);
    CHECK(uk[0] <= 1.0);
  }
}

TEST_CASE("generate_input is deterministic in the seed") {
  const auto a = generate_input(InputKind::UniformRandom, {}, 50, 5);
  const auto b = generate_input(InputKind::UniformRandom, {}, 50, 5);
  for (std::size_t k = 0; k < a.size(); ++k) CHECK(a[k] == b[k]);
}

TEST_CASE("generate_input: sine samples the expected wave") {
  InputParams p;
  p.amplitude = 0.5;
  p.omega = 2.0;
  p.dt = 0.1;
  const auto u = generate_input(InputKind::Sine, p, 20, 0);
  for (int k = 0; k < 20; ++k) {
    CHECK(u[k][0] == doctest::Approx(0.5 * std::sin(2.0 * k * 0.1)).epsilon(1e-15));
  }
}

TEST_CASE("unknown input kind string is rejected") {
  CHECK_THROWS_AS(input_kind_from_string("sawtooth"), Error);
  CHECK(input_kind_from_string("uniform_random") == InputKind::UniformRandom);
}

TEST_CASE("simulate keeps the benchmark at its equilibrium under zero input") {
  const auto sys = benchmark_system();
  const auto ds = simulate(sys, vec2(0, 0), generate_input(InputKind::Zero, {}, 50, 0), 0.01);
  for (const auto& x : ds.states) CHECK(x.isZero(0.0));
  for (const auto& y : ds.outputs) CHECK(y.isZero(0.0));
}

TEST_CASE("simulate produces 5001 states for 5000 samples") {
  const auto sys = benchmark_system();
  const auto u = generate_input(InputKind::UniformRandom, {}, 5000, 1);
  const auto ds = simulate(sys, vec2(0, 0), u, 0.01);
  CHECK(ds.states.size() == 5001);
  CHECK(ds.inputs.size() == 5000);
  CHECK(ds.outputs.size() == 5000);
  ds.validate();
}

TEST_CASE("simulate matches the closed-form solution of dx=-x") {
  const auto sys = linear_system(-1.0);
  const auto ds = simulate(sys, vec1(1.0), generate_input(InputKind::Zero, {}, 100, 0), 0.01);
  for (int k = 0; k <= 100; ++k) {
    CHECK(std::abs(ds.states[k][0] - std::exp(-0.01 * k)) < 1e-6);
  }
}

TEST_CASE("rk4 global error scales like dt^4") {
  // integrate dx=-x over [0,1] with dt and dt/2; error ratio ~ 16
  const auto sys = linear_system(-1.0);
  const auto err = [&](double dt, int steps) {
    const auto ds = simulate(sys, vec1(1.0), generate_input(InputKind::Zero, {}, steps, 0), dt);
    return std::abs(ds.states.back()[0] - std::exp(-1.0));
  };
  const double ratio = err(0.02, 50) / err(0.01, 100);
  CHECK(ratio >= 12.0);
  CHECK(ratio <= 20.0);
}

TEST_CASE("simulate is deterministic") {
  const auto sys = benchmark_system();
  const auto u = generate_input(InputKind::UniformRandom, {}, 200, 17);
  const auto a = simulate(sys, vec2(0.1, -0.2), u, 0.01);
  const auto b = simulate(sys, vec2(0.1, -0.2), u, 0.01);
  for (std::size_t k = 0; k < a.states.size(); ++k) CHECK(a.states[k] == b.states[k]);
}

TEST_CASE("numerical blowup is reported with the step index") {
  System sys;
  sys.name = "quadratic";
  sys.state_dim = 1;
  sys.input_dim = 1;
  sys.output_dim = 1;
  sys.rhs = [](const Eigen::VectorXd& x, const Eigen::VectorXd&) {
    return Eigen::VectorXd(x.cwiseProduct(x));
  };
  sys.output = [](const Eigen::VectorXd& x) { return x; };
  CHECK_THROWS_AS(simulate(sys, vec1(1e200), generate_input(InputKind::Zero, {}, 5, 0), 0.5),
                  NumericalError);
}

TEST_CASE("dataset length invariants are enforced") {
  TrajectoryDataset ds;
  ds.dt = 0.01;
  ds.states = {vec1(0.0), vec1(1.0)};
  ds.inputs = {vec1(0.0), vec1(0.0)};  // one too many
  ds.outputs = {vec1(0.0)};
  CHECK_THROWS_AS(ds.validate(), DimensionError);
}
