// Command-line front end: simulate / fit / verify / compare.
//
// Exit codes: 0 success, 2 infeasible learning problem, 1 other errors.

#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "koopman/cli.hpp"
#include "koopman/serialize.hpp"

using koopman::cli::RunConfig;

namespace {

RunConfig load_config(const std::string& path) {
  if (path.empty()) return RunConfig{};
  return RunConfig::load(path);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"dissipativity-constrained Koopman model learning"};
  app.require_subcommand(1);

  std::string config_path, out, data, model, nyquist, mode = "constrained";
  std::vector<std::string> models;
  // flag overrides; negative sentinels mean "keep config value"
  std::int64_t seed = -1;
  int samples = -1, max_iters = -1, omega_points = -1;

  auto* sim = app.add_subcommand("simulate", "integrate the system and write a trajectory CSV");
  sim->add_option("--config", config_path, "run configuration JSON");
  sim->add_option("--out", out, "output trajectory CSV")->required();
  sim->add_option("--seed", seed, "input seed override");
  sim->add_option("--samples", samples, "sample count override");

  auto* fit = app.add_subcommand("fit", "learn a model from a trajectory CSV");
  fit->add_option("--config", config_path, "run configuration JSON");
  fit->add_option("--data", data, "input trajectory CSV")->required();
  fit->add_option("--mode", mode, "constrained | unconstrained | linear_constrained");
  fit->add_option("--out", out, "output model JSON")->required();
  fit->add_option("--max-iters", max_iters, "refinement iteration cap override");
  fit->add_option("--seed", seed, "dictionary seed override");

  auto* verify = app.add_subcommand("verify", "certificate, Nyquist sweep, dissipation audit");
  verify->add_option("--config", config_path, "run configuration JSON");
  verify->add_option("--model", model, "model JSON")->required();
  verify->add_option("--out", out, "output report JSON")->required();
  verify->add_option("--nyquist", nyquist, "output Nyquist CSV (omega, Re G, Im G)");
  verify->add_option("--omega-points", omega_points, "frequency grid size override");

  auto* compare = app.add_subcommand("compare", "roll models against the true system");
  compare->add_option("--config", config_path, "run configuration JSON");
  compare->add_option("--models", models, "model JSON paths")->required()->expected(-1);
  compare->add_option("--out", out, "output comparison CSV")->required();
  compare->add_option("--samples", samples, "comparison length override");

  CLI11_PARSE(app, argc, argv);

  try {
    RunConfig config = load_config(config_path);
    if (seed >= 0) {
      config.input.seed = static_cast<std::uint64_t>(seed);
      config.dictionary.seed = static_cast<std::uint64_t>(seed);
    }
    if (max_iters > 0) config.algorithm.max_iterations = max_iters;
    if (omega_points > 0) config.verify.omega_points = omega_points;

    if (sim->parsed()) {
      if (samples > 0) config.samples = samples;
      koopman::cli::cmd_simulate(config, out);
    } else if (fit->parsed()) {
      koopman::cli::cmd_fit(data, config, koopman::cli::fit_mode_from_string(mode), out);
    } else if (verify->parsed()) {
      if (nyquist.empty()) nyquist = out + ".nyquist.csv";
      koopman::cli::cmd_verify(model, config, out, nyquist);
    } else if (compare->parsed()) {
      if (samples > 0) config.compare.samples = samples;
      koopman::cli::cmd_compare(models, config, out);
    }
  } catch (const koopman::InfeasibleError& e) {
    std::cerr << "infeasible: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
