#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "koopman/dynsim.hpp"
#include "koopman/sequential.hpp"

namespace koopman::cli {

struct InputSpec {
  std::string kind = "uniform_random";
  double lo = -1.0;
  double hi = 1.0;
  double amplitude = 1.0;
  double omega = 1.0;
  std::uint64_t seed = 1;
};

struct DictionarySpec {
  int num_centers = 8;
  std::uint64_t seed = 2;
  double box_lo = 0.0;
  double box_hi = 1.0;
};

struct VerifySpec {
  int omega_points = 400;
  int validation_samples = 1000;
};

struct CompareSpec {
  int samples = 600;
  double amplitude = 1.0;
  double omega = 1.0;
};

/// Everything a pipeline run needs, serializable as JSON. Defaults mirror
/// the benchmark experiment: dt = 0.01, 5000 uniform [-1,1] samples, a
/// state-plus-8-TPS-centers dictionary, and the relaxed-passivity supply
/// rate (0, -1, -0.2).
struct RunConfig {
  std::string system = "benchmark";
  double dt = 0.01;
  int samples = 5000;
  std::vector<double> x0 = {0.0, 0.0};
  InputSpec input;
  DictionarySpec dictionary;
  Eigen::MatrixXd xi11 = Eigen::MatrixXd::Zero(1, 1);
  Eigen::MatrixXd xi12 = Eigen::MatrixXd::Constant(1, 1, -1.0);
  Eigen::MatrixXd xi22 = Eigen::MatrixXd::Constant(1, 1, -0.2);
  AlgorithmOptions algorithm;
  VerifySpec verify;
  CompareSpec compare;

  SupplyRate supply_rate() const;
  System make_system() const;
  void validate() const;

  static RunConfig from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;
  static RunConfig load(const std::string& path);
};

enum class FitMode { Constrained, Unconstrained, LinearConstrained };

FitMode fit_mode_from_string(const std::string& s);
std::string to_string(FitMode mode);

/// simulate: writes the trajectory CSV and a `<out>.meta.json` sidecar
/// with the seeds and the integrated equations.
void cmd_simulate(const RunConfig& config, const std::string& out_csv);

/// fit: reads a trajectory CSV and writes the model JSON. Constrained
/// modes also write the iteration log CSV next to the model
/// (`<out stem>.iterations.csv`).
void cmd_fit(const std::string& trajectory_csv, const RunConfig& config, FitMode mode,
             const std::string& out_model_json);

/// verify: fresh certificate search (ignores the stored P), frequency
/// sweep, and a dissipation audit on a freshly simulated validation
/// trajectory (input seed = training seed + 1). Writes the report JSON
/// and the Nyquist CSV.
void cmd_verify(const std::string& model_json, const RunConfig& config,
                const std::string& out_report_json, const std::string& out_nyquist_csv);

/// compare: rolls every model forward under the same sine input alongside
/// the true system; writes per-step trajectories plus a
/// `<out stem>.summary.json` sidecar with RMS errors per model.
void cmd_compare(const std::vector<std::string>& model_paths, const RunConfig& config,
                 const std::string& out_csv);

}  // namespace koopman::cli
