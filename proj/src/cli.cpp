#include "koopman/cli.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>

#include "koopman/dissipativity.hpp"
#include "koopman/edmd.hpp"
#include "koopman/lifting.hpp"
#include "koopman/rng.hpp"
#include "koopman/serialize.hpp"

namespace koopman::cli {

namespace {

std::string strip_extension(const std::string& path) {
  const auto slash = path.find_last_of('/');
  const auto dot = path.find_last_of('.');
  if (dot == std::string::npos || (slash != std::string::npos && dot < slash)) return path;
  return path.substr(0, dot);
}

std::string file_stem(const std::string& path) {
  const auto slash = path.find_last_of('/');
  const std::string base = (slash == std::string::npos) ? path : path.substr(slash + 1);
  const auto dot = base.find_last_of('.');
  return (dot == std::string::npos) ? base : base.substr(0, dot);
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

SupplyRate RunConfig::supply_rate() const { return SupplyRate(xi11, xi12, xi22); }

System RunConfig::make_system() const {
  if (system == "benchmark") return benchmark_system();
  throw Error("unknown system '" + system + "' (available: benchmark)");
}

void RunConfig::validate() const {
  if (dt <= 0.0) throw Error("config: dt must be positive");
  if (samples < 1) throw Error("config: samples must be >= 1");
  if (input.hi <= input.lo) throw Error("config: input.hi must exceed input.lo");
  if (dictionary.num_centers < 0) throw Error("config: dictionary.num_centers must be >= 0");
  algorithm.validate();
  supply_rate();  // dimension/symmetry checks
  const System sys = make_system();
  if (static_cast<int>(x0.size()) != sys.state_dim) {
    throw Error("config: x0 length does not match the system state dimension");
  }
}

RunConfig RunConfig::from_json(const nlohmann::json& j) {
  RunConfig c;
  if (j.contains("system")) c.system = j["system"].get<std::string>();
  if (j.contains("dt")) c.dt = j["dt"].get<double>();
  if (j.contains("samples")) c.samples = j["samples"].get<int>();
  if (j.contains("x0")) c.x0 = j["x0"].get<std::vector<double>>();
  if (j.contains("input")) {
    const auto& i = j["input"];
    if (i.contains("kind")) c.input.kind = i["kind"].get<std::string>();
    if (i.contains("lo")) c.input.lo = i["lo"].get<double>();
    if (i.contains("hi")) c.input.hi = i["hi"].get<double>();
    if (i.contains("amplitude")) c.input.amplitude = i["amplitude"].get<double>();
    if (i.contains("omega")) c.input.omega = i["omega"].get<double>();
    if (i.contains("seed")) c.input.seed = i["seed"].get<std::uint64_t>();
  }
  if (j.contains("dictionary")) {
    const auto& d = j["dictionary"];
    if (d.contains("num_centers")) c.dictionary.num_centers = d["num_centers"].get<int>();
    if (d.contains("seed")) c.dictionary.seed = d["seed"].get<std::uint64_t>();
    if (d.contains("box_lo")) c.dictionary.box_lo = d["box_lo"].get<double>();
    if (d.contains("box_hi")) c.dictionary.box_hi = d["box_hi"].get<double>();
  }
  if (j.contains("supply_rate")) {
    const auto& s = j["supply_rate"];
    c.xi11 = io::matrix_from_json(s.at("xi11"));
    c.xi12 = io::matrix_from_json(s.at("xi12"));
    c.xi22 = io::matrix_from_json(s.at("xi22"));
  }
  if (j.contains("algorithm")) {
    const auto& a = j["algorithm"];
    if (a.contains("epsilon_margin")) c.algorithm.epsilon_margin = a["epsilon_margin"].get<double>();
    if (a.contains("max_iterations")) c.algorithm.max_iterations = a["max_iterations"].get<int>();
    if (a.contains("rel_descent_tol")) c.algorithm.rel_descent_tol = a["rel_descent_tol"].get<double>();
    if (a.contains("solver_tol")) c.algorithm.solver_tol = a["solver_tol"].get<double>();
    if (a.contains("rescale_psi_rows")) c.algorithm.rescale_psi_rows = a["rescale_psi_rows"].get<bool>();
  }
  if (j.contains("verify")) {
    const auto& v = j["verify"];
    if (v.contains("omega_points")) c.verify.omega_points = v["omega_points"].get<int>();
    if (v.contains("validation_samples"))
      c.verify.validation_samples = v["validation_samples"].get<int>();
  }
  if (j.contains("compare")) {
    const auto& v = j["compare"];
    if (v.contains("samples")) c.compare.samples = v["samples"].get<int>();
    if (v.contains("amplitude")) c.compare.amplitude = v["amplitude"].get<double>();
    if (v.contains("omega")) c.compare.omega = v["omega"].get<double>();
  }
  c.validate();
  return c;
}

nlohmann::json RunConfig::to_json() const {
  nlohmann::json j;
  j["system"] = system;
  j["dt"] = dt;
  j["samples"] = samples;
  j["x0"] = x0;
  j["input"] = {{"kind", input.kind}, {"lo", input.lo},       {"hi", input.hi},
                {"amplitude", input.amplitude}, {"omega", input.omega}, {"seed", input.seed}};
  j["dictionary"] = {{"num_centers", dictionary.num_centers},
                     {"seed", dictionary.seed},
                     {"box_lo", dictionary.box_lo},
                     {"box_hi", dictionary.box_hi}};
  j["supply_rate"] = {{"xi11", io::matrix_to_json(xi11)},
                      {"xi12", io::matrix_to_json(xi12)},
                      {"xi22", io::matrix_to_json(xi22)}};
  j["algorithm"] = {{"epsilon_margin", algorithm.epsilon_margin},
                    {"max_iterations", algorithm.max_iterations},
                    {"rel_descent_tol", algorithm.rel_descent_tol},
                    {"solver_tol", algorithm.solver_tol},
                    {"rescale_psi_rows", algorithm.rescale_psi_rows}};
  j["verify"] = {{"omega_points", verify.omega_points},
                 {"validation_samples", verify.validation_samples}};
  j["compare"] = {{"samples", compare.samples},
                  {"amplitude", compare.amplitude},
                  {"omega", compare.omega}};
  return j;
}

RunConfig RunConfig::load(const std::string& path) { return from_json(io::read_json(path)); }

FitMode fit_mode_from_string(const std::string& s) {
  if (s == "constrained") return FitMode::Constrained;
  if (s == "unconstrained") return FitMode::Unconstrained;
  if (s == "linear_constrained") return FitMode::LinearConstrained;
  throw Error("unknown fit mode '" + s +
              "' (expected constrained, unconstrained, or linear_constrained)");
}

std::string to_string(FitMode mode) {
  switch (mode) {
    case FitMode::Constrained: return "constrained";
    case FitMode::Unconstrained: return "unconstrained";
    case FitMode::LinearConstrained: return "linear_constrained";
  }
  return "unknown";
}

namespace {

std::vector<Eigen::VectorXd> make_inputs(const RunConfig& config, const System& sys, int samples,
                                         std::uint64_t seed) {
  InputParams params;
  params.lo = config.input.lo;
  params.hi = config.input.hi;
  params.amplitude = config.input.amplitude;
  params.omega = config.input.omega;
  params.dt = config.dt;
  params.dim = sys.input_dim;
  return generate_input(input_kind_from_string(config.input.kind), params, samples, seed);
}

Eigen::VectorXd config_x0(const RunConfig& config) {
  return Eigen::Map<const Eigen::VectorXd>(config.x0.data(), config.x0.size());
}

TrajectoryDataset simulate_from_config(const RunConfig& config, int samples, std::uint64_t seed) {
  const System sys = config.make_system();
  auto inputs = make_inputs(config, sys, samples, seed);
  TrajectoryDataset ds = simulate(sys, config_x0(config), inputs, config.dt);
  ds.input_kind = config.input.kind;
  ds.seed = seed;
  return ds;
}

}  // namespace

void cmd_simulate(const RunConfig& config, const std::string& out_csv) {
  config.validate();
  TrajectoryDataset ds = simulate_from_config(config, config.samples, config.input.seed);
  io::write_trajectory_csv(out_csv, ds);

  nlohmann::json meta;
  meta["config"] = config.to_json();
  meta["rng_algorithm"] = Rng::kAlgorithm;
  if (config.system == "benchmark") {
    meta["equations"] = "dx1 = x2; dx2 = -2*x2 + x1*cos(x1 + x2) + u; y = x2 (rk4, zero-order hold)";
  }
  io::write_json(out_csv + ".meta.json", meta);
  std::cout << "wrote " << out_csv << " (" << ds.num_steps() << " samples)\n";
}

void cmd_fit(const std::string& trajectory_csv, const RunConfig& config, FitMode mode,
             const std::string& out_model_json) {
  config.validate();
  const TrajectoryDataset ds = io::read_trajectory_csv(trajectory_csv);
  const int n = static_cast<int>(ds.states[0].size());

  const LiftingDictionary dict =
      (mode == FitMode::LinearConstrained)
          ? LiftingDictionary::identity(n)
          : sample_dictionary(n, config.dictionary.num_centers, config.dictionary.seed,
                              config.dictionary.box_lo, config.dictionary.box_hi);
  const DataMatrices dm = assemble(ds, dict);
  KoopmanModel unconstrained = [&] {
    try {
      return fit_unconstrained(dm, dict);
    } catch (const RankDeficiencyError& e) {
      throw Error(std::string(e.what()) +
                  "\nhint: the lifted data does not excite every feature; use fewer dictionary "
                  "centers, a different center seed, or a longer/richer trajectory.");
    }
  }();

  nlohmann::json extra;
  extra["mode"] = to_string(mode);
  extra["training"] = {{"trajectory", trajectory_csv},
                       {"system", config.system},
                       {"dt", ds.dt},
                       {"samples", ds.num_steps()},
                       {"input", {{"kind", config.input.kind}, {"seed", config.input.seed}}}};

  if (mode == FitMode::Unconstrained) {
    extra["final_j1"] = j1(unconstrained.A, unconstrained.B, dm);
    extra["final_j2"] = j2(unconstrained.C, dm);
    io::write_model_json(out_model_json, unconstrained, extra);
    std::cout << "wrote " << out_model_json << " (unconstrained, J1 = "
              << fmt(extra["final_j1"].get<double>()) << ")\n";
    return;
  }

  const SupplyRate sr = config.supply_rate();
  try {
    const AlgorithmResult result = run_algorithm(dm, unconstrained.C, sr, config.algorithm, dict);
    const std::string log_path = strip_extension(out_model_json) + ".iterations.csv";
    io::write_iteration_log_csv(log_path, result.log);

    extra["final_j1"] = j1(result.model.A, result.model.B, dm);
    extra["final_j2"] = j2(result.model.C, dm);
    extra["supply_rate"] = io::supply_rate_to_json(sr);
    extra["iteration_log"] = log_path;
    extra["stop_reason"] = result.stop_reason;
    extra["iterations"] = result.log.back().iteration;
    io::write_model_json(out_model_json, result.model, extra);
    std::cout << "wrote " << out_model_json << " (" << to_string(mode) << ", "
              << result.log.back().iteration << " refinement iterations, J1 "
              << fmt(result.log.front().j1) << " -> " << fmt(result.log.back().j1)
              << " in solver coordinates)\n";
  } catch (const InfeasibleError& e) {
    throw InfeasibleError(std::string(e.what()) +
                          "\nhint: relax the supply rate (e.g. xi22 = -0.2) or lower "
                          "algorithm.epsilon_margin.");
  }
}

void cmd_verify(const std::string& model_json, const RunConfig& config,
                const std::string& out_report_json, const std::string& out_nyquist_csv) {
  config.validate();
  nlohmann::json stored;
  const KoopmanModel model = io::read_model_json(model_json, &stored);

  SupplyRate sr = config.supply_rate();
  if (stored.contains("supply_rate")) sr = io::supply_rate_from_json(stored["supply_rate"]);

  DissipativityReport report;

  // Fresh certificate search; the stored P is deliberately ignored.
  std::optional<Eigen::MatrixXd> fresh;
  conic::SolverOptions solver_opts;
  solver_opts.tol = config.algorithm.solver_tol;
  fresh = certify(model.A, model.B, model.C, sr, config.algorithm.epsilon_margin, solver_opts);
  Eigen::MatrixXd audit_p;
  if (fresh) {
    report.certificate = fresh;
    report.certificate_source = "fresh";
    audit_p = *fresh;
  } else if (model.certificate) {
    report.certificate_source = "stored";
    audit_p = *model.certificate;
    report.notes += "fresh certificate search is infeasible; stored P used for the LMI value. ";
  } else {
    report.certificate_source = "identity";
    audit_p = Eigen::MatrixXd::Identity(model.lifted_dim(), model.lifted_dim());
    report.notes += "no certificate exists; LMI value reported at P = I. ";
  }
  {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(
        lemma_lmi_lhs(audit_p, model.A, model.B, model.C, sr), Eigen::EigenvaluesOnly);
    report.lmi_eigmax = es.eigenvalues().maxCoeff();
  }

  // Frequency sweep (SISO only).
  try {
    const auto grid = default_frequency_grid(config.dt, config.verify.omega_points);
    report.sweep = frequency_sweep(model.A, model.B, model.C, grid, config.dt);
    report.frequency_margin = frequency_margin(model, sr, grid, config.dt);
  } catch (const Error& e) {
    report.notes += std::string("frequency check skipped: ") + e.what() + " ";
  }

  // Dissipation audit on a fresh validation trajectory, seeded differently
  // from training.
  if (fresh || model.certificate) {
    std::uint64_t training_seed = config.input.seed;
    if (stored.contains("training") && stored["training"].contains("input") &&
        stored["training"]["input"].contains("seed")) {
      training_seed = stored["training"]["input"]["seed"].get<std::uint64_t>();
    }
    RunConfig vcfg = config;
    vcfg.input.kind = "uniform_random";
    TrajectoryDataset val =
        simulate_from_config(vcfg, config.verify.validation_samples, training_seed + 1);
    report.trajectory_margin = trajectory_audit(model, audit_p, val, sr);
  } else {
    report.notes += "trajectory audit skipped: no certificate available. ";
  }

  io::write_json(out_report_json, io::report_to_json(report));
  if (!out_nyquist_csv.empty() && !report.sweep.empty()) {
    io::write_nyquist_csv(out_nyquist_csv, report.sweep);
  }
  std::cout << "wrote " << out_report_json << " (certificate: " << report.certificate_source;
  if (report.frequency_margin) std::cout << ", min Re G = " << fmt(*report.frequency_margin);
  if (report.trajectory_margin) std::cout << ", audit margin = " << fmt(*report.trajectory_margin);
  std::cout << ")\n";
}

void cmd_compare(const std::vector<std::string>& model_paths, const RunConfig& config,
                 const std::string& out_csv) {
  config.validate();
  if (model_paths.empty()) throw Error("compare: need at least one model");

  std::vector<KoopmanModel> models;
  std::vector<std::string> names;
  for (const auto& p : model_paths) {
    models.push_back(io::read_model_json(p));
    std::string name = file_stem(p);
    for (const auto& existing : names)
      if (existing == name) name += "_" + std::to_string(names.size());
    names.push_back(name);
  }

  const System sys = config.make_system();
  for (const auto& model : models) {
    if (model.dictionary.state_dim() != sys.state_dim || model.input_dim() != sys.input_dim) {
      throw DimensionError("compare: model dimensions do not match the system");
    }
    if (!model.dictionary.include_state()) {
      throw Error("compare: model dictionary does not expose the state (include_state=false)");
    }
  }

  // Shared sine test input.
  InputParams params;
  params.amplitude = config.compare.amplitude;
  params.omega = config.compare.omega;
  params.dt = config.dt;
  params.dim = sys.input_dim;
  const auto inputs = generate_input(InputKind::Sine, params, config.compare.samples, 0);

  const Eigen::VectorXd x0 = config_x0(config);
  const TrajectoryDataset truth = simulate(sys, x0, inputs, config.dt);

  std::vector<Prediction> preds;
  for (const auto& model : models) {
    preds.push_back(predict(model, model.dictionary.lift(x0), inputs));
  }

  const int n = sys.state_dim;
  std::ofstream out(out_csv);
  if (!out) throw Error("cannot open '" + out_csv + "' for writing");
  out << "k,t";
  for (int i = 1; i <= n; ++i) out << ",x" << i << "_true";
  out << ",y_true";
  for (const auto& name : names) {
    for (int i = 1; i <= n; ++i) out << ",x" << i << "_" << name;
    out << ",y_" << name;
  }
  out << "\n";

  const int M = truth.num_steps();
  std::vector<double> state_sq(models.size(), 0.0), output_sq(models.size(), 0.0);
  for (int k = 0; k < M; ++k) {
    out << k << "," << fmt(k * config.dt);
    for (int i = 0; i < n; ++i) out << "," << fmt(truth.states[k][i]);
    out << "," << fmt(truth.outputs[k][0]);
    for (std::size_t mi = 0; mi < models.size(); ++mi) {
      const Eigen::VectorXd xs = preds[mi].lifted[k].head(n);
      for (int i = 0; i < n; ++i) out << "," << fmt(xs[i]);
      out << "," << fmt(preds[mi].outputs[k][0]);
      state_sq[mi] += (xs - truth.states[k]).squaredNorm();
      output_sq[mi] += (preds[mi].outputs[k] - truth.outputs[k]).squaredNorm();
    }
    out << "\n";
  }

  nlohmann::json summary;
  summary["samples"] = M;
  summary["input"] = {{"kind", "sine"},
                      {"amplitude", config.compare.amplitude},
                      {"omega", config.compare.omega}};
  nlohmann::json per_model = nlohmann::json::array();
  for (std::size_t mi = 0; mi < models.size(); ++mi) {
    const double state_rms = std::sqrt(state_sq[mi] / (M * n));
    const double output_rms = std::sqrt(output_sq[mi] / M);
    per_model.push_back({{"model", model_paths[mi]},
                         {"name", names[mi]},
                         {"state_rms", state_rms},
                         {"output_rms", output_rms}});
    std::cout << names[mi] << ": state RMS " << fmt(state_rms) << ", output RMS "
              << fmt(output_rms) << "\n";
  }
  summary["models"] = std::move(per_model);
  io::write_json(strip_extension(out_csv) + ".summary.json", summary);
  std::cout << "wrote " << out_csv << "\n";
}

}  // namespace koopman::cli
