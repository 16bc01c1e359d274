#include "koopman/serialize.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

namespace koopman::io {

namespace {

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> tokens;
  std::string cur;
  for (char ch : line) {
    if (ch == ',') {
      tokens.push_back(cur);
      cur.clear();
    } else if (ch != '\r') {
      cur += ch;
    }
  }
  tokens.push_back(cur);
  return tokens;
}

int count_prefixed(const std::vector<std::string>& header, const std::string& prefix) {
  int n = 0;
  for (const auto& h : header)
    if (h.rfind(prefix, 0) == 0) ++n;
  return n;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot open '" + path + "' for writing");
  return out;
}

}  // namespace

nlohmann::json matrix_to_json(const Eigen::MatrixXd& m) {
  nlohmann::json rows = nlohmann::json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    nlohmann::json row = nlohmann::json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

Eigen::MatrixXd matrix_from_json(const nlohmann::json& j) {
  if (!j.is_array()) throw Error("matrix JSON must be an array of rows");
  const auto rows = j.size();
  if (rows == 0) return Eigen::MatrixXd(0, 0);
  const auto cols = j[0].size();
  Eigen::MatrixXd m(rows, cols);
  for (std::size_t i = 0; i < rows; ++i) {
    if (j[i].size() != cols) throw Error("matrix JSON has ragged rows");
    for (std::size_t c = 0; c < cols; ++c) m(i, c) = j[i][c].get<double>();
  }
  return m;
}

nlohmann::json vector_to_json(const Eigen::VectorXd& v) {
  nlohmann::json arr = nlohmann::json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back(v[i]);
  return arr;
}

Eigen::VectorXd vector_from_json(const nlohmann::json& j) {
  Eigen::VectorXd v(j.size());
  for (std::size_t i = 0; i < j.size(); ++i) v[i] = j[i].get<double>();
  return v;
}

void write_json(const std::string& path, const nlohmann::json& j) {
  auto out = open_out(path);
  out << j.dump(2) << "\n";
}

nlohmann::json read_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open '" + path + "'");
  nlohmann::json j;
  in >> j;
  return j;
}

void write_trajectory_csv(const std::string& path, const TrajectoryDataset& ds) {
  ds.validate();
  const int n = static_cast<int>(ds.states[0].size());
  const int m = static_cast<int>(ds.inputs.empty() ? 0 : ds.inputs[0].size());
  const int l = static_cast<int>(ds.outputs.empty() ? 0 : ds.outputs[0].size());
  auto out = open_out(path);

  out << "k,t";
  for (int i = 1; i <= n; ++i) out << ",x_" << i;
  for (int i = 1; i <= m; ++i) out << ",u_" << i;
  for (int i = 1; i <= l; ++i) out << ",y_" << i;
  out << "\n";

  const int M = ds.num_steps();
  for (int k = 0; k <= M; ++k) {
    out << k << "," << fmt(k * ds.dt);
    for (int i = 0; i < n; ++i) out << "," << fmt(ds.states[k][i]);
    if (k < M) {
      for (int i = 0; i < m; ++i) out << "," << fmt(ds.inputs[k][i]);
      for (int i = 0; i < l; ++i) out << "," << fmt(ds.outputs[k][i]);
    } else {
      for (int i = 0; i < m + l; ++i) out << ",";
    }
    out << "\n";
  }
}

TrajectoryDataset read_trajectory_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open '" + path + "'");
  std::string line;
  if (!std::getline(in, line)) throw Error("trajectory CSV '" + path + "' is empty");
  const auto header = split_csv_line(line);
  const int n = count_prefixed(header, "x_");
  const int m = count_prefixed(header, "u_");
  const int l = count_prefixed(header, "y_");
  if (header.size() < 2 || header[0] != "k" || header[1] != "t" || n == 0) {
    throw Error("trajectory CSV '" + path + "' has an invalid header");
  }

  TrajectoryDataset ds;
  std::vector<double> times;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto tok = split_csv_line(line);
    if (static_cast<int>(tok.size()) != 2 + n + m + l) {
      throw Error("trajectory CSV row has " + std::to_string(tok.size()) + " fields, expected " +
                  std::to_string(2 + n + m + l));
    }
    times.push_back(std::stod(tok[1]));
    Eigen::VectorXd x(n);
    for (int i = 0; i < n; ++i) x[i] = std::stod(tok[2 + i]);
    ds.states.push_back(std::move(x));
    const bool has_u = !tok[2 + n].empty();
    if (has_u) {
      Eigen::VectorXd u(m), y(l);
      for (int i = 0; i < m; ++i) u[i] = std::stod(tok[2 + n + i]);
      for (int i = 0; i < l; ++i) y[i] = std::stod(tok[2 + n + m + i]);
      ds.inputs.push_back(std::move(u));
      ds.outputs.push_back(std::move(y));
    }
  }
  if (times.size() < 2) throw Error("trajectory CSV '" + path + "' has fewer than 2 samples");
  ds.dt = times[1] - times[0];
  ds.validate();
  return ds;
}

nlohmann::json dictionary_to_json(const LiftingDictionary& dict) {
  nlohmann::json j;
  j["state_dim"] = dict.state_dim();
  j["include_state"] = dict.include_state();
  nlohmann::json centers = nlohmann::json::array();
  for (const auto& r : dict.centers()) centers.push_back(vector_to_json(r));
  j["centers"] = std::move(centers);
  if (dict.rng_metadata) {
    j["rng"] = {{"algorithm", dict.rng_metadata->algorithm},
                {"seed", dict.rng_metadata->seed},
                {"box_lo", dict.rng_metadata->box_lo},
                {"box_hi", dict.rng_metadata->box_hi}};
  }
  return j;
}

LiftingDictionary dictionary_from_json(const nlohmann::json& j) {
  std::vector<Eigen::VectorXd> centers;
  for (const auto& row : j.at("centers")) centers.push_back(vector_from_json(row));
  LiftingDictionary dict(j.at("state_dim").get<int>(), j.at("include_state").get<bool>(),
                         std::move(centers));
  if (j.contains("rng")) {
    const auto& r = j["rng"];
    dict.rng_metadata = CenterRngMetadata{r.at("algorithm").get<std::string>(),
                                          r.at("seed").get<std::uint64_t>(),
                                          r.at("box_lo").get<double>(),
                                          r.at("box_hi").get<double>()};
  }
  return dict;
}

nlohmann::json supply_rate_to_json(const SupplyRate& sr) {
  return {{"xi11", matrix_to_json(sr.xi11)},
          {"xi12", matrix_to_json(sr.xi12)},
          {"xi22", matrix_to_json(sr.xi22)}};
}

SupplyRate supply_rate_from_json(const nlohmann::json& j) {
  return SupplyRate(matrix_from_json(j.at("xi11")), matrix_from_json(j.at("xi12")),
                    matrix_from_json(j.at("xi22")));
}

void write_model_json(const std::string& path, const KoopmanModel& model,
                      const nlohmann::json& extra) {
  model.validate();
  nlohmann::json j = extra;
  j["schema_version"] = kModelSchemaVersion;
  j["A"] = matrix_to_json(model.A);
  j["B"] = matrix_to_json(model.B);
  j["C"] = matrix_to_json(model.C);
  if (model.certificate) j["P"] = matrix_to_json(*model.certificate);
  j["dictionary"] = dictionary_to_json(model.dictionary);
  write_json(path, j);
}

KoopmanModel read_model_json(const std::string& path, nlohmann::json* full) {
  const nlohmann::json j = read_json(path);
  if (!j.contains("schema_version") || j["schema_version"].get<int>() != kModelSchemaVersion) {
    throw Error("model '" + path + "': unknown schema_version (expected " +
                std::to_string(kModelSchemaVersion) + ")");
  }
  KoopmanModel model;
  model.A = matrix_from_json(j.at("A"));
  model.B = matrix_from_json(j.at("B"));
  model.C = matrix_from_json(j.at("C"));
  model.dictionary = dictionary_from_json(j.at("dictionary"));
  if (j.contains("P")) model.certificate = matrix_from_json(j["P"]);
  model.validate();
  if (full) *full = j;
  return model;
}

void write_iteration_log_csv(const std::string& path, const std::vector<IterationRecord>& log) {
  auto out = open_out(path);
  out << "iteration,j1,lmi_margin,eigmin_P,eigmin_HplusHT,solver_status\n";
  for (const auto& rec : log) {
    out << rec.iteration << "," << fmt(rec.j1) << "," << fmt(rec.lmi_margin) << ","
        << fmt(rec.eigmin_P) << "," << fmt(rec.eigmin_H_sym) << "," << rec.solver_status << "\n";
  }
}

void write_nyquist_csv(const std::string& path, const std::vector<FrequencyPoint>& sweep) {
  auto out = open_out(path);
  out << "omega,re_g,im_g\n";
  for (const auto& p : sweep) {
    out << fmt(p.omega) << "," << fmt(p.g.real()) << "," << fmt(p.g.imag()) << "\n";
  }
}

nlohmann::json report_to_json(const DissipativityReport& report) {
  nlohmann::json j;
  j["schema_version"] = kReportSchemaVersion;
  j["lmi_eigmax"] = report.lmi_eigmax;
  j["certificate_source"] = report.certificate_source;
  if (report.certificate) j["certificate"] = matrix_to_json(*report.certificate);
  if (report.frequency_margin) j["frequency_margin"] = *report.frequency_margin;
  if (report.trajectory_margin) j["trajectory_margin"] = *report.trajectory_margin;
  if (!report.notes.empty()) j["notes"] = report.notes;
  nlohmann::json omega = nlohmann::json::array(), re = nlohmann::json::array(),
                 im = nlohmann::json::array();
  for (const auto& p : report.sweep) {
    omega.push_back(p.omega);
    re.push_back(p.g.real());
    im.push_back(p.g.imag());
  }
  j["grid"] = {{"omega", std::move(omega)}, {"re", std::move(re)}, {"im", std::move(im)}};
  return j;
}

}  // namespace koopman::io
