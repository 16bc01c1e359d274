#pragma once

#include <Eigen/Core>
#include <string>
#include <vector>

#include <json.hpp>

#include "koopman/dissipativity.hpp"
#include "koopman/dynsim.hpp"
#include "koopman/edmd.hpp"
#include "koopman/sequential.hpp"

namespace koopman::io {

inline constexpr int kModelSchemaVersion = 1;
inline constexpr int kReportSchemaVersion = 1;

/// Matrices serialize as row-major nested arrays; all floating point is
/// written with full round-trip precision.
nlohmann::json matrix_to_json(const Eigen::MatrixXd& m);
Eigen::MatrixXd matrix_from_json(const nlohmann::json& j);
nlohmann::json vector_to_json(const Eigen::VectorXd& v);
Eigen::VectorXd vector_from_json(const nlohmann::json& j);

void write_json(const std::string& path, const nlohmann::json& j);
nlohmann::json read_json(const std::string& path);

/// CSV row per sample k: `k, t, x_1..x_n, u_1..u_m, y_1..y_l`, header
/// required; the final row carries the terminal state with empty u/y.
void write_trajectory_csv(const std::string& path, const TrajectoryDataset& ds);
TrajectoryDataset read_trajectory_csv(const std::string& path);

nlohmann::json dictionary_to_json(const LiftingDictionary& dict);
LiftingDictionary dictionary_from_json(const nlohmann::json& j);

nlohmann::json supply_rate_to_json(const SupplyRate& sr);
SupplyRate supply_rate_from_json(const nlohmann::json& j);

/// `extra` entries are merged into the model object (mode, final_j1,
/// training metadata, iteration_log path, supply_rate, ...).
void write_model_json(const std::string& path, const KoopmanModel& model,
                      const nlohmann::json& extra = nlohmann::json::object());
/// Rejects unknown schema versions. When `full` is given, the entire JSON
/// object is copied there so callers can read the extra entries.
KoopmanModel read_model_json(const std::string& path, nlohmann::json* full = nullptr);

void write_iteration_log_csv(const std::string& path, const std::vector<IterationRecord>& log);
void write_nyquist_csv(const std::string& path, const std::vector<FrequencyPoint>& sweep);

nlohmann::json report_to_json(const DissipativityReport& report);

}  // namespace koopman::io
