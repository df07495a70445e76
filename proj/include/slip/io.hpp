#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"
#include "slip/planner.hpp"

namespace slip {

inline constexpr const char* kToolVersion = "1.0.0";

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Keys: mass_kg, stiffness_N_per_m, rest_length_m, gravity_m_per_s2. Missing
// keys keep the defaults; unknown keys, wrong types or invalid values throw ConfigError.
ModelParams params_from_json(const nlohmann::json& j);
ModelParams load_params(const std::string& path);
nlohmann::json params_to_json(const ModelParams& p);

nlohmann::json shell_to_json(const EnergyShell& s);
nlohmann::json grid_to_json(const AngleGrid& g);
std::string checksum_hex(std::uint64_t c);

// params, shell, grid, n_cap, mesh checksum, tool version.
nlohmann::json sweep_manifest(const ModelParams& p, const EnergyShell& shell, const AngleGrid& grid, int n_cap,
                              const Mesh& mesh);

// t_s,chart,x_m,y_m,vx_m_s,vy_m_s,front_foot_x_m,back_foot_x_m,marker
// (absent feet are empty fields).
void write_trajectory_csv(const std::string& path, const std::vector<TrajectorySample>& samples);

// vertex_id,<names...>; invalid vertices get empty value fields.
void write_field_csv(const std::string& path, const FieldMap& field, const std::vector<std::string>& names);
FieldMap read_field_csv(const std::string& path);

nlohmann::json plan_to_json(const PlanResult& plan, const EnergyShell& shell);

void write_json(const std::string& path, const nlohmann::json& j);

}  // namespace slip
