#include "slip/io.hpp"

#include <algorithm>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <sstream>

namespace slip {

using nlohmann::json;

namespace {

constexpr double kDeg = std::numbers::pi / 180.0;

double number_field(const json& j, const char* key, double fallback) {
  if (!j.contains(key)) return fallback;
  const json& v = j.at(key);
  if (!v.is_number()) throw ConfigError(std::string("params: '") + key + "' must be a number");
  return v.get<double>();
}

std::string field(double v) { return std::isfinite(v) ? format_double(v) : std::string(); }

}  // namespace

ModelParams params_from_json(const json& j) {
  if (!j.is_object()) throw ConfigError("params: expected a JSON object");
  static const char* known[] = {"mass_kg", "stiffness_N_per_m", "rest_length_m", "gravity_m_per_s2"};
  for (const auto& [key, _] : j.items()) {
    bool ok = false;
    for (const char* k : known) ok |= key == k;
    if (!ok) throw ConfigError("params: unknown key '" + key + "'");
  }
  ModelParams p;
  p.m = number_field(j, "mass_kg", p.m);
  p.k = number_field(j, "stiffness_N_per_m", p.k);
  p.r0 = number_field(j, "rest_length_m", p.r0);
  p.g = number_field(j, "gravity_m_per_s2", p.g);
  try {
    p.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("params: ") + e.what());
  }
  return p;
}

ModelParams load_params(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("params: cannot open " + path);
  json j;
  try {
    f >> j;
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("params: malformed JSON in ") + path + ": " + e.what());
  }
  return params_from_json(j);
}

json params_to_json(const ModelParams& p) {
  return {{"mass_kg", p.m}, {"stiffness_N_per_m", p.k}, {"rest_length_m", p.r0}, {"gravity_m_per_s2", p.g}};
}

json shell_to_json(const EnergyShell& s) {
  return {{"energy_J", s.E}, {"L_m", s.L}, {"omega_per_s", s.omega}, {"r_center_m", s.r_center}};
}

json grid_to_json(const AngleGrid& g) {
  return {{"alpha_min_deg", g.alpha_min_deg},
          {"alpha_max_deg", g.alpha_max_deg},
          {"alpha_min_rad", g.alpha_min_deg * kDeg},
          {"alpha_max_rad", g.alpha_max_deg * kDeg},
          {"count", g.count},
          {"spacing_deg", g.spacing_deg()}};
}

std::string checksum_hex(std::uint64_t c) {
  char buf[20];
  std::snprintf(buf, sizeof buf, "%016" PRIx64, c);
  return buf;
}

json sweep_manifest(const ModelParams& p, const EnergyShell& shell, const AngleGrid& grid, int n_cap,
                    const Mesh& mesh) {
  return {{"tool_version", kToolVersion},
          {"params", params_to_json(p)},
          {"shell", shell_to_json(shell)},
          {"grid", grid_to_json(grid)},
          {"n_cap", n_cap},
          {"mesh", {{"vertices", mesh.vertex_count()}, {"triangles", mesh.triangle_count()}, {"checksum", checksum_hex(mesh.checksum())}}}};
}

void write_trajectory_csv(const std::string& path, const std::vector<TrajectorySample>& samples) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write " + path);
  f << "t_s,chart,x_m,y_m,vx_m_s,vy_m_s,front_foot_x_m,back_foot_x_m,marker\n";
  for (const auto& s : samples) {
    f << format_double(s.t) << ',' << chart_name(s.chart) << ',' << format_double(s.x) << ',' << format_double(s.y)
      << ',' << format_double(s.vx) << ',' << format_double(s.vy) << ',' << field(s.front_foot_x) << ','
      << field(s.back_foot_x) << ',' << s.marker << '\n';
  }
}

void write_field_csv(const std::string& path, const FieldMap& fm, const std::vector<std::string>& names) {
  if (static_cast<int>(names.size()) != fm.components) throw std::invalid_argument("write_field_csv: name count");
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write " + path);
  f << "vertex_id";
  for (const auto& n : names) f << ',' << n;
  f << '\n';
  for (std::size_t v = 0; v < fm.vertex_count(); ++v) {
    f << v;
    for (int c = 0; c < fm.components; ++c) f << ',' << (fm.valid[v] ? format_double(fm.at(v, c)) : std::string());
    f << '\n';
  }
}

FieldMap read_field_csv(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot read " + path);
  std::string line;
  if (!std::getline(f, line)) throw std::runtime_error("empty field CSV " + path);
  const int comps = static_cast<int>(std::count(line.begin(), line.end(), ','));
  if (comps < 1) throw std::runtime_error("field CSV needs at least one value column");
  std::vector<std::vector<std::string>> rows;
  while (std::getline(f, line)) {
    if (line.empty()) continue;
    std::vector<std::string> cols;
    std::string cur;
    std::stringstream ss(line);
    while (std::getline(ss, cur, ',')) cols.push_back(cur);
    while (static_cast<int>(cols.size()) < comps + 1) cols.emplace_back();
    rows.push_back(std::move(cols));
  }
  FieldMap fm(rows.size(), comps);
  for (std::size_t v = 0; v < rows.size(); ++v) {
    if (std::stoull(rows[v][0]) != v) throw std::runtime_error("field CSV vertex ids must be 0..n-1 in order");
    bool valid = true;
    for (int c = 0; c < comps; ++c) {
      const std::string& s = rows[v][static_cast<std::size_t>(c) + 1];
      if (s.empty()) {
        valid = false;
        continue;
      }
      fm.set(v, c, std::stod(s));
    }
    fm.valid[v] = valid;
  }
  return fm;
}

json plan_to_json(const PlanResult& plan, const EnergyShell& shell) {
  json steps = json::array();
  for (const auto& s : plan.steps) {
    json st = {{"alpha_deg", s.alpha_deg},
               {"alpha_rad", s.alpha_rad},
               {"gait", gait_name(s.realized)},
               {"r_m", s.after.r},
               {"vy_m_s", s.after.vy},
               {"section_energy_J", s.section_energy}};
    if (std::isfinite(s.landing_window_deg)) st["landing_window_deg"] = s.landing_window_deg;
    steps.push_back(st);
  }
  json pairs = json::array();
  for (const auto& [a, b] : plan.transition_pairs()) pairs.push_back(std::string(gait_name(a)) + "->" + gait_name(b));
  json alphas_deg = json::array(), alphas_rad = json::array();
  for (const auto& s : plan.steps) {
    alphas_deg.push_back(s.alpha_deg);
    alphas_rad.push_back(s.alpha_rad);
  }
  json out = {{"tool_version", kToolVersion},
              {"energy_J", shell.E},
              {"start", {{"r_m", plan.start.r}, {"vy_m_s", plan.start.vy}}},
              {"alphas_deg", alphas_deg},
              {"alphas_rad", alphas_rad},
              {"steps", steps},
              {"transitions", plan.transitions},
              {"transition_pairs", pairs},
              {"max_energy_error", plan.max_energy_error},
              {"failed", plan.failed}};
  if (plan.failed) out["failure"] = plan.failure;
  return out;
}

void write_json(const std::string& path, const json& j) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write " + path);
  f << j.dump(2) << '\n';
}

}  // namespace slip
