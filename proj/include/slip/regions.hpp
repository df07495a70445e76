#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "slip/hybrid.hpp"
#include "slip/mesh.hpp"

namespace slip {

// Number of consecutive successful gait_map applications with fixed alpha,
// capped at n_cap. WrongGait ends the count.
int steps_to_failure(const SectionState& x, GaitLabel gait, double alpha, int n_cap, const ModelParams& p,
                     const EnergyShell& shell, const IntegratorConfig& cfg);

// Uniform grid including both endpoints, in degrees.
struct AngleGrid {
  double alpha_min_deg = 55.0;
  double alpha_max_deg = 90.0;
  int count = 100;

  void validate() const;
  double deg(int i) const;
  double rad(int i) const;
  double spacing_deg() const { return count > 1 ? (alpha_max_deg - alpha_min_deg) / (count - 1) : 0.0; }
};

struct SweepOptions {
  int n_cap = 25;
  int workers = 1;
  IntegratorConfig integrator{};

  void validate() const;
};

constexpr int kGaitCount = 3;
inline int gait_index(GaitLabel g) { return static_cast<int>(g); }

// Raw (vertex, angle) results. A step realizes at most one gait, so other
// gaits have zero steps at that angle; only the realized gait's CAAP run is
// continued to n_cap.
struct SweepData {
  AngleGrid grid;
  int n_cap = 25;
  std::size_t vertices = 0;
  std::vector<std::int8_t> first_gait;  // -1 on failure, else GaitLabel
  std::vector<std::uint8_t> steps;      // CAAP steps of first_gait
  std::vector<SectionState> next;       // state after the first step (valid when first_gait >= 0)

  std::size_t slot(std::size_t v, int a) const { return v * static_cast<std::size_t>(grid.count) + static_cast<std::size_t>(a); }
  bool success(std::size_t v, int a, GaitLabel g) const { return first_gait[slot(v, a)] == gait_index(g); }
  int steps_for(std::size_t v, int a, GaitLabel g) const { return success(v, a, g) ? steps[slot(v, a)] : 0; }
};

// Runs every (vertex, angle) pair. Workers take interleaved blocks of 16
// vertices and write only their own slots, so the result does not depend on
// the worker count.
SweepData sweep(const Mesh& mesh, const ModelParams& p, const EnergyShell& shell, const AngleGrid& grid,
                const SweepOptions& opts);

// Per-vertex max over the grid of steps to failure.
std::vector<int> finite_stability(const SweepData& d, GaitLabel gait);
// Steps to failure at one grid angle.
std::vector<int> stability_slice(const SweepData& d, GaitLabel gait, int angle_index);

struct Window {
  double width_deg = 0.0;
  int first = -1;  // grid indices of the longest contiguous successful run
  int last = -1;
};

// Longest contiguous run of successful angles, (count - 1) * spacing. Ties keep the lowest start.
std::vector<Window> viability(const SweepData& d, GaitLabel gait);
Window longest_window(const std::vector<std::uint8_t>& ok, const AngleGrid& grid);

struct OneStep {
  int angle_index = -1;
  double alpha_deg = 0.0;
  double vy_next = 0.0;  // m/s
};

std::vector<std::optional<OneStep>> one_step_to_stable(const SweepData& d, GaitLabel gait, double vy_tol = 1e-3);

struct Transition {
  int angle_index = -1;
  double alpha_deg = 0.0;
  SectionState landing{};
  double landing_window_deg = 0.0;  // interpolated to-gait window at the landing point
};

// Viability window as an interpolable field (all vertices valid).
FieldMap window_field(const std::vector<Window>& windows);

// For each vertex with at least one successful from-gait step, the grid angle
// whose landing point has the largest interpolated to-gait window, provided it
// reaches delta_alpha_deg.
std::vector<std::optional<Transition>> transitions(const SweepData& d, const Mesh& mesh, const EnergyShell& shell,
                                                   GaitLabel from, const std::vector<Window>& to_viability,
                                                   double delta_alpha_deg = 2.0);

// Next-state field (r_hat', vy_hat') of one gait at one grid angle, labelled
// by realized gait; vertices whose step fails are invalid.
FieldMap next_state_field(const SweepData& d, const EnergyShell& shell, int angle_index);

// Direct-simulation viability window for a single state.
Window direct_window(const SectionState& x, GaitLabel gait, const AngleGrid& grid, const ModelParams& p,
                     const EnergyShell& shell, const IntegratorConfig& cfg);

// CSV: vertex_id,r_m,vy_m_s,value with a header naming the value column.
void write_region_csv(const std::string& path, const Mesh& mesh, const EnergyShell& shell,
                      const std::string& value_name, const std::vector<std::string>& values);

std::string format_double(double v);

}  // namespace slip
