#pragma once

#include <array>
#include <limits>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "slip/regions.hpp"

namespace slip {

class NoPlanFound : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Ordered (alpha in degrees, repeat count) pairs.
class AngleSequence {
 public:
  AngleSequence() = default;
  explicit AngleSequence(std::vector<std::pair<double, int>> items);

  // "81.886^5,88.5,62.4" (exponent = repeat count).
  static AngleSequence parse(const std::string& text);
  static AngleSequence from_degrees(const std::vector<double>& per_step);

  const std::vector<std::pair<double, int>>& items() const { return items_; }
  std::vector<double> expand_deg() const;
  std::size_t size() const;

 private:
  std::vector<std::pair<double, int>> items_;
};

// 26-step, three-transition example sequence.
AngleSequence reference_transition_sequence();

struct PlanStep {
  double alpha_deg = 0.0;
  double alpha_rad = 0.0;
  GaitLabel realized = GaitLabel::W;
  SectionState after{};
  double section_energy = 0.0;    // integrated, J
  double landing_window_deg = std::numeric_limits<double>::quiet_NaN();  // to-gait window on transition steps
};

struct PlanResult {
  SectionState start{};
  std::vector<PlanStep> steps;
  std::vector<int> transitions;  // step index whose realized gait differs from the previous step's
  bool failed = false;           // replay hit a failing step
  std::string failure;           // reason when failed
  double max_energy_error = 0.0; // relative, over section crossings

  std::vector<double> alphas_deg() const;
  std::vector<std::pair<GaitLabel, GaitLabel>> transition_pairs() const;
};

// Applies apply_step for each expanded angle, stopping at the first failure.
PlanResult replay(const SectionState& start, const std::vector<double>& alphas_deg, const ModelParams& p,
                  const EnergyShell& shell, const IntegratorConfig& cfg);
PlanResult replay(const SectionState& start, const AngleSequence& seq, const ModelParams& p,
                  const EnergyShell& shell, const IntegratorConfig& cfg);

// Sweep results plus the per-gait viability fields the planner interpolates.
struct RegionSet {
  Mesh mesh;
  EnergyShell shell{};
  ModelParams params{};
  SweepData data;
  std::array<std::vector<Window>, kGaitCount> windows;
  std::array<FieldMap, kGaitCount> window_fields;

  double window_at(GaitLabel g, const SectionState& x) const;  // interpolated, 0 outside / invalid
};

RegionSet build_region_set(Mesh mesh, const ModelParams& p, const EnergyShell& shell, const AngleGrid& grid,
                           const SweepOptions& opts);

constexpr int kUnreachable = 1 << 20;

// Per vertex: the number of from-gait steps (by interpolated landing, taking
// the worst vertex of the landing triangle) before a vertex with a
// from -> to transition at delta_alpha_deg; kUnreachable if none within max_depth.
std::vector<int> transition_distance(const RegionSet& regions, GaitLabel from, GaitLabel to, double delta_alpha_deg,
                                     int max_depth = 40);

struct PlanOptions {
  double delta_alpha_deg = 2.0;
  // After max_dwell steps in a gait without a transition at delta_alpha, the
  // required landing window drops to min_delta_alpha_deg (0 = one angle).
  double min_delta_alpha_deg = 0.0;
  int min_dwell = 3;       // steps in a gait before a transition is tried
  int max_dwell = 8;
  int final_dwell = 5;     // steps kept in the last itinerary gait
  int min_total_steps = 20;
  int max_steps = 80;
  IntegratorConfig integrator{};
};

// Greedy planner: inside gait i pick the grid angle whose landing point has
// the largest interpolated window, take a transition as soon as a gait-i step
// lands where the next itinerary gait's window reaches the threshold (checked
// also by direct simulation of the landing point). The result is verified by
// an independent replay. Throws NoPlanFound.
PlanResult plan_transitions(const SectionState& start, const std::vector<GaitLabel>& itinerary,
                            const RegionSet& regions, const PlanOptions& opts);

struct PlanSearch {
  PlanResult plan;
  std::size_t start_vertex = 0;
  int candidates_tried = 0;
};

// plan_transitions from mesh vertices, best first-gait stability first.
PlanSearch search_plan(const std::vector<GaitLabel>& itinerary, const RegionSet& regions, const PlanOptions& opts,
                       int max_candidates = 200);

struct ReplaySearch {
  bool success = false;  // >= min_steps completed and >= min_transitions
  PlanResult best;
  int candidates = 0;    // start states evaluated
  int refine_rounds = 0;
};

// Start-state search for a fixed angle sequence: all mesh vertices, then
// local refinement around the best (most steps, then most transitions).
ReplaySearch search_replay_start(const AngleSequence& seq, const Mesh& mesh, const ModelParams& p,
                                 const EnergyShell& shell, const IntegratorConfig& cfg, int min_steps = 20,
                                 int min_transitions = 2, int refine_rounds = 6);

// Continuous trajectory samples for a sequence of steps from start.
std::vector<TrajectorySample> plan_trajectory(const PlanResult& plan, const ModelParams& p, const EnergyShell& shell,
                                              const IntegratorConfig& cfg, double sample_dt = 0.005);

}  // namespace slip
