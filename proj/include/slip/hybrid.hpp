#pragma once

#include <optional>
#include <string>
#include <vector>

#include "slip/dynamics.hpp"
#include "slip/integrator.hpp"
#include "slip/section.hpp"

namespace slip {

// Gait realized by one section-to-section step.
//   R:  the step passed through flight.
//   GR: double stance entered with the front-leg spring extending (rdot > 0).
//   W:  double stance entered with rdot <= 0.
enum class GaitLabel { R, GR, W };

enum class FailureReason { Fell, Backward, ForbiddenTransition, NoEvent };

enum class StepOutcome { Success, Failure, WrongGait };

enum class EventKind { Takeoff, Touchdown, DoubleTouchdown, BackTakeoff, Section, Failure };

const char* gait_name(GaitLabel g);
std::optional<GaitLabel> parse_gait(const std::string& s);
const char* failure_name(FailureReason r);
const char* event_name(EventKind k);

// ---- event residuals -------------------------------------------------------

// Stance -> flight when the spring returns to rest length (rising).
double event_takeoff(const StanceState& s, double r0);

// Flight -> stance when the mass descends to the height at which the leg can
// be placed at rest length with angle alpha (falling, armed while vy < 0).
double event_touchdown(const FlightState& f, double alpha, double r0);
bool touchdown_armed(const FlightState& f);

// Single -> double stance, same height condition with the mass tilted
// forward past the vertical (falling, armed while theta > pi/2).
double event_double_touchdown(const StanceState& s, double alpha, double r0);
bool double_touchdown_armed(const StanceState& s);

// Double -> single stance when the back spring returns to rest length (rising).
double event_back_takeoff(const DoubleState& d, double r0);

// Relabel a single-stance state as double stance with the new front leg at
// rest length and angle alpha. The mass position and velocity are unchanged.
DoubleState switch_s_to_d(const StanceState& s, double alpha, double r0);

// Single stance starting at touchdown (r = r0, theta = alpha) from a flight
// state whose foot will be placed at mass_x + r0 cos(alpha).
StanceState switch_ff_to_s(const FlightState& f, double alpha, double r0);

// ---- one step of the gait maps ----------------------------------------------

struct EventRecord {
  double t = 0.0;
  EventKind kind = EventKind::Section;
  Chart from = Chart::Single;
  Chart to = Chart::Single;
  double residual = 0.0;
  double energy_before = 0.0;
  double energy_after = 0.0;
  double rdot = 0.0;       // radial speed of the stance leg at the event
  double back_leg = 0.0;   // back leg length at s->d (0 otherwise)
};

struct TrajectorySample {
  double t = 0.0;
  Chart chart = Chart::Single;
  double x = 0.0;
  double y = 0.0;
  double vx = 0.0;
  double vy = 0.0;
  double front_foot_x = 0.0;   // NaN in flight
  double back_foot_x = 0.0;    // NaN unless in double stance
  std::string marker;          // event name at switch instants, empty otherwise
};

struct StepOptions {
  IntegratorConfig integrator{};
  bool record_trajectory = false;
  double sample_dt = 0.005;   // s
  double t0 = 0.0;            // absolute start time for exported samples
  double foot_x = 0.0;        // absolute position of the initial stance foot
};

struct StepSummary {
  double duration = 0.0;
  double section_energy = 0.0;        // integrated energy at the closing section crossing
  double section_vx = 0.0;            // integrated vx at the closing section crossing
  double max_switch_energy_jump = 0.0;  // relative, over all chart switches
  double max_event_residual = 0.0;
  double end_foot_x = 0.0;            // absolute stance foot at the end of the step
  double min_vx = 0.0;
  std::vector<EventRecord> events;
  std::vector<TrajectorySample> samples;
};

struct StepResult {
  StepOutcome outcome = StepOutcome::Failure;
  SectionState next{};
  GaitLabel realized = GaitLabel::R;
  bool has_realized = false;           // set once the branch event fired
  FailureReason reason = FailureReason::Fell;
  Chart failed_chart = Chart::Single;
  StepSummary summary;

  bool ok() const { return outcome == StepOutcome::Success; }
};

// Integrate from the section (single stance, leg vertical) with angle of
// attack alpha (rad) until the next section crossing in single stance.
// Failures are reported in the result, never thrown.
StepResult apply_step(const SectionState& x, double alpha, const ModelParams& p, const EnergyShell& shell,
                      const StepOptions& opts);
StepResult apply_step(const SectionState& x, double alpha, const ModelParams& p, const EnergyShell& shell,
                      const IntegratorConfig& cfg);

// apply_step that additionally demands the realized gait; a successful step
// of another gait comes back as WrongGait.
StepResult gait_map(const SectionState& x, double alpha, GaitLabel requested, const ModelParams& p,
                    const EnergyShell& shell, const StepOptions& opts);
StepResult gait_map(const SectionState& x, double alpha, GaitLabel requested, const ModelParams& p,
                    const EnergyShell& shell, const IntegratorConfig& cfg);

}  // namespace slip
