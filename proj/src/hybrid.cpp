#include "slip/hybrid.hpp"

#include <cmath>
#include <limits>
#include <numbers>

namespace slip {

namespace {

constexpr double kHalfPi = std::numbers::pi / 2.0;
const double kNaN = std::numeric_limits<double>::quiet_NaN();

double stance_vx(const Vec4& s) { return -s[2] * std::cos(s[1]) + s[0] * s[3] * std::sin(s[1]); }

double rel_jump(double a, double b) { return std::abs(a - b) / std::max(std::abs(a), 1e-300); }

// Mutable bookkeeping for one step.
class StepRun {
 public:
  StepRun(const ModelParams& p, double alpha, const StepOptions& opts)
      : p_(p), alpha_(alpha), opts_(opts), cfg_(opts.integrator), foot_x_(opts.foot_x), t_(opts.t0) {
    cfg_.keep_dense = opts.record_trajectory;
  }

  StepResult run(const StanceState& start);

 private:

  StepResult fail(FailureReason reason, Chart chart) {
    result_.outcome = StepOutcome::Failure;
    result_.reason = reason;
    result_.failed_chart = chart;
    EventRecord ev;
    ev.t = t_;
    ev.kind = EventKind::Failure;
    ev.from = ev.to = chart;
    result_.summary.events.push_back(ev);
    if (opts_.record_trajectory && !result_.summary.samples.empty()) {
      result_.summary.samples.back().marker = std::string("failure:") + failure_name(reason);
    }
    finish();
    return result_;
  }

  void finish() {
    result_.summary.duration = t_ - opts_.t0;
    result_.summary.end_foot_x = foot_x_;
  }

  void note_event(EventKind kind, Chart from, Chart to, double residual, double e_before, double e_after,
                  double rdot, double back = 0.0) {
    EventRecord ev{t_, kind, from, to, residual, e_before, e_after, rdot, back};
    auto& sum = result_.summary;
    sum.events.push_back(ev);
    sum.max_event_residual = std::max(sum.max_event_residual, std::abs(residual));
    if (from != to) sum.max_switch_energy_jump = std::max(sum.max_switch_energy_jump, rel_jump(e_before, e_after));
    if (opts_.record_trajectory && !sum.samples.empty()) sum.samples.back().marker = event_name(kind);
  }

  void track_vx(double vx) { result_.summary.min_vx = std::min(result_.summary.min_vx, vx); }

  template <std::size_t N, class ToCart>
  void sample_phase(const PhaseResult<N>& pr, Chart chart, double back_foot, ToCart&& to_cart) {
    if (!opts_.record_trajectory) return;
    auto& out = result_.summary.samples;
    auto push = [&](double t_local, const std::array<double, N>& s) {
      TrajectorySample ts;
      ts.t = t_ + (t_local - pr.t_start);
      ts.chart = chart;
      const FlightState c = to_cart(s);
      ts.x = c.x;
      ts.y = c.y;
      ts.vx = c.vx;
      ts.vy = c.vy;
      ts.front_foot_x = chart == Chart::Flight ? kNaN : foot_x_;
      ts.back_foot_x = back_foot;
      out.push_back(ts);
    };
    const double dt = opts_.sample_dt;
    push(pr.t_start, pr.state_start);
    for (double tl = pr.t_start + dt; tl < pr.t_event; tl += dt) push(tl, dense_eval(pr, tl));
    push(pr.t_event, pr.state_event);
  }

  FlightState stance_abs(const Vec4& s) const {
    FlightState c = stance_to_cartesian(stance_from(s));
    c.x += foot_x_;
    return c;
  }

  const ModelParams& p_;
  double alpha_;
  StepOptions opts_;
  IntegratorConfig cfg_;
  double foot_x_;
  double t_;
  StepResult result_;
};

StepResult StepRun::run(const StanceState& start) {
  const double r0 = p_.r0;
  const double sin_a = std::sin(alpha_);
  const double cos_a = std::cos(alpha_);
  auto stance_rhs = [this](double, const Vec4& s) { return detail::stance_rhs(s, p_); };
  auto flight_rhs = [this](double, const Vec4& s) { return flight_deriv(flight_from(s), p_); };
  auto double_rhs = [this](double, const Vec5& s) { return detail::double_rhs(s, p_); };
  auto stance_cart = [this](const Vec4& s) { return stance_abs(s); };

  result_.summary.min_vx = stance_to_cartesian(start).vx;

  // Phase 1: single stance from the section until takeoff or the second leg lands.
  const std::vector<EventSpec<4>> first_events{
      {[r0](double, const Vec4& s) { return s[0] - r0; }, Direction::Rising, {}},
      {[r0, sin_a](double, const Vec4& s) { return s[0] * std::sin(s[1]) - r0 * sin_a; }, Direction::Falling,
       [](const Vec4& s) { return s[1] > kHalfPi; }},
      {[](double, const Vec4& s) { return s[0] * std::sin(s[1]); }, Direction::Falling, {}},
      {[](double, const Vec4& s) { return stance_vx(s); }, Direction::Falling, {}},
  };
  const auto first = integrate_until_event<4>(stance_rhs, to_array(start), first_events, cfg_);
  sample_phase(first, Chart::Single, kNaN, stance_cart);
  t_ += first.t_event - first.t_start;
  if (first.status == PhaseStatus::NoEvent) return fail(FailureReason::NoEvent, Chart::Single);
  if (first.status == PhaseStatus::NonFinite || first.event_index == 2) return fail(FailureReason::Fell, Chart::Single);
  if (first.event_index == 3) return fail(FailureReason::Backward, Chart::Single);

  const StanceState s_branch = stance_from(first.state_event);
  const double e_branch = mechanical_energy(s_branch, p_);
  track_vx(stance_vx(first.state_event));

  StanceState s_final{};
  if (first.event_index == 0) {
    // ---- running: flight, then touchdown.
    result_.realized = GaitLabel::R;
    result_.has_realized = true;
    FlightState f = stance_abs(first.state_event);
    note_event(EventKind::Takeoff, Chart::Single, Chart::Flight, first.event_residual, e_branch,
               mechanical_energy(f, p_), s_branch.rdot);
    if (f.vx < 0.0) return fail(FailureReason::Backward, Chart::Flight);

    const std::vector<EventSpec<4>> flight_events{
        {[r0, sin_a](double, const Vec4& s) { return s[1] - r0 * sin_a; }, Direction::Falling,
         [](const Vec4& s) { return s[3] < 0.0; }},
        {[](double, const Vec4& s) { return s[1]; }, Direction::Falling, {}},
    };
    const auto fl = integrate_until_event<4>(flight_rhs, to_array(f), flight_events, cfg_);
    sample_phase(fl, Chart::Flight, kNaN, [](const Vec4& s) { return flight_from(s); });
    t_ += fl.t_event - fl.t_start;
    if (fl.status == PhaseStatus::NoEvent) return fail(FailureReason::NoEvent, Chart::Flight);
    if (fl.status == PhaseStatus::NonFinite || fl.event_index == 1) return fail(FailureReason::Fell, Chart::Flight);

    const FlightState f_td = flight_from(fl.state_event);
    foot_x_ = f_td.x + r0 * cos_a;
    s_final = switch_ff_to_s(f_td, alpha_, r0);
    note_event(EventKind::Touchdown, Chart::Flight, Chart::Single, fl.event_residual, mechanical_energy(f_td, p_),
               mechanical_energy(s_final, p_), s_final.rdot);
    if (s_final.rdot > 0.0) return fail(FailureReason::ForbiddenTransition, Chart::Single);
  } else {
    // ---- walking / grounded running: double stance, then back-leg takeoff.
    result_.realized = s_branch.rdot > 0.0 ? GaitLabel::GR : GaitLabel::W;
    result_.has_realized = true;
    const DoubleState d0 = switch_s_to_d(s_branch, alpha_, r0);
    const double back_foot = foot_x_;
    foot_x_ = back_foot + d0.x_sep;
    note_event(EventKind::DoubleTouchdown, Chart::Single, Chart::Double, first.event_residual, e_branch,
               mechanical_energy(d0, p_), s_branch.rdot, back_leg_length(d0));
    if (d0.rdot > 0.0 || !(d0.x_sep > 0.0)) return fail(FailureReason::ForbiddenTransition, Chart::Double);

    const std::vector<EventSpec<5>> double_events{
        {[r0](double, const Vec5& s) { return back_leg_length(s[0], s[1], s[4]) - r0; }, Direction::Rising, {}},
        {[r0](double, const Vec5& s) { return s[0] - r0; }, Direction::Rising, {}},
        {[](double, const Vec5& s) { return s[0] * std::sin(s[1]); }, Direction::Falling, {}},
        {[](double, const Vec5& s) { return -s[2] * std::cos(s[1]) + s[0] * s[3] * std::sin(s[1]); },
         Direction::Falling, {}},
    };
    const auto dp = integrate_until_event<5>(double_rhs, to_array(d0), double_events, cfg_);
    sample_phase(dp, Chart::Double, back_foot, [this](const Vec5& s) {
      FlightState c = stance_to_cartesian(StanceState{s[0], s[1], s[2], s[3]});
      c.x += foot_x_;
      return c;
    });
    t_ += dp.t_event - dp.t_start;
    if (dp.status == PhaseStatus::NoEvent) return fail(FailureReason::NoEvent, Chart::Double);
    if (dp.status == PhaseStatus::NonFinite || dp.event_index == 2) return fail(FailureReason::Fell, Chart::Double);
    if (dp.event_index == 3) return fail(FailureReason::Backward, Chart::Double);
    if (dp.event_index == 1) return fail(FailureReason::ForbiddenTransition, Chart::Double);

    const DoubleState d1 = double_from(dp.state_event);
    s_final = StanceState{d1.r, d1.theta, d1.rdot, d1.thetadot};
    track_vx(stance_vx(to_array(s_final)));
    note_event(EventKind::BackTakeoff, Chart::Double, Chart::Single, dp.event_residual, mechanical_energy(d1, p_),
               mechanical_energy(s_final, p_), d1.rdot);
    // The section must be crossed in single stance.
    if (s_final.theta >= kHalfPi) return fail(FailureReason::ForbiddenTransition, Chart::Single);
  }

  // Final phase: single stance until the leg is vertical again.
  const std::vector<EventSpec<4>> last_events{
      {[](double, const Vec4& s) { return s[1] - kHalfPi; }, Direction::Rising, {}},
      {[r0](double, const Vec4& s) { return s[0] - r0; }, Direction::Rising, {}},
      {[](double, const Vec4& s) { return s[0] * std::sin(s[1]); }, Direction::Falling, {}},
      {[](double, const Vec4& s) { return stance_vx(s); }, Direction::Falling, {}},
  };
  const auto last = integrate_until_event<4>(stance_rhs, to_array(s_final), last_events, cfg_);
  sample_phase(last, Chart::Single, kNaN, stance_cart);
  t_ += last.t_event - last.t_start;
  if (last.status == PhaseStatus::NoEvent) return fail(FailureReason::NoEvent, Chart::Single);
  if (last.status == PhaseStatus::NonFinite || last.event_index == 2) return fail(FailureReason::Fell, Chart::Single);
  if (last.event_index == 3) return fail(FailureReason::Backward, Chart::Single);
  if (last.event_index == 1) return fail(FailureReason::ForbiddenTransition, Chart::Single);

  const StanceState s_sec = stance_from(last.state_event);
  const double e_sec = mechanical_energy(s_sec, p_);
  note_event(EventKind::Section, Chart::Single, Chart::Single, last.event_residual, e_sec, e_sec, s_sec.rdot);
  result_.summary.section_energy = e_sec;
  result_.summary.section_vx = stance_to_cartesian(s_sec).vx;
  track_vx(result_.summary.section_vx);
  result_.next = SectionState{s_sec.r, s_sec.rdot};
  result_.outcome = StepOutcome::Success;
  finish();
  return result_;
}

}  // namespace

const char* gait_name(GaitLabel g) {
  switch (g) {
    case GaitLabel::R: return "R";
    case GaitLabel::GR: return "GR";
    case GaitLabel::W: return "W";
  }
  return "?";
}

std::optional<GaitLabel> parse_gait(const std::string& s) {
  if (s == "R") return GaitLabel::R;
  if (s == "GR") return GaitLabel::GR;
  if (s == "W") return GaitLabel::W;
  return std::nullopt;
}

const char* failure_name(FailureReason r) {
  switch (r) {
    case FailureReason::Fell: return "Fell";
    case FailureReason::Backward: return "Backward";
    case FailureReason::ForbiddenTransition: return "ForbiddenTransition";
    case FailureReason::NoEvent: return "NoEvent";
  }
  return "?";
}

const char* event_name(EventKind k) {
  switch (k) {
    case EventKind::Takeoff: return "takeoff";
    case EventKind::Touchdown: return "touchdown";
    case EventKind::DoubleTouchdown: return "double_touchdown";
    case EventKind::BackTakeoff: return "back_takeoff";
    case EventKind::Section: return "section";
    case EventKind::Failure: return "failure";
  }
  return "?";
}

double event_takeoff(const StanceState& s, double r0) { return s.r - r0; }

double event_touchdown(const FlightState& f, double alpha, double r0) { return f.y - r0 * std::sin(alpha); }

bool touchdown_armed(const FlightState& f) { return f.vy < 0.0; }

double event_double_touchdown(const StanceState& s, double alpha, double r0) {
  return s.r * std::sin(s.theta) - r0 * std::sin(alpha);
}

bool double_touchdown_armed(const StanceState& s) { return s.theta > kHalfPi; }

double event_back_takeoff(const DoubleState& d, double r0) { return back_leg_length(d) - r0; }

namespace {
// Polar velocity about a foot for a leg of length r at angle theta.
void project_velocity(double theta, double r, double vx, double vy, double& rdot, double& thetadot) {
  const double c = std::cos(theta), sn = std::sin(theta);
  // Radial unit vector (-cos, sin); tangential (sin, cos).
  rdot = -c * vx + sn * vy;
  thetadot = (sn * vx + c * vy) / r;
}
}  // namespace

DoubleState switch_s_to_d(const StanceState& s, double alpha, double r0) {
  const FlightState c = stance_to_cartesian(s);
  DoubleState d;
  d.r = r0;
  d.theta = alpha;
  d.x_sep = r0 * std::cos(alpha) - s.r * std::cos(s.theta);
  project_velocity(alpha, r0, c.vx, c.vy, d.rdot, d.thetadot);
  return d;
}

StanceState switch_ff_to_s(const FlightState& f, double alpha, double r0) {
  StanceState s;
  s.r = r0;
  s.theta = alpha;
  project_velocity(alpha, r0, f.vx, f.vy, s.rdot, s.thetadot);
  return s;
}

StepResult apply_step(const SectionState& x, double alpha, const ModelParams& p, const EnergyShell& shell,
                      const StepOptions& opts) {
  const StanceState start = section_to_stance(x, shell);
  StepRun run(p, alpha, opts);
  return run.run(start);
}

StepResult apply_step(const SectionState& x, double alpha, const ModelParams& p, const EnergyShell& shell,
                      const IntegratorConfig& cfg) {
  StepOptions opts;
  opts.integrator = cfg;
  return apply_step(x, alpha, p, shell, opts);
}

StepResult gait_map(const SectionState& x, double alpha, GaitLabel requested, const ModelParams& p,
                    const EnergyShell& shell, const StepOptions& opts) {
  StepResult res = apply_step(x, alpha, p, shell, opts);
  if (res.ok() && res.realized != requested) res.outcome = StepOutcome::WrongGait;
  return res;
}

StepResult gait_map(const SectionState& x, double alpha, GaitLabel requested, const ModelParams& p,
                    const EnergyShell& shell, const IntegratorConfig& cfg) {
  StepOptions opts;
  opts.integrator = cfg;
  return gait_map(x, alpha, requested, p, shell, opts);
}

}  // namespace slip
