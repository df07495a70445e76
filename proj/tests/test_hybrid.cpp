#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "slip/fixed_point.hpp"
#include "slip/hybrid.hpp"

using namespace slip;

namespace {

constexpr double kDeg = std::numbers::pi / 180.0;

const FixedPoint& w_fixed_point() {
  static const FixedPoint fp = [] {
    const ModelParams p;
    return search_fixed_point(GaitLabel::W, p, shell_constants(p, 820.0), IntegratorConfig{}, 55 * kDeg, 90 * kDeg);
  }();
  return fp;
}

}  // namespace

TEST(Hybrid, GaitNamesRoundTrip) {
  for (GaitLabel g : {GaitLabel::R, GaitLabel::GR, GaitLabel::W}) {
    const auto back = parse_gait(gait_name(g));
    ASSERT_TRUE(back.has_value());
    EXPECT_EQ(*back, g);
  }
  EXPECT_FALSE(parse_gait("X").has_value());
}

TEST(Hybrid, SwitchToDoubleKeepsMassAndPlacesLeg) {
  const ModelParams p;
  const double alpha = 70 * kDeg;
  // At the event the mass sits at the height where the new leg lands at rest length.
  const StanceState s{std::sin(alpha) / std::sin(1.75), 1.75, -0.1, 1.1};
  EXPECT_NEAR(event_double_touchdown(s, alpha, p.r0), 0.0, 1e-12);
  const DoubleState d = switch_s_to_d(s, alpha, p.r0);
  EXPECT_NEAR(d.r, p.r0, 1e-15);
  EXPECT_NEAR(d.theta, alpha, 1e-15);
  EXPECT_NEAR(back_leg_length(d), s.r, 1e-12);
  const FlightState a = stance_to_cartesian(s);
  const FlightState b = stance_to_cartesian({d.r, d.theta, d.rdot, d.thetadot});
  EXPECT_NEAR(a.vx, b.vx, 1e-12);
  EXPECT_NEAR(a.vy, b.vy, 1e-12);
  EXPECT_NEAR(a.y, b.y, 1e-12);
}

TEST(Hybrid, TouchdownFromFlightStartsAtRestLength) {
  const ModelParams p;
  const FlightState f{0.0, std::sin(68 * kDeg), 1.1, -0.4};
  const StanceState s = switch_ff_to_s(f, 68 * kDeg, p.r0);
  EXPECT_NEAR(s.r, p.r0, 1e-12);
  EXPECT_NEAR(s.theta, 68 * kDeg, 1e-12);
  EXPECT_NEAR(mechanical_energy(s, p), mechanical_energy(f, p), 1e-9);
  EXPECT_NEAR(event_touchdown(f, 68 * kDeg, p.r0), 0.0, 1e-12);
  EXPECT_TRUE(touchdown_armed(f));
}

TEST(Hybrid, WalkingFixedPointConservesEnergy) {
  const ModelParams p;
  const EnergyShell shell = shell_constants(p, 820.0);
  const FixedPoint& fp = w_fixed_point();
  EXPECT_EQ(fp.gait, GaitLabel::W);
  EXPECT_LT(fp.residual, 1e-6);
  SectionState x{fp.r, 0.0};
  for (int i = 0; i < 25; ++i) {
    const StepResult res = gait_map(x, fp.alpha, GaitLabel::W, p, shell, IntegratorConfig{});
    ASSERT_TRUE(res.ok()) << "step " << i;
    EXPECT_LT(std::abs(res.summary.section_energy - 820.0) / 820.0, 1e-5);
    EXPECT_LT(res.summary.max_event_residual, 1e-10);
    EXPECT_LT(res.summary.max_switch_energy_jump, 1e-12);
    x = res.next;
  }
  EXPECT_NEAR(x.r, fp.r, 1e-4);
  EXPECT_NEAR(x.vy, 0.0, 1e-3);
}

TEST(Hybrid, WrongGaitIsReported) {
  const ModelParams p;
  const EnergyShell shell = shell_constants(p, 820.0);
  const FixedPoint& fp = w_fixed_point();
  const StepResult res = gait_map({fp.r, 0.0}, fp.alpha, GaitLabel::R, p, shell, IntegratorConfig{});
  EXPECT_EQ(res.outcome, StepOutcome::WrongGait);
  EXPECT_EQ(res.realized, GaitLabel::W);
}

TEST(Hybrid, WalkingStepVisitsDoubleStance) {
  const ModelParams p;
  const EnergyShell shell = shell_constants(p, 820.0);
  const FixedPoint& fp = w_fixed_point();
  StepOptions so;
  so.record_trajectory = true;
  const StepResult res = apply_step({fp.r, 0.0}, fp.alpha, p, shell, so);
  ASSERT_TRUE(res.ok());
  std::vector<EventKind> kinds;
  for (const auto& e : res.summary.events) kinds.push_back(e.kind);
  ASSERT_EQ(kinds.size(), 3u);
  EXPECT_EQ(kinds[0], EventKind::DoubleTouchdown);
  EXPECT_EQ(kinds[1], EventKind::BackTakeoff);
  EXPECT_EQ(kinds[2], EventKind::Section);
  ASSERT_FALSE(res.summary.samples.empty());
  double t_prev = -1.0;
  bool saw_double = false;
  for (const auto& s : res.summary.samples) {
    EXPECT_GE(s.t, t_prev);
    t_prev = s.t;
    if (s.chart == Chart::Double) {
      saw_double = true;
      EXPECT_TRUE(std::isfinite(s.back_foot_x));
    }
  }
  EXPECT_TRUE(saw_double);
  EXPECT_NEAR(res.summary.end_foot_x - so.foot_x, res.summary.samples.back().x - so.foot_x, 1e-9);
}

TEST(Hybrid, SteepLegFalls) {
  const ModelParams p;
  const EnergyShell shell = shell_constants(p, 820.0);
  // A nearly horizontal leg cannot catch the mass.
  const StepResult res = apply_step({shell.r_center, 0.0}, 5 * kDeg, p, shell, IntegratorConfig{});
  EXPECT_EQ(res.outcome, StepOutcome::Failure);
}

TEST(Hybrid, OutsideShellStartThrows) {
  const ModelParams p;
  const EnergyShell shell = shell_constants(p, 820.0);
  EXPECT_THROW(apply_step({shell.r_center + 2 * shell.L, 0.0}, 70 * kDeg, p, shell, IntegratorConfig{}), OutsideShell);
}
