#include <gtest/gtest.h>

#include <random>

#include "oracles.hpp"
#include "slip/dynamics.hpp"

using namespace slip;

namespace {

oracle::Params op(const ModelParams& p) { return {p.m, p.k, p.r0, p.g}; }

DoubleState random_double(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> r(0.8, 1.05), th(1.1, 2.0), rd(-1.5, 1.5), thd(-2.0, 2.0), xs(0.2, 1.0);
  return {r(rng), th(rng), rd(rng), thd(rng), xs(rng)};
}

}  // namespace

TEST(Dynamics, DoubleStanceMatchesCartesianForceSum) {
  const ModelParams p;
  std::mt19937_64 rng(12345);
  double worst = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const DoubleState s = random_double(rng);
    const Vec5 got = double_deriv(s, p);
    const auto want = oracle::double_stance({s.r, s.theta, s.rdot, s.thetadot, s.x_sep}, op(p));
    for (int j = 0; j < 5; ++j) worst = std::max(worst, std::abs(got[j] - want[j]));
  }
  EXPECT_LT(worst, 1e-10);
}

TEST(Dynamics, SingleStanceMatchesCartesianForceSum) {
  const ModelParams p;
  std::mt19937_64 rng(7);
  for (int i = 0; i < 500; ++i) {
    const DoubleState d = random_double(rng);
    const StanceState s{d.r, d.theta, d.rdot, d.thetadot};
    const Vec4 got = stance_deriv(s, p);
    const auto want = oracle::single_stance({s.r, s.theta, s.rdot, s.thetadot}, op(p));
    for (int j = 0; j < 4; ++j) ASSERT_NEAR(got[j], want[j], 1e-10);
  }
}

TEST(Dynamics, BackLegLengthIsCartesianDistance) {
  std::mt19937_64 rng(99);
  for (int i = 0; i < 1000; ++i) {
    const DoubleState s = random_double(rng);
    EXPECT_NEAR(back_leg_length(s), oracle::back_leg(s.r, s.theta, s.x_sep), 1e-12);
  }
}

TEST(Dynamics, FlightIsBallistic) {
  const ModelParams p;
  const Vec4 d = flight_deriv({0.3, 1.2, 2.0, -0.5}, p);
  EXPECT_DOUBLE_EQ(d[0], 2.0);
  EXPECT_DOUBLE_EQ(d[1], -0.5);
  EXPECT_DOUBLE_EQ(d[2], 0.0);
  EXPECT_DOUBLE_EQ(d[3], -p.g);
}

TEST(Dynamics, EnergyIsConservedAlongDoubleStanceVectorField) {
  const ModelParams p;
  std::mt19937_64 rng(3);
  for (int i = 0; i < 200; ++i) {
    const DoubleState s = random_double(rng);
    const Vec5 f = double_deriv(s, p);
    const double h = 1e-6;
    auto shifted = [&](double sign) {
      return DoubleState{s.r + sign * h * f[0], s.theta + sign * h * f[1], s.rdot + sign * h * f[2],
                         s.thetadot + sign * h * f[3], s.x_sep};
    };
    const double dE = (mechanical_energy(shifted(1), p) - mechanical_energy(shifted(-1), p)) / (2 * h);
    EXPECT_NEAR(dE, 0.0, 1e-4);
  }
}

TEST(Dynamics, PolarCartesianRoundTrip) {
  const StanceState s{0.97, 1.3, -0.2, 0.9};
  const FlightState f = stance_to_cartesian(s);
  const StanceState back = cartesian_to_stance(f, 0.0);
  EXPECT_NEAR(back.r, s.r, 1e-14);
  EXPECT_NEAR(back.theta, s.theta, 1e-14);
  EXPECT_NEAR(back.rdot, s.rdot, 1e-13);
  EXPECT_NEAR(back.thetadot, s.thetadot, 1e-13);
  EXPECT_NEAR(mechanical_energy(s, ModelParams{}) - 0.5 * ModelParams{}.k * (1 - s.r) * (1 - s.r),
              mechanical_energy(f, ModelParams{}), 1e-10);
}

TEST(Dynamics, ValidationRejectsNonPositive) {
  ModelParams p;
  p.k = 0.0;
  EXPECT_THROW(p.validate(), std::invalid_argument);
  p = ModelParams{};
  p.m = -1.0;
  EXPECT_THROW(p.validate(), std::invalid_argument);
  EXPECT_NO_THROW(ModelParams{}.validate());
}

TEST(Dynamics, DegenerateLegsThrow) {
  const ModelParams p;
  EXPECT_THROW(stance_deriv({0.0, 1.0, 0.0, 0.0}, p), std::domain_error);
  EXPECT_THROW(double_deriv({1.0, 0.0, 0.0, 0.0, 1.0}, p), std::domain_error);
}
