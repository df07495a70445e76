#pragma once

#include <array>

namespace slip {

// Physical constants of the point-mass, massless-spring biped.
struct ModelParams {
  double m = 80.0;       // kg
  double k = 15000.0;    // N/m
  double r0 = 1.0;       // m
  double g = 9.81;       // m/s^2

  // Throws std::invalid_argument unless every field is strictly positive.
  void validate() const;
};

enum class Chart { Flight, Single, Double };

const char* chart_name(Chart c);

// Cartesian state of the mass in the flight chart.
struct FlightState {
  double x = 0.0;
  double y = 0.0;
  double vx = 0.0;
  double vy = 0.0;
};

// Polar state about the stance foot. theta is measured from the horizontal
// and grows clockwise, so the mass sits at (-r cos theta, r sin theta).
struct StanceState {
  double r = 0.0;
  double theta = 0.0;
  double rdot = 0.0;
  double thetadot = 0.0;
};

// Polar state about the front foot plus the horizontal separation to the
// back foot, which sits at (-x_sep, 0).
struct DoubleState {
  double r = 0.0;
  double theta = 0.0;
  double rdot = 0.0;
  double thetadot = 0.0;
  double x_sep = 0.0;
};

using Vec4 = std::array<double, 4>;
using Vec5 = std::array<double, 5>;

inline Vec4 to_array(const FlightState& s) { return {s.x, s.y, s.vx, s.vy}; }
inline Vec4 to_array(const StanceState& s) { return {s.r, s.theta, s.rdot, s.thetadot}; }
inline Vec5 to_array(const DoubleState& s) { return {s.r, s.theta, s.rdot, s.thetadot, s.x_sep}; }
inline FlightState flight_from(const Vec4& a) { return {a[0], a[1], a[2], a[3]}; }
inline StanceState stance_from(const Vec4& a) { return {a[0], a[1], a[2], a[3]}; }
inline DoubleState double_from(const Vec5& a) { return {a[0], a[1], a[2], a[3], a[4]}; }

Vec4 flight_deriv(const FlightState& s, const ModelParams& p);

// Throws std::domain_error if r <= 0.
Vec4 stance_deriv(const StanceState& s, const ModelParams& p);

// Throws std::domain_error if r <= 0 or the back leg has zero length.
// The last component (d x_sep / dt) is always 0.
Vec5 double_deriv(const DoubleState& s, const ModelParams& p);

double back_leg_length(double r, double theta, double x_sep);
inline double back_leg_length(const DoubleState& s) { return back_leg_length(s.r, s.theta, s.x_sep); }

// Total mechanical energy with the gravity reference at ground level.
double mechanical_energy(const FlightState& s, const ModelParams& p);
double mechanical_energy(const StanceState& s, const ModelParams& p);
double mechanical_energy(const DoubleState& s, const ModelParams& p);

// Mass position/velocity relative to the stance foot.
FlightState stance_to_cartesian(const StanceState& s);

// Inverse of stance_to_cartesian for a foot at (foot_x, 0).
// Throws std::domain_error if the mass is not above the ground.
StanceState cartesian_to_stance(const FlightState& f, double foot_x);

namespace detail {
// Unchecked right-hand sides used inside the integrator; they return NaN
// instead of throwing so that a wild trial stage just gets rejected.
Vec4 stance_rhs(const Vec4& s, const ModelParams& p);
Vec5 double_rhs(const Vec5& s, const ModelParams& p);
}  // namespace detail

}  // namespace slip
