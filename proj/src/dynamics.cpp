#include "slip/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace slip {

void ModelParams::validate() const {
  if (!(m > 0.0) || !(k > 0.0) || !(r0 > 0.0) || !(g > 0.0)) {
    throw std::invalid_argument("model parameters must be strictly positive");
  }
}

const char* chart_name(Chart c) {
  switch (c) {
    case Chart::Flight: return "flight";
    case Chart::Single: return "single";
    case Chart::Double: return "double";
  }
  return "?";
}

Vec4 flight_deriv(const FlightState& s, const ModelParams& p) {
  return {s.vx, s.vy, 0.0, -p.g};
}

namespace detail {

Vec4 stance_rhs(const Vec4& s, const ModelParams& p) {
  const double r = s[0], th = s[1], rd = s[2], thd = s[3];
  if (!(r > 0.0)) {
    const double nan = std::numeric_limits<double>::quiet_NaN();
    return {nan, nan, nan, nan};
  }
  const double w2 = p.k / p.m;
  return {rd, thd, w2 * (p.r0 - r) + r * thd * thd - p.g * std::sin(th),
          -(2.0 * rd * thd + p.g * std::cos(th)) / r};
}

Vec5 double_rhs(const Vec5& s, const ModelParams& p) {
  const double r = s[0], th = s[1], rd = s[2], thd = s[3], xs = s[4];
  const double rb = back_leg_length(r, th, xs);
  if (!(r > 0.0) || !(rb > 0.0)) {
    const double nan = std::numeric_limits<double>::quiet_NaN();
    return {nan, nan, nan, nan, nan};
  }
  const double w2 = p.k / p.m;
  const double c = std::cos(th), sn = std::sin(th);
  const double back = 1.0 - p.r0 / rb;
  const double rdd = w2 * ((p.r0 - r) + back * (xs * c - r)) + r * thd * thd - p.g * sn;
  const double thdd = -(w2 * back * xs * sn + 2.0 * rd * thd + p.g * c) / r;
  return {rd, thd, rdd, thdd, 0.0};
}

}  // namespace detail

Vec4 stance_deriv(const StanceState& s, const ModelParams& p) {
  if (!(s.r > 0.0)) throw std::domain_error("stance_deriv: leg length must be positive");
  return detail::stance_rhs(to_array(s), p);
}

Vec5 double_deriv(const DoubleState& s, const ModelParams& p) {
  if (!(s.r > 0.0)) throw std::domain_error("double_deriv: front leg length must be positive");
  if (!(back_leg_length(s) > 0.0)) throw std::domain_error("double_deriv: back leg length is zero");
  return detail::double_rhs(to_array(s), p);
}

double back_leg_length(double r, double theta, double x_sep) {
  const double sq = r * r + x_sep * x_sep - 2.0 * r * x_sep * std::cos(theta);
  return std::sqrt(std::max(sq, 0.0));
}

double mechanical_energy(const FlightState& s, const ModelParams& p) {
  return 0.5 * p.m * (s.vx * s.vx + s.vy * s.vy) + p.m * p.g * s.y;
}

double mechanical_energy(const StanceState& s, const ModelParams& p) {
  const double dr = p.r0 - s.r;
  return 0.5 * p.k * dr * dr + 0.5 * p.m * (s.rdot * s.rdot + s.r * s.r * s.thetadot * s.thetadot) +
         p.m * p.g * s.r * std::sin(s.theta);
}

double mechanical_energy(const DoubleState& s, const ModelParams& p) {
  const double db = p.r0 - back_leg_length(s);
  return mechanical_energy(StanceState{s.r, s.theta, s.rdot, s.thetadot}, p) + 0.5 * p.k * db * db;
}

FlightState stance_to_cartesian(const StanceState& s) {
  const double c = std::cos(s.theta), sn = std::sin(s.theta);
  return {-s.r * c, s.r * sn, -s.rdot * c + s.r * s.thetadot * sn, s.rdot * sn + s.r * s.thetadot * c};
}

StanceState cartesian_to_stance(const FlightState& f, double foot_x) {
  if (!(f.y > 0.0)) throw std::domain_error("cartesian_to_stance: mass must be above ground");
  const double dx = f.x - foot_x;
  const double r = std::hypot(dx, f.y);
  const double theta = std::atan2(f.y, -dx);
  // Radial unit vector (dx, y)/r, tangential (sin theta, cos theta) = (y, -dx)/r.
  const double rdot = (dx * f.vx + f.y * f.vy) / r;
  const double thetadot = (f.y * f.vx - dx * f.vy) / (r * r);
  return {r, theta, rdot, thetadot};
}

}  // namespace slip
