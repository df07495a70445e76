#include "slip/section.hpp"

#include <cmath>
#include <numbers>
#include <string>

namespace slip {

namespace {
constexpr double kShellSlack = 1e-9;
}

double minimum_section_energy(const ModelParams& p) {
  return p.m * p.g * (p.r0 - p.m * p.g / (2.0 * p.k));
}

EnergyShell shell_constants(const ModelParams& p, double E) {
  p.validate();
  const double excess = E - minimum_section_energy(p);
  if (!(excess >= 0.0)) {
    throw EnergyTooLow("EnergyTooLow: E = " + std::to_string(E) + " J is below the section minimum " +
                       std::to_string(minimum_section_energy(p)) + " J");
  }
  EnergyShell s;
  s.E = E;
  s.L = std::sqrt(2.0 / p.k * excess);
  s.omega = std::sqrt(p.k / p.m);
  s.r_center = p.r0 - p.m * p.g / p.k;
  return s;
}

double disc_fraction(const SectionState& x, const EnergyShell& shell) {
  const double rh = x.r - shell.r_center;
  const double vh = x.vy / shell.omega;
  return (rh * rh + vh * vh) / (shell.L * shell.L);
}

double vx_from_energy(double r, double vy, const EnergyShell& shell) {
  const double rh = r - shell.r_center;
  const double vh = vy / shell.omega;
  const double L2 = shell.L * shell.L;
  const double rem = L2 - rh * rh - vh * vh;
  if (rem < 0.0) {
    if (rem >= -kShellSlack * L2) return 0.0;
    throw OutsideShell("OutsideShell: section point lies outside the energy disc");
  }
  return shell.omega * std::sqrt(rem);
}

NormalizedState to_normalized(const SectionState& x, const EnergyShell& shell) {
  const double vx = vx_from_energy(x.r, x.vy, shell);
  return {x.r - shell.r_center, vx / shell.omega, x.vy / shell.omega};
}

SectionState from_normalized(const NormalizedState& n, const EnergyShell& shell) {
  return {n.r_hat + shell.r_center, n.vy_hat * shell.omega};
}

StanceState section_to_stance(const SectionState& x, const EnergyShell& shell) {
  const double vx = vx_from_energy(x.r, x.vy, shell);
  return {x.r, std::numbers::pi / 2.0, x.vy, vx / x.r};
}

}  // namespace slip
