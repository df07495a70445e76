#pragma once

#include <stdexcept>

#include "slip/dynamics.hpp"

namespace slip {

// Thrown when the requested energy lies below the minimum attainable on the
// section (static equilibrium with the leg vertical).
class EnergyTooLow : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class OutsideShell : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Constant-energy surface on the section theta = pi/2. In the scaled
// coordinates r_hat = r - r_center, v_hat = v / omega it is a sphere of
// radius L.
struct EnergyShell {
  double E = 0.0;         // J
  double L = 0.0;         // m
  double omega = 0.0;     // 1/s
  double r_center = 0.0;  // m
};

// Point on the section: single stance, leg vertical. vx >= 0 is implied by
// the shell.
struct SectionState {
  double r = 0.0;   // m
  double vy = 0.0;  // m/s, equals rdot on the section
};

struct NormalizedState {
  double r_hat = 0.0;
  double vx_hat = 0.0;
  double vy_hat = 0.0;
};

double minimum_section_energy(const ModelParams& p);

// Throws EnergyTooLow when E is below minimum_section_energy(p).
EnergyShell shell_constants(const ModelParams& p, double E);

// vx is recovered from the shell; points marginally outside the disc
// (relative excess below 1e-9) clamp to vx = 0, anything further throws.
NormalizedState to_normalized(const SectionState& x, const EnergyShell& shell);
SectionState from_normalized(const NormalizedState& n, const EnergyShell& shell);

// Non-negative horizontal speed completing the section energy. Throws
// OutsideShell if (r_hat, vy_hat) falls outside the disc.
double vx_from_energy(double r, double vy, const EnergyShell& shell);

// Squared disc radius (r_hat^2 + vy_hat^2) / L^2 of a section point.
double disc_fraction(const SectionState& x, const EnergyShell& shell);

// Full single-stance state for a section point.
StanceState section_to_stance(const SectionState& x, const EnergyShell& shell);

}  // namespace slip
