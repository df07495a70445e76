#pragma once

#include <stdexcept>
#include <vector>

#include "slip/hybrid.hpp"
#include "slip/regions.hpp"

namespace slip {

class NoConvergence : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct FixedPoint {
  GaitLabel gait = GaitLabel::W;
  double r = 0.0;        // m, with vy = 0
  double alpha = 0.0;    // rad
  double residual = 0.0; // normalized units, evaluated with the caller's integrator config
  int iterations = 0;
  int verified_steps = 0;  // consecutive successful CAAP steps from the point
};

struct FixedPointOptions {
  int max_iterations = 60;
  double fd_step = 1e-7;         // normalized units (m for r_hat, rad for alpha)
  double tolerance = 1e-9;       // stop when the residual drops below this
  double accept_residual = 1e-6; // returned points must meet this
  double search_tightening = 1e4;  // integrator tolerances are divided by this during the search
  double polish_fd_step = 1e-6;  // FD slope estimate on the caller's (looser) map
  int polish_iterations = 80;
  int verify_steps = 25;
};

// Distance in (r_hat, vy_hat) between a section state and its image under
// one step of the requested gait with angle alpha, or +inf on failure.
double return_map_residual(GaitLabel gait, double r, double alpha, const ModelParams& p, const EnergyShell& shell,
                           const IntegratorConfig& cfg);

// Levenberg-Marquardt damped Newton on (r, alpha) -> map(r, 0, alpha) - (r, 0)
// with a forward-difference Jacobian. Symmetric fixed points come in
// one-parameter families, so the Jacobian is rank deficient on the solution
// set; damping keeps the step minimal-norm. Throws NoConvergence.
FixedPoint find_fixed_point(GaitLabel gait, double r_guess, double alpha_guess, const ModelParams& p,
                            const EnergyShell& shell, const IntegratorConfig& cfg,
                            const FixedPointOptions& opts = {});

// Coarse scan of the line vy = 0 over (r, alpha) followed by
// find_fixed_point from the best candidates; returns the first point that
// survives opts.verify_steps CAAP steps. Throws NoConvergence.
FixedPoint search_fixed_point(GaitLabel gait, const ModelParams& p, const EnergyShell& shell,
                              const IntegratorConfig& cfg, double alpha_min, double alpha_max,
                              const FixedPointOptions& opts = {});

}  // namespace slip
