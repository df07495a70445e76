#include "slip/fixed_point.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

namespace slip {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct MapEval {
  bool ok = false;
  std::array<double, 2> f{};  // (r_hat' - r_hat, vy_hat')
  double norm() const { return ok ? std::hypot(f[0], f[1]) : kInf; }
};

MapEval evaluate(GaitLabel gait, double r, double alpha, const ModelParams& p, const EnergyShell& shell,
                 const IntegratorConfig& cfg) {
  MapEval out;
  const SectionState x{r, 0.0};
  if (disc_fraction(x, shell) > 1.0) return out;
  const StepResult res = gait_map(x, alpha, gait, p, shell, cfg);
  if (!res.ok()) return out;
  out.ok = true;
  out.f = {res.next.r - r, res.next.vy / shell.omega};
  return out;
}

}  // namespace

double return_map_residual(GaitLabel gait, double r, double alpha, const ModelParams& p, const EnergyShell& shell,
                           const IntegratorConfig& cfg) {
  return evaluate(gait, r, alpha, p, shell, cfg).norm();
}

namespace {

// Damped Gauss-Newton iterations in place; returns the iteration count.
int levenberg_marquardt(GaitLabel gait, double& r, double& alpha, MapEval& cur, double fd_step, double tol,
                        int max_iter, const ModelParams& p, const EnergyShell& shell, const IntegratorConfig& cfg) {
  double lambda = 1e-3;
  int it = 0;
  for (; it < max_iter && cur.norm() > tol; ++it) {
    const double h = fd_step;
    const MapEval fr = evaluate(gait, r + h, alpha, p, shell, cfg);
    const MapEval fa = evaluate(gait, r, alpha + h, p, shell, cfg);
    if (!fr.ok || !fa.ok) break;
    // J columns: d/dr_hat and d/dalpha.
    const double j00 = (fr.f[0] - cur.f[0]) / h, j10 = (fr.f[1] - cur.f[1]) / h;
    const double j01 = (fa.f[0] - cur.f[0]) / h, j11 = (fa.f[1] - cur.f[1]) / h;
    const double a00 = j00 * j00 + j10 * j10, a01 = j00 * j01 + j10 * j11, a11 = j01 * j01 + j11 * j11;
    const double g0 = j00 * cur.f[0] + j10 * cur.f[1], g1 = j01 * cur.f[0] + j11 * cur.f[1];
    const double scale = std::max(a00 + a11, 1e-300);

    bool improved = false;
    for (int tries = 0; tries < 30; ++tries) {
      const double mu = lambda * scale;
      const double b00 = a00 + mu, b11 = a11 + mu;
      const double det = b00 * b11 - a01 * a01;
      if (!(std::abs(det) > 0.0)) {
        lambda *= 10.0;
        continue;
      }
      const double dr = -(b11 * g0 - a01 * g1) / det;
      const double da = -(b00 * g1 - a01 * g0) / det;
      const MapEval trial = evaluate(gait, r + dr, alpha + da, p, shell, cfg);
      if (trial.norm() < cur.norm()) {
        r += dr;
        alpha += da;
        cur = trial;
        lambda = std::max(lambda * 0.1, 1e-12);
        improved = true;
        break;
      }
      lambda *= 10.0;
    }
    if (!improved) break;
  }
  return it;
}

// On a symmetric fixed point both residual components vanish together, so
// with alpha frozen one scalar equation in r suffices. Bracketing keeps the
// result on a smooth piece of the caller's map (its step-size sequence
// differs from the tightened one), which matters for unstable points.
int polish_on_map(GaitLabel gait, double& r, double alpha, const FixedPointOptions& opts, const ModelParams& p,
                  const EnergyShell& shell, const IntegratorConfig& cfg) {
  const MapEval c0 = evaluate(gait, r, alpha, p, shell, cfg);
  if (!c0.ok) return 0;
  const double h = opts.polish_fd_step;
  const MapEval cp = evaluate(gait, r + h, alpha, p, shell, cfg);
  if (!cp.ok) return 0;
  const std::size_t comp = std::abs(cp.f[0] - c0.f[0]) >= std::abs(cp.f[1] - c0.f[1]) ? 0 : 1;
  const double slope = (cp.f[comp] - c0.f[comp]) / h;
  if (!(std::abs(slope) > 0.0)) return 0;

  // Bracket around the Newton estimate.
  const double guess = r - c0.f[comp] / slope;
  double width = std::max(std::abs(guess - r), 1e-12);
  double lo = 0.0, hi = 0.0, flo = 0.0, fhi = 0.0;
  bool bracketed = false;
  for (int k = 0; k < 12 && !bracketed; ++k, width *= 4.0) {
    lo = guess - width;
    hi = guess + width;
    const MapEval el = evaluate(gait, lo, alpha, p, shell, cfg);
    const MapEval eh = evaluate(gait, hi, alpha, p, shell, cfg);
    if (!el.ok || !eh.ok) continue;
    flo = el.f[comp];
    fhi = eh.f[comp];
    bracketed = (flo <= 0.0) != (fhi <= 0.0);
  }
  if (!bracketed) return 0;

  int it = 0;
  double best_r = r, best_norm = c0.norm();
  for (; it < opts.polish_iterations; ++it) {
    double mid = (lo * fhi - hi * flo) / (fhi - flo);
    if (!(mid > lo && mid < hi) || it % 3 == 2) mid = 0.5 * (lo + hi);
    const MapEval em = evaluate(gait, mid, alpha, p, shell, cfg);
    if (!em.ok) break;
    if (em.norm() < best_norm) {
      best_norm = em.norm();
      best_r = mid;
    }
    if (em.f[comp] == 0.0 || hi - lo < 4e-16 * std::abs(mid)) break;
    if ((em.f[comp] <= 0.0) == (flo <= 0.0)) {
      lo = mid;
      flo = em.f[comp];
    } else {
      hi = mid;
      fhi = em.f[comp];
    }
  }
  r = best_r;
  return it;
}

}  // namespace

FixedPoint find_fixed_point(GaitLabel gait, double r_guess, double alpha_guess, const ModelParams& p,
                            const EnergyShell& shell, const IntegratorConfig& cfg, const FixedPointOptions& opts) {
  const IntegratorConfig tight = cfg.tightened(opts.search_tightening);
  double r = r_guess, alpha = alpha_guess;
  MapEval cur = evaluate(gait, r, alpha, p, shell, tight);
  if (!cur.ok) throw NoConvergence(std::string("find_fixed_point: initial guess fails for gait ") + gait_name(gait));
  int it = levenberg_marquardt(gait, r, alpha, cur, opts.fd_step, opts.tolerance, opts.max_iterations, p, shell, tight);
  it += polish_on_map(gait, r, alpha, opts, p, shell, cfg);

  FixedPoint fp;
  fp.gait = gait;
  fp.r = r;
  fp.alpha = alpha;
  fp.iterations = it;
  fp.residual = return_map_residual(gait, r, alpha, p, shell, cfg);
  if (!(fp.residual < opts.accept_residual)) {
    throw NoConvergence(std::string("find_fixed_point: residual ") + std::to_string(fp.residual) +
                        " above acceptance for gait " + gait_name(gait));
  }
  fp.verified_steps = steps_to_failure(SectionState{r, 0.0}, gait, alpha, opts.verify_steps, p, shell, cfg);
  return fp;
}

FixedPoint search_fixed_point(GaitLabel gait, const ModelParams& p, const EnergyShell& shell,
                              const IntegratorConfig& cfg, double alpha_min, double alpha_max,
                              const FixedPointOptions& opts) {
  struct Candidate {
    double res, r, alpha;
  };
  std::vector<Candidate> cands;
  constexpr int kR = 60;
  constexpr int kA = 71;
  for (int ia = 0; ia < kA; ++ia) {
    const double alpha = alpha_min + (alpha_max - alpha_min) * ia / (kA - 1);
    for (int ir = 0; ir <= kR; ++ir) {
      const double r = shell.r_center + shell.L * (-0.98 + 1.96 * ir / kR);
      const double res = return_map_residual(gait, r, alpha, p, shell, cfg);
      if (std::isfinite(res)) cands.push_back({res, r, alpha});
    }
  }
  std::sort(cands.begin(), cands.end(), [](const Candidate& a, const Candidate& b) {
    if (a.res != b.res) return a.res < b.res;
    if (a.alpha != b.alpha) return a.alpha < b.alpha;
    return a.r < b.r;
  });

  FixedPoint best;
  bool have = false;
  const std::size_t budget = std::min<std::size_t>(cands.size(), 24);
  for (std::size_t i = 0; i < budget; ++i) {
    try {
      FixedPoint fp = find_fixed_point(gait, cands[i].r, cands[i].alpha, p, shell, cfg, opts);
      if (fp.verified_steps >= opts.verify_steps) return fp;
      if (!have || fp.verified_steps > best.verified_steps) {
        best = fp;
        have = true;
      }
    } catch (const NoConvergence&) {
    }
  }
  if (have) return best;
  throw NoConvergence(std::string("search_fixed_point: no fixed point found for gait ") + gait_name(gait));
}

}  // namespace slip
