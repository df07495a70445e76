#pragma once

// Dormand-Prince 5(4) integration with continuous extension and terminal
// event location. The state is a fixed-size array so each chart gets its own
// instantiation without heap traffic inside the step loop.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <span>
#include <stdexcept>
#include <vector>

namespace slip {

struct IntegratorConfig {
  double rel_tol = 1e-6;
  double abs_tol = 1e-8;
  double max_step = 0.05;         // s
  double initial_step = 1e-3;     // s
  double event_value_tol = 1e-10;
  double max_phase_time = 5.0;    // s
  bool keep_dense = false;        // retain per-step interpolants for dense_eval

  void validate() const {
    if (!(rel_tol > 0.0) || !(abs_tol > 0.0) || !(event_value_tol > 0.0) || !(max_step > 0.0) ||
        !(initial_step > 0.0) || !(max_phase_time > 0.0)) {
      throw std::invalid_argument("integrator tolerances and step limits must be positive");
    }
  }

  IntegratorConfig tightened(double factor) const {
    IntegratorConfig c = *this;
    c.rel_tol = std::max(c.rel_tol / factor, 1e-13);
    c.abs_tol = std::max(c.abs_tol / factor, 1e-15);
    return c;
  }
};

enum class Direction { Falling, Rising, Either };

template <std::size_t N>
struct EventSpec {
  std::function<double(double, const std::array<double, N>&)> residual;
  Direction direction = Direction::Either;
  // Empty guard means "always armed".
  std::function<bool(const std::array<double, N>&)> guard;
};

enum class PhaseStatus { Event, NoEvent, NonFinite };

// One accepted step with its Hairer-style continuous extension.
template <std::size_t N>
struct DenseSegment {
  using State = std::array<double, N>;
  double t0 = 0.0;
  double h = 0.0;
  State y0{};
  State y1{};
  std::array<State, 4> rc{};  // rcont2..rcont5

  State eval(double t) const {
    if (t == t0) return y0;
    const double s = (t - t0) / h;
    const double s1 = 1.0 - s;
    State out;
    for (std::size_t i = 0; i < N; ++i) {
      out[i] = y0[i] + s * (rc[0][i] + s1 * (rc[1][i] + s * (rc[2][i] + s1 * rc[3][i])));
    }
    return out;
  }
};

template <std::size_t N>
struct PhaseResult {
  using State = std::array<double, N>;
  PhaseStatus status = PhaseStatus::NoEvent;
  int event_index = -1;
  double t_start = 0.0;
  double t_event = 0.0;       // time of the event, or of the last accepted step
  State state_start{};
  State state_event{};        // state at t_event
  double event_residual = 0.0;
  int accepted_steps = 0;
  int rejected_steps = 0;
  std::vector<DenseSegment<N>> trajectory;  // filled only with keep_dense

  bool fired() const { return status == PhaseStatus::Event; }
};

namespace detail {

// Butcher tableau and dense-output weights of DOPRI5.
struct Dopri5 {
  static constexpr double c2 = 1.0 / 5.0, c3 = 3.0 / 10.0, c4 = 4.0 / 5.0, c5 = 8.0 / 9.0;
  static constexpr double a21 = 1.0 / 5.0;
  static constexpr double a31 = 3.0 / 40.0, a32 = 9.0 / 40.0;
  static constexpr double a41 = 44.0 / 45.0, a42 = -56.0 / 15.0, a43 = 32.0 / 9.0;
  static constexpr double a51 = 19372.0 / 6561.0, a52 = -25360.0 / 2187.0, a53 = 64448.0 / 6561.0,
                          a54 = -212.0 / 729.0;
  static constexpr double a61 = 9017.0 / 3168.0, a62 = -355.0 / 33.0, a63 = 46732.0 / 5247.0,
                          a64 = 49.0 / 176.0, a65 = -5103.0 / 18656.0;
  static constexpr double a71 = 35.0 / 384.0, a73 = 500.0 / 1113.0, a74 = 125.0 / 192.0,
                          a75 = -2187.0 / 6784.0, a76 = 11.0 / 84.0;
  static constexpr double e1 = 71.0 / 57600.0, e3 = -71.0 / 16695.0, e4 = 71.0 / 1920.0,
                          e5 = -17253.0 / 339200.0, e6 = 22.0 / 525.0, e7 = -1.0 / 40.0;
  static constexpr double d1 = -12715105075.0 / 11282082432.0, d3 = 87487479700.0 / 32700410799.0,
                          d4 = -10690763975.0 / 1880347072.0, d5 = 701980252875.0 / 199316789632.0,
                          d6 = -1453857185.0 / 822651844.0, d7 = 69997945.0 / 29380423.0;
};

template <std::size_t N>
bool all_finite(const std::array<double, N>& a) {
  for (double v : a) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

inline bool crosses(double before, double after, Direction dir) {
  const bool rising = before < 0.0 && after >= 0.0;
  const bool falling = before > 0.0 && after <= 0.0;
  switch (dir) {
    case Direction::Rising: return rising;
    case Direction::Falling: return falling;
    case Direction::Either: return rising || falling;
  }
  return false;
}

// Illinois-modified regula falsi on the interpolant of one step.
template <std::size_t N>
double locate_root(const DenseSegment<N>& seg, const EventSpec<N>& ev, double g_lo, double g_hi,
                   double tol, double& g_root) {
  double a = seg.t0, b = seg.t0 + seg.h;
  double fa = g_lo, fb = g_hi;
  if (fb == 0.0) {
    g_root = 0.0;
    return b;
  }
  double t = b, ft = fb;
  int side = 0;
  for (int it = 0; it < 200; ++it) {
    t = (a * fb - b * fa) / (fb - fa);
    if (!(t > a && t < b)) t = 0.5 * (a + b);
    ft = ev.residual(t, seg.eval(t));
    if (std::abs(ft) < tol || (b - a) <= 4.0 * std::numeric_limits<double>::epsilon() * std::abs(b)) break;
    if ((ft > 0.0) == (fb > 0.0)) {
      b = t;
      fb = ft;
      if (side == -1) fa *= 0.5;
      side = -1;
    } else {
      a = t;
      fa = ft;
      if (side == 1) fb *= 0.5;
      side = 1;
    }
  }
  g_root = ft;
  return t;
}

}  // namespace detail

// Integrate from (t0, s0) until the earliest armed event crosses zero in its
// stated direction. A residual sitting exactly at zero at t0 does not count
// as a crossing. Events located at the same instant resolve to the lowest
// index.
template <std::size_t N, class Rhs>
PhaseResult<N> integrate_until_event(Rhs&& rhs, const std::array<double, N>& s0,
                                     std::span<const EventSpec<N>> events, const IntegratorConfig& cfg,
                                     double t0 = 0.0) {
  using State = std::array<double, N>;
  using T = detail::Dopri5;
  if (events.empty()) throw std::invalid_argument("integrate_until_event: no events given");

  PhaseResult<N> out;
  out.t_start = t0;
  out.state_start = s0;
  out.t_event = t0;
  out.state_event = s0;
  if (!detail::all_finite(s0)) {
    out.status = PhaseStatus::NonFinite;
    return out;
  }

  const double t_end = t0 + cfg.max_phase_time;
  double t = t0;
  State y = s0;
  State k1 = rhs(t, y);
  if (!detail::all_finite(k1)) {
    out.status = PhaseStatus::NonFinite;
    return out;
  }
  std::vector<double> g_prev(events.size());
  for (std::size_t i = 0; i < events.size(); ++i) g_prev[i] = events[i].residual(t, y);

  double h = std::min(cfg.initial_step, cfg.max_step);
  const double h_min = 1e-14 * std::max(1.0, std::abs(t0));
  State k2, k3, k4, k5, k6, k7, yt, y_new;

  while (t < t_end) {
    h = std::min({h, cfg.max_step, t_end - t});
    for (std::size_t i = 0; i < N; ++i) yt[i] = y[i] + h * T::a21 * k1[i];
    k2 = rhs(t + T::c2 * h, yt);
    for (std::size_t i = 0; i < N; ++i) yt[i] = y[i] + h * (T::a31 * k1[i] + T::a32 * k2[i]);
    k3 = rhs(t + T::c3 * h, yt);
    for (std::size_t i = 0; i < N; ++i) yt[i] = y[i] + h * (T::a41 * k1[i] + T::a42 * k2[i] + T::a43 * k3[i]);
    k4 = rhs(t + T::c4 * h, yt);
    for (std::size_t i = 0; i < N; ++i)
      yt[i] = y[i] + h * (T::a51 * k1[i] + T::a52 * k2[i] + T::a53 * k3[i] + T::a54 * k4[i]);
    k5 = rhs(t + T::c5 * h, yt);
    for (std::size_t i = 0; i < N; ++i)
      yt[i] = y[i] + h * (T::a61 * k1[i] + T::a62 * k2[i] + T::a63 * k3[i] + T::a64 * k4[i] + T::a65 * k5[i]);
    k6 = rhs(t + h, yt);
    for (std::size_t i = 0; i < N; ++i)
      y_new[i] = y[i] + h * (T::a71 * k1[i] + T::a73 * k3[i] + T::a74 * k4[i] + T::a75 * k5[i] + T::a76 * k6[i]);
    k7 = rhs(t + h, y_new);

    if (!detail::all_finite(y_new) || !detail::all_finite(k7)) {
      ++out.rejected_steps;
      h *= 0.25;
      if (h < h_min) {
        out.status = PhaseStatus::NonFinite;
        out.t_event = t;
        out.state_event = y;
        return out;
      }
      continue;
    }

    double err = 0.0;
    for (std::size_t i = 0; i < N; ++i) {
      const double e = h * (T::e1 * k1[i] + T::e3 * k3[i] + T::e4 * k4[i] + T::e5 * k5[i] + T::e6 * k6[i] +
                            T::e7 * k7[i]);
      const double sc = cfg.abs_tol + cfg.rel_tol * std::max(std::abs(y[i]), std::abs(y_new[i]));
      err += (e / sc) * (e / sc);
    }
    err = std::sqrt(err / static_cast<double>(N));

    if (err > 1.0) {
      ++out.rejected_steps;
      h *= std::max(0.2, 0.9 * std::pow(err, -0.25));
      if (h < h_min) {
        out.status = PhaseStatus::NonFinite;
        out.t_event = t;
        out.state_event = y;
        return out;
      }
      continue;
    }

    ++out.accepted_steps;
    DenseSegment<N> seg;
    seg.t0 = t;
    seg.h = h;
    seg.y0 = y;
    seg.y1 = y_new;
    for (std::size_t i = 0; i < N; ++i) {
      const double dy = y_new[i] - y[i];
      const double bspl = h * k1[i] - dy;
      seg.rc[0][i] = dy;
      seg.rc[1][i] = bspl;
      seg.rc[2][i] = dy - h * k7[i] - bspl;
      seg.rc[3][i] = h * (T::d1 * k1[i] + T::d3 * k3[i] + T::d4 * k4[i] + T::d5 * k5[i] + T::d6 * k6[i] +
                          T::d7 * k7[i]);
    }

    const double t_new = t + h;
    int best = -1;
    double best_t = 0.0, best_g = 0.0;
    for (std::size_t i = 0; i < events.size(); ++i) {
      const double g_new = events[i].residual(t_new, y_new);
      if (detail::crosses(g_prev[i], g_new, events[i].direction)) {
        double g_root = 0.0;
        const double tr = detail::locate_root(seg, events[i], g_prev[i], g_new, cfg.event_value_tol, g_root);
        const bool armed = !events[i].guard || events[i].guard(seg.eval(tr));
        if (armed && (best < 0 || tr < best_t)) {
          best = static_cast<int>(i);
          best_t = tr;
          best_g = g_root;
        }
      }
      g_prev[i] = g_new;
    }

    if (cfg.keep_dense) out.trajectory.push_back(seg);

    if (best >= 0) {
      out.status = PhaseStatus::Event;
      out.event_index = best;
      out.t_event = best_t;
      out.state_event = seg.eval(best_t);
      out.event_residual = best_g;
      return out;
    }

    t = t_new;
    y = y_new;
    k1 = k7;
    const double fac = err == 0.0 ? 5.0 : std::clamp(0.9 * std::pow(err, -0.2), 0.2, 5.0);
    h *= fac;
  }

  out.status = PhaseStatus::NoEvent;
  out.t_event = t;
  out.state_event = y;
  return out;
}

template <std::size_t N, class Rhs>
PhaseResult<N> integrate_until_event(Rhs&& rhs, const std::array<double, N>& s0,
                                     const std::vector<EventSpec<N>>& events, const IntegratorConfig& cfg,
                                     double t0 = 0.0) {
  return integrate_until_event<N>(std::forward<Rhs>(rhs), s0, std::span<const EventSpec<N>>(events), cfg, t0);
}

// Evaluate the continuous extension of a phase recorded with keep_dense.
// Throws std::out_of_range outside [t_start, t_event].
template <std::size_t N>
std::array<double, N> dense_eval(const PhaseResult<N>& pr, double t) {
  if (pr.trajectory.empty()) {
    if (t == pr.t_start) return pr.state_start;
    throw std::out_of_range("dense_eval: phase has no recorded interpolant");
  }
  if (t < pr.t_start || t > pr.t_event) throw std::out_of_range("dense_eval: time outside integrated span");
  if (t == pr.t_event) return pr.state_event;
  auto it = std::upper_bound(pr.trajectory.begin(), pr.trajectory.end(), t,
                             [](double v, const DenseSegment<N>& s) { return v < s.t0; });
  if (it != pr.trajectory.begin()) --it;
  return it->eval(t);
}

}  // namespace slip
