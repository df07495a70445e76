// Acceptance checks at desk scale. Prints one PASS/FAIL line per criterion and
// exits nonzero if any fails. Artifacts go to ./acceptance_out.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numbers>
#include <numeric>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "slip/fixed_point.hpp"
#include "slip/io.hpp"

using namespace slip;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr double kDeg = std::numbers::pi / 180.0;
constexpr GaitLabel kGaits[] = {GaitLabel::R, GaitLabel::GR, GaitLabel::W};
const fs::path kOut = "acceptance_out";

int failures = 0;

void report(int id, bool pass, const std::string& what, const std::string& detail) {
  std::printf("[%s] %d %s: %s\n", pass ? "PASS" : "FAIL", id, what.c_str(), detail.c_str());
  std::fflush(stdout);
  failures += !pass;
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

const ModelParams kP{};
const EnergyShell kShell = shell_constants(kP, 820.0);

// ---- 1, 2 ---------------------------------------------------------------

void energy_and_integrator() {
  const auto t0 = std::chrono::steady_clock::now();
  const FixedPoint fp = search_fixed_point(GaitLabel::W, kP, kShell, IntegratorConfig{}, 55 * kDeg, 90 * kDeg);
  SectionState x{fp.r, 0.0};
  double worst = 0.0, worst_residual = 0.0;
  int done = 0;
  for (; done < 25; ++done) {
    const StepResult s = gait_map(x, fp.alpha, GaitLabel::W, kP, kShell, IntegratorConfig{});
    if (!s.ok()) break;
    worst = std::max(worst, std::abs(s.summary.section_energy - 820.0) / 820.0);
    worst_residual = std::max(worst_residual, s.summary.max_event_residual);
    x = s.next;
  }
  const double dt = seconds_since(t0);
  report(1, done == 25 && worst < 1e-5 && dt < 5.0, "energy conservation",
         fmt("W fixed point r=%.6f m alpha=%.4f deg, %d/25 steps, max |E-820|/820 = %.3e, %.2f s", fp.r, fp.alpha / kDeg,
             done, worst, dt));

  // Ballistic apex from (0, 1, 2, 3).
  const std::vector<EventSpec<4>> ev{{[](double, const Vec4& y) { return y[3]; }, Direction::Falling, {}}};
  const auto res = integrate_until_event<4>([](double, const Vec4& y) { return flight_deriv(flight_from(y), kP); },
                                            Vec4{0.0, 1.0, 2.0, 3.0}, ev, IntegratorConfig{});
  const auto apex = oracle::ballistic_apex(1.0, 3.0, kP.g);
  const double et = std::abs(res.t_event - apex.t), ey = std::abs(res.state_event[1] - apex.y);
  const bool published = std::abs(res.t_event - 0.305810) < 5e-7 && std::abs(res.state_event[1] - 1.458716) < 5e-7;

  // Event residuals across all three gaits.
  for (GaitLabel g : {GaitLabel::R, GaitLabel::GR}) {
    try {
      const FixedPoint f = search_fixed_point(g, kP, kShell, IntegratorConfig{}, 55 * kDeg, 90 * kDeg);
      SectionState y{f.r, 0.0};
      for (int i = 0; i < 10; ++i) {
        const StepResult s = gait_map(y, f.alpha, g, kP, kShell, IntegratorConfig{});
        if (!s.ok()) break;
        worst_residual = std::max(worst_residual, s.summary.max_event_residual);
        y = s.next;
      }
    } catch (const NoConvergence&) {
    }
  }
  worst_residual = std::max(worst_residual, std::abs(res.event_residual));
  report(2, res.fired() && et < 1e-8 && ey < 1e-8 && published && worst_residual < 1e-10, "integrator oracle",
         fmt("apex t=%.9f s y=%.9f m, errors %.2e / %.2e vs closed form, max event residual %.2e", res.t_event,
             res.state_event[1], et, ey, worst_residual));
}

// ---- 3 ------------------------------------------------------------------

void force_model() {
  std::mt19937_64 rng(20240601);
  std::uniform_real_distribution<double> r(0.8, 1.05), th(1.1, 2.0), rd(-1.5, 1.5), thd(-2.0, 2.0), xs(0.2, 1.0);
  const oracle::Params op{kP.m, kP.k, kP.r0, kP.g};
  double worst = 0.0, worst_leg = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const DoubleState s{r(rng), th(rng), rd(rng), thd(rng), xs(rng)};
    const Vec5 got = double_deriv(s, kP);
    const auto want = oracle::double_stance({s.r, s.theta, s.rdot, s.thetadot, s.x_sep}, op);
    for (int j = 0; j < 5; ++j) worst = std::max(worst, std::abs(got[j] - want[j]));
    worst_leg = std::max(worst_leg, std::abs(back_leg_length(s) - oracle::back_leg(s.r, s.theta, s.x_sep)));
  }
  report(3, worst < 1e-10 && worst_leg < 1e-12, "force-model oracle",
         fmt("1000 states, max derivative error %.2e, max back-leg error %.2e", worst, worst_leg));
}

// ---- 4 ------------------------------------------------------------------

int caap_steps(const FixedPoint& fp, const IntegratorConfig& cfg) {
  SectionState x{fp.r, 0.0};
  for (int i = 0; i < 25; ++i) {
    const StepResult s = gait_map(x, fp.alpha, fp.gait, kP, kShell, cfg);
    if (!s.ok()) return i;
    x = s.next;
  }
  return 25;
}

void fixed_points() {
  IntegratorConfig tight;
  tight.rel_tol = 1e-10;
  tight.abs_tol = 1e-12;
  bool ok = true;
  std::string detail;
  for (GaitLabel g : kGaits) {
    try {
      const FixedPoint fp = search_fixed_point(g, kP, kShell, tight, 55 * kDeg, 90 * kDeg);
      const double res = return_map_residual(g, fp.r, fp.alpha, kP, kShell, tight);
      const int steps = caap_steps(fp, tight);
      int loose = 0;
      try {
        const FixedPoint fl = search_fixed_point(g, kP, kShell, IntegratorConfig{}, 55 * kDeg, 90 * kDeg);
        loose = caap_steps(fl, IntegratorConfig{});
      } catch (const NoConvergence&) {
      }
      ok = ok && res < 1e-6 && steps == 25;
      detail += fmt("%s r*=%.6f alpha*=%.4f deg res=%.1e steps=%d (default tol: %d); ", gait_name(g), fp.r,
                    fp.alpha / kDeg, res, steps, loose);
    } catch (const NoConvergence& e) {
      ok = false;
      detail += std::string(gait_name(g)) + " not found; ";
    }
  }
  report(4, ok, "fixed points", detail + "tolerances rel 1e-10 abs 1e-12");
}

// ---- 5, 6, 9 -------------------------------------------------------------

// Largest connected set of vertices at value cap (mesh edges), and whether it
// contains a full triangle.
std::pair<int, bool> plateau(const Mesh& m, const std::vector<int>& v, int cap) {
  std::vector<int> parent(m.vertex_count());
  std::iota(parent.begin(), parent.end(), 0);
  std::function<int(int)> find = [&](int a) { return parent[a] == a ? a : parent[a] = find(parent[a]); };
  for (const auto& t : m.triangles()) {
    for (int e = 0; e < 3; ++e) {
      const int a = t[e], b = t[(e + 1) % 3];
      if (v[a] == cap && v[b] == cap) parent[find(a)] = find(b);
    }
  }
  std::vector<int> size(m.vertex_count(), 0);
  for (std::size_t i = 0; i < m.vertex_count(); ++i) {
    if (v[i] == cap) ++size[find(static_cast<int>(i))];
  }
  std::set<int> with_triangle;
  for (const auto& t : m.triangles()) {
    if (v[t[0]] == cap && v[t[1]] == cap && v[t[2]] == cap) with_triangle.insert(find(t[0]));
  }
  int best = 0;
  bool tri = false;
  for (std::size_t i = 0; i < m.vertex_count(); ++i) {
    if (size[i] > best) {
      best = size[i];
      tri = with_triangle.count(static_cast<int>(i)) > 0;
    }
  }
  return {best, tri};
}

std::vector<std::string> int_strings(const std::vector<int>& v) {
  std::vector<std::string> out;
  for (int x : v) out.push_back(std::to_string(x));
  return out;
}

void write_region_bundle(const fs::path& dir, const RegionSet& rs) {
  fs::create_directories(dir);
  for (GaitLabel g : kGaits) {
    write_region_csv((dir / (std::string("stability_") + gait_name(g) + ".csv")).string(), rs.mesh, rs.shell, "steps",
                     int_strings(finite_stability(rs.data, g)));
    std::vector<std::string> w;
    for (const auto& x : rs.windows[gait_index(g)]) w.push_back(format_double(x.width_deg));
    write_region_csv((dir / (std::string("viability_") + gait_name(g) + ".csv")).string(), rs.mesh, rs.shell,
                     "window_deg", w);
    std::vector<std::string> o;
    for (const auto& x : one_step_to_stable(rs.data, g)) o.push_back(x ? format_double(x->alpha_deg) : std::string());
    write_region_csv((dir / (std::string("onestep_") + gait_name(g) + ".csv")).string(), rs.mesh, rs.shell,
                     "alpha_deg", o);
  }
}

RegionSet region_statistics() {
  const auto t0 = std::chrono::steady_clock::now();
  const AngleGrid grid{55.0, 90.0, 100};
  SweepOptions so;
  so.n_cap = 25;
  RegionSet rs = build_region_set(build_mesh(kShell, 2000), kP, kShell, grid, so);
  const double dt = seconds_since(t0);

  const auto [w_size, w_tri] = plateau(rs.mesh, finite_stability(rs.data, GaitLabel::W), 25);
  const auto [gr_size, gr_tri] = plateau(rs.mesh, finite_stability(rs.data, GaitLabel::GR), 25);
  report(5, w_tri && gr_tri && dt < 600.0, "(a) stability plateau at 25",
         fmt("largest W plateau %d vertices%s, largest GR plateau %d vertices%s; sweep %.1f s", w_size,
             w_tri ? "" : " (no full triangle)", gr_size, gr_tri ? "" : " (no full triangle)", dt));

  const auto rst = finite_stability(rs.data, GaitLabel::R);
  double sum = 0.0;
  int n = 0;
  for (int s : rst) {
    if (s > 0) {
      sum += s;
      ++n;
    }
  }
  const double mean_r = n ? sum / n : 0.0;
  report(5, mean_r >= 5.0 && mean_r <= 15.0, "(b) mean R steps in [5, 15]",
         fmt("mean %.3f over %d vertices with nonzero R steps", mean_r, n));

  double max_w = 0.0;
  std::string per;
  for (GaitLabel g : kGaits) {
    double m = 0.0;
    for (const auto& w : rs.windows[gait_index(g)]) m = std::max(m, w.width_deg);
    max_w = std::max(max_w, m);
    per += fmt(" %s %.2f", gait_name(g), m);
  }
  report(5, max_w >= 5.0 && max_w <= 15.0, "(c) max viability window in [5, 15] deg",
         fmt("max %.2f deg; per gait:%s", max_w, per.c_str()));

  write_region_bundle(kOut / "regions", rs);
  return rs;
}

void nesting(const RegionSet& rs) {
  int violations = 0, checked = 0;
  for (GaitLabel g : kGaits) {
    const auto& w = rs.windows[gait_index(g)];
    for (const auto& x : w) {
      const bool a4 = x.width_deg >= 4.0, a2 = x.width_deg >= 2.0, a1 = x.width_deg >= 1.0;
      violations += (a4 && !a2) + (a2 && !a1);
      ++checked;
    }
    for (GaitLabel from : kGaits) {
      if (from == g) continue;
      const auto t4 = transitions(rs.data, rs.mesh, rs.shell, from, w, 4.0);
      const auto t2 = transitions(rs.data, rs.mesh, rs.shell, from, w, 2.0);
      const auto t1 = transitions(rs.data, rs.mesh, rs.shell, from, w, 1.0);
      for (std::size_t v = 0; v < t1.size(); ++v) {
        violations += (t4[v] && !t2[v]) + (t2[v] && !t1[v]);
        ++checked;
      }
    }
  }
  report(6, violations == 0, "viability nesting",
         fmt("%d violations over %d vertex checks (windows and transition sets, thresholds 4/2/1 deg)", violations,
             checked));
}

void determinism(const RegionSet& first) {
  const auto t0 = std::chrono::steady_clock::now();
  SweepOptions s1, s8;
  s8.workers = 8;
  const RegionSet again = build_region_set(first.mesh, kP, kShell, first.data.grid, s1);
  const RegionSet eight = build_region_set(first.mesh, kP, kShell, first.data.grid, s8);
  write_region_bundle(kOut / "regions_run2", again);
  write_region_bundle(kOut / "regions_workers8", eight);
  int files = 0, diff = 0;
  for (const auto& e : fs::directory_iterator(kOut / "regions")) {
    const std::string a = slurp(e.path());
    ++files;
    diff += a != slurp(kOut / "regions_run2" / e.path().filename());
    diff += a != slurp(kOut / "regions_workers8" / e.path().filename());
  }
  report(9, files == 9 && diff == 0, "determinism",
         fmt("%d region CSVs, %d mismatches across a repeat run and workers 1 vs 8 (%.1f s)", files, diff,
             seconds_since(t0)));
}

// ---- 7 ------------------------------------------------------------------

void transition_demo(const RegionSet& rs) {
  const std::vector<GaitLabel> itinerary{GaitLabel::R, GaitLabel::GR, GaitLabel::W, GaitLabel::GR, GaitLabel::W,
                                         GaitLabel::R};
  PlanResult plan;
  std::string error;
  try {
    plan = search_plan(itinerary, rs, PlanOptions{}).plan;
  } catch (const NoPlanFound& e) {
    error = e.what();
  }
  if (!error.empty()) {
    report(7, false, "transition demo", "NoPlanFound: " + error);
    return;
  }
  std::set<std::pair<GaitLabel, GaitLabel>> pairs;
  std::string names;
  for (const auto& p : plan.transition_pairs()) {
    pairs.insert(p);
    names += std::string(gait_name(p.first)) + "->" + gait_name(p.second) + " ";
  }
  const bool covers = pairs.count({GaitLabel::R, GaitLabel::GR}) && pairs.count({GaitLabel::GR, GaitLabel::W}) &&
                      pairs.count({GaitLabel::W, GaitLabel::GR}) && pairs.count({GaitLabel::W, GaitLabel::R});

  // Independent re-simulation straight from the hybrid map.
  double diff = 0.0, energy = 0.0;
  SectionState x = plan.start;
  bool replay_ok = true;
  for (const auto& s : plan.steps) {
    const StepResult r = apply_step(x, s.alpha_deg * kDeg, kP, kShell, IntegratorConfig{});
    if (!r.ok() || r.realized != s.realized) {
      replay_ok = false;
      break;
    }
    const DiscPoint a = to_disc(r.next, kShell), b = to_disc(s.after, kShell);
    diff = std::max(diff, std::hypot(a.r_hat - b.r_hat, a.vy_hat - b.vy_hat));
    energy = std::max(energy, std::abs(r.summary.section_energy - 820.0) / 820.0);
    x = r.next;
  }
  const bool pass = replay_ok && plan.transitions.size() >= 3 && covers && plan.steps.size() >= 20 && diff < 1e-9 &&
                    energy < 1e-5;
  report(7, pass, "transition demo",
         fmt("%zu steps, %zu transitions [%s], replay diff %.2e, max energy error %.2e%s", plan.steps.size(),
             plan.transitions.size(), names.c_str(), diff, energy, replay_ok ? "" : ", replay diverged"));

  fs::create_directories(kOut / "plan");
  write_json((kOut / "plan" / "plan.json").string(), plan_to_json(plan, kShell));
  write_trajectory_csv((kOut / "plan" / "plan_trajectory.csv").string(),
                       plan_trajectory(plan, kP, kShell, IntegratorConfig{}));
}

// ---- 8 ------------------------------------------------------------------

void interpolation_fidelity() {
  const auto t0 = std::chrono::steady_clock::now();
  const double alpha_deg = 69.0;
  const Mesh mesh = build_mesh(kShell, 20000);
  SweepOptions so;
  so.n_cap = 1;
  const SweepData d = sweep(mesh, kP, kShell, AngleGrid{alpha_deg, alpha_deg, 1}, so);
  const FieldMap f = next_state_field(d, kShell, 0);

  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  double worst = 0.0;
  int tested = 0, draws = 0;
  while (tested < 100 && draws < 100000) {
    ++draws;
    const DiscPoint q{u(rng) * kShell.L, u(rng) * kShell.L};
    if (std::hypot(q.r_hat, q.vy_hat) > 0.98 * kShell.L) continue;
    const auto loc = mesh.locate(q);
    if (!loc) continue;
    const auto interp = try_interpolate_field(mesh, f, q);
    if (!interp) continue;
    const StepResult s = apply_step(from_disc(q, kShell), alpha_deg * kDeg, kP, kShell, IntegratorConfig{});
    const int label = f.labels[mesh.triangles()[loc->triangle][0]];
    if (!s.ok() || gait_index(s.realized) != label) continue;
    const DiscPoint direct = to_disc(s.next, kShell);
    worst = std::max(worst, std::hypot((*interp)[0] - direct.r_hat, (*interp)[1] - direct.vy_hat));
    ++tested;
  }
  report(8, tested == 100 && worst < 5e-3, "interpolated-map fidelity",
         fmt("%d points on a %zu-vertex mesh at alpha=%.1f deg, max error %.3e (normalized m), %.1f s", tested,
             mesh.vertex_count(), alpha_deg, worst, seconds_since(t0)));
}

// ---- 10 -----------------------------------------------------------------

void sequence_replay(const Mesh& mesh) {
  const auto t0 = std::chrono::steady_clock::now();
  const AngleSequence seq = reference_transition_sequence();
  const ReplaySearch rs = search_replay_start(seq, mesh, kP, kShell, IntegratorConfig{});
  const bool pass = rs.best.steps.size() >= 20 && rs.best.transitions.size() >= 2;
  json m = plan_to_json(rs.best, kShell);
  m["sequence_deg"] = seq.expand_deg();
  m["search"] = {{"outcome", pass ? "pass" : "search exhausted"},
                 {"candidates", rs.candidates},
                 {"refine_rounds", rs.refine_rounds},
                 {"completed_steps", rs.best.steps.size()},
                 {"sequence_steps", seq.size()},
                 {"mesh_vertices", mesh.vertex_count()},
                 {"mesh_checksum", checksum_hex(mesh.checksum())}};
  fs::create_directories(kOut);
  write_json((kOut / "replay_manifest.json").string(), m);
  std::string gaits;
  for (const auto& s : rs.best.steps) gaits += std::string(gait_name(s.realized)) + " ";
  report(10, pass, "sequence replay",
         fmt("%s after %d start states: best %zu/%zu steps, %zu transitions [%s] (%.1f s), recorded in %s",
             pass ? "pass" : "search exhausted", rs.candidates, rs.best.steps.size(), seq.size(),
             rs.best.transitions.size(), gaits.c_str(), seconds_since(t0),
             (kOut / "replay_manifest.json").string().c_str()));
}

}  // namespace

int main() {
  std::setvbuf(stdout, nullptr, _IONBF, 0);
  fs::create_directories(kOut);
  energy_and_integrator();
  force_model();
  fixed_points();
  const RegionSet rs = region_statistics();
  nesting(rs);
  transition_demo(rs);
  interpolation_fidelity();
  determinism(rs);
  sequence_replay(rs.mesh);
  std::printf("%d failing check(s)\n", failures);
  return failures == 0 ? 0 : 1;
}
