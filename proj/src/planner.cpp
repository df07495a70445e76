#include "slip/planner.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numbers>
#include <sstream>

namespace slip {

namespace {

constexpr double kDeg = std::numbers::pi / 180.0;

}  // namespace

AngleSequence::AngleSequence(std::vector<std::pair<double, int>> items) : items_(std::move(items)) {
  for (const auto& [deg, n] : items_) {
    if (n < 1) throw std::invalid_argument("AngleSequence: repeat counts must be >= 1");
    if (!(deg > 0.0 && deg <= 90.0)) throw std::invalid_argument("AngleSequence: angles must lie in (0, 90] deg");
  }
}

AngleSequence AngleSequence::parse(const std::string& text) {
  std::vector<std::pair<double, int>> items;
  std::stringstream ss(text);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    tok.erase(std::remove_if(tok.begin(), tok.end(), [](unsigned char c) { return std::isspace(c); }), tok.end());
    if (tok.empty()) continue;
    int n = 1;
    const auto caret = tok.find('^');
    std::size_t used = 0;
    double deg = 0.0;
    try {
      deg = std::stod(tok.substr(0, caret), &used);
      if (used != (caret == std::string::npos ? tok.size() : caret)) throw std::invalid_argument("trailing");
      if (caret != std::string::npos) {
        const std::string rep = tok.substr(caret + 1);
        n = std::stoi(rep, &used);
        if (used != rep.size()) throw std::invalid_argument("trailing");
      }
    } catch (const std::exception&) {
      throw std::invalid_argument("AngleSequence: cannot parse '" + tok + "'");
    }
    items.emplace_back(deg, n);
  }
  if (items.empty()) throw std::invalid_argument("AngleSequence: empty sequence");
  return AngleSequence(std::move(items));
}

AngleSequence AngleSequence::from_degrees(const std::vector<double>& per_step) {
  std::vector<std::pair<double, int>> items;
  for (double d : per_step) {
    if (!items.empty() && items.back().first == d) {
      ++items.back().second;
    } else {
      items.emplace_back(d, 1);
    }
  }
  return AngleSequence(std::move(items));
}

std::vector<double> AngleSequence::expand_deg() const {
  std::vector<double> out;
  for (const auto& [deg, n] : items_) out.insert(out.end(), static_cast<std::size_t>(n), deg);
  return out;
}

std::size_t AngleSequence::size() const {
  std::size_t n = 0;
  for (const auto& it : items_) n += static_cast<std::size_t>(it.second);
  return n;
}

AngleSequence reference_transition_sequence() {
  return AngleSequence({{81.886, 5},
                        {88.500, 1},
                        {62.400, 1},
                        {72.350, 1},
                        {71.100, 3},
                        {71.000, 1},
                        {74.400, 1},
                        {72.130, 1},
                        {74.000, 4},
                        {78.000, 2},
                        {76.500, 1},
                        {69.000, 1},
                        {81.728, 4}});
}

std::vector<double> PlanResult::alphas_deg() const {
  std::vector<double> out;
  out.reserve(steps.size());
  for (const auto& s : steps) out.push_back(s.alpha_deg);
  return out;
}

std::vector<std::pair<GaitLabel, GaitLabel>> PlanResult::transition_pairs() const {
  std::vector<std::pair<GaitLabel, GaitLabel>> out;
  for (int i : transitions) {
    out.emplace_back(steps[static_cast<std::size_t>(i - 1)].realized, steps[static_cast<std::size_t>(i)].realized);
  }
  return out;
}

namespace {

void finish_transitions(PlanResult& r) {
  r.transitions.clear();
  for (std::size_t i = 1; i < r.steps.size(); ++i) {
    if (r.steps[i].realized != r.steps[i - 1].realized) r.transitions.push_back(static_cast<int>(i));
  }
}

}  // namespace

PlanResult replay(const SectionState& start, const std::vector<double>& alphas_deg, const ModelParams& p,
                  const EnergyShell& shell, const IntegratorConfig& cfg) {
  PlanResult out;
  out.start = start;
  SectionState x = start;
  for (double deg : alphas_deg) {
    StepResult res;
    try {
      res = apply_step(x, deg * kDeg, p, shell, cfg);
    } catch (const OutsideShell& e) {
      out.failed = true;
      out.failure = e.what();
      break;
    }
    if (!res.ok()) {
      out.failed = true;
      out.failure = std::string(failure_name(res.reason)) + " in " + chart_name(res.failed_chart);
      break;
    }
    PlanStep st;
    st.alpha_deg = deg;
    st.alpha_rad = deg * kDeg;
    st.realized = res.realized;
    st.after = res.next;
    st.section_energy = res.summary.section_energy;
    out.max_energy_error = std::max(out.max_energy_error, std::abs(st.section_energy - shell.E) / shell.E);
    out.steps.push_back(st);
    x = res.next;
  }
  finish_transitions(out);
  return out;
}

PlanResult replay(const SectionState& start, const AngleSequence& seq, const ModelParams& p,
                  const EnergyShell& shell, const IntegratorConfig& cfg) {
  return replay(start, seq.expand_deg(), p, shell, cfg);
}

double RegionSet::window_at(GaitLabel g, const SectionState& x) const {
  const auto v = try_interpolate_field(mesh, window_fields[static_cast<std::size_t>(gait_index(g))], to_disc(x, shell));
  return v ? (*v)[0] : 0.0;
}

RegionSet build_region_set(Mesh mesh, const ModelParams& p, const EnergyShell& shell, const AngleGrid& grid,
                           const SweepOptions& opts) {
  RegionSet rs;
  rs.mesh = std::move(mesh);
  rs.shell = shell;
  rs.params = p;
  rs.data = sweep(rs.mesh, p, shell, grid, opts);
  for (GaitLabel g : {GaitLabel::R, GaitLabel::GR, GaitLabel::W}) {
    const auto i = static_cast<std::size_t>(gait_index(g));
    rs.windows[i] = viability(rs.data, g);
    rs.window_fields[i] = window_field(rs.windows[i]);
  }
  return rs;
}

namespace {

// Any successful grid angle, probing from the middle of the grid outwards.
bool has_success(const SectionState& x, GaitLabel g, const AngleGrid& grid, const ModelParams& p,
                 const EnergyShell& shell, const IntegratorConfig& cfg) {
  const int mid = grid.count / 2;
  for (int i = 0; i < grid.count; ++i) {
    const int a = i % 2 == 0 ? mid + i / 2 : mid - (i + 1) / 2;
    if (a < 0 || a >= grid.count) continue;
    try {
      if (gait_map(x, grid.rad(a), g, p, shell, cfg).ok()) return true;
    } catch (const OutsideShell&) {
    }
  }
  return false;
}

struct Candidate {
  int angle = -1;
  StepResult res;
  double score = 0.0;
};

// Best candidate by score (ties: lowest angle) whose landing passes accept().
template <class Accept>
const Candidate* pick(std::vector<Candidate>& cands, Accept&& accept) {
  std::stable_sort(cands.begin(), cands.end(), [](const Candidate& a, const Candidate& b) { return a.score > b.score; });
  for (const auto& c : cands) {
    if (accept(c)) return &c;
  }
  return nullptr;
}

}  // namespace

std::vector<int> transition_distance(const RegionSet& regions, GaitLabel from, GaitLabel to, double delta_alpha_deg,
                                     int max_depth) {
  const SweepData& d = regions.data;
  const auto trans = transitions(d, regions.mesh, regions.shell, from,
                                 regions.windows[static_cast<std::size_t>(gait_index(to))], delta_alpha_deg);
  std::vector<int> dist(d.vertices, kUnreachable);
  for (std::size_t v = 0; v < d.vertices; ++v) {
    if (trans[v]) dist[v] = 0;
  }
  // Landing triangles of every successful from-gait step, located once.
  std::vector<std::vector<std::array<int, 3>>> lands(d.vertices);
  for (std::size_t v = 0; v < d.vertices; ++v) {
    if (dist[v] == 0) continue;
    for (int a = 0; a < d.grid.count; ++a) {
      if (!d.success(v, a, from)) continue;
      const auto loc = regions.mesh.locate(to_disc(d.next[d.slot(v, a)], regions.shell));
      if (loc) lands[v].push_back(regions.mesh.triangles()[static_cast<std::size_t>(loc->triangle)]);
    }
  }
  for (int depth = 1; depth <= max_depth; ++depth) {
    bool changed = false;
    std::vector<int> next = dist;
    for (std::size_t v = 0; v < d.vertices; ++v) {
      if (dist[v] != kUnreachable) continue;
      for (const auto& tri : lands[v]) {
        int worst = 0;
        for (int u : tri) worst = std::max(worst, dist[static_cast<std::size_t>(u)]);
        if (worst == depth - 1) {
          next[v] = depth;
          changed = true;
          break;
        }
      }
    }
    dist.swap(next);
    if (!changed) break;
  }
  return dist;
}

namespace {

int landing_distance(const RegionSet& regions, const std::vector<int>& dist, const SectionState& x) {
  const auto loc = regions.mesh.locate(to_disc(x, regions.shell));
  if (!loc) return kUnreachable;
  int worst = 0;
  for (int u : regions.mesh.triangles()[static_cast<std::size_t>(loc->triangle)]) {
    worst = std::max(worst, dist[static_cast<std::size_t>(u)]);
  }
  return worst;
}

}  // namespace

PlanResult plan_transitions(const SectionState& start, const std::vector<GaitLabel>& itinerary,
                            const RegionSet& regions, const PlanOptions& opts) {
  if (itinerary.empty()) throw std::invalid_argument("plan_transitions: empty itinerary");
  const AngleGrid& grid = regions.data.grid;
  const ModelParams& p = regions.params;
  const EnergyShell& shell = regions.shell;
  const IntegratorConfig& cfg = opts.integrator;
  const double spacing = grid.spacing_deg();

  auto window_ok = [&](const SectionState& x, GaitLabel g, double need) {
    if (need - spacing <= 0.0) return has_success(x, g, grid, p, shell, cfg);
    const Window w = direct_window(x, g, grid, p, shell, cfg);
    return w.first >= 0 && w.width_deg >= need - spacing;
  };

  // Per stage: steps-to-transition fields at the strict and relaxed thresholds.
  std::vector<std::array<std::vector<int>, 2>> dist(itinerary.size());
  for (std::size_t k = 0; k + 1 < itinerary.size(); ++k) {
    dist[k][0] = transition_distance(regions, itinerary[k], itinerary[k + 1], opts.delta_alpha_deg);
    dist[k][1] = transition_distance(regions, itinerary[k], itinerary[k + 1], opts.min_delta_alpha_deg);
  }

  std::vector<double> alphas;
  std::vector<double> landing;
  SectionState x = start;
  std::size_t k = 0;
  int dwell = 0;
  while (static_cast<int>(alphas.size()) < opts.max_steps) {
    const bool last = k + 1 == itinerary.size();
    if (last && dwell >= opts.final_dwell && static_cast<int>(alphas.size()) >= opts.min_total_steps) break;
    const GaitLabel gi = itinerary[k];

    std::vector<Candidate> cands;
    for (int a = 0; a < grid.count; ++a) {
      StepResult res;
      try {
        res = apply_step(x, grid.rad(a), p, shell, cfg);
      } catch (const OutsideShell&) {
        continue;
      }
      if (res.ok() && res.realized == gi) cands.push_back({a, std::move(res), 0.0});
    }
    if (cands.empty()) {
      throw NoPlanFound("plan_transitions: no successful " + std::string(gait_name(gi)) + " step at step " +
                        std::to_string(alphas.size()));
    }

    const Candidate* chosen = nullptr;
    bool transition = false;
    double chosen_window = std::numeric_limits<double>::quiet_NaN();

    auto try_transition = [&](double need) {
      const GaitLabel gj = itinerary[k + 1];
      for (auto& c : cands) c.score = regions.window_at(gj, c.res.next);
      return pick(cands, [&](const Candidate& c) { return c.score >= need - spacing && window_ok(c.res.next, gj, need); });
    };

    // Relax the threshold once the strict field offers no route or the dwell budget is spent.
    int level = 0;
    if (!last) {
      bool strict_route = false;
      for (const auto& c : cands) strict_route |= landing_distance(regions, dist[k][0], c.res.next) != kUnreachable;
      if (!strict_route || dwell >= opts.max_dwell) level = 1;
    }
    const double need = level == 0 ? opts.delta_alpha_deg : opts.min_delta_alpha_deg;

    if (!last && dwell >= opts.min_dwell) {
      chosen = try_transition(need);
      if (chosen) transition = true;
    }
    if (!chosen) {
      // Keep the gait: nearest to the transition set, then widest own window.
      for (auto& c : cands) {
        const double w = regions.window_at(gi, c.res.next);
        if (last) {
          c.score = w;
        } else {
          const int dd = landing_distance(regions, dist[k][static_cast<std::size_t>(level)], c.res.next);
          c.score = -1000.0 * std::min(dd, 1000) + w;
        }
      }
      chosen = pick(cands, [&](const Candidate& c) { return window_ok(c.res.next, gi, 0.0); });
    }
    if (!chosen && !last) {
      chosen = try_transition(opts.min_delta_alpha_deg);
      if (chosen) transition = true;
    }
    if (!chosen) {
      throw NoPlanFound("plan_transitions: dead end in " + std::string(gait_name(gi)) + " after " +
                        std::to_string(alphas.size()) + " steps");
    }
    if (transition) chosen_window = direct_window(chosen->res.next, itinerary[k + 1], grid, p, shell, cfg).width_deg;

    alphas.push_back(grid.deg(chosen->angle));
    landing.push_back(chosen_window);
    x = chosen->res.next;
    if (transition) {
      ++k;
      dwell = 0;
    } else {
      ++dwell;
    }
  }
  if (k + 1 != itinerary.size() || dwell < opts.final_dwell || static_cast<int>(alphas.size()) < opts.min_total_steps) {
    throw NoPlanFound("plan_transitions: itinerary not completed within " + std::to_string(opts.max_steps) + " steps");
  }

  // Independent replay from scratch is the returned plan.
  PlanResult out = replay(start, alphas, p, shell, cfg);
  if (out.failed || out.steps.size() != alphas.size()) throw NoPlanFound("plan_transitions: replay diverged: " + out.failure);
  for (std::size_t i = 0; i < out.steps.size(); ++i) out.steps[i].landing_window_deg = landing[i];
  return out;
}

PlanSearch search_plan(const std::vector<GaitLabel>& itinerary, const RegionSet& regions, const PlanOptions& opts,
                       int max_candidates) {
  if (itinerary.empty()) throw std::invalid_argument("search_plan: empty itinerary");
  const GaitLabel g0 = itinerary.front();
  const auto stab = finite_stability(regions.data, g0);
  const auto& win = regions.windows[static_cast<std::size_t>(gait_index(g0))];
  std::vector<std::size_t> order;
  for (std::size_t v = 0; v < stab.size(); ++v) {
    if (stab[v] > 0) order.push_back(v);
  }
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (stab[a] != stab[b]) return stab[a] > stab[b];
    return win[a].width_deg > win[b].width_deg;
  });
  PlanSearch out;
  for (std::size_t v : order) {
    if (out.candidates_tried >= max_candidates) break;
    ++out.candidates_tried;
    try {
      out.plan = plan_transitions(from_disc(regions.mesh.vertices()[v], regions.shell), itinerary, regions, opts);
      out.start_vertex = v;
      return out;
    } catch (const NoPlanFound&) {
    }
  }
  throw NoPlanFound("search_plan: no start vertex completes the itinerary (" + std::to_string(out.candidates_tried) +
                    " tried)");
}

namespace {

bool better(const PlanResult& a, const PlanResult& b) {
  if (a.steps.size() != b.steps.size()) return a.steps.size() > b.steps.size();
  return a.transitions.size() > b.transitions.size();
}

}  // namespace

ReplaySearch search_replay_start(const AngleSequence& seq, const Mesh& mesh, const ModelParams& p,
                                 const EnergyShell& shell, const IntegratorConfig& cfg, int min_steps,
                                 int min_transitions, int refine_rounds) {
  const std::vector<double> alphas = seq.expand_deg();
  ReplaySearch out;
  bool have = false;
  auto consider = [&](const SectionState& x) {
    ++out.candidates;
    PlanResult r = replay(x, alphas, p, shell, cfg);
    if (!have || better(r, out.best)) {
      out.best = std::move(r);
      have = true;
    }
  };
  for (const auto& v : mesh.vertices()) consider(from_disc(v, shell));

  auto done = [&] {
    return static_cast<int>(out.best.steps.size()) >= min_steps &&
           static_cast<int>(out.best.transitions.size()) >= min_transitions;
  };
  double h = shell.L * std::sqrt(std::numbers::pi / std::max<double>(static_cast<double>(mesh.vertex_count()), 1.0));
  for (int round = 0; round < refine_rounds && !done(); ++round, h *= 0.5) {
    ++out.refine_rounds;
    const DiscPoint c = to_disc(out.best.start, shell);
    for (int i = -3; i <= 3; ++i) {
      for (int j = -3; j <= 3; ++j) {
        if (i == 0 && j == 0) continue;
        const DiscPoint q{c.r_hat + h * i / 3.0, c.vy_hat + h * j / 3.0};
        if (q.r_hat * q.r_hat + q.vy_hat * q.vy_hat >= shell.L * shell.L) continue;
        consider(from_disc(q, shell));
      }
    }
  }
  out.success = done();
  return out;
}

std::vector<TrajectorySample> plan_trajectory(const PlanResult& plan, const ModelParams& p, const EnergyShell& shell,
                                              const IntegratorConfig& cfg, double sample_dt) {
  std::vector<TrajectorySample> out;
  StepOptions so;
  so.integrator = cfg;
  so.record_trajectory = true;
  so.sample_dt = sample_dt;
  SectionState x = plan.start;
  for (std::size_t i = 0; i < plan.steps.size(); ++i) {
    const StepResult res = apply_step(x, plan.steps[i].alpha_rad, p, shell, so);
    auto& s = res.summary.samples;
    // The first sample repeats the previous step's section crossing.
    out.insert(out.end(), s.begin() + (i == 0 || s.empty() ? 0 : 1), s.end());
    if (!res.ok()) break;
    so.t0 += res.summary.duration;
    so.foot_x = res.summary.end_foot_x;
    x = res.next;
  }
  return out;
}

}  // namespace slip
