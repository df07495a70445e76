// slip: simulation, region sweeps, planning and export for the SLIP biped.
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "slip/fixed_point.hpp"
#include "slip/io.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace slip;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitNoPlan = 3;
constexpr double kDeg = std::numbers::pi / 180.0;
const GaitLabel kGaits[] = {GaitLabel::R, GaitLabel::GR, GaitLabel::W};

struct Common {
  std::string params_path;
  double energy = 820.0;
  int vertices = 2000;
  int angle_count = 100;
  double alpha_min = 55.0;
  double alpha_max = 90.0;
  int n_cap = 25;
  double delta_alpha = 2.0;
  int workers = 1;
  std::string out = ".";
};

struct Resolved {
  ModelParams params;
  EnergyShell shell;
  AngleGrid grid;
  SweepOptions sweep;
};

Resolved resolve(const Common& c) {
  Resolved r;
  r.params = c.params_path.empty() ? ModelParams{} : load_params(c.params_path);
  try {
    r.shell = shell_constants(r.params, c.energy);
  } catch (const EnergyTooLow& e) {
    throw ConfigError(e.what());
  }
  r.grid = AngleGrid{c.alpha_min, c.alpha_max, c.angle_count};
  r.sweep.n_cap = c.n_cap;
  r.sweep.workers = c.workers;
  try {
    r.grid.validate();
    r.sweep.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  if (c.vertices < 4) throw ConfigError("--vertices must be >= 4");
  if (!(c.delta_alpha >= 0.0)) throw ConfigError("--delta-alpha must be >= 0");
  fs::create_directories(c.out);
  return r;
}

GaitLabel gait_arg(const std::string& s) {
  const auto g = parse_gait(s);
  if (!g) throw ConfigError("unknown gait '" + s + "' (expected R, GR or W)");
  return *g;
}

std::vector<GaitLabel> itinerary_arg(const std::string& s) {
  std::vector<GaitLabel> out;
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, ',')) out.push_back(gait_arg(tok));
  if (out.empty()) throw ConfigError("empty itinerary");
  return out;
}

std::string path_in(const Common& c, const std::string& name) { return (fs::path(c.out) / name).string(); }

void add_common(CLI::App* app, Common& c, bool grid) {
  app->add_option("--params", c.params_path, "Model parameters JSON");
  app->add_option("--energy", c.energy, "Total energy (J)");
  app->add_option("--out", c.out, "Output directory");
  if (!grid) return;
  app->add_option("--vertices", c.vertices, "Mesh vertex count");
  app->add_option("--angles", c.angle_count, "Number of grid angles");
  app->add_option("--alpha-min", c.alpha_min, "Smallest angle of attack (deg)");
  app->add_option("--alpha-max", c.alpha_max, "Largest angle of attack (deg)");
  app->add_option("--n-cap", c.n_cap, "Step cap for finite stability");
  app->add_option("--delta-alpha", c.delta_alpha, "Viability window for transitions (deg)");
  app->add_option("--workers", c.workers, "Worker threads");
}

json manifest(const Resolved& r, const Mesh& mesh, const std::string& command) {
  json m = sweep_manifest(r.params, r.shell, r.grid, r.sweep.n_cap, mesh);
  m["command"] = command;
  return m;
}

// ---- region outputs -------------------------------------------------------

void write_stability(const Common& c, const Resolved& r, const RegionSet& rs, bool slices, json& files) {
  for (GaitLabel g : kGaits) {
    const auto st = finite_stability(rs.data, g);
    std::vector<std::string> vals;
    for (int s : st) vals.push_back(std::to_string(s));
    const std::string name = std::string("stability_") + gait_name(g) + ".csv";
    write_region_csv(path_in(c, name), rs.mesh, r.shell, "steps", vals);
    files.push_back(name);

    const auto os = one_step_to_stable(rs.data, g);
    std::vector<std::string> ov;
    for (const auto& o : os) ov.push_back(o ? format_double(o->alpha_deg) : std::string());
    const std::string oname = std::string("onestep_") + gait_name(g) + ".csv";
    write_region_csv(path_in(c, oname), rs.mesh, r.shell, "alpha_deg", ov);
    files.push_back(oname);

    if (!slices) continue;
    const std::string sname = std::string("stability_slices_") + gait_name(g) + ".csv";
    std::ofstream f(path_in(c, sname), std::ios::binary);
    f << "vertex_id,angle_index,alpha_deg,alpha_rad,steps\n";
    for (std::size_t v = 0; v < rs.data.vertices; ++v) {
      for (int a = 0; a < r.grid.count; ++a) {
        f << v << ',' << a << ',' << format_double(r.grid.deg(a)) << ',' << format_double(r.grid.rad(a)) << ','
          << rs.data.steps_for(v, a, g) << '\n';
      }
    }
    files.push_back(sname);
  }
}

void write_viability(const Common& c, const Resolved& r, const RegionSet& rs, json& files) {
  for (GaitLabel g : kGaits) {
    std::vector<std::string> vals;
    for (const auto& w : rs.windows[static_cast<std::size_t>(gait_index(g))]) vals.push_back(format_double(w.width_deg));
    const std::string name = std::string("viability_") + gait_name(g) + ".csv";
    write_region_csv(path_in(c, name), rs.mesh, r.shell, "window_deg", vals);
    files.push_back(name);
  }
}

void write_transitions(const Common& c, const Resolved& r, const RegionSet& rs,
                       const std::vector<std::pair<GaitLabel, GaitLabel>>& pairs, json& files, json& counts) {
  for (const auto& [from, to] : pairs) {
    const auto t = transitions(rs.data, rs.mesh, r.shell, from, rs.windows[static_cast<std::size_t>(gait_index(to))],
                               c.delta_alpha);
    std::vector<std::string> vals;
    int n = 0;
    for (const auto& x : t) {
      vals.push_back(x ? format_double(x->alpha_deg) : std::string());
      n += x.has_value();
    }
    const std::string name = std::string("transitions_") + gait_name(from) + "_" + gait_name(to) + ".csv";
    write_region_csv(path_in(c, name), rs.mesh, r.shell, "alpha_deg", vals);
    files.push_back(name);
    counts[std::string(gait_name(from)) + "->" + gait_name(to)] = n;
  }
}

std::vector<std::pair<GaitLabel, GaitLabel>> default_pairs() {
  return {{GaitLabel::R, GaitLabel::GR}, {GaitLabel::GR, GaitLabel::W}, {GaitLabel::W, GaitLabel::GR}, {GaitLabel::W, GaitLabel::R}};
}

// ---- plan ---------------------------------------------------------------------

struct PlanArgs {
  std::string itinerary = "R,GR,W,GR,W,R";
  std::optional<double> r;
  std::optional<double> vy;
  int max_candidates = 200;
  int min_dwell = 3;
  int max_dwell = 8;
  int final_dwell = 5;
  int min_steps = 20;
  int max_steps = 80;
  double min_delta_alpha = 0.0;
};

json run_plan(const Common& c, const Resolved& r, const RegionSet& rs, const PlanArgs& a, const std::string& stem) {
  const auto itin = itinerary_arg(a.itinerary);
  PlanOptions po;
  po.delta_alpha_deg = c.delta_alpha;
  po.min_delta_alpha_deg = a.min_delta_alpha;
  po.min_dwell = a.min_dwell;
  po.max_dwell = a.max_dwell;
  po.final_dwell = a.final_dwell;
  po.min_total_steps = a.min_steps;
  po.max_steps = a.max_steps;
  PlanResult plan;
  json info;
  if (a.r || a.vy) {
    if (!a.r || !a.vy) throw ConfigError("--r and --vy go together");
    const SectionState x{*a.r, *a.vy};
    if (disc_fraction(x, r.shell) > 1.0) throw ConfigError("start state lies outside the energy shell");
    plan = plan_transitions(x, itin, rs, po);
    info["start_search"] = nullptr;
  } else {
    const PlanSearch s = search_plan(itin, rs, po, a.max_candidates);
    plan = s.plan;
    info["start_search"] = {{"vertex", s.start_vertex}, {"candidates_tried", s.candidates_tried}};
  }
  json j = plan_to_json(plan, r.shell);
  j["itinerary"] = a.itinerary;
  j["delta_alpha_deg"] = c.delta_alpha;
  j["min_delta_alpha_deg"] = a.min_delta_alpha;
  j["start_search"] = info["start_search"];
  j["mesh_checksum"] = checksum_hex(rs.mesh.checksum());
  j["grid"] = grid_to_json(r.grid);
  write_json(path_in(c, stem + ".json"), j);
  write_trajectory_csv(path_in(c, stem + "_trajectory.csv"), plan_trajectory(plan, r.params, r.shell, IntegratorConfig{}));
  return j;
}

json run_replay_search(const Common& c, const Resolved& r, const Mesh& mesh) {
  const AngleSequence seq = reference_transition_sequence();
  const ReplaySearch rs = search_replay_start(seq, mesh, r.params, r.shell, IntegratorConfig{});
  json j = plan_to_json(rs.best, r.shell);
  j["sequence_deg"] = seq.expand_deg();
  j["search"] = {{"success", rs.success},
                 {"candidates", rs.candidates},
                 {"refine_rounds", rs.refine_rounds},
                 {"outcome", rs.success ? "pass" : "search exhausted"},
                 {"completed_steps", rs.best.steps.size()},
                 {"sequence_steps", seq.size()}};
  write_json(path_in(c, "replay.json"), j);
  write_trajectory_csv(path_in(c, "replay_trajectory.csv"), plan_trajectory(rs.best, r.params, r.shell, IntegratorConfig{}));
  return j;
}

// ---- simulate -----------------------------------------------------------------

struct SimArgs {
  std::optional<double> r;
  std::optional<double> vy;
  std::string angles;
  std::string gait = "auto";
  std::string fixed_point;
  int steps = 25;
};

int cmd_simulate(const Common& c, const SimArgs& a) {
  const Resolved r = resolve(c);
  SectionState x{};
  std::vector<double> alphas;
  json fp_json = nullptr;
  if (!a.fixed_point.empty()) {
    const GaitLabel g = gait_arg(a.fixed_point);
    const FixedPoint fp = search_fixed_point(g, r.params, r.shell, IntegratorConfig{}, c.alpha_min * kDeg, c.alpha_max * kDeg);
    x = SectionState{fp.r, 0.0};
    alphas.assign(static_cast<std::size_t>(a.steps), fp.alpha / kDeg);
    fp_json = {{"gait", gait_name(g)}, {"r_m", fp.r}, {"alpha_deg", fp.alpha / kDeg}, {"alpha_rad", fp.alpha}, {"residual", fp.residual}};
  } else {
    if (!a.r || !a.vy) throw ConfigError("simulate needs --r and --vy, or --fixed-point");
    x = SectionState{*a.r, *a.vy};
  }
  if (!a.angles.empty()) {
    try {
      alphas = AngleSequence::parse(a.angles).expand_deg();
    } catch (const std::invalid_argument& e) {
      throw ConfigError(e.what());
    }
  }
  if (alphas.empty()) throw ConfigError("simulate needs --angles (or --fixed-point)");
  if (disc_fraction(x, r.shell) > 1.0) throw ConfigError("OutsideShell: start state lies outside the energy shell");

  std::optional<GaitLabel> requested;
  if (a.gait != "auto") requested = gait_arg(a.gait);

  StepOptions so;
  so.record_trajectory = true;
  std::vector<TrajectorySample> samples;
  json steps = json::array();
  std::string failure;
  double max_err = 0.0;
  SectionState cur = x;
  for (std::size_t i = 0; i < alphas.size(); ++i) {
    const StepResult res = requested ? gait_map(cur, alphas[i] * kDeg, *requested, r.params, r.shell, so)
                                     : apply_step(cur, alphas[i] * kDeg, r.params, r.shell, so);
    const auto& s = res.summary.samples;
    samples.insert(samples.end(), s.begin() + (i == 0 || s.empty() ? 0 : 1), s.end());
    if (!res.ok()) {
      failure = res.outcome == StepOutcome::WrongGait
                    ? std::string("WrongGait: realized ") + gait_name(res.realized)
                    : std::string(failure_name(res.reason)) + " in " + chart_name(res.failed_chart);
      break;
    }
    max_err = std::max(max_err, std::abs(res.summary.section_energy - r.shell.E) / r.shell.E);
    steps.push_back({{"alpha_deg", alphas[i]},
                     {"alpha_rad", alphas[i] * kDeg},
                     {"gait", gait_name(res.realized)},
                     {"r_m", res.next.r},
                     {"vy_m_s", res.next.vy},
                     {"section_energy_J", res.summary.section_energy}});
    so.t0 += res.summary.duration;
    so.foot_x = res.summary.end_foot_x;
    cur = res.next;
  }
  int transitions = 0;
  for (std::size_t i = 1; i < steps.size(); ++i) transitions += steps[i]["gait"] != steps[i - 1]["gait"];

  json summary = {{"tool_version", kToolVersion},
                  {"params", params_to_json(r.params)},
                  {"shell", shell_to_json(r.shell)},
                  {"start", {{"r_m", x.r}, {"vy_m_s", x.vy}}},
                  {"requested_gait", a.gait},
                  {"steps_requested", alphas.size()},
                  {"steps_completed", steps.size()},
                  {"transitions", transitions},
                  {"max_energy_error", max_err},
                  {"steps", steps},
                  {"fixed_point", fp_json}};
  if (!failure.empty()) summary["failure"] = failure;
  write_trajectory_csv(path_in(c, "trajectory.csv"), samples);
  write_json(path_in(c, "summary.json"), summary);
  std::printf("steps %zu/%zu, transitions %d, max energy error %.3e%s\n", steps.size(), alphas.size(), transitions,
              max_err, failure.empty() ? "" : (", stopped: " + failure).c_str());
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"SLIP biped simulator: gait maps, stability/viability regions, transition planning"};
  app.require_subcommand(1);
  Common c;
  SimArgs sim;
  PlanArgs plan_args;
  bool slices = false;
  std::string from_gait, to_gait;

  auto* simulate = app.add_subcommand("simulate", "Simulate steps from a section state");
  add_common(simulate, c, false);
  simulate->add_option("--r", sim.r, "Start leg length (m)");
  simulate->add_option("--vy", sim.vy, "Start vertical speed (m/s)");
  simulate->add_option("--angles", sim.angles, "Angle sequence in deg, e.g. 70^3,72.5");
  simulate->add_option("--gait", sim.gait, "Requested gait (auto, R, GR, W)");
  simulate->add_option("--fixed-point", sim.fixed_point, "Start at the fixed point of this gait");
  simulate->add_option("--steps", sim.steps, "Steps at the fixed-point angle");
  simulate->add_option("--alpha-min", c.alpha_min, "Fixed-point search: smallest angle (deg)");
  simulate->add_option("--alpha-max", c.alpha_max, "Fixed-point search: largest angle (deg)");

  auto* mesh_cmd = app.add_subcommand("mesh", "Write the section mesh");
  add_common(mesh_cmd, c, true);

  auto* sweep_cmd = app.add_subcommand("sweep", "Finite-stability and one-step-to-stable maps");
  add_common(sweep_cmd, c, true);
  sweep_cmd->add_flag("--slices", slices, "Also write per-angle step counts");

  auto* via_cmd = app.add_subcommand("viability", "Viability window maps");
  add_common(via_cmd, c, true);

  auto* tr_cmd = app.add_subcommand("transitions", "Transition maps between gaits");
  add_common(tr_cmd, c, true);
  tr_cmd->add_option("--from", from_gait, "Starting gait (default: the four demo pairs)");
  tr_cmd->add_option("--to", to_gait, "Target gait");

  auto add_plan_opts = [&](CLI::App* sub) {
    sub->add_option("--gait", plan_args.itinerary, "Gait itinerary, e.g. R,GR,W,GR,W,R");
    sub->add_option("--r", plan_args.r, "Start leg length (m); default: search mesh vertices");
    sub->add_option("--vy", plan_args.vy, "Start vertical speed (m/s)");
    sub->add_option("--max-candidates", plan_args.max_candidates, "Start vertices tried");
    sub->add_option("--min-dwell", plan_args.min_dwell, "Steps in a gait before a transition");
    sub->add_option("--max-dwell", plan_args.max_dwell, "Steps before the window threshold relaxes");
    sub->add_option("--final-dwell", plan_args.final_dwell, "Steps kept in the last gait");
    sub->add_option("--min-steps", plan_args.min_steps, "Minimum plan length");
    sub->add_option("--max-steps", plan_args.max_steps, "Maximum plan length");
    sub->add_option("--min-delta-alpha", plan_args.min_delta_alpha, "Relaxed landing window (deg)");
  };
  auto* plan_cmd = app.add_subcommand("plan", "Plan a multi-gait constant-energy trajectory");
  add_common(plan_cmd, c, true);
  add_plan_opts(plan_cmd);

  auto* export_cmd = app.add_subcommand("export", "Write every region map, a plan and the sequence replay");
  add_common(export_cmd, c, true);
  add_plan_opts(export_cmd);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (simulate->parsed()) return cmd_simulate(c, sim);

    const Resolved r = resolve(c);
    std::vector<std::pair<GaitLabel, GaitLabel>> pairs = default_pairs();
    if (tr_cmd->parsed() && (!from_gait.empty() || !to_gait.empty())) {
      if (from_gait.empty() || to_gait.empty()) throw ConfigError("--from and --to go together");
      pairs = {{gait_arg(from_gait), gait_arg(to_gait)}};
    }
    Mesh mesh = build_mesh(r.shell, c.vertices);

    if (mesh_cmd->parsed()) {
      write_mesh_csv(mesh, path_in(c, "mesh_vertices.csv"), path_in(c, "mesh_triangles.csv"));
      json m = manifest(r, mesh, "mesh");
      m["files"] = {"mesh_vertices.csv", "mesh_triangles.csv"};
      write_json(path_in(c, "manifest.json"), m);
      std::printf("mesh: %zu vertices, %zu triangles, checksum %s\n", mesh.vertex_count(), mesh.triangle_count(),
                  checksum_hex(mesh.checksum()).c_str());
      return kExitOk;
    }

    const RegionSet rs = build_region_set(std::move(mesh), r.params, r.shell, r.grid, r.sweep);
    json files = json::array();
    json m = manifest(r, rs.mesh, app.get_subcommands().front()->get_name());
    if (sweep_cmd->parsed()) {
      write_stability(c, r, rs, slices, files);
    } else if (via_cmd->parsed()) {
      write_viability(c, r, rs, files);
    } else if (tr_cmd->parsed()) {
      json counts;
      write_transitions(c, r, rs, pairs, files, counts);
      m["delta_alpha_deg"] = c.delta_alpha;
      m["transition_counts"] = counts;
    } else if (plan_cmd->parsed()) {
      try {
        run_plan(c, r, rs, plan_args, "plan");
      } catch (const NoPlanFound& e) {
        std::cerr << "NoPlanFound: " << e.what() << '\n';
        return kExitNoPlan;
      }
      files = {"plan.json", "plan_trajectory.csv"};
      m["delta_alpha_deg"] = c.delta_alpha;
    } else if (export_cmd->parsed()) {
      write_mesh_csv(rs.mesh, path_in(c, "mesh_vertices.csv"), path_in(c, "mesh_triangles.csv"));
      files = {"mesh_vertices.csv", "mesh_triangles.csv"};
      write_stability(c, r, rs, false, files);
      write_viability(c, r, rs, files);
      json counts;
      write_transitions(c, r, rs, pairs, files, counts);
      m["transition_counts"] = counts;
      m["delta_alpha_deg"] = c.delta_alpha;
      try {
        const json pj = run_plan(c, r, rs, plan_args, "plan");
        files.push_back("plan.json");
        files.push_back("plan_trajectory.csv");
        m["plan"] = {{"steps", pj["steps"].size()}, {"transitions", pj["transitions"]}, {"pairs", pj["transition_pairs"]}};
      } catch (const NoPlanFound& e) {
        m["plan"] = {{"error", std::string("NoPlanFound: ") + e.what()}};
      }
      const json rj = run_replay_search(c, r, rs.mesh);
      files.push_back("replay.json");
      files.push_back("replay_trajectory.csv");
      m["replay"] = rj["search"];
    }
    m["files"] = files;
    write_json(path_in(c, "manifest.json"), m);
    std::printf("%s: wrote %zu files to %s\n", m["command"].get<std::string>().c_str(), files.size(), c.out.c_str());
    return kExitOk;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const NoPlanFound& e) {
    std::cerr << "NoPlanFound: " << e.what() << '\n';
    return kExitNoPlan;
  } catch (const NoConvergence& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
