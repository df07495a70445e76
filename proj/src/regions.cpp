#include "slip/regions.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <exception>
#include <fstream>
#include <numbers>
#include <stdexcept>
#include <thread>

namespace slip {

int steps_to_failure(const SectionState& x, GaitLabel gait, double alpha, int n_cap, const ModelParams& p,
                     const EnergyShell& shell, const IntegratorConfig& cfg) {
  SectionState cur = x;
  for (int n = 0; n < n_cap; ++n) {
    const StepResult res = gait_map(cur, alpha, gait, p, shell, cfg);
    if (!res.ok()) return n;
    cur = res.next;
  }
  return n_cap;
}

void AngleGrid::validate() const {
  if (count < 1) throw std::invalid_argument("AngleGrid: count must be >= 1");
  if (!(alpha_min_deg > 0.0) || !(alpha_max_deg <= 90.0) || !(alpha_min_deg <= alpha_max_deg)) {
    throw std::invalid_argument("AngleGrid: need 0 < alpha_min <= alpha_max <= 90 deg");
  }
  if (count == 1 && alpha_min_deg != alpha_max_deg) {
    throw std::invalid_argument("AngleGrid: a single angle needs alpha_min == alpha_max");
  }
}

double AngleGrid::deg(int i) const {
  if (i == count - 1) return alpha_max_deg;
  return alpha_min_deg + spacing_deg() * i;
}

double AngleGrid::rad(int i) const { return deg(i) * std::numbers::pi / 180.0; }

void SweepOptions::validate() const {
  if (n_cap < 1 || n_cap > 255) throw std::invalid_argument("SweepOptions: n_cap must be in [1, 255]");
  if (workers < 1) throw std::invalid_argument("SweepOptions: workers must be >= 1");
  integrator.validate();
}

SweepData sweep(const Mesh& mesh, const ModelParams& p, const EnergyShell& shell, const AngleGrid& grid,
                const SweepOptions& opts) {
  grid.validate();
  opts.validate();
  SweepData d;
  d.grid = grid;
  d.n_cap = opts.n_cap;
  d.vertices = mesh.vertex_count();
  const std::size_t total = d.vertices * static_cast<std::size_t>(grid.count);
  d.first_gait.assign(total, -1);
  d.steps.assign(total, 0);
  d.next.assign(total, SectionState{});

  auto run_block = [&](std::size_t v_begin, std::size_t v_end) {
    for (std::size_t v = v_begin; v < v_end; ++v) {
      const SectionState x = from_disc(mesh.vertices()[v], shell);
      for (int a = 0; a < grid.count; ++a) {
        const double alpha = grid.rad(a);
        const std::size_t s = d.slot(v, a);
        StepResult first;
        try {
          first = apply_step(x, alpha, p, shell, opts.integrator);
        } catch (const OutsideShell&) {
          continue;
        }
        if (!first.ok()) continue;
        d.first_gait[s] = static_cast<std::int8_t>(gait_index(first.realized));
        d.next[s] = first.next;
        int n = 1;
        try {
          n += steps_to_failure(first.next, first.realized, alpha, opts.n_cap - 1, p, shell, opts.integrator);
        } catch (const OutsideShell&) {
        }
        d.steps[s] = static_cast<std::uint8_t>(n);
      }
    }
  };

  const std::size_t workers = std::min<std::size_t>(static_cast<std::size_t>(opts.workers), std::max<std::size_t>(d.vertices, 1));
  if (workers <= 1) {
    run_block(0, d.vertices);
    return d;
  }
  // Interleaved blocks of vertices even out the cost of slow regions.
  const std::size_t block = 16;
  const std::size_t n_blocks = (d.vertices + block - 1) / block;
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      try {
        for (std::size_t b = w; b < n_blocks; b += workers) {
          run_block(b * block, std::min(d.vertices, (b + 1) * block));
        }
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return d;
}

std::vector<int> finite_stability(const SweepData& d, GaitLabel gait) {
  std::vector<int> out(d.vertices, 0);
  for (std::size_t v = 0; v < d.vertices; ++v) {
    for (int a = 0; a < d.grid.count; ++a) out[v] = std::max(out[v], d.steps_for(v, a, gait));
  }
  return out;
}

std::vector<int> stability_slice(const SweepData& d, GaitLabel gait, int angle_index) {
  if (angle_index < 0 || angle_index >= d.grid.count) throw std::out_of_range("stability_slice: angle index");
  std::vector<int> out(d.vertices, 0);
  for (std::size_t v = 0; v < d.vertices; ++v) out[v] = d.steps_for(v, angle_index, gait);
  return out;
}

Window longest_window(const std::vector<std::uint8_t>& ok, const AngleGrid& grid) {
  Window best;
  int run_start = -1, best_len = 0;
  for (int a = 0; a <= static_cast<int>(ok.size()); ++a) {
    const bool good = a < static_cast<int>(ok.size()) && ok[static_cast<std::size_t>(a)];
    if (good && run_start < 0) run_start = a;
    if (!good && run_start >= 0) {
      const int len = a - run_start;
      if (len > best_len) {
        best_len = len;
        best.first = run_start;
        best.last = a - 1;
      }
      run_start = -1;
    }
  }
  if (best_len > 0) best.width_deg = (best_len - 1) * grid.spacing_deg();
  return best;
}

std::vector<Window> viability(const SweepData& d, GaitLabel gait) {
  std::vector<Window> out(d.vertices);
  std::vector<std::uint8_t> ok(static_cast<std::size_t>(d.grid.count));
  for (std::size_t v = 0; v < d.vertices; ++v) {
    for (int a = 0; a < d.grid.count; ++a) ok[static_cast<std::size_t>(a)] = d.success(v, a, gait);
    out[v] = longest_window(ok, d.grid);
  }
  return out;
}

std::vector<std::optional<OneStep>> one_step_to_stable(const SweepData& d, GaitLabel gait, double vy_tol) {
  std::vector<std::optional<OneStep>> out(d.vertices);
  for (std::size_t v = 0; v < d.vertices; ++v) {
    for (int a = 0; a < d.grid.count; ++a) {
      if (!d.success(v, a, gait)) continue;
      const double vy = d.next[d.slot(v, a)].vy;
      if (!(std::abs(vy) < vy_tol)) continue;
      if (!out[v] || std::abs(vy) < std::abs(out[v]->vy_next)) out[v] = OneStep{a, d.grid.deg(a), vy};
    }
  }
  return out;
}

FieldMap window_field(const std::vector<Window>& windows) {
  FieldMap f(windows.size(), 1);
  for (std::size_t v = 0; v < windows.size(); ++v) f.set(v, 0, windows[v].width_deg);
  return f;
}

std::vector<std::optional<Transition>> transitions(const SweepData& d, const Mesh& mesh, const EnergyShell& shell,
                                                   GaitLabel from, const std::vector<Window>& to_viability,
                                                   double delta_alpha_deg) {
  if (to_viability.size() != mesh.vertex_count() || d.vertices != mesh.vertex_count()) {
    throw std::invalid_argument("transitions: field sizes do not match the mesh");
  }
  const FieldMap field = window_field(to_viability);
  std::vector<std::optional<Transition>> out(d.vertices);
  for (std::size_t v = 0; v < d.vertices; ++v) {
    for (int a = 0; a < d.grid.count; ++a) {
      if (!d.success(v, a, from)) continue;
      const SectionState& land = d.next[d.slot(v, a)];
      const auto w = try_interpolate_field(mesh, field, to_disc(land, shell));
      if (!w || (*w)[0] < delta_alpha_deg) continue;
      if (!out[v] || (*w)[0] > out[v]->landing_window_deg) out[v] = Transition{a, d.grid.deg(a), land, (*w)[0]};
    }
  }
  return out;
}

FieldMap next_state_field(const SweepData& d, const EnergyShell& shell, int angle_index) {
  if (angle_index < 0 || angle_index >= d.grid.count) throw std::out_of_range("next_state_field: angle index");
  FieldMap f(d.vertices, 2);
  f.labels.assign(d.vertices, -1);
  for (std::size_t v = 0; v < d.vertices; ++v) {
    const std::size_t s = d.slot(v, angle_index);
    const int g = d.first_gait[s];
    f.valid[v] = g >= 0;
    f.labels[v] = g;
    if (g >= 0) {
      const DiscPoint q = to_disc(d.next[s], shell);
      f.set(v, 0, q.r_hat);
      f.set(v, 1, q.vy_hat);
    }
  }
  return f;
}

Window direct_window(const SectionState& x, GaitLabel gait, const AngleGrid& grid, const ModelParams& p,
                     const EnergyShell& shell, const IntegratorConfig& cfg) {
  std::vector<std::uint8_t> ok(static_cast<std::size_t>(grid.count), 0);
  for (int a = 0; a < grid.count; ++a) {
    try {
      ok[static_cast<std::size_t>(a)] = gait_map(x, grid.rad(a), gait, p, shell, cfg).ok();
    } catch (const OutsideShell&) {
    }
  }
  return longest_window(ok, grid);
}

std::string format_double(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

void write_region_csv(const std::string& path, const Mesh& mesh, const EnergyShell& shell,
                      const std::string& value_name, const std::vector<std::string>& values) {
  if (values.size() != mesh.vertex_count()) throw std::invalid_argument("write_region_csv: value count mismatch");
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write " + path);
  f << "vertex_id,r_m,vy_m_s," << value_name << '\n';
  for (std::size_t v = 0; v < values.size(); ++v) {
    const SectionState x = from_disc(mesh.vertices()[v], shell);
    f << v << ',' << format_double(x.r) << ',' << format_double(x.vy) << ',' << values[v] << '\n';
  }
}

}  // namespace slip
