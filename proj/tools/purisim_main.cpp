// purisim command-line driver: evaluates purification dynamics and writes
// CSV tables plus gnuplot scripts for the resonance/contour figures.

#include <cmath>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <limits>
#include <string>
#include <vector>

#include "purisim/purisim.hpp"

namespace {

using namespace purisim;

std::string script_path(const std::string& csv_path) {
  std::filesystem::path p(csv_path);
  p.replace_extension(".gp");
  return p.string();
}

std::string csv_name(const std::string& csv_path) {
  return std::filesystem::path(csv_path).filename().string();
}

double effective_dt_max(const RunConfig& cfg) {
  return cfg.dt_max > 0.0 ? cfg.dt_max
                          : std::numeric_limits<double>::infinity();
}

int run_trace(const RunConfig& cfg) {
  const TimePlan plan = time_plan_for(cfg.params, cfg.spec);
  PurityTrace trace;
  if (cfg.command == Command::simulate_closed) {
    ModelParams p = cfg.params;
    p.gamma_s = 0.0;
    p.gamma_p = 0.0;
    const int samples = static_cast<int>(
        std::ceil(plan.horizon / plan.sample_step));
    trace = trace_closed(p, plan.horizon, std::max(1, samples));
  } else {
    trace = trace_open(cfg.params, plan.horizon, effective_dt_max(cfg));
  }
  emit_csv(trace, cfg.out);
  emit_plot_script(trace, script_path(cfg.out), csv_name(cfg.out));
  std::printf("samples: %zu  horizon: %.6g\n", trace.times.size(),
              plan.horizon);
  std::printf("pi_max: %.6g at t = %.6g\n", trace.pi_max, trace.t_max);
  return 0;
}

int run_sweep(const RunConfig& cfg) {
  const std::vector<double> grid = cfg.omega_p_axis->values();
  SweepResult all;
  for (const double g : cfg.sweep_series()) {
    ModelParams p = cfg.params;
    p.g = g;
    SweepResult one = sweep_omega_p(p, grid, cfg.spec);
    std::size_t best = 0;
    for (std::size_t i = 1; i < one.points.size(); ++i)
      if (one.points[i].pi_max > one.points[best].pi_max) best = i;
    std::printf("g = %.6g: peak pi_M = %.6g at omega_p = %.6g\n", g,
                one.points[best].pi_max, one.points[best].omega_p);
    for (const auto& pt : one.points)
      if (!pt.error.empty())
        std::fprintf(stderr, "warning: omega_p = %.6g failed: %s\n",
                     pt.omega_p, pt.error.c_str());
    all.points.insert(all.points.end(), one.points.begin(), one.points.end());
  }
  emit_csv(all, cfg.out);
  emit_plot_script(all, script_path(cfg.out), csv_name(cfg.out));
  return 0;
}

int run_grid(const RunConfig& cfg) {
  const GridResult result = grid_g_omega_p(
      cfg.params, cfg.g_axis->values(), cfg.omega_p_axis->values(), cfg.spec);
  emit_csv(result, cfg.out);
  emit_plot_script(result, script_path(cfg.out), csv_name(cfg.out));
  const auto& top = result.points[result.global_max_index];
  std::printf("global max pi_M = %.6g at g = %.6g, omega_p = %.6g\n",
              top.pi_max, top.g, top.omega_p);
  std::printf("local maxima (%zu):\n", result.local_max_indices.size());
  for (const std::size_t idx : result.local_max_indices) {
    const auto& pt = result.points[idx];
    std::printf("  g = %.6g, omega_p = %.6g: pi_M = %.6g\n", pt.g, pt.omega_p,
                pt.pi_max);
  }
  for (const auto& pt : result.points)
    if (!pt.error.empty())
      std::fprintf(stderr, "warning: (g=%.6g, omega_p=%.6g) failed: %s\n",
                   pt.g, pt.omega_p, pt.error.c_str());
  return 0;
}

int run_kak_scan(const RunConfig& cfg) {
  const auto scan =
      capability_scan(cfg.params, cfg.times_axis.values(), cfg.kak_tol);
  emit_csv(scan, cfg.out);
  emit_plot_script(scan, script_path(cfg.out), csv_name(cfg.out));
  std::size_t purifying = 0;
  for (const auto& pt : scan)
    if (pt.purifying) ++purifying;
  std::printf("purifying at %zu of %zu sampled times\n", purifying,
              scan.size());
  return 0;
}

int run_probe_opt(const RunConfig& cfg) {
  const ProbeSearchResult result = optimal_probe_search(
      cfg.params, cfg.spec, cfg.sphere_theta, cfg.sphere_phi);
  emit_csv(result, cfg.out);
  std::printf("best probe = (%.6g, %.6g, %.6g)  pi_max = %.6g at t = %.6g\n",
              result.best_probe.x(), result.best_probe.y(),
              result.best_probe.z(), result.pi_max, result.t_at_max);
  return 0;
}

int run(const RunConfig& cfg) {
  switch (cfg.command) {
    case Command::simulate_closed:
    case Command::simulate_open:
      return run_trace(cfg);
    case Command::sweep:
      return run_sweep(cfg);
    case Command::grid:
      return run_grid(cfg);
    case Command::kak_scan:
      return run_kak_scan(cfg);
    default:
      return run_probe_opt(cfg);
  }
}

}  // namespace

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  RunConfig cfg;
  try {
    cfg = purisim::parse_config(args);
  } catch (const purisim::ConfigError& e) {
    std::fprintf(stderr, "purisim: %s\n", e.what());
    return 1;
  }
  try {
    return run(cfg);
  } catch (const purisim::ConfigError& e) {
    std::fprintf(stderr, "purisim: %s\n", e.what());
    return 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "purisim: numerical failure: %s\n", e.what());
    return 2;
  }
}
