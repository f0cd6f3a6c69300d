#include "supercrit/run.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#ifndef SUPERCRIT_VERSION
#define SUPERCRIT_VERSION "0.0.0"
#endif

namespace supercrit {

namespace fs = std::filesystem;
using nlohmann::json;

std::string to_string(Protocol p) {
  switch (p) {
    case Protocol::Simulate:
      return "simulate";
    case Protocol::Scatter:
      return "scatter";
    case Protocol::Stability:
      return "stability";
    case Protocol::Blowup:
      return "blowup";
    case Protocol::Morawetz:
      return "morawetz";
  }
  return "simulate";
}

std::string code_version() { return SUPERCRIT_VERSION; }

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hex64(std::uint64_t x) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(x));
  return buf;
}

fs::path default_out_root() {
  const char* env = std::getenv("SUPERCRIT_OUT");
  return (env && *env) ? fs::path(env) : fs::path("out");
}

json scenario_json(const Scenario& s) {
  json j = {{"model", params_json(s.model)},
            {"grid", {{"N", s.N}, {"R_max", s.R_max}}},
            {"data",
             {{"family", to_string(s.family)},
              {"amplitude", s.amplitude},
              {"width", s.width},
              {"mode_index", s.mode_index}}},
            {"run",
             {{"name", s.name},
              {"T", s.T},
              {"cfl_factor", s.cfl_factor},
              {"record_stride", s.record_stride},
              {"blowup_threshold", s.blowup_threshold},
              {"dt", s.dt ? json(*s.dt) : json(nullptr)},
              {"seed", s.seed},
              {"T_list", s.T_list},
              {"eps_ladder", s.eps_ladder},
              {"forcing", s.forcing}}},
            {"diagnostics",
             {{"morawetz_R", s.morawetz_R},
              {"concentration_C", s.concentration_C},
              {"tail_C", s.tail_C},
              {"support_threshold", s.support_threshold}}},
            {"text", emit_scenario(s)}};
  return j;
}

int RunManifest::exit_code() const {
  if (error) return kExitError;
  if (boundary_touched || overflow_halt || !assertions_passed()) return kExitSoftFailure;
  return kExitOk;
}

bool RunManifest::assertions_passed() const {
  return std::all_of(assertions.begin(), assertions.end(), [](const Assertion& a) { return a.passed; });
}

namespace {

json assertions_json(const std::vector<Assertion>& list) {
  json arr = json::array();
  for (const auto& a : list) {
    arr.push_back({{"name", a.name}, {"passed", a.passed}, {"value", a.value}, {"threshold", a.threshold}});
  }
  return arr;
}

}  // namespace

json RunManifest::to_json() const {
  std::vector<std::string> failed;
  for (const auto& a : assertions) {
    if (!a.passed) failed.push_back(a.name);
  }
  return {{"protocol", to_string(protocol)},
          {"scenario", scenario_json(scenario)},
          {"warnings", scenario.warnings},
          {"version", version},
          {"wall_seconds", wall_seconds},
          {"flags",
           {{"boundary_touched", boundary_touched},
            {"overflow_halt", overflow_halt},
            {"error", error ? json(*error) : json(nullptr)},
            {"failed_assertions", failed}}},
          {"exit_code", exit_code()},
          {"files", files},
          {"series_checksum", "fnv1a64:" + hex64(series_checksum)}};
}

double scenario_dt(const Scenario& s, const Basis& basis) {
  return s.dt ? *s.dt : cfl_dt(basis.grid(), s.cfl_factor, &basis);
}

namespace {

struct Context {
  const Scenario& s;
  const Basis& basis;
  RunManifest& man;
  json measurements = json::object();
  std::string csv;

  void check(const std::string& name, bool passed, double value, double threshold) {
    man.assertions.push_back({name, passed, value, threshold});
  }

  double morawetz_radius() const {
    if (s.morawetz_R > 0.0) return s.morawetz_R;
    return s.T > 0.0 ? s.T : s.R_max;
  }

  DiagnosticsOptions diag_options() const { return {morawetz_radius(), s.tail_C, s.support_threshold}; }

  // Evolves the scenario data and renders the diagnostics series.
  Trajectory<double> series(const ModelParams& params, double T, double dt, Index stride) {
    EvolveOptions<double> eo;
    eo.blowup_threshold = s.blowup_threshold;
    eo.support_threshold = s.support_threshold;
    auto traj = evolve_nonlinear(initial_state(s, basis), params, basis.grid(), T, dt, stride, eo);
    const auto sw = sample_weight(MorawetzWeight<double>(morawetz_radius(), params.d), basis.grid());
    const auto opt = diag_options();
    std::string out = std::string(DiagnosticsRecord::kHeader) + "\n";
    for (const auto& st : traj.snapshots) out += diagnose(basis, sw, st, params, opt).csv_row() + "\n";
    csv = std::move(out);
    man.boundary_touched = man.boundary_touched || traj.boundary_touched;
    man.overflow_halt = man.overflow_halt || traj.overflow_halt;
    measurements["dt"] = dt;
    measurements["record_stride"] = stride;
    measurements["t_end"] = traj.t_end();
    measurements["snapshots"] = traj.size();
    measurements["boundary_touched"] = traj.boundary_touched;
    measurements["overflow_halt"] = traj.overflow_halt;
    measurements["halt_time"] = traj.overflow_halt ? json(traj.halt_time) : json(nullptr);
    return traj;
  }

  bool clean(const Trajectory<double>& traj) const { return !traj.boundary_touched && !traj.overflow_halt; }

  void simulate() {
    const double dt = scenario_dt(s, basis);
    const auto traj = series(s.model, s.T, dt, s.record_stride);
    const auto& grid = basis.grid();
    const double e0 = energy(traj.snapshots.front(), grid, s.model).total;
    double drift = 0.0;
    for (const auto& st : traj.snapshots) {
      const double de = std::abs(energy(st, grid, s.model).total - e0);
      drift = std::max(drift, e0 != 0.0 ? de / std::abs(e0) : de);
    }
    measurements["energy_initial"] = e0;
    measurements["energy_drift"] = drift;
    check("energy_drift", drift < 1e-3, drift, 1e-3);
    if (clean(traj) && traj.size() >= 2) {
      measurements["scattering_size"] = scattering_size(traj, traj.t_begin(), traj.t_end());
      if (traj.t_end() - traj.t_begin() <= grid.r_max()) {
        const auto m = morawetz_report(traj, basis);
        measurements["morawetz"] = {{"lhs", m.lhs},
                                    {"rhs", m.rhs},
                                    {"ratio", m.ratio},
                                    {"critical_bound", m.critical_bound},
                                    {"exponent", m.exponent}};
      }
    }
  }

  void scatter() {
    const double dt = scenario_dt(s, basis);
    const double T_hi = *std::max_element(s.T_list.begin(), s.T_list.end());
    const auto traj = series(s.model, T_hi, dt, s.record_stride);
    if (!clean(traj)) return;
    ScatterOptions opt;
    opt.record_stride = s.record_stride;
    opt.support_threshold = s.support_threshold;
    opt.blowup_threshold = s.blowup_threshold;
    const auto rep = scattering_detect(s.model, initial_state(s, basis), basis, s.T_list, dt, opt);
    measurements["scatter"] = to_json(rep);
    check("deltas_strictly_decreasing", rep.strictly_decreasing, rep.strictly_decreasing ? 1.0 : 0.0, 1.0);
    check("final_delta_relative", rep.final_relative < 1e-4, rep.final_relative, 1e-4);
  }

  void stability() {
    const double dt = scenario_dt(s, basis);
    const auto traj = series(s.model, s.T, dt, s.record_stride);
    if (!clean(traj)) return;
    StabilityOptions opt;
    opt.T = s.T;
    opt.dt = dt;
    opt.record_stride = s.record_stride;
    opt.blowup_threshold = s.blowup_threshold;
    if (s.forcing) opt.forcing_profile = family_profile(s, basis);
    const auto rep = stability_experiment(s.model, initial_state(s, basis), basis, s.eps_ladder, opt);
    measurements["stability"] = to_json(rep);
    check("D_monotone", rep.monotone, rep.monotone ? 1.0 : 0.0, 1.0);
    check("loglog_slope", rep.slope >= 0.8, rep.slope, 0.8);
  }

  void blowup() {
    ModelParams focusing = s.model;
    focusing.sign = Sign::Focusing;
    const double h = basis.grid().h();
    const double dt = std::min(scenario_dt(s, basis), nonlinear_dt(focusing, h, std::max(s.amplitude, 1e-300)));
    // Small stride for the short blowup window, capped so long runs stay light.
    const double steps = std::ceil(s.T / dt);
    const Index stride = std::max<Index>(1, static_cast<Index>(std::ceil(steps / 512.0)));
    const auto traj = series(focusing, s.T, dt, stride);
    man.overflow_halt = false;  // a halt is the expected outcome here, not a failure
    if (traj.boundary_touched) return;
    const auto state0 = initial_state(s, basis);
    const auto rep = blowup_contrast(focusing, state0, basis, dt, s.T, stride, s.blowup_threshold);
    measurements["blowup"] = to_json(rep);

    ModelParams twin = focusing;
    twin.sign = Sign::Defocusing;
    EvolveOptions<double> eo;
    eo.blowup_threshold = s.blowup_threshold;
    eo.support_threshold = s.support_threshold;
    const auto tw = evolve_nonlinear(state0, twin, basis.grid(), s.T, dt, stride, eo);
    measurements["defocusing_twin"] = {{"halted", tw.overflow_halt},
                                       {"t_end", tw.t_end()},
                                       {"boundary_touched", tw.boundary_touched}};
    check("focusing_halts", rep.halted, rep.halted ? rep.t_halt : s.T, s.T);
    check("critical_growth", rep.growth > 10.0, rep.growth, 10.0);
    check("twin_completes", !tw.overflow_halt, tw.t_end(), s.T);
  }

  void morawetz() {
    const double dt = scenario_dt(s, basis);
    const auto traj = series(s.model, s.T, dt, s.record_stride);
    if (!clean(traj)) return;
    DispersalOptions opt;
    opt.record_stride = s.record_stride;
    opt.concentration_C = s.concentration_C;
    opt.support_threshold = s.support_threshold;
    const auto state0 = initial_state(s, basis);
    const auto full = dispersal_probe(s.model, state0, basis, s.T, dt, opt);
    const auto half = dispersal_probe(s.model, state0, basis, 0.5 * s.T, dt, opt);
    const double growth = half.morawetz.lhs > 0.0 ? full.morawetz.lhs / half.morawetz.lhs : 0.0;
    measurements["dispersal"] = to_json(full);
    measurements["dispersal_half"] = to_json(half);
    measurements["lhs_growth_on_doubling"] = growth;
    measurements["morawetz_exponent"] = full.exponent;
    check("lhs_growth_below_2", growth < 2.0, growth, 2.0);
    const double expected = s.model.d - 2.0 - 4.0 / s.model.p;
    check("morawetz_exponent", std::abs(full.exponent - expected) <= 1e-15, full.exponent, expected);
  }
};

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
  out << text;
  if (!out) throw std::runtime_error("write failed for '" + path.string() + "'");
}

}  // namespace

RunManifest run_scenario(const Scenario& s, const Basis& basis, const fs::path& out_root, Protocol protocol) {
  const auto start = std::chrono::steady_clock::now();
  RunManifest man;
  man.protocol = protocol;
  man.scenario = s;
  man.version = code_version();
  man.dir = out_root / s.name;
  fs::create_directories(man.dir);

  Context ctx{s, basis, man, json::object(), {}};
  try {
    if (basis.size() != s.N || basis.grid().r_max() != s.R_max || basis.grid().dim() != s.model.d) {
      throw std::invalid_argument("basis does not match the scenario grid");
    }
    switch (protocol) {
      case Protocol::Simulate:
        ctx.simulate();
        break;
      case Protocol::Scatter:
        ctx.scatter();
        break;
      case Protocol::Stability:
        ctx.stability();
        break;
      case Protocol::Blowup:
        ctx.blowup();
        break;
      case Protocol::Morawetz:
        ctx.morawetz();
        break;
    }
  } catch (const std::exception& e) {
    man.error = e.what();
    spdlog::error("{}: {}", s.name, e.what());
  }

  if (!ctx.csv.empty()) {
    write_text(man.dir / "series.csv", ctx.csv);
    man.series_checksum = fnv1a64(ctx.csv);
    man.files.push_back("series.csv");
  }
  const json report = {{"protocol", to_string(protocol)},
                       {"scenario", scenario_json(s)},
                       {"measurements", ctx.measurements},
                       {"assertions", assertions_json(man.assertions)},
                       {"passed", man.assertions_passed() && !man.error}};
  write_text(man.dir / "report.json", report.dump(2) + "\n");
  man.files.push_back("report.json");
  man.files.push_back("manifest.json");
  man.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  write_text(man.dir / "manifest.json", man.to_json().dump(2) + "\n");
  return man;
}

RunManifest run_scenario(const Scenario& s, const fs::path& out_root, Protocol protocol) {
  const auto start = std::chrono::steady_clock::now();
  const Basis basis(RadialGrid<double>(s.R_max, s.N, s.model.d));
  spdlog::info("spectral basis N = {} built in {:.2f} s", s.N,
               std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count());
  return run_scenario(s, basis, out_root, protocol);
}

}  // namespace supercrit
