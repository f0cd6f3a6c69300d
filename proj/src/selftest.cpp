#include "supercrit/selftest.hpp"

#include "supercrit/run.hpp"

#include <cmath>
#include <memory>
#include <numbers>
#include <random>
#include <sstream>

namespace supercrit {

namespace {

std::string num(double x) {
  std::ostringstream os;
  os.precision(3);
  os << x;
  return os.str();
}

SelftestCheck window_roots() {
  double worst = 0.0;
  for (int d = 7; d <= 12; ++d) {
    const double p = p_window(d).hi;
    const double res = p * p - d * (d - 1.0) / (d + 1.0) * p + 4.0;
    worst = std::max(worst, std::abs(res));
  }
  const auto w7 = p_window(7);
  const bool ok7 = std::abs(w7.lo - 0.8) < 1e-15 && std::abs(w7.hi - 0.92482) < 1e-5;
  return {"power window roots (d = 7..12)", worst < 1e-10 && ok7, "max residual " + num(worst)};
}

SelftestCheck parseval(const Basis& basis) {
  std::mt19937_64 rng(12345);
  std::normal_distribution<double> g;
  const auto& grid = basis.grid();
  double worst = 0.0;
  for (int k = 0; k < 10; ++k) {
    Vec f(grid.size());
    for (Index j = 0; j < f.size(); ++j) f(j) = g(rng);
    const double lhs = grid.dot(f, f);
    const double rhs = basis.project(f).squaredNorm();
    worst = std::max(worst, std::abs(lhs - rhs) / lhs);
  }
  return {"weighted Parseval", worst < 1e-10, "relative error " + num(worst)};
}

SelftestCheck lowest_mode(const Basis& basis) {
  const double R = basis.grid().r_max();
  const double exact = std::numbers::pi * std::numbers::pi / (R * R);
  const double rel = std::abs(basis.eigenvalues()(0) - exact) / exact;
  return {"lowest Dirichlet eigenvalue (d = 3)", rel < 1e-3, "relative error " + num(rel)};
}

SelftestCheck weight_laplacian() {
  const MorawetzWeight<double> w(5.0, 3);
  double worst = 0.0;
  for (double r = 0.05; r <= 5.0; r += 0.05) worst = std::max(worst, std::abs(w.laplacian(r) - 2.0 / r));
  return {"Morawetz weight Laplacian (d - 1)/r", worst < 1e-12, "max error " + num(worst)};
}

SelftestCheck zero_fixed_point(const Basis& basis) {
  const ModelParams params{3, 6.0, Sign::Defocusing};
  const auto& grid = basis.grid();
  const auto traj = evolve_nonlinear(State::zero(grid.size()), params, grid, 1.0, grid.h() / 4, 8);
  bool ok = true;
  for (const auto& s : traj.snapshots) ok = ok && s.is_zero();
  return {"zero data stays zero", ok, ""};
}

SelftestCheck energy_order(const Basis& basis) {
  const ModelParams params{3, 6.0, Sign::Defocusing};
  const auto& grid = basis.grid();
  const Vec u0 = (-0.5 * grid.nodes().array().square()).exp().matrix();
  const State s0{0.0, u0, Vec::Zero(grid.size())};
  auto drift = [&](double dt) {
    const auto traj = evolve_nonlinear(s0, params, grid, 2.0, dt, 4);
    const double e0 = energy(traj.snapshots.front(), grid, params).total;
    double worst = 0.0;
    for (const auto& s : traj.snapshots) worst = std::max(worst, std::abs(energy(s, grid, params).total - e0) / e0);
    return worst;
  };
  const double dt = grid.h() / 4;
  const double a = drift(dt);
  const double b = drift(dt / 2);
  const double ratio = a / b;
  return {"energy drift second order", a < 1e-3 && ratio > 3.2 && ratio < 4.8,
          "drift " + num(a) + ", ratio " + num(ratio)};
}

SelftestCheck round_trip() {
  Scenario s;
  s.model = {5, 1.7, Sign::Focusing};
  s.N = 300;
  s.R_max = 12.5;
  s.family = DataFamily::Bump;
  s.amplitude = 0.1 + 1e-16;
  s.width = std::sqrt(2.0);
  s.name = "round_trip";
  s.T = 1.0 / 3.0;
  s.dt = 1e-3 / 7.0;
  s.T_list = {0.1, 0.2, 0.7};
  s.eps_ladder = {1.0 / 3.0, 0.25};
  s.forcing = false;
  s.seed = 42;
  validate_scenario(s);
  const Scenario back = parse_scenario_text(emit_scenario(s));
  return {"scenario round trip", back == s, ""};
}

SelftestCheck determinism(const Basis& basis, const std::filesystem::path& scratch) {
  Scenario s;
  s.N = basis.size();
  s.R_max = basis.grid().r_max();
  s.T = 1.0;
  s.name = "selftest_determinism";
  validate_scenario(s);
  const auto a = run_scenario(s, basis, scratch / "a");
  const auto b = run_scenario(s, basis, scratch / "b");
  const bool ok = a.exit_code() == kExitOk && b.exit_code() == kExitOk && a.series_checksum == b.series_checksum;
  return {"byte-identical series on rerun", ok, "checksum " + hex64(a.series_checksum)};
}

}  // namespace

std::vector<SelftestCheck> run_selftest(const std::filesystem::path& scratch) {
  std::vector<SelftestCheck> out;
  auto guarded = [&](const std::string& name, auto&& fn) {
    try {
      out.push_back(fn());
    } catch (const std::exception& e) {
      out.push_back({name, false, std::string("threw: ") + e.what()});
    }
  };
  guarded("power window roots", window_roots);
  guarded("weighted Parseval", [] { return parseval(Basis(RadialGrid<double>(20.0, 128, 3))); });
  guarded("lowest Dirichlet eigenvalue", [] { return lowest_mode(Basis(RadialGrid<double>(20.0, 512, 3))); });
  guarded("Morawetz weight", weight_laplacian);
  guarded("round trip", round_trip);

  std::unique_ptr<Basis> basis;
  guarded("basis", [&] {
    basis = std::make_unique<Basis>(RadialGrid<double>(10.0, 256, 3));
    return SelftestCheck{"basis N = 256", true, ""};
  });
  if (basis) {
    guarded("zero fixed point", [&] { return zero_fixed_point(*basis); });
    guarded("energy order", [&] { return energy_order(*basis); });
    guarded("determinism", [&] { return determinism(*basis, scratch); });
  }
  return out;
}

}  // namespace supercrit
