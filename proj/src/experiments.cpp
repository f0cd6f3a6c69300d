#include "supercrit/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace supercrit {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double critical_norm(const Basis& basis, const State& s, const ModelParams& params) {
  return pair_norm(basis, s, params.s_c());
}

void require_inside(const Trajectory<double>& traj, const char* what) {
  if (traj.boundary_touched) {
    std::ostringstream os;
    os << what << ": solution reached the outer boundary (R_max = " << traj.grid.r_max()
       << "); enlarge the grid or shorten the run";
    throw std::runtime_error(os.str());
  }
}

}  // namespace

// ---- scattering -----------------------------------------------------------

ScatterReport scattering_detect(const ModelParams& params, const State& state0, const Basis& basis,
                                std::vector<double> T_list, double dt, const ScatterOptions& opt) {
  if (params.sign == Sign::Focusing) throw std::invalid_argument("scattering detection expects a defocusing model");
  if (T_list.size() < 2) throw std::invalid_argument("need at least two pullback times");
  std::sort(T_list.begin(), T_list.end());
  if (!(T_list.front() > 0.0)) throw std::invalid_argument("pullback times must be positive");
  const auto& grid = basis.grid();
  const double reach = T_list.back() + support_radius(state0, grid, opt.support_threshold);
  if (!(reach < grid.r_max())) {
    std::ostringstream os;
    os << "max(T) + support radius = " << reach << " does not fit inside R_max = " << grid.r_max();
    throw std::invalid_argument(os.str());
  }

  ScatterReport rep;
  rep.dt = dt;
  rep.nonlinear = params.sign != Sign::Linear;
  const std::size_t m = T_list.size();
  std::vector<Index> checkpoints(m);
  for (std::size_t i = 0; i < m; ++i) {
    checkpoints[i] = static_cast<Index>(std::llround(T_list[i] / dt));
    rep.times.push_back(static_cast<double>(checkpoints[i]) * dt);
  }
  rep.data_norm = critical_norm(basis, state0, params);
  rep.deltas.assign(m - 1, 0.0);
  rep.raw_deltas.assign(m - 1, 0.0);
  if (state0.is_zero()) return rep;

  const Index n = basis.size();
  const LeapfrogFreeFlow<double> flow(basis, dt);
  const Vec& theta = flow.angles();
  const Vec& kappa = flow.stiffness();

  std::vector<Vec> acc_u(m - 1, Vec::Zero(n));
  std::vector<Vec> acc_v(m - 1, Vec::Zero(n));
  std::vector<Vec> pulled_u;
  std::vector<Vec> pulled_v;

  // Nonlinear terms are projected in blocks to use matrix products.
  constexpr Index kBlock = 64;
  Matrix<double> block(n, kBlock);
  std::vector<Index> block_steps;
  Vec work;

  auto flush = [&]() {
    if (block_steps.empty()) return;
    const Index cols = static_cast<Index>(block_steps.size());
    const Matrix<double> modal = basis.project_columns(block.leftCols(cols));
    for (Index c = 0; c < cols; ++c) {
      const Index step = block_steps[static_cast<std::size_t>(c)];
      for (std::size_t i = 0; i + 1 < m; ++i) {
        const Index a = checkpoints[i];
        const Index b = checkpoints[i + 1];
        if (step < a || step > b) continue;
        const double wt = (step == a || step == b) ? 0.5 * dt : dt;
        for (Index k = 0; k < n; ++k) {
          const double ang = static_cast<double>(step) * theta(k);
          const double f = wt * modal(k, c);
          acc_u[i](k) -= std::sin(ang) / kappa(k) * f;
          acc_v[i](k) += std::cos(ang) * f;
        }
      }
    }
    block_steps.clear();
  };

  EvolveOptions<double> eo;
  eo.blowup_threshold = opt.blowup_threshold;
  eo.support_threshold = opt.support_threshold;
  std::size_t next_checkpoint = 0;
  eo.on_step = [&](Index step, const State& s) {
    if (rep.nonlinear && step >= checkpoints.front() && step <= checkpoints.back()) {
      apply_nonlinearity(params, s.u, work);
      block.col(static_cast<Index>(block_steps.size())) = work;
      block_steps.push_back(step);
      if (static_cast<Index>(block_steps.size()) == kBlock) flush();
    }
    if (next_checkpoint < m && step == checkpoints[next_checkpoint]) {
      Vec c = basis.project(s.u);
      Vec e = basis.project(s.v);
      flow.apply(c, e, -static_cast<double>(step));
      pulled_u.push_back(std::move(c));
      pulled_v.push_back(std::move(e));
      ++next_checkpoint;
    }
  };
  const auto traj = evolve_nonlinear(state0, params, grid, rep.times.back(), dt, opt.record_stride, eo);
  flush();
  if (traj.overflow_halt) throw std::runtime_error("scattering run tripped the blowup detector");
  require_inside(traj, "scattering run");
  if (pulled_u.size() != m) throw std::logic_error("scattering run ended before the last pullback time");

  const double sc = params.s_c();
  for (std::size_t i = 0; i + 1 < m; ++i) {
    rep.deltas[i] = modal_pair_norm(basis, acc_u[i], acc_v[i], sc);
    rep.raw_deltas[i] =
        modal_pair_norm(basis, (pulled_u[i + 1] - pulled_u[i]).eval(), (pulled_v[i + 1] - pulled_v[i]).eval(), sc);
  }
  rep.final_relative = rep.deltas.back() / rep.data_norm;
  rep.strictly_decreasing = true;
  for (std::size_t i = 1; i < rep.deltas.size(); ++i) {
    if (!(rep.deltas[i] < rep.deltas[i - 1])) rep.strictly_decreasing = false;
  }
  return rep;
}

// ---- stability ------------------------------------------------------------

double forcing_y_size(const ModelParams& params, const Basis& basis, const Vec& profile, double duration) {
  const auto xy = xy_exponents(params.d, params.p);
  const Vec f = basis.fractional_power(profile, xy.deriv_order);
  return lp_norm(basis.grid(), f, xy.space_exp_Y) * std::pow(duration, 1.0 / xy.time_exp_Y);
}

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int n = 0;
  for (std::size_t i = 0; i < x.size() && i < y.size(); ++i) {
    if (!(x[i] > 0.0) || !(y[i] > 0.0)) continue;
    const double lx = std::log(x[i]);
    const double ly = std::log(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
    ++n;
  }
  if (n < 2) return kNaN;
  const double den = n * sxx - sx * sx;
  return den > 0.0 ? (n * sxy - sx * sy) / den : kNaN;
}

StabilityReport stability_experiment(const ModelParams& params, const State& base_state, const Basis& basis,
                                     const std::vector<double>& eps_ladder, const StabilityOptions& opt) {
  if (eps_ladder.empty()) throw std::invalid_argument("empty epsilon ladder");
  for (double e : eps_ladder) {
    if (!(e >= 0.0 && e <= 0.5)) throw std::invalid_argument("epsilon values must lie in [0, 0.5]");
  }
  if (!(opt.T > 0.0) || !(opt.dt > 0.0)) throw std::invalid_argument("stability run needs T > 0 and dt > 0");
  const auto& grid = basis.grid();
  const double base_norm = critical_norm(basis, base_state, params);
  if (!(base_norm > 0.0)) throw std::invalid_argument("stability experiment needs nonzero base data");

  StabilityReport rep;
  rep.forcing = opt.forcing_profile.size() > 0;
  double y_unit = 0.0;
  if (rep.forcing) {
    grid.check_size(opt.forcing_profile);
    y_unit = forcing_y_size(params, basis, opt.forcing_profile, opt.T);
    if (!(y_unit > 0.0)) throw std::invalid_argument("forcing profile has zero Y-size");
  }

  EvolveOptions<double> eo;
  eo.blowup_threshold = opt.blowup_threshold;
  const auto base = evolve_nonlinear(base_state, params, grid, opt.T, opt.dt, opt.record_stride, eo);
  const double t_end = base.t_end();
  for (const auto& s : base.snapshots) rep.M = std::max(rep.M, critical_norm(basis, s, params));
  rep.L = base.overflow_halt ? kNaN : scattering_size(base, base.t_begin(), t_end);

  const double q = (params.d + 1) * params.p / 2.0;
  const State direction{base_state.t, base_state.u / base_norm, base_state.v / base_norm};

  for (double eps : eps_ladder) {
    rep.eps.push_back(eps);
    const double alpha = rep.forcing ? eps / y_unit : 0.0;
    rep.forcing_alpha.push_back(alpha);

    Vec source;
    const Trajectory<double>* approx = &base;
    Trajectory<double> forced = base;
    if (rep.forcing && alpha > 0.0) {
      // ũ_tt - Δũ + F(ũ) = e with e = α·profile; the stepper's source enters with the opposite sign.
      source = -alpha * opt.forcing_profile;
      EvolveOptions<double> fo = eo;
      fo.source = &source;
      forced = evolve_nonlinear(base_state, params, grid, opt.T, opt.dt, opt.record_stride, fo);
      approx = &forced;
    }
    const State data{base_state.t, base_state.u + eps * direction.u, base_state.v + eps * direction.v};
    const auto exact = evolve_nonlinear(data, params, grid, opt.T, opt.dt, opt.record_stride, eo);

    if (exact.overflow_halt || approx->overflow_halt) {
      rep.valid.push_back(false);
      rep.D.push_back(kNaN);
      continue;
    }
    std::vector<double> times;
    std::vector<Vec> diff;
    for (std::size_t i = 0; i < exact.size(); ++i) {
      times.push_back(exact.snapshots[i].t);
      diff.push_back(exact.snapshots[i].u - approx->snapshots[i].u);
    }
    rep.valid.push_back(true);
    rep.D.push_back(spacetime_norm<double>(grid, times, diff, q, times.front(), times.back()));
  }

  std::vector<double> ex;
  std::vector<double> dv;
  std::vector<std::size_t> order(rep.eps.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return rep.eps[a] < rep.eps[b]; });
  rep.monotone = true;
  double prev = -1.0;
  for (std::size_t i : order) {
    if (!rep.valid[i]) continue;
    if (rep.D[i] < prev) rep.monotone = false;
    prev = rep.D[i];
    ex.push_back(rep.eps[i]);
    dv.push_back(rep.D[i]);
  }
  rep.slope = loglog_slope(ex, dv);
  return rep;
}

// ---- blowup ---------------------------------------------------------------

double nonlinear_dt(const ModelParams& params, double h, double amplitude) {
  const double lin = 0.25 * h;
  if (!(amplitude > 0.0) || params.sign == Sign::Linear) return lin;
  const double rate = std::sqrt(params.p + 1.0) * std::pow(amplitude, params.p / 2.0);
  return std::min(lin, 0.2 / rate);
}

BlowupReport blowup_contrast(const ModelParams& params, const State& state0, const Basis& basis, double dt,
                             double T_max, Index record_stride, double blowup_threshold) {
  if (params.sign != Sign::Focusing) throw std::invalid_argument("blowup contrast expects a focusing model");
  EvolveOptions<double> eo;
  eo.blowup_threshold = blowup_threshold;
  eo.support_threshold = 1e-6;
  const auto traj = evolve_nonlinear(state0, params, basis.grid(), T_max, dt, record_stride, eo);

  BlowupReport rep;
  rep.T_max = T_max;
  rep.halted = traj.overflow_halt;
  rep.t_halt = traj.overflow_halt ? traj.halt_time : kNaN;
  for (const auto& s : traj.snapshots) {
    rep.times.push_back(s.t);
    rep.crit_norms.push_back(critical_norm(basis, s, params));
  }
  if (traj.overflow_halt && traj.halt_state.is_finite()) {
    rep.times.push_back(traj.halt_state.t);
    rep.crit_norms.push_back(critical_norm(basis, traj.halt_state, params));
  }
  const double first = rep.crit_norms.front();
  rep.growth = first > 0.0 ? rep.crit_norms.back() / first : kNaN;
  rep.growth_pre_halt = first > 0.0 ? critical_norm(basis, traj.snapshots.back(), params) / first : kNaN;
  return rep;
}

// ---- dispersal ------------------------------------------------------------

DispersalReport dispersal_probe(const ModelParams& params, const State& state0, const Basis& basis, double T,
                                double dt, const DispersalOptions& opt) {
  if (params.sign != Sign::Defocusing) throw std::invalid_argument("dispersal probe expects a defocusing model");
  const auto& grid = basis.grid();
  EvolveOptions<double> eo;
  eo.support_threshold = opt.support_threshold;
  const auto traj = evolve_nonlinear(state0, params, grid, T, dt, opt.record_stride, eo);
  require_inside(traj, "dispersal probe");
  if (traj.overflow_halt) throw std::runtime_error("dispersal probe tripped the blowup detector");

  DispersalReport rep;
  rep.exponent = morawetz_exponent(params.d, params.p);
  const double p2 = params.p + 2.0;
  for (const auto& s : traj.snapshots) {
    rep.times.push_back(s.t);
    if (s.is_zero()) {
      rep.N_series.push_back(0.0);
      rep.near_origin_potential.push_back(0.0);
      continue;
    }
    const double n = frequency_scale_proxy(basis, s, params);
    const double cut = opt.concentration_C / n;
    const double inner =
        (grid.nodes().array() <= cut).select(grid.weights().array() * s.u.array().abs().pow(p2), 0.0).sum();
    rep.N_series.push_back(n);
    rep.near_origin_potential.push_back(n * grid.omega() * inner);
  }
  rep.morawetz = morawetz_report(traj, basis);
  if (!state0.is_zero()) rep.concentration = potential_concentration(traj, opt.concentration_C, rep.N_series);
  return rep;
}

// ---- reports --------------------------------------------------------------

nlohmann::json params_json(const ModelParams& params) {
  return {{"d", params.d}, {"p", params.p}, {"sign", to_string(params.sign)}, {"s_c", params.s_c()}};
}

nlohmann::json to_json(const ScatterReport& r) {
  return {{"times", r.times},
          {"deltas", r.deltas},
          {"raw_deltas", r.raw_deltas},
          {"data_norm", r.data_norm},
          {"final_relative", r.final_relative},
          {"dt", r.dt},
          {"nonlinear", r.nonlinear},
          {"strictly_decreasing", r.strictly_decreasing}};
}

nlohmann::json to_json(const StabilityReport& r) {
  std::vector<bool> valid(r.valid.begin(), r.valid.end());
  return {{"eps", r.eps},     {"D", r.D},       {"valid", valid},     {"forcing_alpha", r.forcing_alpha},
          {"slope", r.slope}, {"M", r.M},       {"L", r.L},           {"monotone", r.monotone},
          {"forcing", r.forcing}};
}

nlohmann::json to_json(const BlowupReport& r) {
  return {{"halted", r.halted},         {"t_halt", r.t_halt}, {"T_max", r.T_max},
          {"times", r.times},           {"crit_norms", r.crit_norms}, {"growth", r.growth},
          {"growth_pre_halt", r.growth_pre_halt}};
}

nlohmann::json to_json(const DispersalReport& r) {
  return {{"times", r.times},
          {"N_series", r.N_series},
          {"near_origin_potential", r.near_origin_potential},
          {"morawetz",
           {{"lhs", r.morawetz.lhs},
            {"rhs", r.morawetz.rhs},
            {"ratio", r.morawetz.ratio},
            {"critical_bound", r.morawetz.critical_bound}}},
          {"concentration", {{"lhs", r.concentration.lhs}, {"rhs", r.concentration.rhs}}},
          {"morawetz_exponent", r.exponent}};
}

}  // namespace supercrit
