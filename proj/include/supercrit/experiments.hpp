#ifndef SUPERCRIT_EXPERIMENTS_HPP
#define SUPERCRIT_EXPERIMENTS_HPP

#include "supercrit/diagnostics.hpp"

#include <json.hpp>

#include <string>
#include <vector>

namespace supercrit {

using Basis = SpectralBasis<double>;
using State = FieldState<double>;
using Vec = Vector<double>;

// ---- scattering -----------------------------------------------------------

struct ScatterOptions {
  Index record_stride = 16;
  double support_threshold = 1e-6;
  double blowup_threshold = 1e6;
};

struct ScatterReport {
  std::vector<double> times;
  /// ‖w(T_{i+1}) - w(T_i)‖ from the accumulated Duhamel increments.
  std::vector<double> deltas;
  /// Same differences taken directly between pulled-back snapshots.
  std::vector<double> raw_deltas;
  /// Ḣ^{s_c} × Ḣ^{s_c-1} norm of the initial data.
  double data_norm = 0;
  double final_relative = 0;
  double dt = 0;
  bool nonlinear = true;
  bool strictly_decreasing = false;
};

/// Runs once to max(T_list) and compares the leapfrog-free pullbacks
/// w(T) = P^{-n} s_n at the listed times. Because the scheme satisfies
/// s_{n+1} = P s_n - (dt/2)[P(0, F_n) + (0, F_{n+1})] exactly, pullback
/// increments are trapezoid sums of P^{-m}(0, F_m); these are accumulated step
/// by step so that tiny increments are not lost to cancellation.
ScatterReport scattering_detect(const ModelParams& params, const State& state0, const Basis& basis,
                                std::vector<double> T_list, double dt, const ScatterOptions& opt = {});

// ---- stability ------------------------------------------------------------

struct StabilityOptions {
  double T = 5.0;
  double dt = 0.0;
  Index record_stride = 4;
  /// Spatial profile of the forcing error; empty means no forcing.
  Vec forcing_profile;
  double blowup_threshold = 1e6;
};

struct StabilityReport {
  std::vector<double> eps;
  std::vector<double> D;
  std::vector<bool> valid;
  /// Amplitude α with Y-size of α·profile equal to ε (0 without forcing).
  std::vector<double> forcing_alpha;
  double slope = 0;
  /// sup_t ‖ũ‖ in Ḣ^{s_c} × Ḣ^{s_c-1} and S-norm of ũ, for the unforced ũ.
  double M = 0;
  double L = 0;
  bool monotone = false;
  bool forcing = false;
};

/// ‖|∇|^{γ} e‖_{L^{r_Y}} |I|^{1/q_Y} for a time-independent e.
double forcing_y_size(const ModelParams& params, const Basis& basis, const Vec& profile, double duration);

/// For each ε: ũ is base_state evolved under the source matching a forcing
/// error of Y-size ε, u is base_state + ε·(base_state / its critical norm)
/// evolved exactly; D(ε) is the S-norm of u - ũ over [0, T].
StabilityReport stability_experiment(const ModelParams& params, const State& base_state, const Basis& basis,
                                     const std::vector<double>& eps_ladder, const StabilityOptions& opt);

/// Least-squares slope of log y against log x over positive pairs.
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

// ---- blowup ---------------------------------------------------------------

struct BlowupReport {
  bool halted = false;
  double t_halt = 0;
  double T_max = 0;
  std::vector<double> times;
  std::vector<double> crit_norms;
  /// Critical norm at the halt state (or the last snapshot) over the initial one.
  double growth = 0;
  /// Same ratio using the last recorded snapshot below the threshold.
  double growth_pre_halt = 0;
};

/// Focusing run until the blowup detector fires or T_max passes.
BlowupReport blowup_contrast(const ModelParams& params, const State& state0, const Basis& basis, double dt,
                             double T_max, Index record_stride, double blowup_threshold = 1e6);

/// Step size resolving the nonlinear time scale of data with sup |u| = amplitude.
double nonlinear_dt(const ModelParams& params, double h, double amplitude);

// ---- dispersal ------------------------------------------------------------

struct DispersalOptions {
  Index record_stride = 8;
  double concentration_C = 1.0;
  double support_threshold = 1e-6;
};

struct DispersalReport {
  std::vector<double> times;
  std::vector<double> N_series;
  /// ∫_{r <= C/N(t)} N(t) |u|^{p+2} per snapshot.
  std::vector<double> near_origin_potential;
  MorawetzReport<double> morawetz{};
  ConcentrationReport<double> concentration{};
  double exponent = 0;
};

DispersalReport dispersal_probe(const ModelParams& params, const State& state0, const Basis& basis, double T,
                                double dt, const DispersalOptions& opt = {});

// ---- reports --------------------------------------------------------------

nlohmann::json params_json(const ModelParams& params);
nlohmann::json to_json(const ScatterReport& r);
nlohmann::json to_json(const StabilityReport& r);
nlohmann::json to_json(const BlowupReport& r);
nlohmann::json to_json(const DispersalReport& r);

}  // namespace supercrit

#endif  // SUPERCRIT_EXPERIMENTS_HPP
