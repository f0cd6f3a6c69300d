#ifndef SUPERCRIT_DIAGNOSTICS_HPP
#define SUPERCRIT_DIAGNOSTICS_HPP

#include "supercrit/evolve.hpp"
#include "supercrit/exponents.hpp"
#include "supercrit/spectral_basis.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace supercrit {

template <typename Scalar>
struct EnergyParts {
  Scalar total;
  Scalar kinetic;
  Scalar gradient;
  /// Carries the sign of the nonlinearity, so total = kinetic + gradient + potential.
  Scalar potential;
};

/// sum_j w_j |u_j|^q, no ω factor.
template <typename Scalar>
Scalar weighted_power_sum(const RadialGrid<Scalar>& grid, const Vector<Scalar>& u, Scalar q) {
  return (grid.weights().array() * u.array().abs().pow(q)).sum();
}

template <typename Scalar>
EnergyParts<Scalar> energy(const FieldState<Scalar>& state, const RadialGrid<Scalar>& grid, const ModelParams& params) {
  grid.check_size(state.u);
  grid.check_size(state.v);
  const Scalar om = grid.omega();
  const Scalar half(0.5);
  EnergyParts<Scalar> e{};
  e.kinetic = half * om * grid.dot(state.v, state.v);
  e.gradient = -half * om * grid.dot(laplacian_apply(grid, state.u), state.u);
  const Scalar p2 = Scalar(params.p + 2.0);
  e.potential = params.sign == Sign::Linear
                    ? Scalar(0)
                    : Scalar(params.coupling()) * om * weighted_power_sum(grid, state.u, p2) / p2;
  e.total = e.kinetic + e.gradient + e.potential;
  return e;
}

/// Spacetime L^q norm, q = (d+1)p/2, of a field sampled at increasing times.
/// The time integrand is interpolated linearly between samples, so the q-th
/// power is exactly additive over adjacent intervals.
template <typename Scalar>
Scalar spacetime_norm(const RadialGrid<Scalar>& grid, std::span<const Scalar> times,
                      std::span<const Vector<Scalar>> fields, Scalar q, Scalar t_lo, Scalar t_hi) {
  if (times.size() != fields.size()) throw std::invalid_argument("times and fields differ in length");
  if (!(t_hi > t_lo)) throw std::invalid_argument("empty time interval");
  if (times.empty() || t_lo < times.front() - Scalar(1e-12) || t_hi > times.back() + Scalar(1e-12)) {
    throw std::invalid_argument("time interval outside the recorded range");
  }
  const Scalar om = grid.omega();
  std::vector<Scalar> g(times.size());
  for (std::size_t i = 0; i < times.size(); ++i) g[i] = om * weighted_power_sum(grid, fields[i], q);

  Scalar total(0);
  for (std::size_t i = 0; i + 1 < times.size(); ++i) {
    const Scalar a = std::max(times[i], t_lo);
    const Scalar b = std::min(times[i + 1], t_hi);
    if (!(b > a)) continue;
    const Scalar span = times[i + 1] - times[i];
    auto at = [&](Scalar t) { return g[i] + (g[i + 1] - g[i]) * (t - times[i]) / span; };
    total += Scalar(0.5) * (b - a) * (at(a) + at(b));
  }
  using std::pow;
  return pow(total, Scalar(1) / q);
}

/// Scattering size of a recorded run over [t_lo, t_hi].
template <typename Scalar>
Scalar scattering_size(const Trajectory<Scalar>& traj, Scalar t_lo, Scalar t_hi) {
  std::vector<Scalar> times;
  std::vector<Vector<Scalar>> fields;
  times.reserve(traj.size());
  fields.reserve(traj.size());
  for (const auto& s : traj.snapshots) {
    times.push_back(s.t);
    fields.push_back(s.u);
  }
  const Scalar q = Scalar((traj.params.d + 1) * traj.params.p / 2.0);
  return spacetime_norm<Scalar>(traj.grid, times, fields, q, t_lo, t_hi);
}

/// Truncated virial weight a(r) = R ψ(r/R): a = r up to R, constant 3R/2
/// beyond 2R, joined by a quintic smoothstep in a'.
template <typename Scalar>
class MorawetzWeight {
 public:
  MorawetzWeight(Scalar radius, int d) : R_(radius), d_(d) {
    if (!(radius > Scalar(0))) throw std::invalid_argument("Morawetz radius must be positive");
    if (d < 3) throw std::invalid_argument("dimension must be at least 3");
  }

  Scalar radius() const { return R_; }
  int dim() const { return d_; }

  Scalar a(Scalar r) const {
    if (r <= R_) return r;
    if (r >= Scalar(2) * R_) return Scalar(1.5) * R_;
    const Scalar s = r / R_ - Scalar(1);
    const Scalar s4 = s * s * s * s;
    return r - R_ * s4 * (s * s - Scalar(3) * s + Scalar(2.5));
  }

  /// a^{(k)}(r) for k = 1..4.
  Scalar derivative(int k, Scalar r) const {
    if (r <= R_) return k == 1 ? Scalar(1) : Scalar(0);
    if (r >= Scalar(2) * R_) return Scalar(0);
    const Scalar s = r / R_ - Scalar(1);
    switch (k) {
      case 1:
        return Scalar(1) - s * s * s * (Scalar(10) + s * (Scalar(-15) + Scalar(6) * s));
      case 2:
        return -Scalar(30) * s * s * (s - Scalar(1)) * (s - Scalar(1)) / R_;
      case 3:
        return -(Scalar(120) * s * s * s - Scalar(180) * s * s + Scalar(60) * s) / (R_ * R_);
      case 4:
        return -(Scalar(360) * s * s - Scalar(360) * s + Scalar(60)) / (R_ * R_ * R_);
      default:
        throw std::invalid_argument("derivative order must be 1..4");
    }
  }

  /// Δa = a'' + (d-1) a'/r.
  Scalar laplacian(Scalar r) const {
    const Scalar k = Scalar(d_ - 1);
    if (r <= R_) return k / r;
    return derivative(2, r) + k * derivative(1, r) / r;
  }

  /// ΔΔa away from the origin. In d = 3 the distributional part at r = 0 is
  /// handled by the callers.
  Scalar bilaplacian(Scalar r) const {
    const Scalar k = Scalar(d_ - 1);
    if (r <= R_) return -k * Scalar(d_ - 3) / (r * r * r);
    const Scalar a1 = derivative(1, r);
    const Scalar a2 = derivative(2, r);
    const Scalar a3 = derivative(3, r);
    const Scalar a4 = derivative(4, r);
    const Scalar g1 = a3 + k * (a2 / r - a1 / (r * r));
    const Scalar g2 = a4 + k * (a3 / r - Scalar(2) * a2 / (r * r) + Scalar(2) * a1 / (r * r * r));
    return g2 + k * g1 / r;
  }

  /// sup |a''| = 15/(8R), at the midpoint of the transition.
  Scalar second_derivative_bound() const { return Scalar(1.875) / R_; }

 private:
  Scalar R_;
  int d_;
};

template <typename Scalar>
MorawetzWeight<Scalar> morawetz_weight(Scalar radius, int d) {
  return MorawetzWeight<Scalar>(radius, d);
}

/// Centered radial derivative with an even reflection at the origin and the
/// Dirichlet ghost -u_{N-1} past R_max.
template <typename Scalar>
Vector<Scalar> radial_derivative(const RadialGrid<Scalar>& grid, const Vector<Scalar>& u) {
  grid.check_size(u);
  const Index n = u.size();
  const Scalar inv = Scalar(1) / (Scalar(2) * grid.h());
  Vector<Scalar> du(n);
  for (Index j = 0; j < n; ++j) {
    const Scalar left = j == 0 ? u(0) : u(j - 1);
    const Scalar right = j + 1 == n ? -u(n - 1) : u(j + 1);
    du(j) = (right - left) * inv;
  }
  return du;
}

/// Weight profiles a', a'', Δa and ΔΔa sampled on the grid nodes.
template <typename Scalar>
struct SampledWeight {
  Vector<Scalar> a1;
  Vector<Scalar> a2;
  Vector<Scalar> lap;
  Vector<Scalar> bilap;
};

template <typename Scalar>
SampledWeight<Scalar> sample_weight(const MorawetzWeight<Scalar>& weight, const RadialGrid<Scalar>& grid) {
  const Index n = grid.size();
  SampledWeight<Scalar> s{Vector<Scalar>(n), Vector<Scalar>(n), Vector<Scalar>(n), Vector<Scalar>(n)};
  for (Index j = 0; j < n; ++j) {
    const Scalar r = grid.nodes()(j);
    s.a1(j) = weight.derivative(1, r);
    s.a2(j) = weight.derivative(2, r);
    s.lap(j) = weight.laplacian(r);
    s.bilap(j) = weight.bilaplacian(r);
  }
  return s;
}

/// B(x, y) = ω sum_j w_j [-a' y Dx - ½ Δa x y]; M(t) = B(u, u_t).
template <typename Scalar>
Scalar morawetz_form(const RadialGrid<Scalar>& grid, const SampledWeight<Scalar>& sw, const Vector<Scalar>& x,
                     const Vector<Scalar>& y) {
  const Vector<Scalar> dx = radial_derivative(grid, x);
  const auto terms = -sw.a1.array() * y.array() * dx.array() - Scalar(0.5) * sw.lap.array() * x.array() * y.array();
  return grid.omega() * (grid.weights().array() * terms).sum();
}

template <typename Scalar>
Scalar morawetz_functional(const FieldState<Scalar>& state, const RadialGrid<Scalar>& grid,
                           const MorawetzWeight<Scalar>& weight) {
  return morawetz_form(grid, sample_weight(weight, grid), state.u, state.v);
}

/// Quadratic extrapolation of an even profile to r = 0 from the first two nodes.
template <typename Scalar>
Scalar origin_value(const Vector<Scalar>& u) {
  return (Scalar(9) * u(0) - u(1)) / Scalar(8);
}

/// Continuum right side of the virial identity evaluated on grid data:
/// ω sum w [a'' u_r^2 + σ p/(2(p+2)) Δa |u|^{p+2} - ¼ ΔΔa u^2], plus the
/// 2π u(0)^2 contributed by the point mass of ΔΔa at the origin in d = 3.
template <typename Scalar>
Scalar morawetz_rate(const FieldState<Scalar>& state, const RadialGrid<Scalar>& grid,
                     const SampledWeight<Scalar>& sw, const ModelParams& params) {
  grid.check_size(state.u);
  const Vector<Scalar> du = radial_derivative(grid, state.u);
  const auto& u = state.u.array();
  auto terms = (sw.a2.array() * du.array().square() - Scalar(0.25) * sw.bilap.array() * u.square()).eval();
  if (params.sign != Sign::Linear) {
    const Scalar p = Scalar(params.p);
    const Scalar c = Scalar(params.coupling()) * p / (Scalar(2) * (p + Scalar(2)));
    terms += c * sw.lap.array() * u.abs().pow(p + Scalar(2));
  }
  Scalar rate = grid.omega() * (grid.weights().array() * terms).sum();
  if (grid.dim() == 3 && grid.size() > 1) {
    const Scalar u0 = origin_value(state.u);
    rate += Scalar(2) * std::numbers::pi_v<Scalar> * u0 * u0;
  }
  return rate;
}

template <typename Scalar>
Scalar morawetz_rate(const FieldState<Scalar>& state, const RadialGrid<Scalar>& grid,
                     const MorawetzWeight<Scalar>& weight, const ModelParams& params) {
  return morawetz_rate(state, grid, sample_weight(weight, grid), params);
}

/// Exact time derivative of the grid functional along the semi-discrete flow
/// u_t = v, v_t = L_h u - F(u) - e: B(v, v) + B(u, v_t).
template <typename Scalar>
Scalar morawetz_rate_discrete(const FieldState<Scalar>& state, const RadialGrid<Scalar>& grid,
                              const SampledWeight<Scalar>& sw, const ModelParams& params,
                              const Vector<Scalar>* source = nullptr) {
  Vector<Scalar> accel = laplacian_apply(grid, state.u);
  accel -= nonlinearity(params, state.u);
  if (source != nullptr) accel -= *source;
  return morawetz_form(grid, sw, state.v, state.v) + morawetz_form(grid, sw, state.u, accel);
}

template <typename Scalar>
struct MorawetzReport {
  Scalar lhs;
  Scalar rhs;
  Scalar ratio;
  /// sup over snapshots of the critical pair norm.
  Scalar critical_bound;
  double exponent;
};

/// Localized virial bound over I = [t0, t0 + T]:
/// lhs = ∫_I ∫_{r <= T} |u|^{p+2}/r, rhs = T^{d-2-4/p} (B^2 + B^{p+2}).
template <typename Scalar>
MorawetzReport<Scalar> morawetz_report(const Trajectory<Scalar>& traj, const SpectralBasis<Scalar>& basis) {
  const auto& grid = traj.grid;
  const auto& params = traj.params;
  if (traj.size() < 2) throw std::invalid_argument("trajectory needs at least two snapshots");
  const Scalar T = traj.t_end() - traj.t_begin();
  if (T > grid.r_max()) throw std::invalid_argument("time horizon exceeds the grid radius");
  const Scalar p2 = Scalar(params.p + 2.0);
  const Scalar sc = Scalar(params.s_c());
  const Vector<Scalar> mask =
      (grid.nodes().array() <= T).select(grid.weights().array() / grid.nodes().array(), Scalar(0)).matrix();

  Scalar lhs(0);
  Scalar bound(0);
  for (std::size_t i = 0; i < traj.size(); ++i) {
    const auto& s = traj.snapshots[i];
    const Scalar g = grid.omega() * (mask.array() * s.u.array().abs().pow(p2)).sum();
    const Scalar wt = (i == 0 || i + 1 == traj.size()) ? Scalar(0.5) : Scalar(1);
    lhs += wt * traj.spacing() * g;
    bound = std::max(bound, pair_norm(basis, s, sc));
  }
  using std::pow;
  const double exponent = morawetz_exponent(params.d, params.p);
  const Scalar rhs = pow(T, Scalar(exponent)) * (bound * bound + pow(bound, p2));
  return {lhs, rhs, rhs > Scalar(0) ? lhs / rhs : Scalar(0), bound, exponent};
}

/// Energy in the annulus t + eps <= r <= 1/eps - t. Gradient terms live on
/// cell faces, the rest on nodes.
template <typename Scalar>
Scalar annulus_energy(const FieldState<Scalar>& state, const RadialGrid<Scalar>& grid, const ModelParams& params,
                      Scalar eps, Scalar t) {
  if (!(eps > Scalar(0))) throw std::invalid_argument("eps must be positive");
  const Scalar lo = t + eps;
  const Scalar hi = Scalar(1) / eps - t;
  if (!(lo < hi)) throw std::invalid_argument("empty annulus");
  grid.check_size(state.u);
  const Index n = grid.size();
  const Scalar h = grid.h();
  const Scalar p2 = Scalar(params.p + 2.0);
  const Scalar c = params.sign == Sign::Linear ? Scalar(0) : Scalar(params.coupling()) / p2;
  using std::abs;
  using std::pow;
  Scalar sum(0);
  for (Index j = 0; j < n; ++j) {
    const Scalar r = grid.nodes()(j);
    if (r < lo || r > hi) continue;
    const Scalar uj = state.u(j);
    sum += grid.weights()(j) * (Scalar(0.5) * state.v(j) * state.v(j) + c * pow(abs(uj), p2));
  }
  // Faces j = 1..n; the last one uses the Dirichlet ghost.
  for (Index j = 1; j <= n; ++j) {
    const Scalar r = Scalar(j) * h;
    if (r < lo || r > hi) continue;
    const Scalar right = j < n ? state.u(j) : -state.u(n - 1);
    const Scalar g = (right - state.u(j - 1)) / h;
    sum += Scalar(0.5) * grid.face_areas()(j) * h * g * g;
  }
  return grid.omega() * sum;
}

/// Per-mode Ḣ^{s_c} × Ḣ^{s_c-1} mass mu^{s_c} c_k^2 + mu^{s_c-1} e_k^2.
template <typename Scalar>
Vector<Scalar> critical_spectral_mass(const SpectralBasis<Scalar>& basis, const FieldState<Scalar>& state,
                                      const ModelParams& params) {
  const Scalar sc = Scalar(params.s_c());
  const Vector<Scalar> c = basis.project(state.u);
  const Vector<Scalar> e = basis.project(state.v);
  const auto& mu = basis.eigenvalues().array();
  return (mu.pow(sc) * c.array().square() + mu.pow(sc - Scalar(1)) * e.array().square()).matrix();
}

/// Frequency √mu_k below which half of the critical mass sits.
template <typename Scalar>
Scalar frequency_scale_proxy(const SpectralBasis<Scalar>& basis, const FieldState<Scalar>& state,
                             const ModelParams& params) {
  const Vector<Scalar> m = critical_spectral_mass(basis, state, params);
  const Scalar total = m.sum();
  if (!(total > Scalar(0))) throw std::invalid_argument("frequency scale of the zero state is undefined");
  Scalar acc(0);
  for (Index k = 0; k < m.size(); ++k) {
    acc += m(k);
    if (acc >= Scalar(0.5) * total) return basis.frequencies()(k);
  }
  return basis.frequencies()(m.size() - 1);
}

/// Larger of the spatial tail (critical density beyond r = C/N) and the
/// frequency tail (modes with √mu >= C N), each as a fraction of the total.
template <typename Scalar>
Scalar tail_mass(const SpectralBasis<Scalar>& basis, const FieldState<Scalar>& state, const ModelParams& params,
                 Scalar C, Scalar N) {
  if (!(C > Scalar(0)) || !(N > Scalar(0))) throw std::invalid_argument("C and N must be positive");
  const auto& grid = basis.grid();
  const Scalar sc = Scalar(params.s_c());
  const Vector<Scalar> m = critical_spectral_mass(basis, state, params);
  const Scalar total = m.sum();
  if (!(total > Scalar(0))) return Scalar(0);

  const Vector<Scalar> du = basis.fractional_power(state.u, sc);
  const Vector<Scalar> dv = basis.fractional_power(state.v, sc - Scalar(1));
  const Vector<Scalar> density = grid.weights().cwiseProduct(du.cwiseAbs2() + dv.cwiseAbs2());
  const Scalar cut = C / N;
  const Scalar spatial = (grid.nodes().array() >= cut).select(density.array(), Scalar(0)).sum() / density.sum();

  const Scalar fcut = C * N;
  const Scalar spectral = (basis.frequencies().array() >= fcut).select(m.array(), Scalar(0)).sum() / total;
  return std::max(spatial, spectral);
}

template <typename Scalar>
struct ConcentrationReport {
  Scalar lhs;
  Scalar rhs;
};

/// lhs = ∫_I ∫_{r <= C/N(t)} N(t) |u|^{p+2}, rhs = ∫_I N(t)^{4/p-(d-3)}, with
/// N sampled at the snapshots of `traj`.
template <typename Scalar>
ConcentrationReport<Scalar> potential_concentration(const Trajectory<Scalar>& traj, Scalar C,
                                                    const std::vector<Scalar>& n_series) {
  if (n_series.size() != traj.size()) throw std::invalid_argument("frequency series must match the snapshots");
  if (traj.size() < 2) throw std::invalid_argument("trajectory needs at least two snapshots");
  if (!(C > Scalar(0))) throw std::invalid_argument("C must be positive");
  const Scalar length = traj.t_end() - traj.t_begin();
  if (!(n_series.front() > Scalar(0)) || length < Scalar(1) / n_series.front()) {
    throw std::invalid_argument("interval shorter than the initial frequency scale");
  }
  const auto& grid = traj.grid;
  const auto& params = traj.params;
  const Scalar p2 = Scalar(params.p + 2.0);
  const Scalar ex = Scalar(4.0 / params.p - (params.d - 3));
  using std::pow;
  ConcentrationReport<Scalar> out{Scalar(0), Scalar(0)};
  for (std::size_t i = 0; i < traj.size(); ++i) {
    const Scalar n = n_series[i];
    const Scalar wt = ((i == 0 || i + 1 == traj.size()) ? Scalar(0.5) : Scalar(1)) * traj.spacing();
    const auto& u = traj.snapshots[i].u;
    const Scalar inner =
        (grid.nodes().array() <= C / n).select(grid.weights().array() * u.array().abs().pow(p2), Scalar(0)).sum();
    out.lhs += wt * n * grid.omega() * inner;
    out.rhs += wt * pow(n, ex);
  }
  return out;
}

/// One row of the diagnostics series.
struct DiagnosticsRecord {
  double t = 0;
  double E_total = 0;
  double E_kin = 0;
  double E_grad = 0;
  double E_pot = 0;
  double Hsc_u = 0;
  double Hsc1_v = 0;
  double M = 0;
  double dMdt = 0;
  double support_r = 0;
  double N_proxy = 0;
  double tail_eta = 0;

  static constexpr const char* kHeader = "t,E_total,E_kin,E_grad,E_pot,Hsc_u,Hsc1_v,M,dMdt,support_r,N_proxy,tail_eta";

  std::string csv_row() const {
    char buf[512];
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g", t,
                  E_total, E_kin, E_grad, E_pot, Hsc_u, Hsc1_v, M, dMdt, support_r, N_proxy, tail_eta);
    return buf;
  }
};

struct DiagnosticsOptions {
  double morawetz_R = 5.0;
  double tail_C = 4.0;
  double support_threshold = 1e-6;
};

/// Evaluates every column of the series for one state. N_proxy and tail_eta
/// are 0 for the zero state.
template <typename Scalar>
DiagnosticsRecord diagnose(const SpectralBasis<Scalar>& basis, const SampledWeight<Scalar>& sw,
                           const FieldState<Scalar>& state, const ModelParams& params,
                           const DiagnosticsOptions& opt) {
  const auto& grid = basis.grid();
  const Scalar sc = Scalar(params.s_c());
  const auto e = energy(state, grid, params);
  DiagnosticsRecord rec;
  rec.t = static_cast<double>(state.t);
  rec.E_total = static_cast<double>(e.total);
  rec.E_kin = static_cast<double>(e.kinetic);
  rec.E_grad = static_cast<double>(e.gradient);
  rec.E_pot = static_cast<double>(e.potential);
  rec.Hsc_u = static_cast<double>(sobolev_norm(basis, state.u, sc));
  rec.Hsc1_v = static_cast<double>(sobolev_norm(basis, state.v, sc - Scalar(1)));
  rec.M = static_cast<double>(morawetz_form(grid, sw, state.u, state.v));
  rec.dMdt = static_cast<double>(morawetz_rate(state, grid, sw, params));
  rec.support_r = static_cast<double>(support_radius(state, grid, Scalar(opt.support_threshold)));
  if (!state.is_zero()) {
    const Scalar n = frequency_scale_proxy(basis, state, params);
    rec.N_proxy = static_cast<double>(n);
    rec.tail_eta = static_cast<double>(tail_mass(basis, state, params, Scalar(opt.tail_C), n));
  }
  return rec;
}

}  // namespace supercrit

#endif  // SUPERCRIT_DIAGNOSTICS_HPP
