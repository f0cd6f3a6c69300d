#ifndef SUPERCRIT_EVOLVE_HPP
#define SUPERCRIT_EVOLVE_HPP

#include "supercrit/exponents.hpp"
#include "supercrit/field_state.hpp"
#include "supercrit/spectral_basis.hpp"

#include <cmath>
#include <functional>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <vector>

namespace supercrit {

/// out = sign |u|^p u. Integer p up to 16 uses repeated products; other p go
/// through exp(p log|u|) with u = 0 mapped to 0.
template <typename Scalar>
void apply_nonlinearity(const ModelParams& model, const Vector<Scalar>& u, Vector<Scalar>& out) {
  out.resize(u.size());
  const Scalar c = Scalar(model.coupling());
  if (c == Scalar(0)) {
    out.setZero();
    return;
  }
  const double p = model.p;
  const bool integral = p == std::floor(p) && p >= 1.0 && p <= 16.0;
  if (integral) {
    const int k = static_cast<int>(p);
    for (Index j = 0; j < u.size(); ++j) {
      const Scalar a = u(j) < Scalar(0) ? -u(j) : u(j);
      Scalar pw = a;
      for (int i = 1; i < k; ++i) pw *= a;
      out(j) = c * pw * u(j);
    }
    return;
  }
  using std::exp;
  using std::log;
  const Scalar ps = Scalar(p);
  for (Index j = 0; j < u.size(); ++j) {
    const Scalar a = u(j) < Scalar(0) ? -u(j) : u(j);
    out(j) = a == Scalar(0) ? Scalar(0) : c * exp(ps * log(a)) * u(j);
  }
}

template <typename Scalar>
Vector<Scalar> nonlinearity(const ModelParams& model, const Vector<Scalar>& u) {
  Vector<Scalar> out;
  apply_nonlinearity(model, u, out);
  return out;
}

/// Time step factor / sqrt(bound). With a basis the bound is max mu_k, so
/// dt sqrt(max mu) = factor. Without one it is the larger of 4d/h^2 and the
/// Laplacian's row-sum bound (the origin rows dominate for d >= 6).
template <typename Scalar>
Scalar cfl_dt(const RadialGrid<Scalar>& grid, Scalar factor, const SpectralBasis<Scalar>* basis = nullptr) {
  if (!(factor > Scalar(0) && factor <= Scalar(1))) {
    std::ostringstream os;
    os << "CFL factor must lie in (0, 1], got " << static_cast<double>(factor);
    throw std::invalid_argument(os.str());
  }
  using std::sqrt;
  Scalar bound;
  if (basis != nullptr) {
    bound = basis->eigenvalues().maxCoeff();
  } else {
    bound = std::max(Scalar(4 * grid.dim()) / (grid.h() * grid.h()), laplacian_gershgorin_bound(grid));
  }
  return factor / sqrt(bound);
}

/// Velocity Verlet (kick-drift-kick) for u_tt = L_h u - F(u) - e(x), with an
/// optional time-independent source e. Caches the acceleration between steps.
template <typename Scalar>
class LeapfrogStepper {
 public:
  LeapfrogStepper(const ModelParams& model, const RadialGrid<Scalar>& grid, Scalar dt,
                  Scalar blowup_threshold = Scalar(1e6), const Vector<Scalar>* source = nullptr)
      : model_(model), grid_(grid), dt_(dt), threshold_(blowup_threshold), source_(source) {
    if (!(dt > Scalar(0))) throw std::invalid_argument("time step must be positive");
    if (source_ != nullptr) grid_.check_size(*source_);
  }

  /// Advances in place. Returns true when the new state overflows the blowup
  /// threshold or stops being finite.
  bool advance(FieldState<Scalar>& s) {
    if (!primed_) {
      acceleration(s.u, accel_);
      primed_ = true;
    }
    const Scalar half = Scalar(0.5) * dt_;
    s.v.noalias() += half * accel_;
    s.u.noalias() += dt_ * s.v;
    acceleration(s.u, accel_);
    s.v.noalias() += half * accel_;
    s.t += dt_;
    const Scalar peak = s.u.cwiseAbs().maxCoeff();
    return !(peak <= threshold_) || !s.v.allFinite();
  }

  /// Forget the cached acceleration (needed after editing the state).
  void reset() { primed_ = false; }

  Scalar dt() const { return dt_; }

 private:
  void acceleration(const Vector<Scalar>& u, Vector<Scalar>& a) {
    a = laplacian_apply(grid_, u);
    apply_nonlinearity(model_, u, work_);
    a -= work_;
    if (source_ != nullptr) a -= *source_;
  }

  ModelParams model_;
  const RadialGrid<Scalar>& grid_;
  Scalar dt_;
  Scalar threshold_;
  const Vector<Scalar>* source_;
  Vector<Scalar> accel_;
  Vector<Scalar> work_;
  bool primed_ = false;
};

template <typename Scalar>
struct LeapfrogStep {
  FieldState<Scalar> state;
  bool overflow;
};

template <typename Scalar>
LeapfrogStep<Scalar> step_leapfrog(const FieldState<Scalar>& state, const ModelParams& model,
                                   const RadialGrid<Scalar>& grid, Scalar dt,
                                   Scalar blowup_threshold = Scalar(1e6)) {
  grid.check_size(state.u);
  grid.check_size(state.v);
  LeapfrogStepper<Scalar> stepper(model, grid, dt, blowup_threshold);
  LeapfrogStep<Scalar> out{state, false};
  out.overflow = stepper.advance(out.state);
  return out;
}

/// Recorded orbit of the leapfrog scheme. Snapshots are spaced stride * dt.
template <typename Scalar>
struct Trajectory {
  ModelParams params;
  RadialGrid<Scalar> grid;
  Scalar dt;
  Index stride;
  std::vector<FieldState<Scalar>> snapshots;
  bool boundary_touched = false;
  bool overflow_halt = false;
  Scalar halt_time = std::numeric_limits<Scalar>::quiet_NaN();
  /// State that tripped the blowup detector (not part of `snapshots`).
  FieldState<Scalar> halt_state;

  Scalar spacing() const { return dt * Scalar(stride); }
  Scalar t_begin() const { return snapshots.front().t; }
  Scalar t_end() const { return snapshots.back().t; }
  std::size_t size() const { return snapshots.size(); }
};

template <typename Scalar>
struct EvolveOptions {
  Scalar blowup_threshold = Scalar(1e6);
  /// Relative level for the support radius used by the boundary check.
  Scalar support_threshold = Scalar(1e-6);
  /// Time-independent source e(x) in u_tt - Δu + F(u) + e = 0.
  const Vector<Scalar>* source = nullptr;
  /// Called after every step (including step 0, the initial state).
  std::function<void(Index, const FieldState<Scalar>&)> on_step;
};

/// Runs the leapfrog scheme from state0 up to time T (rounded up to a whole
/// number of recording strides) or until the blowup detector fires.
template <typename Scalar>
Trajectory<Scalar> evolve_nonlinear(const FieldState<Scalar>& state0, const ModelParams& model,
                                    const RadialGrid<Scalar>& grid, Scalar T, Scalar dt, Index record_stride,
                                    const EvolveOptions<Scalar>& options = {}) {
  if (!(T >= Scalar(0))) throw std::invalid_argument("duration must be non-negative");
  if (record_stride < 1) throw std::invalid_argument("record stride must be at least 1");
  grid.check_size(state0.u);
  grid.check_size(state0.v);

  Trajectory<Scalar> traj{model, grid, dt, record_stride, {}, false, false,
                          std::numeric_limits<Scalar>::quiet_NaN(), {}};
  traj.snapshots.push_back(state0);
  const Scalar edge = grid.r_max() - Scalar(5) * grid.h();
  auto check_boundary = [&](const FieldState<Scalar>& s) {
    if (support_radius(s, grid, options.support_threshold) > edge) traj.boundary_touched = true;
  };
  check_boundary(state0);
  if (options.on_step) options.on_step(0, state0);
  if (T == Scalar(0)) return traj;

  using std::ceil;
  const Scalar per_stride = dt * Scalar(record_stride);
  const Index strides = std::max<Index>(1, static_cast<Index>(ceil(T / per_stride - Scalar(1e-9))));
  const Index steps = strides * record_stride;

  LeapfrogStepper<Scalar> stepper(model, grid, dt, options.blowup_threshold, options.source);
  FieldState<Scalar> s = state0;
  for (Index n = 1; n <= steps; ++n) {
    if (stepper.advance(s)) {
      traj.overflow_halt = true;
      traj.halt_time = s.t;
      traj.halt_state = s;
      break;
    }
    if (options.on_step) options.on_step(n, s);
    if (n % record_stride == 0) {
      traj.snapshots.push_back(s);
      check_boundary(s);
    }
  }
  return traj;
}

/// Free evolution realised by the leapfrog scheme itself: n steps of size dt
/// act on mode k as a rotation by n θ_k, θ_k = 2 asin(dt ω_k / 2), with the
/// velocity scaled by η_k = sqrt(1 - dt^2 mu_k / 4). Negative n runs backward.
template <typename Scalar>
class LeapfrogFreeFlow {
 public:
  LeapfrogFreeFlow(const SpectralBasis<Scalar>& basis, Scalar dt) : basis_(basis), dt_(dt) {
    using std::asin;
    using std::sqrt;
    const auto& w = basis.frequencies();
    if (!(dt * w.maxCoeff() < Scalar(2))) {
      throw std::invalid_argument("time step violates the leapfrog stability limit dt * sqrt(max mu) < 2");
    }
    theta_.resize(w.size());
    stiffness_.resize(w.size());
    for (Index k = 0; k < w.size(); ++k) {
      theta_(k) = Scalar(2) * asin(Scalar(0.5) * dt * w(k));
      stiffness_(k) = w(k) * sqrt(Scalar(1) - Scalar(0.25) * dt * dt * w(k) * w(k));
    }
  }

  /// Applies n steps to modal coefficients (c, e) in place.
  template <typename A, typename B>
  void apply(Eigen::MatrixBase<A>& c, Eigen::MatrixBase<B>& e, Scalar n) const {
    using std::cos;
    using std::sin;
    for (Index k = 0; k < theta_.size(); ++k) {
      const Scalar cs = cos(n * theta_(k));
      const Scalar sn = sin(n * theta_(k));
      const Scalar ck = c(k);
      c(k) = cs * ck + sn / stiffness_(k) * e(k);
      e(k) = -stiffness_(k) * sn * ck + cs * e(k);
    }
  }

  FieldState<Scalar> propagate(const FieldState<Scalar>& s, Index n) const {
    Vector<Scalar> c = basis_.project(s.u);
    Vector<Scalar> e = basis_.project(s.v);
    apply(c, e, Scalar(n));
    return {s.t + Scalar(n) * dt_, basis_.synthesize(c), basis_.synthesize(e)};
  }

  const Vector<Scalar>& angles() const { return theta_; }
  /// ω_k η_k.
  const Vector<Scalar>& stiffness() const { return stiffness_; }
  Scalar dt() const { return dt_; }

 private:
  const SpectralBasis<Scalar>& basis_;
  Scalar dt_;
  Vector<Scalar> theta_;
  Vector<Scalar> stiffness_;
};

/// Exact free evolution sampled on the recording schedule of a leapfrog run;
/// the nonlinearity is ignored. Produces a trajectory with no flags set.
template <typename Scalar>
Trajectory<Scalar> evolve_linear_exact(const SpectralBasis<Scalar>& basis, const FieldState<Scalar>& state0,
                                       const ModelParams& model, Scalar T, Scalar dt, Index record_stride) {
  using std::ceil;
  const Scalar per_stride = dt * Scalar(record_stride);
  const Index strides = T > Scalar(0) ? static_cast<Index>(ceil(T / per_stride - Scalar(1e-9))) : 0;
  ModelParams linear = model;
  linear.sign = Sign::Linear;
  Trajectory<Scalar> traj{linear, basis.grid(), dt, record_stride, {}, false, false,
                          std::numeric_limits<Scalar>::quiet_NaN(), {}};
  traj.snapshots.reserve(static_cast<std::size_t>(strides + 1));
  for (Index i = 0; i <= strides; ++i) {
    FieldState<Scalar> s = linear_propagate(basis, state0, Scalar(i) * per_stride);
    s.t = state0.t + Scalar(i) * per_stride;
    traj.snapshots.push_back(std::move(s));
  }
  return traj;
}

/// Norm in Ḣ^{s_c} × Ḣ^{s_c-1} of the mismatch between snapshot t_index and
/// the Duhamel representation built from the initial snapshot, with the
/// forcing integral taken by the trapezoid rule over the recorded snapshots.
template <typename Scalar>
Scalar duhamel_residual(const Trajectory<Scalar>& traj, const SpectralBasis<Scalar>& basis, std::size_t t_index,
                        Scalar max_spacing = Scalar(0.05)) {
  if (t_index >= traj.snapshots.size()) throw std::out_of_range("snapshot index past the end of the trajectory");
  if (traj.spacing() > max_spacing) {
    std::ostringstream os;
    os << "snapshot spacing " << static_cast<double>(traj.spacing()) << " exceeds the quadrature limit "
       << static_cast<double>(max_spacing);
    throw std::invalid_argument(os.str());
  }
  using std::cos;
  using std::sin;
  const Index n = basis.size();
  const Scalar sc = Scalar(traj.params.s_c());
  const auto& first = traj.snapshots.front();
  const auto& target = traj.snapshots[t_index];
  const Scalar t = target.t - first.t;

  // Homogeneous part.
  const Vector<Scalar> c0 = basis.project(first.u);
  const Vector<Scalar> e0 = basis.project(first.v);
  const auto& w = basis.frequencies();
  Vector<Scalar> cu(n);
  Vector<Scalar> cv(n);
  for (Index k = 0; k < n; ++k) {
    const Scalar cs = cos(w(k) * t);
    const Scalar sn = sin(w(k) * t);
    cu(k) = cs * c0(k) + sn / w(k) * e0(k);
    cv(k) = -w(k) * sn * c0(k) + cs * e0(k);
  }

  // Forcing part, trapezoid in s over snapshots 0..t_index.
  if (t_index > 0 && traj.params.sign != Sign::Linear) {
    const Index m = static_cast<Index>(t_index) + 1;
    Matrix<Scalar> forcing(n, m);
    Vector<Scalar> col;
    for (Index i = 0; i < m; ++i) {
      apply_nonlinearity(traj.params, traj.snapshots[static_cast<std::size_t>(i)].u, col);
      forcing.col(i) = col;
    }
    const Matrix<Scalar> modal = basis.project_columns(forcing);
    const Scalar ds = traj.spacing();
    for (Index i = 0; i < m; ++i) {
      const Scalar weight = (i == 0 || i == m - 1) ? Scalar(0.5) * ds : ds;
      const Scalar lag = t - (traj.snapshots[static_cast<std::size_t>(i)].t - first.t);
      for (Index k = 0; k < n; ++k) {
        const Scalar fk = weight * modal(k, i);
        cu(k) -= sin(w(k) * lag) / w(k) * fk;
        cv(k) -= cos(w(k) * lag) * fk;
      }
    }
  }

  cu -= basis.project(target.u);
  cv -= basis.project(target.v);
  return modal_pair_norm(basis, cu, cv, sc);
}

}  // namespace supercrit

#endif  // SUPERCRIT_EVOLVE_HPP
