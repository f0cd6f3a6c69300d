#ifndef SUPERCRIT_FIELD_STATE_HPP
#define SUPERCRIT_FIELD_STATE_HPP

#include "supercrit/radial_grid.hpp"

#include <stdexcept>

namespace supercrit {

/// Cauchy datum (u, u_t) sampled on a grid at time t.
template <typename Scalar>
struct FieldState {
  Scalar t = Scalar(0);
  Vector<Scalar> u;
  Vector<Scalar> v;

  static FieldState zero(Index n, Scalar t = Scalar(0)) {
    return {t, Vector<Scalar>::Zero(n), Vector<Scalar>::Zero(n)};
  }

  Index size() const { return u.size(); }
  bool is_finite() const { return u.allFinite() && v.allFinite(); }
  bool is_zero() const { return u.isZero(0) && v.isZero(0); }
};

/// Largest node radius where |u| + |v| exceeds `threshold` times its maximum
/// over the grid; 0 for the zero state.
template <typename Scalar>
Scalar support_radius(const FieldState<Scalar>& state, const RadialGrid<Scalar>& grid, Scalar threshold) {
  if (!(threshold > Scalar(0))) throw std::invalid_argument("support threshold must be positive");
  grid.check_size(state.u);
  const Vector<Scalar> mag = state.u.cwiseAbs() + state.v.cwiseAbs();
  const Scalar peak = mag.maxCoeff();
  if (!(peak > Scalar(0))) return Scalar(0);
  for (Index j = mag.size() - 1; j >= 0; --j) {
    if (mag(j) > threshold * peak) return grid.nodes()(j);
  }
  return Scalar(0);
}

}  // namespace supercrit

#endif  // SUPERCRIT_FIELD_STATE_HPP
