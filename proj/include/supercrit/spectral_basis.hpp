#ifndef SUPERCRIT_SPECTRAL_BASIS_HPP
#define SUPERCRIT_SPECTRAL_BASIS_HPP

#include "supercrit/field_state.hpp"
#include "supercrit/radial_grid.hpp"

#include <Eigen/Eigenvalues>

#include <chrono>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace supercrit {

template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

/// Eigenpairs of -L_h, the negative discrete radial Laplacian.
///
/// Eigenvectors are orthonormal in the weighted inner product
/// <f, g> = sum_j w_j f_j g_j. Internally the basis keeps the Euclidean
/// orthonormal eigenvectors Y of the symmetrized operator D^{1/2} L_h D^{-1/2},
/// D = diag(w), so that v_k = D^{-1/2} y_k.
template <typename Scalar>
class SpectralBasis {
 public:
  static constexpr Index kMaxCells = 4096;

  explicit SpectralBasis(const RadialGrid<Scalar>& grid) : grid_(grid) {
    const Index n = grid.size();
    if (n > kMaxCells) {
      std::ostringstream os;
      os << "dense eigensolve limited to " << kMaxCells << " cells, got " << n;
      throw std::invalid_argument(os.str());
    }
    const auto start = std::chrono::steady_clock::now();

    using std::sqrt;
    const auto& area = grid.face_areas();
    const auto& r = grid.nodes();
    const Scalar h2 = grid.h() * grid.h();
    const int dm1 = grid.dim() - 1;
    Vector<Scalar> diag(n);
    Vector<Scalar> sub(n > 1 ? n - 1 : 0);
    for (Index j = 0; j < n; ++j) {
      const Scalar outer = (j + 1 < n) ? area(j + 1) : Scalar(2) * area(n);
      diag(j) = -(area(j) + outer) * grid.h() / (h2 * grid.weights()(j));
      if (j + 1 < n) {
        using std::pow;
        sub(j) = area(j + 1) / (h2 * pow(sqrt(r(j) * r(j + 1)), dm1));
      }
    }

    Eigen::SelfAdjointEigenSolver<Matrix<Scalar>> solver;
    solver.computeFromTridiagonal(diag, sub, Eigen::ComputeEigenvectors);
    if (solver.info() != Eigen::Success) {
      const Scalar big = diag.cwiseAbs().maxCoeff();
      const Scalar small = diag.cwiseAbs().minCoeff();
      std::ostringstream os;
      os << "tridiagonal eigensolve did not converge (N = " << n
         << ", diagonal magnitude ratio " << static_cast<double>(big / small) << ")";
      throw std::runtime_error(os.str());
    }

    // Ascending eigenvalues of L_h are descending eigenvalues of -L_h.
    mu_ = -solver.eigenvalues().reverse();
    vectors_ = solver.eigenvectors().rowwise().reverse();
    if (!(mu_(0) > Scalar(0))) {
      std::ostringstream os;
      os << "lowest eigenvalue of -L_h is not positive: " << static_cast<double>(mu_(0));
      throw std::runtime_error(os.str());
    }
    frequencies_ = mu_.cwiseSqrt();
    sqrt_w_ = grid.weights().cwiseSqrt();
    inv_sqrt_w_ = sqrt_w_.cwiseInverse();

    build_seconds_ = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  }

  const RadialGrid<Scalar>& grid() const { return grid_; }
  Index size() const { return mu_.size(); }

  /// mu_k, ascending, all positive.
  const Vector<Scalar>& eigenvalues() const { return mu_; }
  /// sqrt(mu_k).
  const Vector<Scalar>& frequencies() const { return frequencies_; }

  Vector<Scalar> eigenvector(Index k) const { return inv_sqrt_w_.cwiseProduct(vectors_.col(k)); }

  /// Coefficients <f, v_k>.
  template <typename Derived>
  Vector<Scalar> project(const Eigen::MatrixBase<Derived>& f) const {
    grid_.check_size(f);
    return vectors_.transpose() * sqrt_w_.cwiseProduct(f);
  }

  /// Column-wise projection of a block of fields.
  Matrix<Scalar> project_columns(const Matrix<Scalar>& fields) const {
    return vectors_.transpose() * (sqrt_w_.asDiagonal() * fields);
  }

  /// sum_k c_k v_k.
  template <typename Derived>
  Vector<Scalar> synthesize(const Eigen::MatrixBase<Derived>& coeffs) const {
    return inv_sqrt_w_.cwiseProduct(vectors_ * coeffs);
  }

  /// |∇|^s f on the grid, i.e. (-L_h)^{s/2} f.
  template <typename Derived>
  Vector<Scalar> fractional_power(const Eigen::MatrixBase<Derived>& f, Scalar s) const {
    Vector<Scalar> c = project(f);
    c.array() *= mu_.array().pow(s / Scalar(2));
    return synthesize(c);
  }

  /// Wall time spent building the basis.
  double build_seconds() const { return build_seconds_; }

 private:
  RadialGrid<Scalar> grid_;
  Vector<Scalar> mu_;
  Vector<Scalar> frequencies_;
  Matrix<Scalar> vectors_;
  Vector<Scalar> sqrt_w_;
  Vector<Scalar> inv_sqrt_w_;
  double build_seconds_ = 0.0;
};

template <typename Scalar>
SpectralBasis<Scalar> build_basis(const RadialGrid<Scalar>& grid) {
  return SpectralBasis<Scalar>(grid);
}

/// ω_{d-1} sum_k mu_k^s c_k^2 for modal coefficients c.
template <typename Scalar, typename Derived>
Scalar modal_sobolev_norm_sq(const SpectralBasis<Scalar>& basis, const Eigen::MatrixBase<Derived>& coeffs,
                             Scalar s) {
  return basis.grid().omega() * (basis.eigenvalues().array().pow(s) * coeffs.array().square()).sum();
}

/// Discrete ‖|∇|^s f‖_{L^2(R^d)}.
template <typename Scalar, typename Derived>
Scalar sobolev_norm(const SpectralBasis<Scalar>& basis, const Eigen::MatrixBase<Derived>& f, Scalar s) {
  if (!(s >= Scalar(-1))) throw std::invalid_argument("Sobolev order must be at least -1");
  using std::sqrt;
  return sqrt(modal_sobolev_norm_sq(basis, basis.project(f), s));
}

/// ‖(u, v)‖ in Ḣ^s × Ḣ^{s-1}.
template <typename Scalar>
Scalar pair_norm(const SpectralBasis<Scalar>& basis, const FieldState<Scalar>& state, Scalar s) {
  using std::sqrt;
  return sqrt(modal_sobolev_norm_sq(basis, basis.project(state.u), s) +
              modal_sobolev_norm_sq(basis, basis.project(state.v), s - Scalar(1)));
}

/// Same norm for a state already expressed in modal coefficients.
template <typename Scalar, typename A, typename B>
Scalar modal_pair_norm(const SpectralBasis<Scalar>& basis, const Eigen::MatrixBase<A>& cu,
                       const Eigen::MatrixBase<B>& cv, Scalar s) {
  using std::sqrt;
  return sqrt(modal_sobolev_norm_sq(basis, cu, s) + modal_sobolev_norm_sq(basis, cv, s - Scalar(1)));
}

/// Exact free evolution by time t of the semi-discrete wave equation:
/// per mode (c, e) -> (cos(ωt) c + sin(ωt)/ω e, -ω sin(ωt) c + cos(ωt) e).
template <typename Scalar>
FieldState<Scalar> linear_propagate(const SpectralBasis<Scalar>& basis, const FieldState<Scalar>& state, Scalar t) {
  using std::cos;
  using std::sin;
  const Vector<Scalar> c = basis.project(state.u);
  const Vector<Scalar> e = basis.project(state.v);
  const auto& w = basis.frequencies();
  const Index n = basis.size();
  Vector<Scalar> c_t(n);
  Vector<Scalar> e_t(n);
  for (Index k = 0; k < n; ++k) {
    const Scalar cs = cos(w(k) * t);
    const Scalar sn = sin(w(k) * t);
    c_t(k) = cs * c(k) + sn / w(k) * e(k);
    e_t(k) = -w(k) * sn * c(k) + cs * e(k);
  }
  return {state.t + t, basis.synthesize(c_t), basis.synthesize(e_t)};
}

}  // namespace supercrit

#endif  // SUPERCRIT_SPECTRAL_BASIS_HPP
