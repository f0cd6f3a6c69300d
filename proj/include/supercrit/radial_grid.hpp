#ifndef SUPERCRIT_RADIAL_GRID_HPP
#define SUPERCRIT_RADIAL_GRID_HPP

#include <Eigen/Core>

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace supercrit {

template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

using Index = Eigen::Index;

/// Area of the unit sphere S^{d-1} in R^d.
template <typename Scalar>
Scalar sphere_area(int d) {
  using std::pow;
  using std::tgamma;
  const Scalar pi = Scalar(3.14159265358979323846264338327950288L);
  return Scalar(2) * pow(pi, Scalar(d) / Scalar(2)) / tgamma(Scalar(d) / Scalar(2));
}

/// Cell-centered mesh on (0, R_max) for radial functions on R^d.
///
/// Node j sits at r_j = (j + 1/2) h and carries the quadrature weight
/// w_j = r_j^{d-1} h, so that sum_j w_j f_j approximates the radial integral
/// of f r^{d-1}. Faces sit at j h; face 0 is the origin and has zero area.
template <typename Scalar>
class RadialGrid {
 public:
  RadialGrid(Scalar r_max, Index n, int d) : r_max_(r_max), n_(n), d_(d) {
    if (!(r_max > Scalar(0)) || !std::isfinite(static_cast<double>(r_max))) {
      throw std::invalid_argument("grid radius must be positive");
    }
    if (n < kMinCells) {
      std::ostringstream os;
      os << "grid needs at least " << kMinCells << " cells, got " << n;
      throw std::invalid_argument(os.str());
    }
    if (d < 3 || d > 9) {
      throw std::invalid_argument("grid dimension must lie in 3..9, got " + std::to_string(d));
    }
    using std::pow;
    h_ = r_max_ / Scalar(n_);
    nodes_.resize(n_);
    weights_.resize(n_);
    face_areas_.resize(n_ + 1);
    for (Index j = 0; j < n_; ++j) {
      nodes_(j) = (Scalar(j) + Scalar(0.5)) * h_;
      weights_(j) = pow(nodes_(j), d_ - 1) * h_;
    }
    for (Index j = 0; j <= n_; ++j) face_areas_(j) = pow(Scalar(j) * h_, d_ - 1);
    omega_ = sphere_area<Scalar>(d_);
  }

  static constexpr Index kMinCells = 4;

  Scalar r_max() const { return r_max_; }
  Index size() const { return n_; }
  int dim() const { return d_; }
  Scalar h() const { return h_; }
  /// ω_{d-1}; every norm in the library carries this factor.
  Scalar omega() const { return omega_; }

  const Vector<Scalar>& nodes() const { return nodes_; }
  const Vector<Scalar>& weights() const { return weights_; }
  /// (j h)^{d-1} for j = 0..N, the face radii raised to d-1.
  const Vector<Scalar>& face_areas() const { return face_areas_; }

  /// Weighted inner product sum_j w_j f_j g_j (no angular factor).
  template <typename A, typename B>
  Scalar dot(const Eigen::MatrixBase<A>& f, const Eigen::MatrixBase<B>& g) const {
    return (weights_.array() * f.array() * g.array()).sum();
  }

  template <typename A>
  void check_size(const Eigen::MatrixBase<A>& f) const {
    if (f.size() != n_) {
      std::ostringstream os;
      os << "field has " << f.size() << " samples but the grid has " << n_ << " cells";
      throw std::invalid_argument(os.str());
    }
  }

 private:
  Scalar r_max_;
  Index n_;
  int d_;
  Scalar h_{};
  Scalar omega_{};
  Vector<Scalar> nodes_;
  Vector<Scalar> weights_;
  Vector<Scalar> face_areas_;
};

template <typename Scalar>
RadialGrid<Scalar> build_grid(Scalar r_max, Index n, int d) {
  return RadialGrid<Scalar>(r_max, n, d);
}

/// Conservative radial Laplacian with a regular origin and a homogeneous
/// Dirichlet condition imposed at the outer face r = R_max (mirror ghost
/// value -f_{N-1}).
template <typename Scalar, typename Derived>
Vector<Scalar> laplacian_apply(const RadialGrid<Scalar>& grid, const Eigen::MatrixBase<Derived>& f) {
  grid.check_size(f);
  const Index n = grid.size();
  const auto& area = grid.face_areas();
  const Scalar inv_h2 = Scalar(1) / (grid.h() * grid.h());
  Vector<Scalar> out(n);
  Scalar inner_flux = Scalar(0);
  for (Index j = 0; j < n; ++j) {
    const Scalar outer_flux = (j + 1 < n) ? area(j + 1) * (f(j + 1) - f(j)) : area(n) * (Scalar(-2) * f(j));
    out(j) = (outer_flux - inner_flux) * inv_h2 * grid.h() / grid.weights()(j);
    inner_flux = outer_flux;
  }
  return out;
}

/// Row-sum (Gershgorin) bound on the spectral radius of the Laplacian.
template <typename Scalar>
Scalar laplacian_gershgorin_bound(const RadialGrid<Scalar>& grid) {
  const Index n = grid.size();
  const auto& area = grid.face_areas();
  const Scalar h2 = grid.h() * grid.h();
  Scalar bound = Scalar(0);
  for (Index j = 0; j < n; ++j) {
    const Scalar outer = (j + 1 < n) ? area(j + 1) : Scalar(2) * area(n);
    const Scalar off = area(j) + ((j + 1 < n) ? area(j + 1) : Scalar(0));
    const Scalar diag = area(j) + outer;
    const Scalar row = (diag + off) * grid.h() / (h2 * grid.weights()(j));
    bound = std::max(bound, row);
  }
  return bound;
}

/// (ω_{d-1} sum_j w_j |f_j|^q)^{1/q}; q = inf gives the max norm.
template <typename Scalar, typename Derived>
Scalar lp_norm(const RadialGrid<Scalar>& grid, const Eigen::MatrixBase<Derived>& f, Scalar q) {
  grid.check_size(f);
  using std::pow;
  if (std::isinf(static_cast<double>(q))) return f.cwiseAbs().maxCoeff();
  if (!(q >= Scalar(1))) throw std::invalid_argument("Lebesgue exponent must be at least 1");
  const Scalar sum = (grid.weights().array() * f.cwiseAbs().array().pow(q)).sum();
  return pow(grid.omega() * sum, Scalar(1) / q);
}

}  // namespace supercrit

#endif  // SUPERCRIT_RADIAL_GRID_HPP
