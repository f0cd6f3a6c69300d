#include "doctest.h"
#include "oracles.hpp"
#include "supercrit/spectral_basis.hpp"

#include <cmath>
#include <random>

using namespace supercrit;
using Vec = Vector<double>;

namespace {

Vec gaussian(const RadialGrid<double>& g, double width = 1.0) {
  return (-0.5 * g.nodes().array().square() / (width * width)).exp().matrix();
}

Vec random_vec(std::mt19937_64& rng, Index n) {
  const auto f = oracle::random_field(rng, static_cast<int>(n));
  return Eigen::Map<const Vec>(f.data(), n);
}

}  // namespace

TEST_CASE("build_grid small example") {
  const auto g = build_grid(1.0, 4, 3);
  CHECK(g.h() == 0.25);
  const double nodes[] = {0.125, 0.375, 0.625, 0.875};
  for (int j = 0; j < 4; ++j) {
    CHECK(g.nodes()(j) == doctest::Approx(nodes[j]).epsilon(1e-15));
    CHECK(g.weights()(j) == doctest::Approx(0.25 * nodes[j] * nodes[j]).epsilon(1e-15));
  }
  CHECK(g.omega() == doctest::Approx(4.0 * M_PI).epsilon(1e-15));
}

TEST_CASE("build_grid rejects bad input") {
  CHECK_THROWS_AS(build_grid(1.0, 0, 3), std::invalid_argument);
  CHECK_THROWS_AS(build_grid(-1.0, 64, 3), std::invalid_argument);
  CHECK_THROWS_AS(build_grid(1.0, 64, 2), std::invalid_argument);
  CHECK_THROWS_AS(build_grid(1.0, 64, 10), std::invalid_argument);
}

TEST_CASE("grid invariants and weight sum convergence") {
  const auto g = build_grid(20.0, 512, 3);
  for (Index j = 1; j < g.size(); ++j) CHECK(g.nodes()(j) > g.nodes()(j - 1));
  CHECK(g.nodes()(0) > 0.0);
  CHECK(g.nodes()(g.size() - 1) < 20.0);
  CHECK((g.weights().array() > 0.0).all());

  const double exact = 20.0 * 20.0 * 20.0 / 3.0;
  const double sum = g.weights().sum();
  CHECK(std::fabs(sum - exact) / exact < 0.01);
  CHECK(sum == doctest::Approx(static_cast<double>(oracle::midpoint_volume(20.0L, 512, 3))).epsilon(1e-13));

  // Second order: the midpoint error for r^{d-1} quarters when N doubles.
  for (int d : {3, 5, 9}) {
    const double e1 = std::fabs(build_grid(2.0, 64, d).weights().sum() - std::pow(2.0, d) / d);
    const double e2 = std::fabs(build_grid(2.0, 128, d).weights().sum() - std::pow(2.0, d) / d);
    CHECK(e1 / e2 == doctest::Approx(4.0).epsilon(0.02));
  }
  CHECK(sphere_area<double>(5) == doctest::Approx(static_cast<double>(oracle::sphere_area(5))).epsilon(1e-14));
}

TEST_CASE("laplacian of a constant") {
  const auto g = build_grid(1.0, 32, 4);
  CHECK_THROWS_AS(laplacian_apply(g, Vec::Ones(31)), std::invalid_argument);
  const Vec lf = laplacian_apply(g, Vec::Constant(32, 2.5));
  for (Index j = 0; j + 1 < 32; ++j) CHECK(std::fabs(lf(j)) < 1e-10);
  const double last = -2.0 * 2.5 * g.face_areas()(32) / (g.h() * g.h() * std::pow(g.nodes()(31), 3));
  CHECK(lf(31) == doctest::Approx(last).epsilon(1e-13));
}

TEST_CASE("laplacian of r^2 in d = 3") {
  // Flux-form algebra with face radii j h, (j+1) h and node (j+1/2) h gives
  // [6 r^2 h^2 + h^4/2] / (h^2 r^2) = 6 + h^2/(2 r^2): exact up to a term that
  // vanishes away from the origin.
  const auto g = build_grid(4.0, 64, 3);
  const Vec f = g.nodes().array().square().matrix();
  const Vec lf = laplacian_apply(g, f);
  const double h = g.h();
  for (Index j = 0; j + 1 < g.size(); ++j) {
    const double r = g.nodes()(j);
    CHECK(lf(j) == doctest::Approx(6.0 + h * h / (2.0 * r * r)).epsilon(1e-12));
  }
  for (Index j = 48; j + 1 < g.size(); ++j) CHECK(std::fabs(lf(j) - 6.0) < 1e-3);
}

TEST_CASE("laplacian of a Gaussian converges at second order") {
  for (int d : {3, 6}) {
    double prev = 0.0;
    for (int n : {256, 512, 1024}) {
      const auto g = build_grid(10.0, n, d);
      const Vec lf = laplacian_apply(g, gaussian(g));
      double err = 0.0;
      for (Index j = 0; j < g.size(); ++j) {
        const double r = g.nodes()(j);
        if (r < 0.5 || r > 8.0) continue;
        err = std::max(err, std::fabs(lf(j) - oracle::gaussian_laplacian(d, r)));
      }
      if (prev > 0.0) CHECK(prev / err == doctest::Approx(4.0).epsilon(0.1));
      prev = err;
    }
  }
}

TEST_CASE("laplacian is self-adjoint and negative") {
  std::mt19937_64 rng(11);
  for (int d = 3; d <= 9; ++d) {
    const auto g = build_grid(5.0, 200, d);
    for (int trial = 0; trial < 20; ++trial) {
      const Vec f = random_vec(rng, g.size());
      const Vec k = random_vec(rng, g.size());
      const Vec lf = laplacian_apply(g, f);
      const Vec lk = laplacian_apply(g, k);
      const double scale = std::sqrt(g.dot(f, f) * g.dot(k, k));
      // The operator norm is O(1/h^2); tolerance is relative to that scale.
      const double op = laplacian_gershgorin_bound(g);
      CHECK(std::fabs(g.dot(lf, k) - g.dot(f, lk)) < 1e-12 * scale * op);
      CHECK(g.dot(lf, f) <= 0.0);
    }
  }
}

TEST_CASE("basis orthonormality and eigen residual") {
  for (int d : {3, 5, 9}) {
    CAPTURE(d);
    const auto g = build_grid(6.0, 128, d);
    const auto b = build_basis(g);
    CHECK((b.eigenvalues().array() > 0.0).all());
    for (Index k = 1; k < b.size(); ++k) CHECK(b.eigenvalues()(k) >= b.eigenvalues()(k - 1));

    double worst_ortho = 0.0;
    double worst_resid = 0.0;
    for (Index k = 0; k < b.size(); k += 7) {
      const Vec vk = b.eigenvector(k);
      for (Index l = 0; l < b.size(); l += 5) {
        const double ip = g.dot(vk, b.eigenvector(l));
        worst_ortho = std::max(worst_ortho, std::fabs(ip - (k == l ? 1.0 : 0.0)));
      }
      const Vec r = -laplacian_apply(g, vk) - b.eigenvalues()(k) * vk;
      worst_resid = std::max(worst_resid, std::sqrt(g.dot(r, r)) / b.eigenvalues()(k));
    }
    CHECK(worst_ortho < 1e-10);
    CHECK(worst_resid < 1e-8);
  }
  CHECK_THROWS_AS(build_basis(build_grid(1.0, 5000, 3)), std::invalid_argument);
}

TEST_CASE("d = 3 Dirichlet spectrum") {
  const auto g = build_grid(20.0, 512, 3);
  const auto b = build_basis(g);
  for (int k = 0; k < 5; ++k) {
    const double exact = static_cast<double>(oracle::d3_dirichlet_eigenvalue(k, 20.0L));
    CHECK(std::fabs(b.eigenvalues()(k) - exact) / exact < 1e-3);
  }
}

TEST_CASE("weighted Parseval") {
  std::mt19937_64 rng(5);
  const auto g = build_grid(10.0, 256, 4);
  const auto b = build_basis(g);
  for (int trial = 0; trial < 100; ++trial) {
    const Vec f = random_vec(rng, g.size());
    const Vec c = b.project(f);
    CHECK(c.squaredNorm() == doctest::Approx(g.dot(f, f)).epsilon(1e-10));
    CHECK((b.synthesize(c) - f).cwiseAbs().maxCoeff() < 1e-10 * f.cwiseAbs().maxCoeff());
  }
}

TEST_CASE("sobolev norm identities") {
  const auto g = build_grid(10.0, 256, 3);
  const auto b = build_basis(g);
  const Vec f = gaussian(g);
  CHECK(sobolev_norm(b, f, 0.0) == doctest::Approx(lp_norm(g, f, 2.0)).epsilon(1e-10));
  const double dirichlet = std::sqrt(-g.omega() * g.dot(laplacian_apply(g, f), f));
  CHECK(sobolev_norm(b, f, 1.0) == doctest::Approx(dirichlet).epsilon(1e-10));
  CHECK_THROWS(sobolev_norm(b, f, -1.5));
}

TEST_CASE("sobolev norm log-convexity and interpolation") {
  std::mt19937_64 rng(9);
  const auto g = build_grid(8.0, 128, 5);
  const auto b = build_basis(g);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int trial = 0; trial < 50; ++trial) {
    const Vec f = random_vec(rng, g.size());
    const double s1 = -1.0 + 3.0 * unit(rng);
    const double s2 = -1.0 + 3.0 * unit(rng);
    const double a = unit(rng);
    const double s = a * s1 + (1.0 - a) * s2;
    const double lhs = std::pow(sobolev_norm(b, f, s), 2.0);
    const double rhs = std::pow(sobolev_norm(b, f, s1), 2.0 * a) * std::pow(sobolev_norm(b, f, s2), 2.0 * (1.0 - a));
    CHECK(lhs <= rhs * (1.0 + 1e-10));
  }
  // Monotone in s once every active mode has mu_k >= 1.
  Vec c = Vec::Zero(b.size());
  Index first = 0;
  while (b.eigenvalues()(first) < 1.0) ++first;
  for (Index k = first; k < first + 20; ++k) c(k) = unit(rng) - 0.5;
  const Vec f = b.synthesize(c);
  double prev = 0.0;
  for (double s = -1.0; s <= 2.0; s += 0.25) {
    const double n = sobolev_norm(b, f, s);
    CHECK(n >= prev);
    prev = n;
  }
}

TEST_CASE("Gaussian fractional norm approaches the continuum value") {
  const double s = 7.0 / 6.0;
  const double exact = static_cast<double>(oracle::gaussian_sobolev_norm(3, s));
  double prev = 1.0;
  for (int n : {256, 512, 1024}) {
    const auto g = build_grid(20.0, n, 3);
    const auto b = build_basis(g);
    const double err = std::fabs(sobolev_norm(b, gaussian(g), s) - exact) / exact;
    CAPTURE(n);
    CHECK(err < prev);
    prev = err;
  }
  CHECK(prev < 1e-2);
}

TEST_CASE("lp norm") {
  const auto g = build_grid(4.0, 400, 3);
  CHECK(lp_norm(g, Vec::Zero(400), 3.0) == 0.0);
  const double a = 2.0;
  const Vec plateau = (g.nodes().array() <= a).cast<double>().matrix();
  for (double q : {1.0, 2.0, 5.0}) {
    const double ball = std::pow(static_cast<double>(oracle::sphere_area(3)) * std::pow(a, 3) / 3.0, 1.0 / q);
    CHECK(lp_norm(g, plateau, q) == doctest::Approx(ball).epsilon(5e-3));
  }
  const Vec f = gaussian(g);
  CHECK(lp_norm(g, f, std::numeric_limits<double>::infinity()) == f.maxCoeff());
  CHECK_THROWS(lp_norm(g, f, 0.5));
}

TEST_CASE("long double instantiation") {
  const auto g = build_grid<long double>(1.0L, 64, 3);
  const auto b = build_basis(g);
  const Vector<long double> f = b.eigenvector(0);
  CHECK(static_cast<double>(g.dot(f, f)) == doctest::Approx(1.0).epsilon(1e-15));
}
