#include "doctest.h"
#include "supercrit/experiments.hpp"

#include <cmath>

using namespace supercrit;

namespace {

Vec gaussian(const RadialGrid<double>& g, double amplitude) {
  return (amplitude * (-0.5 * g.nodes().array().square()).exp()).matrix();
}

State datum(const Vec& u) { return {0.0, u, Vec::Zero(u.size())}; }

struct Setup {
  RadialGrid<double> grid;
  Basis basis;
  explicit Setup(double r_max = 20.0, Index n = 512) : grid(r_max, n, 3), basis(grid) {}
};

const Setup& shared() {
  static const Setup s;
  return s;
}

}  // namespace

TEST_CASE("log-log slope") {
  CHECK(loglog_slope({1.0, 2.0, 4.0}, {3.0, 12.0, 48.0}) == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(std::isnan(loglog_slope({1.0}, {1.0})));
  CHECK(loglog_slope({0.0, 1.0, 10.0}, {0.0, 1.0, 10.0}) == doctest::Approx(1.0));
}

TEST_CASE("scattering with the nonlinearity disabled") {
  const auto& s = shared();
  const auto r = scattering_detect({3, 6.0, Sign::Linear}, datum(gaussian(s.grid, 1.0)), s.basis, {1.0, 2.0, 4.0},
                                   s.grid.h() / 4.0);
  REQUIRE(r.deltas.size() == 2);
  for (double d : r.deltas) CHECK(d == 0.0);
  for (double d : r.raw_deltas) CHECK(d < 1e-8 * r.data_norm);
  CHECK_FALSE(r.nonlinear);
}

TEST_CASE("scattering preconditions and the zero datum") {
  const auto& s = shared();
  const double dt = s.grid.h() / 4.0;
  const auto z = scattering_detect({3, 6.0, Sign::Defocusing}, State::zero(512), s.basis, {1.0, 2.0}, dt);
  CHECK(z.data_norm == 0.0);
  CHECK(z.deltas[0] == 0.0);
  CHECK_THROWS_AS(scattering_detect({3, 6.0, Sign::Focusing}, datum(gaussian(s.grid, 0.1)), s.basis, {1.0, 2.0}, dt),
                  std::invalid_argument);
  CHECK_THROWS_AS(scattering_detect({3, 6.0, Sign::Defocusing}, datum(gaussian(s.grid, 0.1)), s.basis, {1.0, 18.0}, dt),
                  std::invalid_argument);
  CHECK_THROWS(scattering_detect({3, 6.0, Sign::Defocusing}, datum(gaussian(s.grid, 0.1)), s.basis, {1.0}, dt));
}

TEST_CASE("accumulated pullback increments agree with direct pullbacks") {
  // At amplitude 1 the increments are far above roundoff, so the two routes
  // to the same differences must agree.
  const auto& s = shared();
  const auto r = scattering_detect({3, 6.0, Sign::Defocusing}, datum(gaussian(s.grid, 1.0)), s.basis,
                                   {0.5, 1.0, 2.0, 4.0}, s.grid.h() / 4.0);
  for (std::size_t i = 0; i < r.deltas.size(); ++i) {
    CAPTURE(i);
    CHECK(r.deltas[i] > 1e-6 * r.data_norm);
    CHECK(r.deltas[i] == doctest::Approx(r.raw_deltas[i]).epsilon(1e-7));
  }
}

TEST_CASE("small data scatters") {
  const auto& s = shared();
  const auto r = scattering_detect({3, 6.0, Sign::Defocusing}, datum(gaussian(s.grid, 0.05)), s.basis,
                                   {1.0, 2.0, 4.0, 8.0}, s.grid.h() / 4.0);
  CHECK(r.strictly_decreasing);
  CHECK(r.final_relative < 1e-4);
  const auto json = to_json(r);
  CHECK(json["deltas"].size() == 3);
  CHECK(json.contains("raw_deltas"));
}

TEST_CASE("stability ladder") {
  const auto& s = shared();
  const ModelParams m{3, 6.0, Sign::Defocusing};
  StabilityOptions opt;
  opt.T = 2.0;
  opt.dt = s.grid.h() / 4.0;
  const State base = datum(gaussian(s.grid, 0.1));
  const auto plain = stability_experiment(m, base, s.basis, {0.0, 1e-3, 1e-2, 1e-1}, opt);
  CHECK(plain.D[0] == 0.0);
  CHECK(plain.monotone);
  CHECK(plain.slope == doctest::Approx(1.0).epsilon(0.05));
  CHECK(plain.M > 0.0);
  CHECK(plain.L > 0.0);

  opt.forcing_profile = gaussian(s.grid, 1.0);
  const auto forced = stability_experiment(m, base, s.basis, {1e-3, 1e-2, 1e-1}, opt);
  CHECK(forced.monotone);
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(forcing_y_size(m, s.basis, (forced.forcing_alpha[i] * opt.forcing_profile).eval(), opt.T) ==
          doctest::Approx(forced.eps[i]).epsilon(1e-12));
    // Forcing changes D at the same order as ε, not at a lower one.
    CHECK(std::fabs(forced.D[i] - plain.D[i + 1]) < 10.0 * forced.eps[i]);
  }
  CHECK_THROWS(stability_experiment(m, base, s.basis, {0.7}, opt));
  CHECK_THROWS(stability_experiment(m, State::zero(512), s.basis, {0.1}, opt));
}

TEST_CASE("blowup contrast") {
  const auto& s = shared();
  const ModelParams foc{3, 6.0, Sign::Focusing};
  CHECK_THROWS_AS(blowup_contrast({3, 6.0, Sign::Defocusing}, datum(gaussian(s.grid, 1.0)), s.basis, 0.01, 1.0, 1),
                  std::invalid_argument);
  const auto small = blowup_contrast(foc, datum(gaussian(s.grid, 0.001)), s.basis, s.grid.h() / 4.0, 2.0, 64);
  CHECK_FALSE(small.halted);
  CHECK(small.growth == doctest::Approx(1.0).epsilon(0.05));

  const double dt = nonlinear_dt(foc, s.grid.h(), 10.0);
  CHECK(dt < s.grid.h() / 4.0);
  const auto big = blowup_contrast(foc, datum(gaussian(s.grid, 10.0)), s.basis, dt, 1.0, 1);
  CHECK(big.halted);
  CHECK(big.t_halt < 1.0);
  CHECK(big.growth > 10.0);
  CHECK(big.growth_pre_halt > 1.0);
  CHECK(to_json(big)["halted"] == true);
}

TEST_CASE("dispersal probe") {
  const auto& s = shared();
  const ModelParams m{3, 6.0, Sign::Defocusing};
  const auto z = dispersal_probe(m, State::zero(512), s.basis, 2.0, s.grid.h() / 4.0);
  for (double v : z.N_series) CHECK(v == 0.0);
  for (double v : z.near_origin_potential) CHECK(v == 0.0);
  CHECK(z.morawetz.lhs == 0.0);
  CHECK(z.exponent == 1.0 / 3.0);
  CHECK_THROWS_AS(dispersal_probe({3, 6.0, Sign::Focusing}, State::zero(512), s.basis, 2.0, 0.01),
                  std::invalid_argument);

  const State u0 = datum(gaussian(s.grid, 1.0));
  const auto a = dispersal_probe(m, u0, s.basis, 4.0, s.grid.h() / 4.0);
  const auto b = dispersal_probe(m, u0, s.basis, 4.0, s.grid.h() / 8.0, DispersalOptions{16, 1.0, 1e-6});
  CHECK(a.morawetz.ratio == doctest::Approx(b.morawetz.ratio).epsilon(0.05));
  CHECK(a.N_series.front() > 0.0);
  CHECK(a.concentration.rhs > 0.0);
  const auto json = to_json(a);
  CHECK(json["morawetz_exponent"].get<double>() == 1.0 / 3.0);
}
