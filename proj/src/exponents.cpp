#include "supercrit/exponents.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace supercrit {

namespace {

void require_model(int d, double p) {
  if (d < 3) {
    throw std::invalid_argument("dimension must be at least 3, got " + std::to_string(d));
  }
  if (!(p > 0.0) || !std::isfinite(p)) {
    std::ostringstream os;
    os << "power must be positive and finite, got " << p;
    throw std::invalid_argument(os.str());
  }
}

// Slack for the sharp endpoint of the admissibility inequality.
constexpr double kAdmissibleSlack = 1e-14;

}  // namespace

std::string to_string(Sign s) {
  switch (s) {
    case Sign::Focusing: return "focusing";
    case Sign::Linear: return "linear";
    case Sign::Defocusing: return "defocusing";
  }
  return "unknown";
}

Sign sign_from_string(const std::string& s) {
  if (s == "defocusing" || s == "+1" || s == "1") return Sign::Defocusing;
  if (s == "focusing" || s == "-1") return Sign::Focusing;
  if (s == "linear" || s == "0") return Sign::Linear;
  throw std::invalid_argument("unknown sign '" + s + "' (expected defocusing, focusing or linear)");
}

double critical_regularity(int d, double p) {
  require_model(d, p);
  return 0.5 * d - 2.0 / p;
}

bool ModelParams::in_theorem_window() const { return p_window(d).contains(p); }

PowerWindow p_window(int d) {
  if (d < 3) {
    throw std::invalid_argument("dimension must be at least 3, got " + std::to_string(d));
  }
  const double lo = 4.0 / (d - 2);
  if (d == 3) return {lo, std::numeric_limits<double>::infinity()};
  if (d <= 6) return {lo, 4.0 / (d - 3)};

  // Smaller root of (d+1) p^2 - d(d-1) p + 4(d+1) = 0, written in the
  // cancellation-free form 2c / (b + sqrt(b^2 - 4ac)).
  const double dd = d;
  const double b = dd * (dd - 1.0);
  const double disc = b * b - 16.0 * (dd + 1.0) * (dd + 1.0);
  if (!(disc >= 0.0)) {
    throw std::domain_error("negative discriminant in the power window for d = " + std::to_string(d));
  }
  const double hi = 8.0 * (dd + 1.0) / (b + std::sqrt(disc));
  if (!(lo < hi)) {
    throw std::domain_error("empty power window for d = " + std::to_string(d));
  }
  return {lo, hi};
}

bool is_admissible(LebesgueExponent q, LebesgueExponent r, int d) {
  if (r.is_infinite()) return false;
  if (q.value() < 2.0 || r.value() < 2.0) return false;
  const double lhs = q.reciprocal() + (d - 1) * r.reciprocal() / 2.0;
  const double rhs = (d - 1) / 4.0;
  return lhs <= rhs + kAdmissibleSlack * std::max(1.0, rhs);
}

double scaling_gamma(LebesgueExponent q, LebesgueExponent r, int d, double p) {
  require_model(d, p);
  return q.reciprocal() + d * r.reciprocal() - 2.0 / p;
}

double smoothness_margin(int d, double p) {
  return p + 1.0 - (1.0 / (d + 1) + p / 2.0) - critical_regularity(d, p);
}

XYExponents xy_exponents(int d, double p) {
  require_model(d, p);
  const double dd = d;
  XYExponents xy{};
  xy.space_exp_X = 2.0 * (dd + 1.0) / (dd - 1.0);
  xy.space_exp_Y = 2.0 * (dd + 1.0) / (dd + 3.0);
  if (d <= 6) {
    xy.deriv_order = critical_regularity(d, p) - 0.5;
    xy.time_exp_X = xy.space_exp_X;
    xy.time_exp_Y = xy.space_exp_Y;
    return xy;
  }

  const double den_x = 4.0 * (dd + 1.0) + p * p * (dd + 1.0) - p * dd * (dd - 1.0);
  const double den_y = 4.0 * (dd + 1.0) + p * p * (dd + 1.0) - p * (dd * dd - dd - 4.0);
  if (!(den_x > 0.0) || !(den_y > 0.0)) {
    std::ostringstream os;
    os << "time exponent denominator is not positive (X: " << den_x << ", Y: " << den_y
       << ") for d = " << d << ", p = " << p << "; p lies above the window upper end "
       << p_window(d).hi;
    throw std::domain_error(os.str());
  }
  xy.deriv_order = p / 2.0;
  xy.time_exp_X = 2.0 * p * (dd + 1.0) / den_x;
  xy.time_exp_Y = 2.0 * p * (dd + 1.0) / den_y;
  return xy;
}

double morawetz_exponent(int d, double p) {
  require_model(d, p);
  // One rounding: d = 3, p = 6 gives the double nearest 1/3.
  return ((d - 2.0) * p - 4.0) / p;
}

double concentration_exponent(int d, double p) {
  require_model(d, p);
  return (4.0 - (d - 3.0) * p) / p;
}

}  // namespace supercrit
