#ifndef SUPERCRIT_EXPONENTS_HPP
#define SUPERCRIT_EXPONENTS_HPP

#include <limits>
#include <string>

namespace supercrit {

/// Sign in front of |u|^p u. `Linear` switches the nonlinearity off while
/// keeping p around for the critical norms.
enum class Sign : int { Focusing = -1, Linear = 0, Defocusing = 1 };

std::string to_string(Sign s);
Sign sign_from_string(const std::string& s);

/// A Lebesgue exponent in [1, infinity], with infinity carried as a tag so
/// that 1/q is exactly zero there.
class LebesgueExponent {
 public:
  constexpr LebesgueExponent(double value) : value_(value), infinite_(false) {}

  static constexpr LebesgueExponent infinity() {
    LebesgueExponent q(0.0);
    q.infinite_ = true;
    return q;
  }

  constexpr bool is_infinite() const { return infinite_; }
  constexpr double value() const {
    return infinite_ ? std::numeric_limits<double>::infinity() : value_;
  }
  constexpr double reciprocal() const { return infinite_ ? 0.0 : 1.0 / value_; }

 private:
  double value_;
  bool infinite_;
};

double critical_regularity(int d, double p);

/// The equation u_tt - Δu + sign |u|^p u = 0 in d space dimensions.
struct ModelParams {
  int d = 3;
  double p = 6.0;
  Sign sign = Sign::Defocusing;

  double s_c() const { return critical_regularity(d, p); }
  double coupling() const { return static_cast<double>(static_cast<int>(sign)); }
  bool supercritical() const { return p > 4.0 / (d - 2); }
  bool in_theorem_window() const;
};

/// Open interval of powers covered by the spacetime-bound theorem.
/// `hi` is +infinity when d = 3.
struct PowerWindow {
  double lo;
  double hi;
  bool contains(double p) const { return lo < p && p < hi; }
};

PowerWindow p_window(int d);

bool is_admissible(LebesgueExponent q, LebesgueExponent r, int d);

/// Derivative order γ matching (q, r) through 1/q + d/r = 2/p + γ.
double scaling_gamma(LebesgueExponent q, LebesgueExponent r, int d, double p);

/// p + 1 - (1/(d+1) + p/2) - s_c. Positive exactly on the high-dimensional
/// part of the window.
double smoothness_margin(int d, double p);

/// Exponents of the X (solution) and Y (nonlinearity) spaces used by the
/// perturbation theory.
struct XYExponents {
  double deriv_order;
  double time_exp_X;
  double space_exp_X;
  double time_exp_Y;
  double space_exp_Y;
};

XYExponents xy_exponents(int d, double p);

/// d - 2 - 4/p, the growth rate of the truncated Morawetz bound.
double morawetz_exponent(int d, double p);

/// Potential-concentration exponent 4/p - (d - 3).
double concentration_exponent(int d, double p);

}  // namespace supercrit

#endif  // SUPERCRIT_EXPONENTS_HPP
