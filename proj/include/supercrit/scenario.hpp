#ifndef SUPERCRIT_SCENARIO_HPP
#define SUPERCRIT_SCENARIO_HPP

#include "supercrit/exponents.hpp"
#include "supercrit/field_state.hpp"
#include "supercrit/spectral_basis.hpp"

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace supercrit {

/// Thrown for malformed scenario files; the message carries the line number.
class ScenarioError : public std::runtime_error {
 public:
  ScenarioError(const std::string& origin, int line, const std::string& what);
  int line() const { return line_; }

 private:
  int line_;
};

enum class DataFamily { Gaussian, Bump, Mode };

std::string to_string(DataFamily f);
DataFamily family_from_string(std::string_view s);

struct Scenario {
  // [model]
  ModelParams model{3, 6.0, Sign::Defocusing};
  // [grid]
  Index N = 1024;
  double R_max = 20.0;
  // [data]
  DataFamily family = DataFamily::Gaussian;
  double amplitude = 1.0;
  double width = 1.0;
  Index mode_index = 0;
  // [run]
  std::string name = "run";
  double T = 5.0;
  double cfl_factor = 0.5;
  Index record_stride = 4;
  double blowup_threshold = 1e6;
  /// Explicit step; when absent the step comes from cfl_factor.
  std::optional<double> dt;
  std::uint64_t seed = 0;
  std::vector<double> T_list{2.0, 4.0, 8.0, 16.0};
  std::vector<double> eps_ladder{1e-3, 1e-2, 1e-1};
  bool forcing = true;
  // [diagnostics]
  /// Morawetz truncation radius; 0 means R = T.
  double morawetz_R = 0.0;
  double concentration_C = 1.0;
  double tail_C = 4.0;
  double support_threshold = 1e-6;

  /// Non-fatal findings from validation (not part of equality).
  std::vector<std::string> warnings;

  bool operator==(const Scenario& o) const;
};

/// Parses `key = value` lines grouped by `[section]` headers, or flat
/// `section.key = value` lines; `#` starts a comment.
Scenario parse_scenario_text(std::string_view text, const std::string& origin = "<string>");
Scenario parse_scenario(const std::string& path);

/// Canonical text form; parse_scenario_text(emit_scenario(s)) == s.
std::string emit_scenario(const Scenario& s);

/// Checks constraints, throwing std::invalid_argument; fills s.warnings.
void validate_scenario(Scenario& s);

/// Radius beyond which the initial profile is below the support threshold.
double expected_support(const Scenario& s);

/// Initial (u, u_t) for the scenario's data family; the mode family needs the basis.
FieldState<double> initial_state(const Scenario& s, const SpectralBasis<double>& basis);

/// Profile of the data family with unit amplitude (used as a forcing shape).
Vector<double> family_profile(const Scenario& s, const SpectralBasis<double>& basis);

}  // namespace supercrit

#endif  // SUPERCRIT_SCENARIO_HPP
