#include "supercrit/scenario.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

namespace supercrit {

ScenarioError::ScenarioError(const std::string& origin, int line, const std::string& what)
    : std::runtime_error(origin + ":" + std::to_string(line) + ": " + what), line_(line) {}

std::string to_string(DataFamily f) {
  switch (f) {
    case DataFamily::Gaussian:
      return "gaussian";
    case DataFamily::Bump:
      return "bump";
    case DataFamily::Mode:
      return "mode";
  }
  return "gaussian";
}

DataFamily family_from_string(std::string_view s) {
  if (s == "gaussian") return DataFamily::Gaussian;
  if (s == "bump") return DataFamily::Bump;
  if (s == "mode") return DataFamily::Mode;
  throw std::invalid_argument("unknown data family '" + std::string(s) + "' (expected gaussian, bump or mode)");
}

bool Scenario::operator==(const Scenario& o) const {
  return model.d == o.model.d && model.p == o.model.p && model.sign == o.model.sign && N == o.N &&
         R_max == o.R_max && family == o.family && amplitude == o.amplitude && width == o.width &&
         mode_index == o.mode_index && name == o.name && T == o.T && cfl_factor == o.cfl_factor &&
         record_stride == o.record_stride && blowup_threshold == o.blowup_threshold && dt == o.dt &&
         seed == o.seed && T_list == o.T_list && eps_ladder == o.eps_ladder && forcing == o.forcing &&
         morawetz_R == o.morawetz_R && concentration_C == o.concentration_C && tail_C == o.tail_C &&
         support_threshold == o.support_threshold;
}

namespace {

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double to_double(std::string_view v) {
  double x = 0;
  const auto* end = v.data() + v.size();
  const auto [ptr, ec] = std::from_chars(v.data(), end, x);
  if (ec != std::errc() || ptr != end) throw std::invalid_argument("expected a real number, got '" + std::string(v) + "'");
  return x;
}

long long to_integer(std::string_view v) {
  long long x = 0;
  const auto* end = v.data() + v.size();
  const auto [ptr, ec] = std::from_chars(v.data(), end, x);
  if (ec != std::errc() || ptr != end) throw std::invalid_argument("expected an integer, got '" + std::string(v) + "'");
  return x;
}

std::uint64_t to_unsigned(std::string_view v) {
  std::uint64_t x = 0;
  const auto* end = v.data() + v.size();
  const auto [ptr, ec] = std::from_chars(v.data(), end, x);
  if (ec != std::errc() || ptr != end) {
    throw std::invalid_argument("expected a non-negative integer, got '" + std::string(v) + "'");
  }
  return x;
}

bool to_bool(std::string_view v) {
  if (v == "true" || v == "yes" || v == "1") return true;
  if (v == "false" || v == "no" || v == "0") return false;
  throw std::invalid_argument("expected true or false, got '" + std::string(v) + "'");
}

std::vector<double> to_list(std::string_view v) {
  std::vector<double> out;
  while (!v.empty()) {
    const auto comma = v.find(',');
    const auto item = trim(v.substr(0, comma));
    if (item.empty()) throw std::invalid_argument("empty entry in list");
    out.push_back(to_double(item));
    if (comma == std::string_view::npos) break;
    v.remove_prefix(comma + 1);
  }
  if (out.empty()) throw std::invalid_argument("empty list");
  return out;
}

void require(bool ok, const std::string& what) {
  if (!ok) throw std::invalid_argument(what);
}

// Single-field constraints, shared by the parser and validate_scenario.
void check_d(int d) { require(d >= 3 && d <= 9, "dimension d must be in 3..9, got " + std::to_string(d)); }
void check_p(double p) { require(p > 0.0 && std::isfinite(p), "power p must be positive"); }
void check_N(Index n) {
  require(n >= RadialGrid<double>::kMinCells && n <= SpectralBasis<double>::kMaxCells,
          "N must be in " + std::to_string(RadialGrid<double>::kMinCells) + ".." +
              std::to_string(SpectralBasis<double>::kMaxCells));
}
void check_positive(double x, const char* key) { require(x > 0.0 && std::isfinite(x), std::string(key) + " must be positive"); }
void check_nonneg(double x, const char* key) { require(x >= 0.0 && std::isfinite(x), std::string(key) + " must be non-negative"); }
void check_cfl(double f) { require(f > 0.0 && f <= 1.0, "cfl_factor must lie in (0, 1]"); }
void check_stride(Index s) { require(s >= 1, "record_stride must be at least 1"); }
void check_ladder(const std::vector<double>& l) {
  for (double e : l) require(e >= 0.0 && e <= 0.5, "eps_ladder entries must lie in [0, 0.5]");
}
void check_T_list(const std::vector<double>& l) {
  require(l.size() >= 2, "T_list needs at least two times");
  for (std::size_t i = 0; i < l.size(); ++i) {
    require(l[i] > 0.0, "T_list entries must be positive");
    if (i > 0) require(l[i] > l[i - 1], "T_list must be strictly increasing");
  }
}
void check_name(const std::string& n) {
  require(!n.empty() && n.find_first_of("/\\ \t") == std::string::npos && n != "." && n != "..",
          "run name must be a non-empty single path component without spaces");
}

using Setter = std::function<void(Scenario&, std::string_view)>;

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table = {
      {"model.d",
       [](Scenario& s, std::string_view v) {
         const long long d = to_integer(v);
         check_d(static_cast<int>(d));
         s.model.d = static_cast<int>(d);
       }},
      {"model.p",
       [](Scenario& s, std::string_view v) {
         s.model.p = to_double(v);
         check_p(s.model.p);
       }},
      {"model.sign", [](Scenario& s, std::string_view v) { s.model.sign = sign_from_string(std::string(v)); }},
      {"grid.N",
       [](Scenario& s, std::string_view v) {
         s.N = static_cast<Index>(to_integer(v));
         check_N(s.N);
       }},
      {"grid.R_max",
       [](Scenario& s, std::string_view v) {
         s.R_max = to_double(v);
         check_positive(s.R_max, "R_max");
       }},
      {"data.family", [](Scenario& s, std::string_view v) { s.family = family_from_string(v); }},
      {"data.amplitude",
       [](Scenario& s, std::string_view v) {
         s.amplitude = to_double(v);
         check_nonneg(s.amplitude, "amplitude");
       }},
      {"data.width",
       [](Scenario& s, std::string_view v) {
         s.width = to_double(v);
         check_positive(s.width, "width");
       }},
      {"data.mode_index",
       [](Scenario& s, std::string_view v) {
         const long long k = to_integer(v);
         require(k >= 0, "mode_index must be non-negative");
         s.mode_index = static_cast<Index>(k);
       }},
      {"run.name",
       [](Scenario& s, std::string_view v) {
         s.name = std::string(v);
         check_name(s.name);
       }},
      {"run.T",
       [](Scenario& s, std::string_view v) {
         s.T = to_double(v);
         check_nonneg(s.T, "T");
       }},
      {"run.cfl_factor",
       [](Scenario& s, std::string_view v) {
         s.cfl_factor = to_double(v);
         check_cfl(s.cfl_factor);
       }},
      {"run.record_stride",
       [](Scenario& s, std::string_view v) {
         s.record_stride = static_cast<Index>(to_integer(v));
         check_stride(s.record_stride);
       }},
      {"run.blowup_threshold",
       [](Scenario& s, std::string_view v) {
         s.blowup_threshold = to_double(v);
         check_positive(s.blowup_threshold, "blowup_threshold");
       }},
      {"run.dt",
       [](Scenario& s, std::string_view v) {
         const double dt = to_double(v);
         check_positive(dt, "dt");
         s.dt = dt;
       }},
      {"run.seed", [](Scenario& s, std::string_view v) { s.seed = to_unsigned(v); }},
      {"run.T_list",
       [](Scenario& s, std::string_view v) {
         s.T_list = to_list(v);
         check_T_list(s.T_list);
       }},
      {"run.eps_ladder",
       [](Scenario& s, std::string_view v) {
         s.eps_ladder = to_list(v);
         check_ladder(s.eps_ladder);
       }},
      {"run.forcing", [](Scenario& s, std::string_view v) { s.forcing = to_bool(v); }},
      {"diagnostics.morawetz_R",
       [](Scenario& s, std::string_view v) {
         s.morawetz_R = to_double(v);
         check_nonneg(s.morawetz_R, "morawetz_R");
       }},
      {"diagnostics.concentration_C",
       [](Scenario& s, std::string_view v) {
         s.concentration_C = to_double(v);
         check_positive(s.concentration_C, "concentration_C");
       }},
      {"diagnostics.tail_C",
       [](Scenario& s, std::string_view v) {
         s.tail_C = to_double(v);
         check_positive(s.tail_C, "tail_C");
       }},
      {"diagnostics.support_threshold",
       [](Scenario& s, std::string_view v) {
         s.support_threshold = to_double(v);
         require(s.support_threshold > 0.0 && s.support_threshold < 1.0, "support_threshold must lie in (0, 1)");
       }},
  };
  return table;
}

std::string fmt(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string fmt_list(const std::vector<double>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += ", ";
    out += fmt(v[i]);
  }
  return out;
}

std::string window_text(int d) {
  const auto w = p_window(d);
  std::ostringstream os;
  os << "(" << w.lo << ", ";
  if (std::isinf(w.hi)) {
    os << "inf";
  } else {
    os << w.hi;
  }
  os << ")";
  return os.str();
}

// Checks that involve several fields; these only warn.
void cross_checks(Scenario& s) {
  s.warnings.clear();
  if (!p_window(s.model.d).contains(s.model.p)) {
    s.warnings.push_back("p = " + fmt(s.model.p) + " is outside theorem window " + window_text(s.model.d) +
                         " for d = " + std::to_string(s.model.d));
  }
  if (s.family != DataFamily::Mode && s.T + expected_support(s) >= s.R_max) {
    s.warnings.push_back("T + expected support radius = " + fmt(s.T + expected_support(s)) + " reaches R_max = " +
                         fmt(s.R_max) + "; the run will touch the boundary");
  }
}

}  // namespace

double expected_support(const Scenario& s) {
  switch (s.family) {
    case DataFamily::Gaussian:
      return s.width * std::sqrt(2.0 * std::log(1.0 / s.support_threshold));
    case DataFamily::Bump:
      return s.width;
    case DataFamily::Mode:
      return s.R_max;
  }
  return s.R_max;
}

void validate_scenario(Scenario& s) {
  check_d(s.model.d);
  check_p(s.model.p);
  check_N(s.N);
  check_positive(s.R_max, "R_max");
  check_nonneg(s.amplitude, "amplitude");
  check_positive(s.width, "width");
  require(s.mode_index >= 0 && s.mode_index < s.N, "mode_index must be below N");
  check_name(s.name);
  check_nonneg(s.T, "T");
  check_cfl(s.cfl_factor);
  check_stride(s.record_stride);
  check_positive(s.blowup_threshold, "blowup_threshold");
  if (s.dt) check_positive(*s.dt, "dt");
  check_T_list(s.T_list);
  check_ladder(s.eps_ladder);
  check_nonneg(s.morawetz_R, "morawetz_R");
  check_positive(s.concentration_C, "concentration_C");
  check_positive(s.tail_C, "tail_C");
  require(s.support_threshold > 0.0 && s.support_threshold < 1.0, "support_threshold must lie in (0, 1)");
  cross_checks(s);
}

Scenario parse_scenario_text(std::string_view text, const std::string& origin) {
  Scenario s;
  std::string section;
  bool have_d = false;
  bool have_p = false;
  std::map<std::string, int> seen;
  int line_no = 0;
  int mode_line = 0;

  while (!text.empty()) {
    ++line_no;
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;

    if (line.front() == '[') {
      if (line.back() != ']') throw ScenarioError(origin, line_no, "malformed section header");
      section = std::string(trim(line.substr(1, line.size() - 2)));
      static const char* known[] = {"model", "grid", "data", "run", "diagnostics"};
      if (std::find(std::begin(known), std::end(known), section) == std::end(known)) {
        throw ScenarioError(origin, line_no, "unknown section [" + section + "]");
      }
      continue;
    }

    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw ScenarioError(origin, line_no, "expected 'key = value'");
    const std::string key(trim(line.substr(0, eq)));
    const auto value = trim(line.substr(eq + 1));
    if (key.empty()) throw ScenarioError(origin, line_no, "missing key before '='");
    if (value.empty()) throw ScenarioError(origin, line_no, "missing value for '" + key + "'");

    std::string full;
    if (key.find('.') != std::string::npos) {
      full = key;
    } else if (!section.empty()) {
      full = section + "." + key;
    } else {
      throw ScenarioError(origin, line_no, "key '" + key + "' outside any section");
    }
    const auto it = setters().find(full);
    if (it == setters().end()) throw ScenarioError(origin, line_no, "unknown key '" + full + "'");
    if (const auto prev = seen.find(full); prev != seen.end()) {
      throw ScenarioError(origin, line_no,
                          "duplicate key '" + full + "' (first set on line " + std::to_string(prev->second) + ")");
    }
    seen[full] = line_no;
    try {
      it->second(s, value);
    } catch (const std::exception& e) {
      throw ScenarioError(origin, line_no, full + ": " + e.what());
    }
    if (full == "model.d") have_d = true;
    if (full == "model.p") have_p = true;
    if (full == "data.mode_index") mode_line = line_no;
  }

  if (!have_d) throw ScenarioError(origin, line_no, "missing required key model.d");
  if (!have_p) throw ScenarioError(origin, line_no, "missing required key model.p");
  if (s.mode_index >= s.N) throw ScenarioError(origin, mode_line, "data.mode_index must be below grid.N");
  try {
    validate_scenario(s);
  } catch (const std::exception& e) {
    throw ScenarioError(origin, line_no, e.what());
  }
  return s;
}

Scenario parse_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open scenario file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_scenario_text(ss.str(), path);
}

std::string emit_scenario(const Scenario& s) {
  std::ostringstream os;
  os << "[model]\n"
     << "d = " << s.model.d << "\n"
     << "p = " << fmt(s.model.p) << "\n"
     << "sign = " << to_string(s.model.sign) << "\n\n"
     << "[grid]\n"
     << "N = " << s.N << "\n"
     << "R_max = " << fmt(s.R_max) << "\n\n"
     << "[data]\n"
     << "family = " << to_string(s.family) << "\n"
     << "amplitude = " << fmt(s.amplitude) << "\n"
     << "width = " << fmt(s.width) << "\n"
     << "mode_index = " << s.mode_index << "\n\n"
     << "[run]\n"
     << "name = " << s.name << "\n"
     << "T = " << fmt(s.T) << "\n"
     << "cfl_factor = " << fmt(s.cfl_factor) << "\n"
     << "record_stride = " << s.record_stride << "\n"
     << "blowup_threshold = " << fmt(s.blowup_threshold) << "\n";
  if (s.dt) os << "dt = " << fmt(*s.dt) << "\n";
  os << "seed = " << s.seed << "\n"
     << "T_list = " << fmt_list(s.T_list) << "\n"
     << "eps_ladder = " << fmt_list(s.eps_ladder) << "\n"
     << "forcing = " << (s.forcing ? "true" : "false") << "\n\n"
     << "[diagnostics]\n"
     << "morawetz_R = " << fmt(s.morawetz_R) << "\n"
     << "concentration_C = " << fmt(s.concentration_C) << "\n"
     << "tail_C = " << fmt(s.tail_C) << "\n"
     << "support_threshold = " << fmt(s.support_threshold) << "\n";
  return os.str();
}

Vector<double> family_profile(const Scenario& s, const SpectralBasis<double>& basis) {
  const auto& r = basis.grid().nodes();
  switch (s.family) {
    case DataFamily::Gaussian:
      return (-0.5 * r.array().square() / (s.width * s.width)).exp().matrix();
    case DataFamily::Bump: {
      Vector<double> f(r.size());
      for (Index j = 0; j < r.size(); ++j) {
        const double x = r(j) / s.width;
        f(j) = x < 1.0 ? std::pow(1.0 - x * x, 4) : 0.0;
      }
      return f;
    }
    case DataFamily::Mode: {
      if (s.mode_index >= basis.size()) throw std::invalid_argument("mode_index must be below N");
      Vector<double> f = basis.eigenvector(s.mode_index);
      return f / f.cwiseAbs().maxCoeff();
    }
  }
  throw std::logic_error("unhandled data family");
}

FieldState<double> initial_state(const Scenario& s, const SpectralBasis<double>& basis) {
  const Index n = basis.size();
  return {0.0, s.amplitude * family_profile(s, basis), Vector<double>::Zero(n)};
}

}  // namespace supercrit
