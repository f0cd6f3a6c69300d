#include "supercrit/cli.hpp"

#include "supercrit/run.hpp"
#include "supercrit/selftest.hpp"

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <optional>
#include <random>

namespace supercrit {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct PairRow {
  double q;
  double r;
  double gamma;
};

// Sharp wave-admissible pairs 1/q + (d-1)/(2r) = (d-1)/4 at a few q.
std::vector<PairRow> sample_pairs(int d, double p) {
  std::vector<PairRow> rows;
  const double inf = std::numeric_limits<double>::infinity();
  for (double q : {2.0, 4.0, 8.0, inf}) {
    const double inv_q = std::isinf(q) ? 0.0 : 1.0 / q;
    const double slack = (d - 1) / 4.0 - inv_q;
    if (!(slack > 0.0)) continue;
    const double r = (d - 1) / 2.0 / slack;
    const LebesgueExponent Q = std::isinf(q) ? LebesgueExponent::infinity() : LebesgueExponent(q);
    if (!is_admissible(Q, LebesgueExponent(r), d)) continue;
    rows.push_back({q, r, scaling_gamma(Q, LebesgueExponent(r), d, p)});
  }
  return rows;
}

double default_power(int d) {
  const auto w = p_window(d);
  return std::isinf(w.hi) ? 6.0 : 0.5 * (w.lo + w.hi);
}

json exponents_json(int d, double p) {
  const auto w = p_window(d);
  const auto xy = xy_exponents(d, p);
  json pairs = json::array();
  for (const auto& row : sample_pairs(d, p)) {
    pairs.push_back({{"q", std::isinf(row.q) ? json("inf") : json(row.q)}, {"r", row.r}, {"gamma", row.gamma}});
  }
  return {{"d", d},
          {"p", p},
          {"s_c", critical_regularity(d, p)},
          {"window", {w.lo, std::isinf(w.hi) ? json("inf") : json(w.hi)}},
          {"in_window", w.contains(p)},
          {"smoothness_margin", smoothness_margin(d, p)},
          {"xy",
           {{"deriv_order", xy.deriv_order},
            {"time_exp_X", xy.time_exp_X},
            {"space_exp_X", xy.space_exp_X},
            {"time_exp_Y", xy.time_exp_Y},
            {"space_exp_Y", xy.space_exp_Y}}},
          {"morawetz_exponent", morawetz_exponent(d, p)},
          {"concentration_exponent", concentration_exponent(d, p)},
          {"admissible_pairs", pairs}};
}

void print_exponents_table(int d, double p, bool p_given) {
  const auto w = p_window(d);
  const auto xy = xy_exponents(d, p);
  auto line = [](const char* key, const std::string& value) { std::printf("  %-24s %s\n", key, value.c_str()); };
  auto g = [](double x) {
    if (std::isinf(x)) return std::string("inf");
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.10g", x);
    return std::string(buf);
  };
  std::printf("d = %d, p = %s%s\n", d, g(p).c_str(), p_given ? "" : " (window default)");
  line("p window", "(" + g(w.lo) + ", " + g(w.hi) + ")");
  line("p in window", w.contains(p) ? "yes" : "no");
  line("s_c", g(critical_regularity(d, p)));
  line("smoothness margin", g(smoothness_margin(d, p)));
  line("X exponents (q, r)", "(" + g(xy.time_exp_X) + ", " + g(xy.space_exp_X) + ")");
  line("Y exponents (q, r)", "(" + g(xy.time_exp_Y) + ", " + g(xy.space_exp_Y) + ")");
  line("derivative order", g(xy.deriv_order));
  line("Morawetz exponent", g(morawetz_exponent(d, p)));
  line("concentration exponent", g(concentration_exponent(d, p)));
  std::printf("  admissible pairs:\n  %12s %12s %12s\n", "q", "r", "gamma");
  for (const auto& row : sample_pairs(d, p)) {
    std::printf("  %12s %12s %12s\n", g(row.q).c_str(), g(row.r).c_str(), g(row.gamma).c_str());
  }
}

void print_manifest(const RunManifest& m) {
  std::printf("%s: %s -> %s\n", to_string(m.protocol).c_str(), m.scenario.name.c_str(), m.dir.string().c_str());
  for (const auto& a : m.assertions) {
    std::printf("  %-28s %s  value %.6g  threshold %.6g\n", a.name.c_str(), a.passed ? "PASS" : "FAIL", a.value,
                a.threshold);
  }
  if (m.boundary_touched) std::printf("  flag: boundary touched\n");
  if (m.overflow_halt) std::printf("  flag: blowup detector fired\n");
  if (m.error) std::printf("  error: %s\n", m.error->c_str());
  std::printf("  series checksum fnv1a64:%s, exit %d\n", hex64(m.series_checksum).c_str(), m.exit_code());
}

int run_protocol(const std::string& path, const std::optional<std::string>& out, Protocol protocol) {
  Scenario s;
  try {
    s = parse_scenario(path);
  } catch (const std::exception& e) {
    spdlog::error("{}", e.what());
    return kExitError;
  }
  for (const auto& w : s.warnings) spdlog::warn("{}", w);
  const fs::path root = out ? fs::path(*out) : default_out_root();
  try {
    const auto m = run_scenario(s, root, protocol);
    print_manifest(m);
    return m.exit_code();
  } catch (const std::exception& e) {
    spdlog::error("{}", e.what());
    return kExitError;
  }
}

int run_selftest_command(const std::optional<std::string>& out) {
  const bool temporary = !out;
  const fs::path scratch = out ? fs::path(*out) / "selftest"
                               : fs::temp_directory_path() / ("supercrit-selftest-" + std::to_string(std::random_device{}()));
  const auto level = spdlog::get_level();
  spdlog::set_level(spdlog::level::warn);
  const auto checks = run_selftest(scratch);
  spdlog::set_level(level);
  bool ok = true;
  for (const auto& c : checks) {
    std::printf("%s  %s%s%s\n", c.passed ? "PASS" : "FAIL", c.name.c_str(), c.detail.empty() ? "" : ": ",
                c.detail.c_str());
    ok = ok && c.passed;
  }
  if (temporary) {
    std::error_code ec;
    fs::remove_all(scratch, ec);
  }
  return ok ? kExitOk : kExitSoftFailure;
}

}  // namespace

int cli_dispatch(int argc, char** argv) {
  auto logger = spdlog::get("supercrit");
  if (!logger) logger = spdlog::stderr_color_mt("supercrit");
  spdlog::set_default_logger(logger);
  spdlog::set_level(spdlog::level::info);
  spdlog::set_pattern("[%l] %v");

  CLI::App app{"Radial nonlinear wave simulator and diagnostics"};
  app.set_version_flag("--version", code_version());
  app.require_subcommand(1);
  bool quiet = false;
  app.add_flag("-q,--quiet", quiet, "Only log warnings and errors");

  std::optional<std::string> out;
  std::string scenario_path;
  auto add_protocol = [&](const char* name, const char* help) {
    auto* sub = app.add_subcommand(name, help);
    sub->add_option("scenario", scenario_path, "Scenario file")->required()->check(CLI::ExistingFile);
    sub->add_option("--out", out, "Output root (default: $SUPERCRIT_OUT or ./out)");
    return sub;
  };
  auto* simulate = add_protocol("simulate", "Evolve a scenario and write the diagnostics series");
  auto* scatter = add_protocol("scatter", "Pullback Cauchy test for scattering");
  auto* stability = add_protocol("stability", "Perturbation ladder against the base solution");
  auto* blowup = add_protocol("blowup", "Focusing run with its defocusing twin");
  auto* morawetz = add_protocol("morawetz", "Dispersal probe at T and T/2");

  auto* exponents = app.add_subcommand("exponents", "Exponent table for a dimension and power");
  int d = 3;
  std::optional<double> p;
  std::string format = "text";
  exponents->add_option("--d", d, "Spatial dimension")->required()->check(CLI::Range(3, 1000));
  exponents->add_option("--p", p, "Power (default: inside the window)")->check(CLI::PositiveNumber);
  exponents->add_option("--format", format, "text or json")->check(CLI::IsMember({"text", "json"}));
  exponents->add_option("--out", out, "Also write exponents.json under this directory");

  auto* selftest = app.add_subcommand("selftest", "Run the fast invariant suite");
  selftest->add_option("--out", out, "Keep scratch runs under this directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n\n" << app.help();
    return kExitUsage;
  }
  if (quiet) spdlog::set_level(spdlog::level::warn);

  try {
    if (*exponents) {
      const double pp = p ? *p : default_power(d);
      const json j = exponents_json(d, pp);
      if (format == "json") {
        std::cout << j.dump(2) << "\n";
      } else {
        print_exponents_table(d, pp, p.has_value());
      }
      if (out) {
        fs::create_directories(*out);
        std::ofstream(fs::path(*out) / "exponents.json") << j.dump(2) << "\n";
      }
      return kExitOk;
    }
    if (*selftest) return run_selftest_command(out);
    if (*simulate) return run_protocol(scenario_path, out, Protocol::Simulate);
    if (*scatter) return run_protocol(scenario_path, out, Protocol::Scatter);
    if (*stability) return run_protocol(scenario_path, out, Protocol::Stability);
    if (*blowup) return run_protocol(scenario_path, out, Protocol::Blowup);
    if (*morawetz) return run_protocol(scenario_path, out, Protocol::Morawetz);
  } catch (const std::exception& e) {
    spdlog::error("{}", e.what());
    return kExitError;
  }
  std::cerr << app.help();
  return kExitUsage;
}

}  // namespace supercrit
