#include "doctest.h"
#include "supercrit/run.hpp"

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

using namespace supercrit;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& tag) {
  const fs::path p = fs::temp_directory_path() / ("supercrit_cli_io_" + tag);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int line_of(const std::string& text) {
  try {
    parse_scenario_text(text);
  } catch (const ScenarioError& e) {
    return e.line();
  }
  return -1;
}

struct Command {
  int code;
  std::string out;
};

Command shell(const std::string& args) {
  const std::string cmd = std::string(SUPERCRIT_EXE) + " " + args + " 2>&1";
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  std::string out;
  std::array<char, 4096> buf{};
  while (std::fgets(buf.data(), buf.size(), pipe)) out += buf.data();
  const int status = pclose(pipe);
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, out};
}

Scenario small(const std::string& name) {
  Scenario s;
  s.N = 128;
  s.R_max = 10.0;
  s.T = 1.0;
  s.name = name;
  validate_scenario(s);
  return s;
}

const Basis& small_basis() {
  static const Basis b(RadialGrid<double>(10.0, 128, 3));
  return b;
}

}  // namespace

TEST_CASE("minimal scenario takes the default table") {
  const auto s = parse_scenario_text("[model]\nd = 3\np = 6\n");
  CHECK(s.N == 1024);
  CHECK(s.R_max == 20.0);
  CHECK(s.cfl_factor == 0.5);
  CHECK(s.record_stride == 4);
  CHECK(s.blowup_threshold == 1e6);
  CHECK(s.family == DataFamily::Gaussian);
  CHECK(s.amplitude == 1.0);
  CHECK(s.width == 1.0);
  CHECK(s.model.sign == Sign::Defocusing);
  CHECK_FALSE(s.dt.has_value());
  CHECK(s.warnings.empty());
}

TEST_CASE("flat keys and comments") {
  const auto s = parse_scenario_text(
      "# header\nmodel.d = 5   # trailing\nmodel.p = 1.5\n\n[data]\nfamily = bump\nwidth=2\ngrid.N = 64\n");
  CHECK(s.model.d == 5);
  CHECK(s.model.p == 1.5);
  CHECK(s.family == DataFamily::Bump);
  CHECK(s.width == 2.0);
  CHECK(s.N == 64);
}

TEST_CASE("power outside the window warns but parses") {
  const auto s = parse_scenario_text("[model]\nd = 3\np = 3\n");
  REQUIRE(s.warnings.size() == 1);
  CHECK(s.warnings[0].find("outside theorem window (4, inf)") != std::string::npos);

  const auto inside = parse_scenario_text("[model]\nd = 7\np = 0.85\n");
  CHECK(inside.warnings.empty());
  const auto above = parse_scenario_text("[model]\nd = 7\np = 0.95\n");
  CHECK(above.warnings.size() == 1);
}

TEST_CASE("run too long for the grid warns") {
  const auto s = parse_scenario_text("[model]\nd = 3\np = 6\n[run]\nT = 16\n");
  REQUIRE(s.warnings.size() == 1);
  CHECK(s.warnings[0].find("R_max") != std::string::npos);
}

TEST_CASE("errors carry line numbers") {
  CHECK(line_of("[model]\nd = 2\np = 6\n") == 2);
  CHECK(line_of("[model]\nd = 3\np = 6\n[grid]\nN = 1e3\n") == 5);
  CHECK(line_of("[model]\nd = 3\np = six\n") == 3);
  CHECK(line_of("[model]\nd = 3\np = 6\ncolour = red\n") == 4);
  CHECK(line_of("[model]\nd = 3\np = 6\n[nope]\n") == 4);
  CHECK(line_of("[model]\nd = 3\np = 6\nd = 4\n") == 4);
  CHECK(line_of("[model]\nd = 3\np = 6\n[run]\ncfl_factor = 1.5\n") == 5);
  CHECK(line_of("[model]\nd = 3\np = 6\n[run]\nT_list = 4, 2\n") == 5);
  CHECK(line_of("[model]\nd = 3\np = 6\n[run]\nforcing = maybe\n") == 5);
  CHECK(line_of("[model]\nd = 3\np = 6\njust words\n") == 4);
  CHECK(line_of("[model]\nd = 3\np = 6\n[grid]\nN = 16\n[data]\nfamily = mode\nmode_index = 16\n") == 8);
  CHECK(line_of("[model]\np = 6\n") > 0);
  CHECK_THROWS_AS(parse_scenario("/nonexistent/scenario.cfg"), std::runtime_error);
}

TEST_CASE("emitted scenarios parse back equal") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int k = 0; k < 50; ++k) {
    Scenario s;
    s.model.d = 3 + static_cast<int>(u(rng) * 7);
    s.model.p = 0.1 + 10.0 * u(rng);
    s.model.sign = u(rng) < 0.5 ? Sign::Focusing : Sign::Defocusing;
    s.N = 4 + static_cast<Index>(u(rng) * 4000);
    s.R_max = 1.0 + 100.0 * u(rng);
    s.family = static_cast<DataFamily>(static_cast<int>(u(rng) * 3));
    s.amplitude = u(rng);
    s.width = 0.01 + u(rng);
    s.mode_index = static_cast<Index>(u(rng) * 4);
    s.name = "r" + std::to_string(k);
    s.T = 3.0 * u(rng);
    s.cfl_factor = 0.01 + 0.99 * u(rng);
    s.record_stride = 1 + static_cast<Index>(u(rng) * 20);
    s.blowup_threshold = 1.0 + 1e9 * u(rng);
    if (u(rng) < 0.5) s.dt = 1e-3 * u(rng) + 1e-9;
    s.seed = rng();
    s.T_list = {u(rng), 1.0 + u(rng), 2.0 + u(rng)};
    s.eps_ladder = {0.5 * u(rng), 0.5 * u(rng)};
    s.forcing = u(rng) < 0.5;
    s.morawetz_R = u(rng);
    s.concentration_C = 0.1 + u(rng);
    s.tail_C = 0.1 + u(rng);
    s.support_threshold = 1e-9 + 0.5 * u(rng);
    validate_scenario(s);
    const auto back = parse_scenario_text(emit_scenario(s));
    CHECK(back == s);
    CHECK(emit_scenario(back) == emit_scenario(s));
  }
}

TEST_CASE("data families") {
  const auto& basis = small_basis();
  Scenario s = small("families");
  s.amplitude = 2.0;
  s.family = DataFamily::Bump;
  s.width = 3.0;
  const auto bump = initial_state(s, basis);
  const auto& r = basis.grid().nodes();
  for (Index j = 0; j < r.size(); ++j) {
    if (r(j) >= 3.0) CHECK(bump.u(j) == 0.0);
  }
  CHECK(bump.u(0) == doctest::Approx(2.0 * std::pow(1.0 - r(0) * r(0) / 9.0, 4)));
  CHECK(bump.v.isZero(0));

  s.family = DataFamily::Mode;
  s.mode_index = 2;
  const auto mode = initial_state(s, basis);
  CHECK(mode.u.cwiseAbs().maxCoeff() == doctest::Approx(2.0).epsilon(1e-14));
  const Vec c = basis.project(mode.u);
  CHECK(std::abs(c(2)) / c.norm() == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("zero amplitude gives an all-zero series") {
  Scenario s = small("zero");
  s.amplitude = 0.0;
  const auto root = scratch("zero");
  const auto m = run_scenario(s, small_basis(), root);
  CHECK(m.exit_code() == kExitOk);
  const std::string csv = slurp(m.dir / "series.csv");
  std::istringstream in(csv);
  std::string line;
  std::getline(in, line);
  CHECK(line == DiagnosticsRecord::kHeader);
  int rows = 0;
  while (std::getline(in, line)) {
    ++rows;
    std::istringstream cells(line);
    std::string cell;
    int col = 0;
    while (std::getline(cells, cell, ',')) {
      if (col > 0) CHECK(std::stod(cell) == 0.0);
      ++col;
    }
    CHECK(col == 12);
  }
  CHECK(rows > 2);
}

TEST_CASE("identical scenarios give byte-identical series") {
  const Scenario s = small("det");
  const auto a = run_scenario(s, small_basis(), scratch("det_a"));
  const auto b = run_scenario(s, small_basis(), scratch("det_b"));
  REQUIRE(a.exit_code() == kExitOk);
  CHECK(a.series_checksum == b.series_checksum);
  const std::string ca = slurp(a.dir / "series.csv");
  CHECK(ca == slurp(b.dir / "series.csv"));
  CHECK(fnv1a64(ca) == a.series_checksum);
  CHECK(slurp(a.dir / "report.json") == slurp(b.dir / "report.json"));
}

TEST_CASE("manifest references only existing files") {
  const Scenario s = small("manifest");
  const auto m = run_scenario(s, small_basis(), scratch("manifest"));
  const auto j = nlohmann::json::parse(slurp(m.dir / "manifest.json"));
  CHECK(j["protocol"] == "simulate");
  CHECK(j["version"] == code_version());
  CHECK(j["series_checksum"] == "fnv1a64:" + hex64(m.series_checksum));
  for (const auto& f : j["files"]) CHECK(fs::exists(m.dir / f.get<std::string>()));
  const auto back = parse_scenario_text(j["scenario"]["text"].get<std::string>());
  CHECK(back == s);
  const auto report = nlohmann::json::parse(slurp(m.dir / "report.json"));
  CHECK(report["passed"] == true);
  CHECK(report["measurements"]["energy_drift"].get<double>() < 1e-3);
}

TEST_CASE("boundary-violating run is a soft failure") {
  Scenario s = small("edge");
  s.T = 8.0;
  validate_scenario(s);
  CHECK_FALSE(s.warnings.empty());
  const auto m = run_scenario(s, small_basis(), scratch("edge"));
  CHECK(m.boundary_touched);
  CHECK_FALSE(m.error.has_value());
  CHECK(m.exit_code() == kExitSoftFailure);
  const auto j = nlohmann::json::parse(slurp(m.dir / "manifest.json"));
  CHECK(j["flags"]["boundary_touched"] == true);
  CHECK(j["exit_code"] == kExitSoftFailure);
}

TEST_CASE("module errors land in the manifest") {
  Scenario s = small("wrong_sign");
  s.model.sign = Sign::Focusing;
  validate_scenario(s);
  const auto m = run_scenario(s, small_basis(), scratch("wrong_sign"), Protocol::Morawetz);
  REQUIRE(m.error.has_value());
  CHECK(m.exit_code() == kExitError);
  const auto j = nlohmann::json::parse(slurp(m.dir / "manifest.json"));
  CHECK(j["flags"]["error"].is_string());
  for (const auto& f : j["files"]) CHECK(fs::exists(m.dir / f.get<std::string>()));
}

TEST_CASE("checksum helper") {
  CHECK(fnv1a64("") == 0xcbf29ce484222325ULL);
  CHECK(fnv1a64("a") == 0xaf63dc4c8601ec8cULL);
  CHECK(hex64(0xabcULL) == "0000000000000abc");
}

TEST_CASE("command line") {
  SUBCASE("exponents table for d = 7") {
    const auto r = shell("exponents --d 7");
    CHECK(r.code == 0);
    CHECK(r.out.find("(0.8, 0.9248") != std::string::npos);
  }
  SUBCASE("exponents as json") {
    const auto r = shell("exponents --d 3 --p 6 --format json");
    REQUIRE(r.code == 0);
    const auto j = nlohmann::json::parse(r.out);
    CHECK(j["s_c"].get<double>() == doctest::Approx(7.0 / 6.0));
    CHECK(j["morawetz_exponent"].get<double>() == 1.0 / 3.0);
    CHECK(j["window"][1] == "inf");
  }
  SUBCASE("unknown subcommand") {
    const auto r = shell("frobnicate");
    CHECK(r.code == 2);
    CHECK(r.out.find("Usage") != std::string::npos);
  }
  SUBCASE("missing argument") { CHECK(shell("exponents").code == 2); }
  SUBCASE("bad scenario file") {
    const auto dir = scratch("bad_cfg");
    std::ofstream(dir / "bad.cfg") << "[model]\nd = 2\np = 6\n";
    const auto r = shell("simulate " + (dir / "bad.cfg").string() + " --out " + dir.string());
    CHECK(r.code == 1);
    CHECK(r.out.find(":2:") != std::string::npos);
  }
  SUBCASE("simulate honours SUPERCRIT_OUT") {
    const auto dir = scratch("env_out");
    std::ofstream(dir / "s.cfg") << emit_scenario(small("env_run"));
    const std::string cmd = "SUPERCRIT_OUT=" + dir.string() + " " + std::string(SUPERCRIT_EXE) + " -q simulate " +
                            (dir / "s.cfg").string() + " > /dev/null 2>&1";
    CHECK(std::system(cmd.c_str()) == 0);
    CHECK(fs::exists(dir / "env_run" / "manifest.json"));
  }
  SUBCASE("selftest") { CHECK(shell("selftest").code == 0); }
}
