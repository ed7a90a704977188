#include <doctest.h>

#include <json.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>

#include "exprelax/commands.hpp"
#include "exprelax/config.hpp"
#include "exprelax/io.hpp"
#include "support.hpp"

using namespace exprelax;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("exprelax_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

nlohmann::json report(const fs::path& dir) { return nlohmann::json::parse(slurp(dir / "report.json")); }

std::string error_of(const std::string& text) {
  try {
    parse_config_text(text, "t.cfg");
  } catch (const ConfigError& e) {
    return e.what();
  }
  return {};
}

const char* kMinimal =
    "grid.dim = 1\n"
    "grid.cells = 64\n"
    "scheme.p = 1.5\n"
    "scheme.T = 1.0\n"
    "scheme.j = 16\n"
    "ic.family = cosine\n"
    "ic.mode = 1\n"
    "ic.amplitude = 1\n";

}  // namespace

TEST_CASE("minimal config gets defaults") {
  const RunConfig c = parse_config_text(kMinimal);
  CHECK(c.dim == 1);
  CHECK(c.cells[0] == 64);
  CHECK(c.scheme.p == 1.5);
  CHECK(c.scheme.j == 16);
  CHECK(c.scheme.tau() == 1.0 / 16);
  CHECK(c.scheme.eps_g == 1e-8);
  CHECK(c.scheme.fp_tol == 1e-8);
  CHECK(c.scheme.newton == NewtonConfig{});
  CHECK(c.ic.family == ICFamily::Cosine);
  CHECK(c.eps_cut == 1e-3);
  CHECK(parse_config_text("") == RunConfig{});
}

TEST_CASE("config errors name the key and line") {
  const std::string p = error_of(std::string(kMinimal) + "scheme.p = 2.5\n");
  CHECK(p.find("duplicate") != std::string::npos);

  const std::string bad_p = error_of("grid.dim = 1\nscheme.p = 2.5\n");
  CHECK(bad_p.find("p must lie in (1,2]") != std::string::npos);
  CHECK(bad_p.find("t.cfg:2") != std::string::npos);
  CHECK(bad_p.find("scheme.p") != std::string::npos);

  const std::string j0 = error_of("scheme.j = 0\n");
  CHECK(j0.find("scheme.j") != std::string::npos);

  const std::string unknown = error_of("# comment\n\nscheme.q = 3\n");
  CHECK(unknown.find("t.cfg:3") != std::string::npos);
  CHECK(unknown.find("scheme.q") != std::string::npos);

  CHECK_FALSE(error_of("grid.dim = 3\n").empty());
  CHECK_FALSE(error_of("grid.cells = 1\n").empty());
  CHECK_FALSE(error_of("scheme.T = -1\n").empty());
  CHECK_FALSE(error_of("scheme.p = abc\n").empty());
  CHECK_FALSE(error_of("just some words\n").empty());
  CHECK_FALSE(error_of("ic.family = square\n").empty());
  CHECK_FALSE(error_of("scheme.damping = 0\n").empty());
  CHECK_THROWS_AS(parse_config("/nonexistent/exprelax.cfg"), ConfigError);
}

TEST_CASE("config round trip") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int s = 0; s < 50; ++s) {
    RunConfig c;
    c.dim = 1 + s % 2;
    c.extent = {0.5 + u(rng), 0.5 + 3.0 * u(rng)};
    c.cells = {2 + s, 3 + 2 * s};
    c.scheme.p = 1.0 + std::max(1e-3, u(rng));
    c.scheme.T = 0.1 + u(rng);
    c.scheme.j = 1 + s;
    c.scheme.delta = s % 3 ? 0.0 : u(rng) / 7.0;
    c.scheme.eps_g = u(rng) * 1e-7;
    c.scheme.fp_tol = 1e-9 * (1.0 + u(rng));
    c.scheme.damping = 0.1 + 0.9 * u(rng);
    c.scheme.solver = s % 2 ? StepSolver::Picard : StepSolver::Newton;
    c.scheme.delta_continuation = s % 4 == 0;
    c.scheme.newton.kappa = 0.05 + 0.5 * u(rng);
    c.ic.family = static_cast<ICFamily>(s % 5);
    c.ic.amplitude = 10.0 * (u(rng) - 0.5);
    c.ic.mode = {s % 4, s % 3};
    c.ic.width = 0.01 + u(rng);
    c.ic.center = {u(rng), u(rng)};
    c.ic.seed = rng();
    c.out_dir = "out/run " + std::to_string(s);
    c.fields = static_cast<FieldOutput>(s % 3);
    c.tol_energy = u(rng) * 1e-6;
    c.eps_cut = 1e-4 + u(rng);
    c.levels = 2 + s % 5;
    const std::string text = write_config(c);
    const RunConfig back = parse_config_text(text);
    CHECK(back == c);
    CHECK(write_config(back) == text);
  }
}

TEST_CASE("initial conditions") {
  const Grid g = testing::grid1(32);
  InitialCondition ic;
  ic.family = ICFamily::Constant;
  ic.amplitude = 3.0;
  const ScalarField c3 = build_initial_condition(ic, g);
  for (double v : c3.values()) CHECK(v == 3.0);

  ic.family = ICFamily::Cosine;
  ic.amplitude = 2.0;
  ic.mode = {0, 0};
  const ScalarField c2 = build_initial_condition(ic, g);
  for (double v : c2.values()) CHECK(v == 2.0);

  ic.mode = {1, 0};
  const ScalarField c = build_initial_condition(ic, g);
  for (int i = 0; i < 32; ++i) CHECK(c[i] == doctest::Approx(2.0 * std::cos(M_PI * g.center(0, i))));

  ic.family = ICFamily::RandomSmooth;
  ic.seed = 12345;
  const Grid g2 = testing::grid2(16, 16);
  CHECK(build_initial_condition(ic, g2) == build_initial_condition(ic, g2));
  InitialCondition other = ic;
  other.seed = 12346;
  CHECK_FALSE(build_initial_condition(other, g2) == build_initial_condition(ic, g2));

  ic.family = ICFamily::StepProfile;
  ic.amplitude = 20.0;
  const ScalarField st = build_initial_condition(ic, g);
  CHECK(st[0] < -19.0);
  CHECK(st[31] > 19.0);
  for (int i = 1; i < 32; ++i) CHECK(st[i] > st[i - 1]);

  ic.family = ICFamily::GaussianBump;
  ic.amplitude = 1.0;
  const ScalarField b = build_initial_condition(ic, g);
  CHECK(b[15] > b[0]);
  CHECK(b[15] <= 1.0);

  ic.width = 0.0;
  CHECK_THROWS_AS(build_initial_condition(ic, g), ConfigError);
}

TEST_CASE("csv formatting") {
  CHECK(format_double(0.1) == "0.10000000000000001");
  CHECK(format_double(1.0) == "1");
  for (double v : {M_PI, 1.0 / 3.0, 6.02214076e23, -1e-17, -2.5e-300}) CHECK(std::stod(format_double(v)) == v);
  CHECK(fields_filename(7) == "fields_k0007.csv");

  const Grid g = testing::grid1(4);
  SchemeParams s;
  s.j = 2;
  const Trajectory t = run_simulation(ScalarField(g, 1.0), s, g);
  const std::string ledger = ledger_csv(compute_ledger(t));
  CHECK(ledger.rfind("k,t,energy,mass_sq,dissipation,entropy_sq,mass,entropy_l1,rho_min,rho_max\n", 0) == 0);
  CHECK(ledger.back() == '\n');
  CHECK(std::count(ledger.begin(), ledger.end(), '\n') == 3);
  const std::string fields = fields_csv(t, 2);
  CHECK(fields.rfind("x,u,rho,ln_rho\n", 0) == 0);
  CHECK(std::count(fields.begin(), fields.end(), '\n') == 5);
}

TEST_CASE("atomic writes") {
  const fs::path dir = scratch_dir("atomic");
  const fs::path target = dir / "nested" / "file.txt";
  write_file_atomic(target, "first\n");
  CHECK(slurp(target) == "first\n");
  write_file_atomic(target, "second\n");
  CHECK(slurp(target) == "second\n");
  CHECK_FALSE(fs::exists(target.string() + ".tmp"));
}

TEST_CASE("cmd_run on constant data") {
  RunConfig c = parse_config(fs::path(EXPRELAX_SOURCE_DIR) / "configs" / "constant.cfg");
  c.out_dir = scratch_dir("run_constant").string();
  CHECK(cmd_run(c) == kExitPass);
  CHECK(report(c.out_dir)["pass"] == true);

  std::istringstream ledger(slurp(fs::path(c.out_dir) / "ledger.csv"));
  std::string line;
  std::getline(ledger, line);
  const double tau = c.scheme.tau();
  int k = 0;
  while (std::getline(ledger, line)) {
    ++k;
    std::vector<std::string> cols;
    std::stringstream row(line);
    for (std::string cell; std::getline(row, cell, ',');) cols.push_back(cell);
    REQUIRE(cols.size() == 10);
    CHECK(std::stoi(cols[0]) == k);
    CHECK(std::abs(std::stod(cols[6]) - 3.0 / std::pow(1.0 + tau * tau * tau, k)) <= 1e-8);
  }
  CHECK(k == c.scheme.j);
  CHECK(fs::exists(fs::path(c.out_dir) / fields_filename(1)));
  CHECK(fs::exists(fs::path(c.out_dir) / fields_filename(16)));
}

TEST_CASE("cmd_run is byte-reproducible") {
  RunConfig c = parse_config(fs::path(EXPRELAX_SOURCE_DIR) / "configs" / "cosine.cfg");
  c.scheme.j = 8;
  c.out_dir = scratch_dir("repro_a").string();
  REQUIRE(cmd_run(c) == kExitPass);
  const std::string a = slurp(fs::path(c.out_dir) / "ledger.csv");
  const std::string fa = slurp(fs::path(c.out_dir) / fields_filename(8));
  c.out_dir = scratch_dir("repro_b").string();
  REQUIRE(cmd_run(c) == kExitPass);
  CHECK(a == slurp(fs::path(c.out_dir) / "ledger.csv"));
  CHECK(fa == slurp(fs::path(c.out_dir) / fields_filename(8)));
}

TEST_CASE("cmd_check on the default config passes") {
  RunConfig c;
  c.out_dir = scratch_dir("check").string();
  CHECK(cmd_check(c) == kExitPass);
  const auto r = report(c.out_dir);
  CHECK(r["pass"] == true);
  for (const auto& [name, suite] : r["suites"].items()) {
    CAPTURE(name);
    CHECK(suite["pass"] == true);
  }
}

TEST_CASE("cmd_refine on the refinement config") {
  RunConfig c = parse_config(fs::path(EXPRELAX_SOURCE_DIR) / "configs" / "refine_cosine.cfg");
  c.out_dir = scratch_dir("refine").string();
  CHECK(cmd_refine(c, c.levels) == kExitPass);
  const auto r = report(c.out_dir);
  const auto d = r["differences"];
  REQUIRE(d.size() == 2);
  CHECK(d[1].get<double>() < d[0].get<double>());
  CHECK(fs::exists(fs::path(c.out_dir) / "ledger_j0008.csv"));
  CHECK(fs::exists(fs::path(c.out_dir) / "ledger_j0032.csv"));
}

TEST_CASE("solver failures map to exit status 2") {
  RunConfig c = parse_config_text(kMinimal);
  c.scheme.solver = StepSolver::Picard;
  c.scheme.fp_max_iter = 5;
  c.out_dir = scratch_dir("failure").string();
  CHECK(cmd_run(c) == kExitSolverFailure);
  const auto r = report(c.out_dir);
  CHECK(r["pass"] == false);
  CHECK(r["error"]["kind"] == "step failure");
  CHECK(r["error"].contains("step"));
}

TEST_CASE("cmd_probe always reports") {
  RunConfig c = parse_config_text(
      "grid.cells = 32\nscheme.j = 4\nic.family = step-profile\nic.amplitude = 5\n");
  c.out_dir = scratch_dir("probe").string();
  CHECK(cmd_probe(c) == kExitPass);
  const auto r = report(c.out_dir);
  CHECK(r["levels"].size() == 3);
  CHECK(r.contains("signature"));
}
