#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "chemo/errors.hpp"
#include "chemo/harness.hpp"

using namespace chemo;
namespace fs = std::filesystem;

namespace {

const char* kSteady = R"(
[model]
N = 3
R = 1
alpha = 0.15
k_f = 1
[grid]
n_cells = 128
[initial]
generator = constant
mu = 2
[controller]
t_end = 0.05
[probes]
p = 1.5, 3
[bound]
p = 2
R0 = 0.95
holder_trials = 50
)";

const char* kBlowup = R"(
[model]
alpha = 0.15
[grid]
n_cells = 256
[initial]
generator = bump
mu = 10
concentration = 0.9
core_radius = 0.2
[bound]
holder_trials = 50
)";

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(item);
  return out;
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("chemo_test_" + name);
  fs::remove_all(p);
  return p;
}

}  // namespace

TEST_CASE("config round trip") {
  const RunConfig a = parse_config(kSteady, {"controller.cfl_diffusion=0.3", "bound.c_gn=0.123456789012345678",
                                             "admissibility.mode=literal", "run.seed=18446744073709551"});
  const std::string text = serialize_config(a);
  const RunConfig b = parse_config(text);
  CHECK(serialize_config(b) == text);
  CHECK(b.controller.cfl_diffusion == 0.3);
  CHECK(b.c_gn == a.c_gn);
  CHECK(b.concentration_mode == ConcentrationMode::literal);
  CHECK(b.seed == a.seed);
  CHECK(b.probes == a.probes);
  CHECK(b.n_cells == 128);
  CHECK(b.generator == "constant");

  const RunConfig d = parse_config("");
  CHECK(serialize_config(parse_config(serialize_config(d))) == serialize_config(d));
  CHECK(d.epsilon == 0.0);
  CHECK(serialize_config(d).find("epsilon = auto") != std::string::npos);
  CHECK(serialize_config(d).find("c_gn = estimate") != std::string::npos);
}

TEST_CASE("malformed configs are rejected") {
  CHECK_THROWS_AS(parse_config("[model]\nunknown = 1\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("[model]\nalpha = abc\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("[grid]\nn_cells = 12.5\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("[grid]\nn_cells = 4\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("[model\nN = 3\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("N = 3\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("", {"model.alpha"}), ConfigError);
  CHECK_THROWS_AS(parse_config("", {"initial.generator=profile", "initial.profile_path=/nonexistent/x"}), ConfigError);
  CHECK_THROWS_AS(parse_config("", {"bound.R0=1.5"}), ConfigError);
  CHECK_THROWS_AS(parse_config("", {"controller.cfl_diffusion=2"}), ConfigError);
  CHECK_THROWS_AS(load_config("/nonexistent/config.ini"), ConfigError);
}

TEST_CASE("scalar keys") {
  const auto& keys = scalar_config_keys();
  for (const char* k : {"model.alpha", "grid.n_cells", "initial.mu", "controller.t_end", "bound.p"})
    CHECK(std::find(keys.begin(), keys.end(), k) != keys.end());
  CHECK(std::find(keys.begin(), keys.end(), "initial.generator") == keys.end());
}

TEST_CASE("steady-state experiment") {
  const RunConfig cfg = parse_config(kSteady);
  const ExperimentRecord rec = run_experiment(cfg);
  CHECK(rec.exit_code == kExitOk);
  CHECK(rec.run.termination == Termination::reached_horizon);
  CHECK(rec.admissibility.all_pass());
  CHECK(std::isfinite(rec.bounds.t_quadrature));
  CHECK(rec.bounds.t_quadrature > 0.0);
  CHECK(rec.bounds.t_closed <= rec.bounds.t_quadrature);
  CHECK(rec.bound_below_detect);
  CHECK(rec.psi_check.violations == 0);
  CHECK(rec.run.max_mass_drift() <= 1e-10);
  for (const auto& s : rec.run.samples) CHECK(std::abs(s.linf - 2.0) <= 1e-10 * 2.0);

  SUBCASE("series columns in the documented order") {
    std::istringstream csv(series_csv(rec.run));
    std::string header;
    std::getline(csv, header);
    CHECK(header == "t,mass,linf,lp_1.5,lp_3,lp_2,psi_1.5,psi_3,psi_2,dt");
    std::string line;
    std::size_t rows = 0;
    while (std::getline(csv, line)) {
      CHECK(split_line(line).size() == 10);
      ++rows;
    }
    CHECK(rows == rec.run.samples.size());
  }

  SUBCASE("written files") {
    const fs::path dir = scratch("steady");
    write_experiment(rec, dir.string());
    for (const char* f : {"series.csv", "bounds.txt", "manifest.txt", "config.ini"}) CHECK(fs::exists(dir / f));
    std::ifstream in(dir / "manifest.txt");
    std::stringstream ss;
    ss << in.rdbuf();
    CHECK(ss.str().find("verdict = ReachedHorizon") != std::string::npos);
    CHECK(ss.str().find("bound_below_detect = true") != std::string::npos);
    std::ifstream ci(dir / "config.ini");
    std::stringstream cs;
    cs << ci.rdbuf();
    CHECK(serialize_config(parse_config(cs.str())) == serialize_config(cfg));
    fs::remove_all(dir);
  }
}

TEST_CASE("blow-up experiment: manifest and series agree") {
  const ExperimentRecord rec = run_experiment(parse_config(kBlowup));
  REQUIRE(rec.run.termination == Termination::blowup_detected);
  CHECK(rec.run.samples.back().linf >= rec.run.u_blow);
  CHECK(rec.bound_below_detect);
  CHECK(rec.bounds.t_quadrature <= rec.run.t_detect);
  CHECK(rec.exit_code == kExitOk);
  CHECK(manifest_text(rec).find("verdict = BlowupDetected") != std::string::npos);

  const ExperimentRecord failing = run_experiment(parse_config(kBlowup, {"controller.dt_min=1"}));
  CHECK(failing.run.termination == Termination::step_failure);
  CHECK(failing.run.samples.back().linf < failing.run.u_blow);
  CHECK(failing.exit_code == kExitNumerical);
}

TEST_CASE("inadmissible data") {
  CHECK_THROWS_AS(run_experiment(parse_config(kSteady, {"model.alpha=0.3"})), InadmissibleData);
  CHECK_THROWS_AS(run_experiment(parse_config(kSteady, {"bound.R0=0.7"})), InadmissibleData);
  const ExperimentRecord rec = run_experiment(
      parse_config(kSteady, {"bound.R0=0.7", "admissibility.allow_inadmissible=true", "controller.t_end=0.001"}));
  CHECK_FALSE(rec.admissibility.all_pass());
  CHECK(rec.run.termination == Termination::reached_horizon);
}

TEST_CASE("profile initial data") {
  const fs::path dir = scratch("profile");
  fs::create_directories(dir);
  const fs::path file = dir / "u0.txt";
  {
    std::ofstream out(file);
    out << "# decreasing profile\n";
    for (int i = 0; i < 16; ++i) out << 5.0 - 0.25 * i << '\n';
  }
  RunConfig cfg = parse_config("[grid]\nn_cells = 16\n[initial]\ngenerator = profile\nprofile_path = " + file.string() + "\n");
  const RadialField u = make_initial_data(cfg, make_grid(cfg));
  CHECK(u[0] == 5.0);
  CHECK(u[15] == 1.25);
  cfg.n_cells = 20;
  CHECK_THROWS_AS(make_initial_data(cfg, make_grid(cfg)), ConfigError);
  {
    std::ofstream out(file);
    for (int i = 0; i < 16; ++i) out << (i == 3 ? -1.0 : 1.0) << '\n';
  }
  cfg.n_cells = 16;
  CHECK_THROWS_AS(make_initial_data(cfg, make_grid(cfg)), InadmissibleData);
  fs::remove_all(dir);
}

TEST_CASE("reproducibility") {
  const RunConfig cfg = parse_config(kBlowup, {"grid.n_cells=128", "controller.t_end=0.002"});
  const ExperimentRecord a = run_experiment(cfg), b = run_experiment(cfg);
  CHECK(series_csv(a.run) == series_csv(b.run));
  CHECK(bounds_text(a.bounds) == bounds_text(b.bounds));
  CHECK(manifest_text(a) == manifest_text(b));
}

TEST_CASE("sweeps") {
  SUBCASE("alpha values at N = 3 are all admissible") {
    const RunConfig cfg = parse_config(kBlowup, {"grid.n_cells=128", "controller.t_end=0.001"});
    const auto rows = sweep(cfg, "model.alpha", {0.20, 0.05, 0.15, 0.10});
    REQUIRE(rows.size() == 4);
    const double expected[] = {0.05, 0.10, 0.15, 0.20};
    for (std::size_t i = 0; i < 4; ++i) {
      CHECK(rows[i].axis_value == expected[i]);
      CHECK(rows[i].verdict.rfind("error", 0) != 0);
    }
    const std::string csv = sweep_csv("model.alpha", rows);
    CHECK(csv.rfind("model.alpha,verdict,t_detect,T_quadrature,T_closed,ratio", 0) == 0);
  }
  SUBCASE("resolution sweep on the steady state") {
    const RunConfig cfg = parse_config(kSteady);
    const auto rows = sweep(cfg, "grid.n_cells", {128, 256, 512});
    REQUIRE(rows.size() == 3);
    for (const auto& r : rows) {
      CHECK(r.verdict == "ReachedHorizon");
      CHECK(r.mass_drift <= 1e-10);
    }
  }
  SUBCASE("bound is nonincreasing in the initial amplitude") {
    const RunConfig cfg = parse_config(kBlowup, {"grid.n_cells=128", "controller.t_end=1e-4", "bound.c_gn=1"});
    const auto rows = sweep(cfg, "initial.mu", {4, 6, 8, 10, 12});
    for (std::size_t i = 1; i < rows.size(); ++i) {
      CHECK(rows[i].psi0 > rows[i - 1].psi0);
      CHECK(rows[i].t_quadrature <= rows[i - 1].t_quadrature);
    }
  }
  SUBCASE("a failing member is recorded and the sweep continues") {
    const RunConfig cfg = parse_config(kSteady, {"controller.t_end=0.001"});
    const auto rows = sweep(cfg, "model.alpha", {0.1, 0.4});
    REQUIRE(rows.size() == 2);
    CHECK(rows[0].verdict == "ReachedHorizon");
    CHECK(rows[1].verdict.rfind("error", 0) == 0);
  }
  SUBCASE("unknown axis") {
    CHECK_THROWS_AS(sweep(parse_config(kSteady), "initial.generator", {1.0}), ConfigError);
  }
}
