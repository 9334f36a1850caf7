// Command-line front end: check | bound | run | sweep.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "chemo/errors.hpp"
#include "chemo/harness.hpp"

namespace {

using namespace chemo;

struct Options {
  std::string config;
  std::string out;
  std::vector<std::string> overrides;
  std::uint64_t seed = 0;
  bool seed_set = false;
  std::string axis;
  std::vector<double> values;
};

RunConfig load(const Options& o) {
  std::vector<std::string> ov = o.overrides;
  if (o.seed_set) ov.push_back("run.seed=" + std::to_string(o.seed));
  if (!o.out.empty()) ov.push_back("output.dir=" + o.out);
  return load_config(o.config, ov);
}

void print_admissibility(const AdmissibilityReport& r) {
  for (const auto& v : r.verdicts)
    std::printf("%-22s %s  margin %.6g  (%s)\n", v.condition.c_str(), v.pass ? "pass" : "FAIL", v.margin,
                v.detail.c_str());
}

int cmd_check(const Options& o) {
  const RunConfig cfg = load(o);
  const GridPtr grid = make_grid(cfg);
  const RadialField u0 = make_initial_data(cfg, grid);
  ModelParams params = cfg.model;
  params.mu = integrate(u0) / grid->ball_volume();
  const AdmissibilityReport rep = check_all(params, u0, cfg.r0, cfg.concentration_mode);
  print_admissibility(rep);
  return rep.all_pass() ? kExitOk : kExitInadmissible;
}

int cmd_bound(const Options& o) {
  const RunConfig cfg = load(o);
  const GridPtr grid = make_grid(cfg);
  const RadialField u0 = make_initial_data(cfg, grid);
  const BoundSummary b = compute_bounds(cfg, u0);
  const std::string text = bounds_text(b);
  std::cout << text;
  if (!o.out.empty()) {
    std::filesystem::create_directories(o.out);
    std::ofstream(std::filesystem::path(o.out) / "bounds.txt") << text;
  }
  return b.holder.dominates ? kExitOk : kExitNumerical;
}

int cmd_run(const Options& o) {
  const RunConfig cfg = load(o);
  const ExperimentRecord rec = run_experiment(cfg);
  write_experiment(rec, cfg.output_dir);
  std::cout << manifest_text(rec);
  return rec.exit_code;
}

int cmd_sweep(const Options& o) {
  const RunConfig cfg = load(o);
  if (o.values.empty()) throw ConfigError("sweep needs --values");
  const auto rows = sweep(cfg, o.axis, o.values);
  const std::string csv = sweep_csv(o.axis, rows);
  std::filesystem::create_directories(cfg.output_dir);
  std::ofstream(std::filesystem::path(cfg.output_dir) / "summary.csv") << csv;
  std::cout << csv;
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Radial flux-limited chemotaxis laboratory"};
  app.require_subcommand(1);
  Options opt;

  auto add_common = [&opt](CLI::App* sub) {
    sub->add_option("--config", opt.config, "INI configuration file")->required();
    sub->add_option("--out", opt.out, "output directory (overrides output.dir)");
    sub->add_option("--override", opt.overrides, "section.key=value, repeatable");
    sub->add_option_function<std::uint64_t>(
        "--seed", [&opt](const std::uint64_t& s) { opt.seed = s, opt.seed_set = true; }, "seed for randomized families");
  };
  auto* check = app.add_subcommand("check", "admissibility of parameters and initial data");
  auto* bound = app.add_subcommand("bound", "constants pipeline and blow-up time lower bounds");
  auto* runc = app.add_subcommand("run", "full experiment: checks, bounds, simulation");
  auto* sweepc = app.add_subcommand("sweep", "run one experiment per value of a config field");
  for (auto* s : {check, bound, runc, sweepc}) add_common(s);
  sweepc->add_option("--axis", opt.axis, "scalar config key, e.g. model.alpha")->required();
  sweepc->add_option("--values", opt.values, "comma-separated values")->delimiter(',')->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (*check) return cmd_check(opt);
    if (*bound) return cmd_bound(opt);
    if (*runc) return cmd_run(opt);
    return cmd_sweep(opt);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const InadmissibleData& e) {
    std::cerr << "inadmissible: " << e.what() << '\n';
    return kExitInadmissible;
  } catch (const DensityViolation& e) {
    std::cerr << "inadmissible: " << e.what() << '\n';
    return kExitInadmissible;
  } catch (const InvalidParameter& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return kExitNumerical;
  }
}
