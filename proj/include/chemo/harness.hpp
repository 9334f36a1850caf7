#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "chemo/admissibility.hpp"
#include "chemo/bounds.hpp"
#include "chemo/pde.hpp"

namespace chemo {

enum ExitCode : int { kExitOk = 0, kExitConfig = 2, kExitInadmissible = 3, kExitNumerical = 4 };

/// Typed view of the INI-style configuration file. See docs/config.md.
struct RunConfig {
  ModelParams model;  // model.mu is ignored; the mean of the initial data wins

  Eigen::Index n_cells = 512;
  double grading = 1.0;

  std::string generator = "bump";  // bump | constant | profile
  double mu = 1.0;
  double concentration = 0.9;
  double core_radius = 0.2;
  std::string profile_path;

  StepController controller;
  std::vector<double> probes{2.0};

  double bound_p = 2.0;
  double epsilon = 0.0;  // 0 selects default_epsilon
  double c_gn = 0.0;     // 0 selects the estimate times gn_safety
  double gn_safety = 2.0;
  int gn_family = 64;
  int holder_trials = 500;
  double r0 = 0.9;

  ConcentrationMode concentration_mode = ConcentrationMode::corrected;
  bool allow_inadmissible = false;

  std::string output_dir = "out";
  std::uint64_t seed = 1;
};

/// Parses INI text; `overrides` are "section.key=value" strings applied
/// before typing. Throws ConfigError on unknown keys or malformed values.
RunConfig parse_config(const std::string& text, const std::vector<std::string>& overrides = {});
RunConfig load_config(const std::string& path, const std::vector<std::string>& overrides = {});

/// Canonical INI text; parse_config(serialize_config(c)) == c field by field.
std::string serialize_config(const RunConfig& config);

/// Keys accepted by sweeps and overrides, e.g. "model.alpha".
const std::vector<std::string>& scalar_config_keys();

GridPtr make_grid(const RunConfig& config);
RadialField make_initial_data(const RunConfig& config, const GridPtr& grid);

struct BoundSummary {
  BoundConstants constants;
  double c_gn_estimate = 0.0;  ///< raw family maximum, before the safety factor
  double psi0 = 0.0;
  double t_quadrature = 0.0;
  double t_closed = 0.0;
  HolderValidation holder;
};

/// C_GN estimate, constants chain, both T values and the Hoelder check.
BoundSummary compute_bounds(const RunConfig& config, const RadialField& u0);

struct ExperimentRecord {
  RunConfig config;
  double mu = 0.0;
  AdmissibilityReport admissibility;
  BoundSummary bounds;
  RunRecord run;
  PsiInequalityReport psi_check;
  bool bound_below_detect = true;
  int exit_code = kExitOk;
};

/// admissibility -> bounds -> simulation -> Psi-inequality check. Throws
/// InadmissibleData unless the data pass or allow_inadmissible is set.
ExperimentRecord run_experiment(const RunConfig& config);

/// Writes series.csv, bounds.txt, manifest.txt and config.ini into dir.
void write_experiment(const ExperimentRecord& rec, const std::string& dir);

std::string series_csv(const RunRecord& run);
std::string manifest_text(const ExperimentRecord& rec);
std::string bounds_text(const BoundSummary& b);

struct SweepRow {
  double axis_value = 0.0;
  std::string verdict;
  double t_detect = 0.0;
  double t_quadrature = 0.0;
  double t_closed = 0.0;
  double ratio = 0.0;  ///< t_detect / T_quadrature
  double mass_drift = 0.0;
  double psi0 = 0.0;
};

/// Runs one experiment per value concurrently; rows sorted by axis value.
/// A failing run is recorded in its row and does not stop the sweep.
std::vector<SweepRow> sweep(const RunConfig& base, const std::string& axis, const std::vector<double>& values,
                            unsigned max_threads = 0);

std::string sweep_csv(const std::string& axis, const std::vector<SweepRow>& rows);

}  // namespace chemo
