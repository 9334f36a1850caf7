#pragma once

#include <string>
#include <vector>

#include "chemo/radial.hpp"

namespace chemo {

/// Model constants of the flux-limited system. mu is the mean initial
/// density; zero means "not yet fixed by data".
struct ModelParams {
  int dim = 3;
  double radius = 1.0;
  double alpha = 0.15;
  double k_f = 1.0;
  double mu = 0.0;
};

/// Upper end of the admissible alpha interval, (N-2) / (2(N-1)).
double alpha_upper_bound(int dim);

struct Verdict {
  std::string condition;
  bool pass = false;
  double margin = 0.0;  ///< positive when satisfied, in the condition's natural units
  std::string detail;
};

/// 0 < alpha < (N-2)/(2(N-1)); margin is the distance to the upper end.
Verdict check_alpha(const ModelParams& params);

enum class ConcentrationMode {
  corrected,  ///< int_{B_r} u0 >= (r/R)^N int u0 for all r
  literal,    ///< int_{B_r} u0 >= int u0 for all r in (0, R), as printed
};

struct AdmissibilityReport {
  std::vector<Verdict> verdicts;

  bool all_pass() const;
  const Verdict* find(const std::string& condition) const;
};

/// Checks nonnegativity and mean of u0, the mass-concentration profile
/// condition at every interior face, and the threshold condition on B_{R0}.
/// Margins of the mass conditions are relative to the total mass.
AdmissibilityReport check_concentration(const RadialField& u0, double mu, double r0,
                                        ConcentrationMode mode = ConcentrationMode::corrected);

/// check_alpha plus check_concentration in one report.
AdmissibilityReport check_all(const ModelParams& params, const RadialField& u0, double r0,
                              ConcentrationMode mode = ConcentrationMode::corrected);

/// Nonincreasing radial profile with mean mu. A fraction `concentration`
/// of the mass sits in the smooth core (1 - (r/a)^2)^2 on B_a, the rest is
/// uniform, so the share inside B_a is c + (1 - c)(a/R)^N. c = 0 gives u = mu.
RadialField make_bump(const GridPtr& grid, double mu, double concentration, double core_radius);

/// Fraction of the total mass inside B_r.
double mass_fraction_inside(const RadialField& u, double r);

}  // namespace chemo
