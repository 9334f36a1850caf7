#pragma once

#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "chemo/admissibility.hpp"
#include "chemo/pde.hpp"
#include "chemo/radial.hpp"

namespace chemo {

struct ProvenanceEntry {
  std::string label;
  double value = 0.0;
  std::string formula;
};

/// Every constant of the energy inequality
///   Psi' <= B1 Psi + B2 Psi^g1 + B3 Psi^g2 + B4 Psi^g3,   Psi = (1/p) ||u||_p^p,
/// together with the chain of intermediate constants it was built from.
///
/// The B coefficients are expressed in terms of Psi itself: the integral
/// inequalities are stated for int u^p = p Psi, so each B_i carries the
/// factor p^{gamma_i} (p for B1).
struct BoundConstants {
  int dim = 3;
  double p = 2.0;
  double epsilon = 0.0;
  double c_gn = 0.0;
  double epsilon1 = 0.0;
  double c_holder = 0.0;
  double c1 = 0.0, c2 = 0.0, c3 = 0.0, c4 = 0.0, c5 = 0.0;
  double c_tilde1 = 0.0;
  double B1 = 0.0, B2 = 0.0, B3 = 0.0, B4 = 0.0;
  double gamma1 = 0.0, gamma2 = 0.0, gamma3 = 0.0;
  double sigma = 0.0;
  double gamma = 0.0;  ///< max(gamma2, gamma3)
  std::vector<ProvenanceEntry> provenance;

  /// B1 eta + B2 eta^g1 + B3 eta^g2 + B4 eta^g3.
  double majorant(double eta) const;

  /// Coefficient A of the reduced inequality Psi' <= A Psi^gamma for Psi >= Psi0.
  double closed_form_coefficient(double psi0) const;

  /// Constants built by hand (tests, what-if studies). Checks only what the
  /// bound formulas need: B_i >= 0 and 1 < gamma1 <= gamma2 <= gamma, gamma3 <= gamma.
  static BoundConstants from_coefficients(double B1, double B2, double B3, double B4, double gamma1,
                                          double gamma2, double gamma3);
};

/// Hoelder constant c(eps, N, p) bounding
///   omega_N int_0^R u^p r^{-1} M(r) dr <= c (int u^{p+1})^{1/(p+1)} (int u^{p+1+eps})^{p/(p+1+eps)}.
double holder_constant(int dim, double radius, double p, double epsilon);

/// Default slack eps = 0.05 (2p/N - 1).
double default_epsilon(int dim, double p);

/// Evaluates the constants chain. Throws InvalidParameter naming the
/// violated inequality when (N, p, eps, C_GN) or the model parameters are
/// outside the admissible region.
BoundConstants build_constants(const ModelParams& params, double p, double epsilon, double c_gn);

/// T = int_{Psi0}^inf d eta / majorant(eta) by adaptive Gauss-Kronrod on the
/// compactified variable. +infinity when no superlinear coefficient is positive.
double lower_bound_quadrature(const BoundConstants& k, double psi0);

/// T = 1 / (A (gamma - 1) Psi0^{gamma - 1}).
double lower_bound_closed_form(const BoundConstants& k, double psi0);

struct PsiTrace {
  std::vector<double> t;
  std::vector<double> psi;
  std::vector<double> dpsi;  ///< forward differences (last entry repeats)
  double blowup_time = std::numeric_limits<double>::quiet_NaN();
};

/// Integrates phi' = majorant(phi), phi(0) = Psi0, with Dormand-Prince 5(4)
/// until t_end or phi exceeds phi_cap. With phi_cap <= 0 the cap adapts so
/// the remaining time to infinity is below 1e-10 of the crossing time.
/// The crossing time is stored as blowup_time.
PsiTrace comparison_ode(const BoundConstants& k, double psi0, double t_end, double phi_cap = 0.0);

/// Psi_p samples of a simulation, for the probe with exponent p.
PsiTrace psi_trace_from_run(const RunRecord& rec, double p);

struct PsiInequalityReport {
  std::size_t checked = 0;
  std::size_t violations = 0;
  double min_slack = std::numeric_limits<double>::infinity();
  double min_relative_slack = std::numeric_limits<double>::infinity();  ///< slack / RHS
  double worst_time = std::numeric_limits<double>::quiet_NaN();
};

/// slack_i = majorant(Psi_i) - Psi'_i with central differences at interior
/// samples; a violation is slack < -tol * majorant(Psi_i).
PsiInequalityReport check_psi_inequality(const PsiTrace& trace, const BoundConstants& k, double tol);

/// Exponents of one Gagliardo-Nirenberg configuration
///   ||w||_q^{power} <= C (||grad w||_2^{power theta} ||w||_2^{power (1 - theta)} + ||w||_2^{power}).
struct GnConfiguration {
  double norm_exponent;
  double power;
  double theta;
};

/// q = 2(p+1)/p, power = q, theta = N / (2(p+1)).
GnConfiguration gn_configuration(int dim, double p);
/// q = 2(p+1+eps)/p, power = 2(p+1)/p, theta = N(1+eps) / (2(p+1+eps)).
GnConfiguration gn_configuration(int dim, double p, double epsilon);

/// Ratio of the two sides of a GN configuration for a radial profile w with
/// derivative dw, both sampled at the cell centers.
double gn_ratio(const RadialGrid& grid, const Array& w, const Array& dw, const GnConfiguration& cfg);

/// Largest GN ratio over a deterministic family of radial test profiles
/// (Gaussians, polynomial bumps, near-constant perturbations). The family is
/// prefix-stable, so the estimate is nondecreasing in family_size.
/// A lower estimate of the best constant. Throws for family_size < 8.
double estimate_gn_constant(const RadialGrid& grid, double p, int family_size);

/// Same, maximized over both configurations the bound pipeline uses.
double estimate_gn_constant(const RadialGrid& grid, double p, double epsilon, int family_size);

/// Left side of the Hoelder estimate divided by the product of integral
/// powers on its right, computed exactly for a piecewise-constant density.
double holder_ratio(const RadialField& u, double p, double epsilon);

struct HolderValidation {
  double symbolic = 0.0;
  double max_ratio = 0.0;
  int trials = 0;
  bool dominates = false;
};

/// Maximizes holder_ratio over random densities (plus a hill-climbing
/// refinement of the best ones) and compares against holder_constant.
HolderValidation validate_holder_constant(const GridPtr& grid, double p, double epsilon, int trials,
                                          std::uint64_t seed);

/// "label = value # formula" lines.
std::string provenance_report(const BoundConstants& k);

}  // namespace chemo
