#pragma once

#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "chemo/radial.hpp"

namespace chemo {

/// f(xi) = k_f (1 + xi)^{-alpha}, the gradient-dependent sensitivity.
struct FluxLimiter {
  double k_f = 1.0;
  double alpha = 0.15;

  /// Validates k_f >= 0 and 0 <= alpha < (N-2)/(2(N-1)). k_f = 0 is the
  /// pure heat equation; alpha = 0 is the unlimited Keller-Segel drift.
  static FluxLimiter make(double k_f, double alpha, int dim);

  double operator()(double xi) const { return k_f * std::pow(1.0 + xi, -alpha); }
  double derivative(double xi) const { return -alpha * k_f * std::pow(1.0 + xi, -alpha - 1.0); }
  /// Advective velocity f(v_r^2) v_r.
  double velocity(double v_r) const;
};

struct ChemoState {
  double t = 0.0;
  RadialField u;
  double dt = 0.0;
  std::int64_t step_count = 0;
  double mu = 0.0;

  /// State at t = 0 with mu taken from u0.
  static ChemoState initial(RadialField u0);
};

struct StepController {
  double cfl_diffusion = 0.4;
  double cfl_advection = 0.5;
  double dt_min = 1e-14;
  double u_blow_factor = 1e6;  ///< blow-up threshold is u_blow_factor * mu
  double t_end = 1.0;
  /// Samples are taken at least this often in t (0 means t_end / 200) and
  /// whenever ||u||_inf has grown by sample_growth since the last one.
  double sample_interval = 0.0;
  double sample_growth = 1.122018454301963;  // 10^{1/20}
  std::int64_t max_steps = std::numeric_limits<std::int64_t>::max();

  void validate() const;
};

/// du/dt from the flux form. Zero flux through r = 0 and r = R; advection
/// is upwinded by the sign of f(v_r^2) v_r. Throws NumericalFailure with the
/// offending cell on non-finite fluxes.
RadialField rhs(const ChemoState& state, const FluxLimiter& limiter);

/// Largest stable step for the current state, before clipping to t_end.
double stable_dt(const ChemoState& state, const FluxLimiter& limiter, const StepController& ctrl);

struct StepOutcome {
  ChemoState state;
  bool blowup_suspected = false;  ///< halving drove dt below dt_min
  int rejections = 0;
};

/// One Heun (explicit trapezoidal) step. A step producing a negative density
/// is retried with dt / 2; falling below ctrl.dt_min reports blowup_suspected
/// and returns the unchanged state.
StepOutcome step(const ChemoState& state, const FluxLimiter& limiter, const StepController& ctrl);

enum class Termination { reached_horizon, blowup_detected, step_failure };

std::string to_string(Termination t);

struct Sample {
  double t = 0.0;
  double mass = 0.0;
  double linf = 0.0;
  std::vector<double> lp;   ///< ||u||_{L^p} per probe
  std::vector<double> psi;  ///< (1/p) ||u||_p^p per probe
  double dt = 0.0;
};

struct RunRecord {
  std::vector<double> probes;
  std::vector<Sample> samples;
  Termination termination = Termination::reached_horizon;
  double t_final = 0.0;
  double t_detect = std::numeric_limits<double>::quiet_NaN();
  /// Power-law fit ||u||_inf ~ C (T - t)^{-kappa} over the last decade.
  double t_max_extrapolated = std::numeric_limits<double>::quiet_NaN();
  double blowup_exponent = std::numeric_limits<double>::quiet_NaN();
  double u_blow = 0.0;
  std::int64_t steps = 0;
  std::int64_t rejections = 0;
  std::string failure_reason;

  double initial_mass() const { return samples.front().mass; }
  double max_mass_drift() const;
};

/// Integrates from u0 until t_end, ||u||_inf >= u_blow, or a step failure.
RunRecord run(const RadialField& u0, const FluxLimiter& limiter, const StepController& ctrl,
              const std::vector<double>& probes);

struct PowerLawFit {
  double t_max = std::numeric_limits<double>::quiet_NaN();
  double exponent = std::numeric_limits<double>::quiet_NaN();
  double log_scale = std::numeric_limits<double>::quiet_NaN();
  bool ok = false;
};

/// Least-squares fit of log y = log C - kappa log(T - t) with T > t.back().
PowerLawFit fit_power_law_blowup(const std::vector<double>& t, const std::vector<double>& y);

}  // namespace chemo
