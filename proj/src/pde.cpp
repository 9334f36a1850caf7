#include "chemo/pde.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <sstream>
#include <utility>

#include "chemo/admissibility.hpp"
#include "chemo/elliptic.hpp"
#include "chemo/errors.hpp"

namespace chemo {

FluxLimiter FluxLimiter::make(double k_f, double alpha, int dim) {
  if (!(k_f >= 0.0) || !std::isfinite(k_f)) throw InvalidParameter("k_f must be finite and >= 0");
  const double bound = alpha_upper_bound(dim);
  if (!(alpha >= 0.0 && alpha < bound)) {
    std::ostringstream os;
    os << "alpha = " << alpha << " violates 0 <= alpha < (N-2)/(2(N-1)) = " << bound;
    throw InvalidParameter(os.str());
  }
  return {k_f, alpha};
}

double FluxLimiter::velocity(double v_r) const {
  if (k_f == 0.0) return 0.0;
  const double xi = v_r * v_r;
  // Two-term series is exact to roundoff below 1e-9.
  if (xi < 1e-9) return k_f * v_r * (1.0 - alpha * xi);
  return k_f * v_r * std::pow(1.0 + xi, -alpha);
}

ChemoState ChemoState::initial(RadialField u0) {
  const double mu = integrate(u0) / u0.grid().ball_volume();
  return {0.0, std::move(u0), 0.0, 0, mu};
}

void StepController::validate() const {
  auto positive = [](double x) { return x > 0.0 && std::isfinite(x); };
  if (!positive(cfl_diffusion) || cfl_diffusion > 1.0) throw InvalidParameter("cfl_diffusion must lie in (0, 1]");
  if (!positive(cfl_advection) || cfl_advection > 1.0) throw InvalidParameter("cfl_advection must lie in (0, 1]");
  if (!positive(dt_min)) throw InvalidParameter("dt_min must be positive");
  if (!positive(u_blow_factor)) throw InvalidParameter("u_blow_factor must be positive");
  if (!positive(t_end)) throw InvalidParameter("t_end must be positive");
  if (!(sample_interval >= 0.0)) throw InvalidParameter("sample_interval must be >= 0");
  if (!(sample_growth > 1.0)) throw InvalidParameter("sample_growth must exceed 1");
}

std::string to_string(Termination t) {
  switch (t) {
    case Termination::reached_horizon: return "ReachedHorizon";
    case Termination::blowup_detected: return "BlowupDetected";
    case Termination::step_failure: return "StepFailure";
  }
  return "unknown";
}

namespace {

// Face velocities a = f(v_r^2) v_r; the boundary entries are zero.
void face_velocities(const RadialGrid& g, const Array& u, double mu, const FluxLimiter& limiter, Array& a) {
  if (limiter.k_f == 0.0) {
    a = Array::Zero(g.size() + 1);
    return;
  }
  gradient_faces_into(g, u, mu, a);
  for (Eigen::Index i = 0; i < a.size(); ++i) a(i) = limiter.velocity(a(i));
}

Array assemble(const RadialGrid& g, const Array& u, double mu, const FluxLimiter& limiter, Array& a) {
  const Eigen::Index n = g.size();
  const Eigen::Index m = n - 1;
  face_velocities(g, u, mu, limiter, a);

  const auto left = u.head(m);
  const auto right = u.tail(m);
  const auto af = a.segment(1, m);
  Array flux(n + 1);
  flux(0) = 0.0;
  flux(n) = 0.0;
  flux.segment(1, m) = g.face_conductances().segment(1, m) * (right - left) -
                       g.face_areas().segment(1, m) * af * (af > 0.0).select(left, right);
  if (!flux.allFinite()) {
    Eigen::Index i = 1;
    while (std::isfinite(flux(i))) ++i;
    throw NumericalFailure("non-finite face flux", i - 1);
  }
  return (flux.tail(n) - flux.head(n)) / g.volumes();
}

// Largest diagonal entry of the diffusion operator, sum_faces A / (h V).
double diffusion_rate(const RadialGrid& g) {
  const Eigen::Index n = g.size();
  const Array& c = g.face_conductances();
  return ((c.head(n) + c.tail(n)) / g.volumes()).maxCoeff();
}

double advection_rate(const RadialGrid& g, const Array& a) {
  const Eigen::Index n = g.size();
  const Array& area = g.face_areas();
  const Array out = area.tail(n) * a.tail(n).max(0.0) + area.head(n) * (-a.head(n)).max(0.0);
  return (out / g.volumes()).maxCoeff();
}

double dt_from_rates(const RadialGrid& g, const Array& a, const StepController& ctrl) {
  double dt = ctrl.cfl_diffusion / diffusion_rate(g);
  const double adv = advection_rate(g, a);
  if (adv > 0.0) dt = std::min(dt, ctrl.cfl_advection / adv);
  return dt;
}

}  // namespace

RadialField rhs(const ChemoState& state, const FluxLimiter& limiter) {
  Array a;
  return RadialField(state.u.grid_ptr(), assemble(state.u.grid(), state.u.values(), state.mu, limiter, a));
}

double stable_dt(const ChemoState& state, const FluxLimiter& limiter, const StepController& ctrl) {
  const RadialGrid& g = state.u.grid();
  Array a;
  face_velocities(g, state.u.values(), state.mu, limiter, a);
  return dt_from_rates(g, a, ctrl);
}

StepOutcome step(const ChemoState& state, const FluxLimiter& limiter, const StepController& ctrl) {
  const GridPtr& gp = state.u.grid_ptr();
  const RadialGrid& g = *gp;
  const Array& u = state.u.values();

  Array a;
  const Array k1 = assemble(g, u, state.mu, limiter, a);
  const double remaining = ctrl.t_end - state.t;
  double dt = std::min(dt_from_rates(g, a, ctrl), remaining);
  // Never leave a sliver of the horizon shorter than dt_min.
  if (remaining - dt < ctrl.dt_min) dt = remaining;

  StepOutcome out{state, false, 0};
  while (dt >= ctrl.dt_min) {
    Array stage = u + dt * k1;
    if ((stage >= 0.0).all()) {
      Array a2;
      const Array k2 = assemble(g, stage, state.mu, limiter, a2);
      Array next = u + (0.5 * dt) * (k1 + k2);
      if ((next >= 0.0).all()) {
        out.state.u = RadialField(gp, std::move(next), FieldKind::density);
        out.state.t = dt == remaining ? ctrl.t_end : state.t + dt;
        out.state.dt = dt;
        out.state.step_count = state.step_count + 1;
        return out;
      }
    }
    ++out.rejections;
    dt *= 0.5;
  }
  out.blowup_suspected = true;
  return out;
}

double RunRecord::max_mass_drift() const {
  const double m0 = initial_mass();
  double worst = 0.0;
  for (const auto& s : samples) worst = std::max(worst, std::abs(s.mass - m0) / m0);
  return worst;
}

namespace {

Sample take_sample(const ChemoState& s, const std::vector<double>& probes) {
  Sample out;
  out.t = s.t;
  out.mass = integrate(s.u);
  out.linf = sup_norm(s.u);
  out.dt = s.dt;
  for (double p : probes) {
    const double pow_sum = lp_norm_pow(s.u, p);
    out.lp.push_back(std::pow(pow_sum, 1.0 / p));
    out.psi.push_back(pow_sum / p);
  }
  return out;
}

}  // namespace

RunRecord run(const RadialField& u0, const FluxLimiter& limiter, const StepController& ctrl,
              const std::vector<double>& probes) {
  ctrl.validate();
  for (double p : probes)
    if (!(p >= 1.0)) throw InvalidParameter("probe exponents must be >= 1");
  if (u0.kind() != FieldKind::density) throw InadmissibleData("initial data must be a density field");
  // Re-validates nonnegativity.
  ChemoState state = ChemoState::initial(RadialField(u0.grid_ptr(), u0.values(), FieldKind::density));
  if (!(state.mu > 0.0)) throw InadmissibleData("initial data must have positive mass");

  RunRecord rec;
  rec.probes = probes;
  rec.u_blow = ctrl.u_blow_factor * state.mu;
  const double interval = ctrl.sample_interval > 0.0 ? ctrl.sample_interval : ctrl.t_end / 200.0;
  const double t_tol = 1e-14 * ctrl.t_end;

  rec.samples.push_back(take_sample(state, probes));
  double next_sample_t = interval;
  double last_linf = rec.samples.back().linf;
  bool last_is_sampled = true;

  for (;;) {
    const double linf = sup_norm(state.u);
    if (linf >= rec.u_blow) {
      rec.termination = Termination::blowup_detected;
      rec.t_detect = state.t;
      break;
    }
    if (state.t >= ctrl.t_end - t_tol) {
      rec.termination = Termination::reached_horizon;
      break;
    }
    if (rec.steps >= ctrl.max_steps) {
      rec.termination = Termination::step_failure;
      rec.failure_reason = "step budget exhausted";
      break;
    }
    std::optional<StepOutcome> attempt;
    try {
      attempt.emplace(step(state, limiter, ctrl));
    } catch (const NumericalFailure& e) {
      rec.termination = Termination::step_failure;
      rec.failure_reason = e.what();
      break;
    }
    StepOutcome& out = *attempt;
    rec.rejections += out.rejections;
    if (out.blowup_suspected) {
      rec.termination = Termination::step_failure;
      rec.failure_reason = "dt underflow below dt_min (blow-up suspected)";
      break;
    }
    state = std::move(out.state);
    ++rec.steps;
    last_is_sampled = false;
    const double now_linf = sup_norm(state.u);
    if (state.t >= next_sample_t || now_linf >= last_linf * ctrl.sample_growth) {
      rec.samples.push_back(take_sample(state, probes));
      last_linf = now_linf;
      last_is_sampled = true;
      while (next_sample_t <= state.t) next_sample_t += interval;
    }
  }
  if (!last_is_sampled) rec.samples.push_back(take_sample(state, probes));
  rec.t_final = state.t;

  if (rec.termination == Termination::blowup_detected) {
    std::vector<double> ts, ys;
    const double floor = rec.samples.back().linf / 10.0;
    for (const auto& s : rec.samples) {
      if (s.linf >= floor) {
        ts.push_back(s.t);
        ys.push_back(s.linf);
      }
    }
    const PowerLawFit fit = fit_power_law_blowup(ts, ys);
    if (fit.ok) {
      rec.t_max_extrapolated = fit.t_max;
      rec.blowup_exponent = fit.exponent;
    }
  }
  return rec;
}

PowerLawFit fit_power_law_blowup(const std::vector<double>& t, const std::vector<double>& y) {
  PowerLawFit best;
  const std::size_t n = t.size();
  if (n < 3 || y.size() != n) return best;
  const double t_last = t.back();
  const double span = t_last - t.front();
  if (!(span > 0.0)) return best;

  struct Line {
    double sse, slope, intercept;
  };
  auto regress = [&](double big_t) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < n; ++i) {
      const double x = std::log(big_t - t[i]);
      const double z = std::log(y[i]);
      sx += x;
      sy += z;
      sxx += x * x;
      sxy += x * z;
    }
    const double m = static_cast<double>(n);
    const double den = m * sxx - sx * sx;
    const double slope = den != 0.0 ? (m * sxy - sx * sy) / den : 0.0;
    const double intercept = (sy - slope * sx) / m;
    double sse = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double r = std::log(y[i]) - intercept - slope * std::log(big_t - t[i]);
      sse += r * r;
    }
    return Line{sse, slope, intercept};
  };

  // Coarse log-spaced scan of the offset T - t_last, then golden refinement.
  const double lo = std::log(1e-9 * span), hi = std::log(1e3 * span);
  const int scan = 240;
  double best_x = lo, best_sse = std::numeric_limits<double>::infinity();
  for (int k = 0; k <= scan; ++k) {
    const double x = lo + (hi - lo) * k / scan;
    const double sse = regress(t_last + std::exp(x)).sse;
    if (sse < best_sse) {
      best_sse = sse;
      best_x = x;
    }
  }
  const double step = (hi - lo) / scan;
  double a = best_x - step, b = best_x + step;
  const double phi = 0.5 * (std::sqrt(5.0) - 1.0);
  for (int it = 0; it < 100; ++it) {
    const double c = b - phi * (b - a), d = a + phi * (b - a);
    if (regress(t_last + std::exp(c)).sse < regress(t_last + std::exp(d)).sse)
      b = d;
    else
      a = c;
  }
  const double big_t = t_last + std::exp(0.5 * (a + b));
  const Line line = regress(big_t);
  best.t_max = big_t;
  best.exponent = -line.slope;
  best.log_scale = line.intercept;
  best.ok = std::isfinite(big_t) && best.exponent > 0.0;
  return best;
}

}  // namespace chemo
