#include "chemo/admissibility.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "chemo/errors.hpp"

namespace chemo {

namespace {

constexpr double kEqualityTolerance = 1e-12;

// int_lo^hi (1 - (r/a)^2)^2 r^{N-1} dr for 0 <= lo <= hi <= a.
double core_moment(double lo, double hi, double a, int dim) {
  auto anti = [&](double r) {
    const double s = r / a;
    const double rn = std::pow(r, dim);
    return rn * (1.0 / dim - 2.0 * s * s / (dim + 2) + s * s * s * s / (dim + 4));
  };
  return anti(hi) - anti(lo);
}

}  // namespace

double alpha_upper_bound(int dim) { return (dim - 2.0) / (2.0 * (dim - 1.0)); }

Verdict check_alpha(const ModelParams& params) {
  if (params.dim < 3) throw InvalidParameter("alpha condition is stated for N >= 3");
  const double bound = alpha_upper_bound(params.dim);
  Verdict v{"alpha", params.alpha > 0.0 && params.alpha < bound, bound - params.alpha, {}};
  std::ostringstream os;
  os << "0 < alpha = " << params.alpha << " < " << bound;
  v.detail = os.str();
  return v;
}

bool AdmissibilityReport::all_pass() const {
  for (const auto& v : verdicts)
    if (!v.pass) return false;
  return true;
}

const Verdict* AdmissibilityReport::find(const std::string& condition) const {
  for (const auto& v : verdicts)
    if (v.condition == condition) return &v;
  return nullptr;
}

double mass_fraction_inside(const RadialField& u, double r) {
  const FaceProfile m = cumulative_mass(u);
  return cumulative_mass_at(u, m, r) / m.values(m.values.size() - 1);
}

AdmissibilityReport check_concentration(const RadialField& u0, double mu, double r0, ConcentrationMode mode) {
  const RadialGrid& g = u0.grid();
  const double big_r = g.radius();
  if (!(r0 > 0.0 && r0 < big_r)) throw InvalidParameter("R0 must lie in (0, R)");
  AdmissibilityReport report;

  const double min_u = u0.values().minCoeff();
  const double total = integrate(u0);
  const double mean = total / g.ball_volume();
  {
    Verdict v{"nonnegative_mean", false, 0.0, {}};
    const double mean_err = std::abs(mean - mu) / std::max(std::abs(mu), std::numeric_limits<double>::min());
    v.pass = min_u >= 0.0 && mu > 0.0 && mean_err <= 1e-10;
    v.margin = min_u < 0.0 ? min_u : 0.0 - mean_err;
    std::ostringstream os;
    os << "min u0 = " << min_u << ", mean = " << mean << ", mu = " << mu;
    v.detail = os.str();
    report.verdicts.push_back(v);
  }
  if (min_u < 0.0) {
    report.verdicts.push_back({"concentration_profile", false, min_u, "negative data"});
    report.verdicts.push_back({"threshold", false, min_u, "negative data"});
    return report;
  }

  const FaceProfile m = cumulative_mass(u0);
  const double m_total = m.values(m.values.size() - 1);
  {
    // Interior faces only: r in (0, R).
    double worst = std::numeric_limits<double>::infinity();
    double worst_r = 0.0;
    for (Eigen::Index i = 1; i < g.size(); ++i) {
      const double r = g.faces()(i);
      const double target = mode == ConcentrationMode::corrected ? std::pow(r / big_r, g.dim()) : 1.0;
      const double margin = m.values(i) / m_total - target;
      if (margin < worst) {
        worst = margin;
        worst_r = r;
      }
    }
    Verdict v{"concentration_profile", worst >= -kEqualityTolerance, worst, {}};
    std::ostringstream os;
    os << (mode == ConcentrationMode::corrected ? "corrected" : "literal") << " form; tightest at r = " << worst_r;
    v.detail = os.str();
    report.verdicts.push_back(v);
  }
  {
    const double lhs = g.omega() * cumulative_mass_at(u0, m, r0) / g.ball_volume();
    const double rhs = 0.5 * mu * std::pow(big_r / r0, g.dim());
    Verdict v{"threshold", lhs >= rhs, (lhs - rhs) / mu, {}};
    std::ostringstream os;
    os << "(1/|Omega|) int_{B_R0} u0 = " << lhs << " vs (mu/2)(R/R0)^N = " << rhs;
    v.detail = os.str();
    report.verdicts.push_back(v);
  }
  return report;
}

AdmissibilityReport check_all(const ModelParams& params, const RadialField& u0, double r0, ConcentrationMode mode) {
  AdmissibilityReport report = check_concentration(u0, params.mu, r0, mode);
  report.verdicts.insert(report.verdicts.begin(), check_alpha(params));
  return report;
}

RadialField make_bump(const GridPtr& grid, double mu, double concentration, double core_radius) {
  const RadialGrid& g = *grid;
  if (!(mu > 0.0) || !std::isfinite(mu)) throw InvalidParameter("bump mean mu must be positive");
  if (!(concentration >= 0.0 && concentration <= 1.0))
    throw InvalidParameter("concentration must lie in [0, 1]");
  if (!(core_radius > 0.0 && core_radius < g.radius()))
    throw InvalidParameter("core radius must lie in (0, R)");
  if (concentration > 0.0 && core_radius < 2.0 * (g.faces()(1) - g.faces()(0)))
    throw InvalidParameter("core radius is below two cell widths at the origin; the core is not resolved");

  const int dim = g.dim();
  const Eigen::Index n = g.size();
  Array u = Array::Constant(n, 1.0 - concentration);
  if (concentration > 0.0) {
    // Unit-mean core: K * int_0^a (1-(r/a)^2)^2 r^{N-1} dr = R^N / N.
    const double scale = std::pow(g.radius(), dim) / dim / core_moment(0.0, core_radius, core_radius, dim);
    const Array& f = g.faces();
    for (Eigen::Index i = 0; i < n && f(i) < core_radius; ++i) {
      const double hi = std::min(f(i + 1), core_radius);
      const double cell_moment = g.face_moments()(i + 1) - g.face_moments()(i);
      u(i) += concentration * scale * core_moment(f(i), hi, core_radius, dim) / cell_moment;
    }
  }
  u *= mu;
  // Normalize the discrete mean onto mu.
  const double mean = (u * g.volumes()).sum() / g.ball_volume();
  u *= mu / mean;
  return RadialField(grid, std::move(u), FieldKind::density);
}

}  // namespace chemo
