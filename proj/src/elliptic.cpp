#include "chemo/elliptic.hpp"

#include <cmath>
#include <string>

#include "chemo/errors.hpp"

namespace chemo {

namespace {

void check_compatible(const RadialField& u, double mu) {
  const double mean = integrate(u) / u.grid().ball_volume();
  const double scale = std::max(std::abs(mean), std::abs(mu));
  if (!std::isfinite(mu) || std::abs(mean - mu) > kCompatibilityTolerance * scale)
    throw CompatibilityError("mu = " + std::to_string(mu) + " does not match mean(u) = " +
                             std::to_string(mean) + "; elliptic problem has no solution");
}

Array gradient_faces(const RadialField& u, double mu) {
  Array vr;
  gradient_faces_into(u.grid(), u.values(), mu, vr);
  return vr;
}

}  // namespace

// v_r at faces from the excess mass int_0^r rho^{N-1} (mu - u) d rho, which
// vanishes identically for u == mu; the origin value is the limit 0.
void gradient_faces_into(const RadialGrid& g, const Array& u, double mu, Array& vr) {
  const Eigen::Index n = g.size();
  const Array& mom = g.face_moments();
  const Array& area = g.face_areas();  // omega_N r^{N-1}
  vr.resize(n + 1);
  vr(0) = 0.0;
  double excess = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    excess += (mu - u(i)) * (mom(i + 1) - mom(i));
    vr(i + 1) = excess;
  }
  vr.tail(n) *= g.omega() / area.tail(n);
}

Array solve_gradient_faces(const RadialField& u, double mu) {
  check_compatible(u, mu);
  if ((u.values() < 0.0).any()) throw DensityViolation("gradient of a negative density");
  return gradient_faces(u, mu);
}

ChemoGradient solve_gradient(const RadialField& u, double mu) {
  check_compatible(u, mu);
  const RadialGrid& g = u.grid();
  const Eigen::Index n = g.size();
  const int dim = g.dim();
  const FaceProfile m = cumulative_mass(u);
  const Array& rf = g.faces();
  const Array& rc = g.centers();

  ChemoGradient out{u.grid_ptr(), gradient_faces(u, mu), Array(n), Array(n)};

  // v_rr = mu/N - u + (N-1) r^{-N} M(r); M at the center is exact for
  // piecewise-constant u, so the cell-0 value is the r -> 0 expansion.
  for (Eigen::Index i = 0; i < n; ++i) {
    const double rn = std::pow(rc(i), dim);
    const double m_c = m.values(i) + u[i] * (rn - std::pow(rf(i), dim)) / dim;
    out.v_rr_cells(i) = mu / dim - u[i] + (dim - 1) * m_c / rn;
  }

  // Cumulative trapezoid of v_r out to each center, then shift to zero mean.
  double v_face = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double vr_lo = out.v_r_faces(i);
    const double vr_hi = out.v_r_faces(i + 1);
    const double vr_c = 0.5 * (vr_lo + vr_hi);
    out.v_cells(i) = v_face + 0.5 * (vr_lo + vr_c) * (rc(i) - rf(i));
    v_face += 0.5 * (vr_lo + vr_hi) * (rf(i + 1) - rf(i));
  }
  const double mean = (out.v_cells * g.volumes()).sum() / g.ball_volume();
  out.v_cells -= mean;
  return out;
}

double residual(const RadialField& u, const ChemoGradient& g, double mu) {
  require_same_grid(u.grid(), *g.grid);
  const RadialGrid& grid = u.grid();
  const Eigen::Index n = grid.size();
  const Array flux = grid.face_areas() * g.v_r_faces;
  double worst = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double lap = (flux(i + 1) - flux(i)) / grid.volumes()(i);
    worst = std::max(worst, std::abs(lap - (mu - u[i])));
  }
  return worst;
}

}  // namespace chemo
