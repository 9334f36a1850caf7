#pragma once

#include "chemo/radial.hpp"

namespace chemo {

/// Radial solution of 0 = Delta v - mu + u with Neumann data and zero mean.
struct ChemoGradient {
  GridPtr grid;
  Array v_r_faces;   ///< v_r at each face radius (n + 1 values)
  Array v_rr_cells;  ///< v_rr at cell centers
  Array v_cells;     ///< zero-mean v at cell centers
};

/// Relative mismatch allowed between mu and the mean of u.
inline constexpr double kCompatibilityTolerance = 1e-10;

/// Solves the elliptic equation by quadrature of the radial identity
///   r^{N-1} v_r = mu r^N / N - M(r),   M(r) = int_0^r rho^{N-1} u d rho,
/// so no linear system is formed. Throws CompatibilityError unless
/// mu == integrate(u) / |Omega| to kCompatibilityTolerance.
ChemoGradient solve_gradient(const RadialField& u, double mu);

/// Only v_r at the faces, used by the time integrator on every stage.
Array solve_gradient_faces(const RadialField& u, double mu);

/// Same as solve_gradient_faces without the compatibility and sign checks;
/// writes into vr (resized to n + 1).
void gradient_faces_into(const RadialGrid& g, const Array& u, double mu, Array& vr);

/// max_i |(A v_r)' / V_i - (mu - u_i)| with A the face areas; a posteriori
/// check of the elliptic solve.
double residual(const RadialField& u, const ChemoGradient& g, double mu);

}  // namespace chemo
