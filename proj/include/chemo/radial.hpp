#pragma once

#include <cmath>
#include <memory>

#include <Eigen/Core>

namespace chemo {

using Array = Eigen::ArrayXd;

/// Surface measure of the unit sphere in R^N, 2 pi^{N/2} / Gamma(N/2).
double unit_sphere_area(int dim);

/// Finite-volume partition of the ball B_R(0) in R^N into concentric shells.
///
/// Faces are explicit so that graded meshes (refined near the origin) share
/// the same code path as uniform ones. Immutable after construction.
class RadialGrid {
 public:
  /// Builds a grid from explicit face radii; faces.front() must be 0.
  RadialGrid(int dim, Array faces);

  static std::shared_ptr<const RadialGrid> uniform(int dim, double radius, Eigen::Index n_cells);

  /// Faces at R (i/n)^grading; grading > 1 clusters cells near r = 0.
  static std::shared_ptr<const RadialGrid> graded(int dim, double radius, Eigen::Index n_cells,
                                                  double grading);

  int dim() const { return dim_; }
  double radius() const { return faces_(faces_.size() - 1); }
  Eigen::Index size() const { return centers_.size(); }

  const Array& faces() const { return faces_; }
  const Array& centers() const { return centers_; }
  const Array& volumes() const { return volumes_; }
  /// omega_N r^{N-1} at every face.
  const Array& face_areas() const { return face_areas_; }
  /// r^N / N at every face; differences give the per-cell radial moment.
  const Array& face_moments() const { return face_moments_; }
  /// A_i / (r_i - r_{i-1}) between neighbouring centers; zero at r = 0 and r = R.
  const Array& face_conductances() const { return conductances_; }

  double omega() const { return omega_; }
  double ball_volume() const { return omega_ * std::pow(radius(), dim_) / dim_; }
  double min_width() const;

 private:
  int dim_;
  double omega_;
  Array faces_;
  Array centers_;
  Array volumes_;
  Array face_areas_;
  Array face_moments_;
  Array conductances_;
};

using GridPtr = std::shared_ptr<const RadialGrid>;

enum class FieldKind { generic, density };

/// Cell-average values over a RadialGrid.
class RadialField {
 public:
  RadialField(GridPtr grid, Array values, FieldKind kind = FieldKind::generic);

  static RadialField constant(GridPtr grid, double value, FieldKind kind = FieldKind::generic);

  const RadialGrid& grid() const { return *grid_; }
  const GridPtr& grid_ptr() const { return grid_; }
  const Array& values() const { return values_; }
  FieldKind kind() const { return kind_; }
  Eigen::Index size() const { return values_.size(); }
  double operator[](Eigen::Index i) const { return values_(i); }

 private:
  GridPtr grid_;
  Array values_;
  FieldKind kind_;
};

/// Values at the n+1 face radii of a grid.
struct FaceProfile {
  GridPtr grid;
  Array values;
};

/// Volume integral sum_i u_i V_i; exact for piecewise-constant fields.
double integrate(const RadialField& field);

/// (sum_i |u_i|^p V_i)^{1/p}. Throws InvalidParameter for p < 1.
double lp_norm(const RadialField& field, double p);

/// sum_i |u_i|^p V_i, the p-th power of lp_norm without the root.
double lp_norm_pow(const RadialField& field, double p);

double sup_norm(const RadialField& field);

/// M(r) = int_0^r rho^{N-1} u(rho) d rho at every face, integrated exactly
/// against the piecewise-constant density. omega_N M(R) == integrate(u).
FaceProfile cumulative_mass(const RadialField& u);

/// M(r) at an arbitrary radius in [0, R], exact for piecewise-constant u.
double cumulative_mass_at(const RadialField& u, const FaceProfile& m, double r);

/// Throws ContractViolation unless both fields live on the same grid object.
void require_same_grid(const RadialGrid& a, const RadialGrid& b);

}  // namespace chemo
