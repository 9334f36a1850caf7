#include "chemo/radial.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>
#include <utility>

#include "chemo/errors.hpp"

namespace chemo {

double unit_sphere_area(int dim) {
  if (dim < 1) throw InvalidParameter("dimension must be positive, got " + std::to_string(dim));
  return 2.0 * std::pow(std::numbers::pi, 0.5 * dim) / std::tgamma(0.5 * dim);
}

RadialGrid::RadialGrid(int dim, Array faces) : dim_(dim), faces_(std::move(faces)) {
  if (dim_ < 3) throw InvalidParameter("radial grids require N >= 3, got N = " + std::to_string(dim_));
  const Eigen::Index n = faces_.size() - 1;
  if (n < 8) throw InvalidParameter("radial grids require at least 8 cells");
  if (faces_(0) != 0.0) throw InvalidParameter("first face radius must be 0");
  for (Eigen::Index i = 0; i < n; ++i) {
    if (!(faces_(i + 1) > faces_(i)) || !std::isfinite(faces_(i + 1)))
      throw InvalidParameter("face radii must be finite and strictly increasing");
  }
  omega_ = unit_sphere_area(dim_);
  centers_ = 0.5 * (faces_.head(n) + faces_.tail(n));
  face_moments_ = faces_.pow(dim_) / dim_;
  volumes_ = omega_ * (face_moments_.tail(n) - face_moments_.head(n));
  face_areas_ = omega_ * faces_.pow(dim_ - 1);
  conductances_ = Array::Zero(n + 1);
  conductances_.segment(1, n - 1) = face_areas_.segment(1, n - 1) / (centers_.tail(n - 1) - centers_.head(n - 1));
}

std::shared_ptr<const RadialGrid> RadialGrid::uniform(int dim, double radius, Eigen::Index n_cells) {
  return graded(dim, radius, n_cells, 1.0);
}

std::shared_ptr<const RadialGrid> RadialGrid::graded(int dim, double radius, Eigen::Index n_cells,
                                                     double grading) {
  if (!(radius > 0.0) || !std::isfinite(radius)) throw InvalidParameter("ball radius must be positive");
  if (n_cells < 8) throw InvalidParameter("radial grids require at least 8 cells");
  if (!(grading >= 1.0)) throw InvalidParameter("grading exponent must be >= 1");
  Array faces(n_cells + 1);
  for (Eigen::Index i = 0; i <= n_cells; ++i) {
    const double s = static_cast<double>(i) / static_cast<double>(n_cells);
    faces(i) = radius * (grading == 1.0 ? s : std::pow(s, grading));
  }
  faces(n_cells) = radius;
  return std::make_shared<const RadialGrid>(dim, std::move(faces));
}

double RadialGrid::min_width() const {
  const Eigen::Index n = size();
  return (faces_.tail(n) - faces_.head(n)).minCoeff();
}

RadialField::RadialField(GridPtr grid, Array values, FieldKind kind)
    : grid_(std::move(grid)), values_(std::move(values)), kind_(kind) {
  if (!grid_) throw ContractViolation("field constructed without a grid");
  if (values_.size() != grid_->size())
    throw ContractViolation("field has " + std::to_string(values_.size()) + " values but grid has " +
                            std::to_string(grid_->size()) + " cells");
  for (Eigen::Index i = 0; i < values_.size(); ++i) {
    if (!std::isfinite(values_(i)))
      throw NumericalFailure("non-finite field value", i);
    if (kind_ == FieldKind::density && values_(i) < 0.0)
      throw DensityViolation("density field is negative at cell " + std::to_string(i));
  }
}

RadialField RadialField::constant(GridPtr grid, double value, FieldKind kind) {
  const Eigen::Index n = grid->size();
  return RadialField(std::move(grid), Array::Constant(n, value), kind);
}

void require_same_grid(const RadialGrid& a, const RadialGrid& b) {
  if (&a == &b) return;
  if (a.dim() != b.dim() || a.size() != b.size() || !(a.faces() == b.faces()).all())
    throw ContractViolation("fields live on different grids");
}

double integrate(const RadialField& field) {
  const RadialGrid& g = field.grid();
  if (field.size() != g.size()) throw ContractViolation("field does not match its grid");
  return (field.values() * g.volumes()).sum();
}

double lp_norm_pow(const RadialField& field, double p) {
  if (!(p >= 1.0)) throw InvalidParameter("L^p norm requires p >= 1, got p = " + std::to_string(p));
  return (field.values().abs().pow(p) * field.grid().volumes()).sum();
}

double lp_norm(const RadialField& field, double p) {
  const double s = lp_norm_pow(field, p);
  return p == 1.0 ? s : std::pow(s, 1.0 / p);
}

double sup_norm(const RadialField& field) { return field.values().abs().maxCoeff(); }

FaceProfile cumulative_mass(const RadialField& u) {
  const RadialGrid& g = u.grid();
  const Eigen::Index n = g.size();
  Array m(n + 1);
  m(0) = 0.0;
  const Array& mom = g.face_moments();
  for (Eigen::Index i = 0; i < n; ++i) {
    if (u[i] < 0.0) throw DensityViolation("cumulative mass of negative density at cell " + std::to_string(i));
    m(i + 1) = m(i) + u[i] * (mom(i + 1) - mom(i));
  }
  return {u.grid_ptr(), std::move(m)};
}

double cumulative_mass_at(const RadialField& u, const FaceProfile& m, double r) {
  const RadialGrid& g = u.grid();
  if (!(r >= 0.0) || r > g.radius()) throw InvalidParameter("radius outside [0, R]");
  const Array& f = g.faces();
  // First face strictly above r.
  const auto* it = std::upper_bound(f.data(), f.data() + f.size(), r);
  const Eigen::Index hi = std::min<Eigen::Index>(it - f.data(), g.size());
  const Eigen::Index cell = hi - 1;
  return m.values(cell) + u[cell] * (std::pow(r, g.dim()) - std::pow(f(cell), g.dim())) / g.dim();
}

}  // namespace chemo
