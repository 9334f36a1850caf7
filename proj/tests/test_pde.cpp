#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include <Eigen/Dense>
#include <unsupported/Eigen/MatrixFunctions>

#include "chemo/admissibility.hpp"
#include "chemo/errors.hpp"
#include "chemo/pde.hpp"

using namespace chemo;

namespace {

// Neumann diffusion matrix for a uniform radial grid in R^3, assembled from
// the continuous geometry directly.
Eigen::MatrixXd heat_matrix(int cells, double radius) {
  const double h = radius / cells;
  Eigen::MatrixXd lap = Eigen::MatrixXd::Zero(cells, cells);
  for (int i = 0; i < cells; ++i) {
    const double lo = i * h, hi = (i + 1) * h;
    const double vol = 4.0 * std::numbers::pi * (hi * hi * hi - lo * lo * lo) / 3.0;
    const double a_lo = 4.0 * std::numbers::pi * lo * lo / h / vol;
    const double a_hi = 4.0 * std::numbers::pi * hi * hi / h / vol;
    if (i > 0) {
      lap(i, i - 1) += a_lo;
      lap(i, i) -= a_lo;
    }
    if (i + 1 < cells) {
      lap(i, i + 1) += a_hi;
      lap(i, i) -= a_hi;
    }
  }
  return lap;
}

// Volume-weighted restriction of a fine uniform-grid field onto a grid with
// `factor` times fewer cells.
Array restrict_to(const RadialField& fine, const GridPtr& coarse) {
  const Eigen::Index factor = fine.size() / coarse->size();
  Array out(coarse->size());
  for (Eigen::Index i = 0; i < coarse->size(); ++i) {
    double m = 0.0;
    for (Eigen::Index j = i * factor; j < (i + 1) * factor; ++j) m += fine[j] * fine.grid().volumes()(j);
    out(i) = m / coarse->volumes()(i);
  }
  return out;
}

RadialField smooth_profile(const GridPtr& g) {
  return RadialField(g, 1.0 + 0.5 * (std::numbers::pi * g->centers()).cos(), FieldKind::density);
}

StepController horizon(double t_end) {
  StepController c;
  c.t_end = t_end;
  return c;
}

}  // namespace

TEST_CASE("flux limiter") {
  const auto f = FluxLimiter::make(2.0, 0.2, 3);
  CHECK(f(0.0) == 2.0);
  double prev = f(0.0);
  for (double xi = 0.1; xi < 100.0; xi *= 1.7) {
    CHECK(f(xi) > 0.0);
    CHECK(f(xi) <= prev);
    CHECK(f.derivative(xi) <= 0.0);
    const double fd = (f(xi * (1 + 1e-6)) - f(xi * (1 - 1e-6))) / (2e-6 * xi);
    CHECK(f.derivative(xi) == doctest::Approx(fd).epsilon(1e-6));
    prev = f(xi);
  }
  CHECK(f.velocity(3.0) == doctest::Approx(f(9.0) * 3.0).epsilon(1e-14));
  CHECK(f.velocity(-3.0) == doctest::Approx(-f(9.0) * 3.0).epsilon(1e-14));
  CHECK_THROWS_AS(FluxLimiter::make(1.0, 0.25, 3), InvalidParameter);
  CHECK_THROWS_AS(FluxLimiter::make(-1.0, 0.1, 3), InvalidParameter);
  CHECK_NOTHROW(FluxLimiter::make(1.0, 0.3, 4));
}

TEST_CASE("controller validation") {
  StepController c;
  CHECK_NOTHROW(c.validate());
  c.cfl_diffusion = 1.5;
  CHECK_THROWS_AS(c.validate(), InvalidParameter);
  c = StepController{};
  c.t_end = 0.0;
  CHECK_THROWS_AS(c.validate(), InvalidParameter);
}

TEST_CASE("constant density is a fixed point") {
  const auto g = RadialGrid::uniform(3, 1.0, 64);
  const auto lim = FluxLimiter::make(1.0, 0.15, 3);
  ChemoState s = ChemoState::initial(RadialField::constant(g, 3.0, FieldKind::density));
  CHECK((rhs(s, lim).values() == 0.0).all());
  const StepController ctrl = horizon(1e9);
  for (int k = 0; k < 1000; ++k) s = step(s, lim, ctrl).state;
  CHECK(s.step_count == 1000);
  CHECK((s.u.values() - 3.0).abs().maxCoeff() <= 1e-12 * 3.0);
}

TEST_CASE("rhs conserves mass for random densities") {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> uni(0.0, 10.0);
  const auto lim = FluxLimiter::make(1.0, 0.1, 3);
  for (double grading : {1.0, 1.6}) {
    const auto g = RadialGrid::graded(3, 1.0, 100, grading);
    for (int trial = 0; trial < 10; ++trial) {
      Array v(g->size());
      for (auto& x : v) x = uni(rng);
      const ChemoState s = ChemoState::initial(RadialField(g, v, FieldKind::density));
      const Array du = rhs(s, lim).values();
      const double scale = (du.abs() * g->volumes()).sum();
      CHECK(std::abs((du * g->volumes()).sum()) <= 1e-13 * scale);

      const StepOutcome out = step(s, lim, horizon(1.0));
      const double m0 = integrate(s.u), m1 = integrate(out.state.u);
      CHECK(std::abs(m1 - m0) <= 1e-14 * m0 * 4);
      CHECK((out.state.u.values() >= 0.0).all());
    }
  }
}

TEST_CASE("pure diffusion matches the matrix exponential") {
  const int cells = 24;
  const auto g = RadialGrid::uniform(3, 1.0, cells);
  const auto lim = FluxLimiter::make(0.0, 0.0, 3);
  const Eigen::MatrixXd lap = heat_matrix(cells, 1.0);

  SUBCASE("rhs is the discrete Laplacian") {
    const RadialField u = smooth_profile(g);
    const Eigen::VectorXd expected = lap * u.values().matrix();
    const Array got = rhs(ChemoState::initial(u), lim).values();
    CHECK((got.matrix() - expected).norm() <= 1e-10 * expected.norm());
  }

  SUBCASE("evolution") {
    const RadialField u0 = smooth_profile(g);
    const double t = 0.05;
    const Eigen::VectorXd expected = (lap * t).exp() * u0.values().matrix();
    StepController ctrl = horizon(t);
    ctrl.cfl_diffusion = 0.1;
    const RunRecord rec = run(u0, lim, ctrl, {2.0});
    CHECK(rec.termination == Termination::reached_horizon);
    CHECK(rec.t_final == doctest::Approx(t).epsilon(1e-14));
    ChemoState s = ChemoState::initial(u0);
    while (s.t < t) s = step(s, lim, ctrl).state;
    CHECK((s.u.values().matrix() - expected).lpNorm<Eigen::Infinity>() <= 1e-6);
  }

  SUBCASE("a Neumann eigenmode decays at its eigenvalue") {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
    // Symmetrize with the volume weights: V^{1/2} L V^{-1/2}.
    const Eigen::VectorXd w = g->volumes().sqrt().matrix();
    const Eigen::MatrixXd sym = w.asDiagonal() * lap * w.cwiseInverse().asDiagonal();
    es.compute(0.5 * (sym + sym.transpose()));
    const double lambda = es.eigenvalues()(cells - 2);  // slowest nonzero mode
    const Eigen::VectorXd mode = w.cwiseInverse().asDiagonal() * es.eigenvectors().col(cells - 2);
    const double amp = 0.5 / mode.lpNorm<Eigen::Infinity>();
    const Array u0 = 1.0 + amp * mode.array();
    StepController ctrl = horizon(0.1);
    ctrl.cfl_diffusion = 0.1;
    ChemoState s = ChemoState::initial(RadialField(g, u0, FieldKind::density));
    while (s.t < ctrl.t_end) s = step(s, lim, ctrl).state;
    const Array expected = 1.0 + amp * std::exp(lambda * 0.1) * mode.array();
    CHECK(lambda < 0.0);
    CHECK((s.u.values() - expected).abs().maxCoeff() <= 1e-6);
  }
}

TEST_CASE("self-convergence with weak chemotaxis") {
  const auto lim = FluxLimiter::make(1e-3, 0.15, 3);
  const StepController ctrl = horizon(0.02);
  const Eigen::Index ref_cells = 1024;
  const auto ref_grid = RadialGrid::uniform(3, 1.0, ref_cells);
  auto evolve = [&](const GridPtr& g) {
    // Cell averages of 1 + 0.5 cos(pi r) against r^2, exact.
    const Array& f = g->faces();
    Array v(g->size());
    const double k = std::numbers::pi;
    auto prim = [k](double r) {  // int r^2 cos(k r) dr
      return (r * r / k - 2.0 / (k * k * k)) * std::sin(k * r) + 2.0 * r * std::cos(k * r) / (k * k);
    };
    for (Eigen::Index i = 0; i < g->size(); ++i) {
      const double lo = f(i), hi = f(i + 1);
      const double m3 = (hi * hi * hi - lo * lo * lo) / 3.0;
      v(i) = 1.0 + 0.5 * (prim(hi) - prim(lo)) / m3;
    }
    ChemoState s = ChemoState::initial(RadialField(g, v, FieldKind::density));
    while (s.t < ctrl.t_end) s = step(s, lim, ctrl).state;
    return s.u;
  };
  const RadialField ref = evolve(ref_grid);
  std::vector<double> errors;
  for (Eigen::Index cells : {64, 128, 256}) {
    const auto g = RadialGrid::uniform(3, 1.0, cells);
    const RadialField u = evolve(g);
    errors.push_back((u.values() - restrict_to(ref, g)).abs().maxCoeff());
  }
  for (std::size_t i = 1; i < errors.size(); ++i) CHECK(std::log2(errors[i - 1] / errors[i]) >= 1.9);
}

TEST_CASE("run on the steady state reaches the horizon with constant probes") {
  const auto g = RadialGrid::uniform(3, 1.0, 128);
  const auto lim = FluxLimiter::make(1.0, 0.15, 3);
  const RunRecord rec = run(RadialField::constant(g, 2.0, FieldKind::density), lim, horizon(0.5), {1.5, 2.0, 3.0});
  CHECK(rec.termination == Termination::reached_horizon);
  CHECK(rec.samples.size() >= 200);
  for (const auto& s : rec.samples) {
    CHECK(s.linf == rec.samples.front().linf);
    for (std::size_t k = 0; k < 3; ++k) CHECK(s.lp[k] == rec.samples.front().lp[k]);
  }
  CHECK(rec.max_mass_drift() == 0.0);
}

TEST_CASE("heat equation: sup norm is nonincreasing") {
  const auto g = RadialGrid::uniform(3, 1.0, 128);
  const auto lim = FluxLimiter::make(0.0, 0.15, 3);
  const RadialField u0 = make_bump(g, 1.0, 0.8, 0.3);
  const RunRecord rec = run(u0, lim, horizon(0.2), {2.0});
  CHECK(rec.termination == Termination::reached_horizon);
  for (std::size_t i = 1; i < rec.samples.size(); ++i) {
    CHECK(rec.samples[i].linf <= rec.samples[i - 1].linf * (1.0 + 1e-14));
    CHECK(rec.samples[i].psi[0] <= rec.samples[i - 1].psi[0] * (1.0 + 1e-14));
  }
  CHECK(rec.max_mass_drift() <= 1e-12);
}

TEST_CASE("concentrated data blow up") {
  const auto g = RadialGrid::uniform(3, 1.0, 256);
  const auto lim = FluxLimiter::make(1.0, 0.15, 3);
  const RadialField u0 = make_bump(g, 10.0, 0.9, 0.2);
  const RunRecord rec = run(u0, lim, horizon(1.0), {2.0, 4.0});
  REQUIRE(rec.termination == Termination::blowup_detected);
  CHECK(rec.samples.back().linf >= rec.u_blow);
  CHECK(rec.t_detect == rec.t_final);
  CHECK(rec.t_max_extrapolated >= rec.t_detect);
  CHECK(rec.blowup_exponent > 0.0);
  CHECK(rec.max_mass_drift() <= 1e-10);
  for (std::size_t i = 0; i + 1 < rec.samples.size(); ++i) CHECK(rec.samples[i].linf < rec.u_blow);
}

TEST_CASE("dt underflow is reported as a step failure") {
  const auto g = RadialGrid::uniform(3, 1.0, 64);
  const auto lim = FluxLimiter::make(1.0, 0.15, 3);
  StepController ctrl = horizon(1.0);
  ctrl.dt_min = 1.0;
  const RadialField u0 = make_bump(g, 10.0, 0.9, 0.2);
  const StepOutcome out = step(ChemoState::initial(u0), lim, ctrl);
  CHECK(out.blowup_suspected);
  CHECK(out.state.t == 0.0);
  const RunRecord rec = run(u0, lim, ctrl, {2.0});
  CHECK(rec.termination == Termination::step_failure);
  CHECK(!rec.failure_reason.empty());
  CHECK(rec.samples.back().linf < rec.u_blow);
}

TEST_CASE("run rejects bad input") {
  const auto g = RadialGrid::uniform(3, 1.0, 64);
  const auto lim = FluxLimiter::make(1.0, 0.15, 3);
  CHECK_THROWS_AS(run(RadialField::constant(g, 0.0, FieldKind::density), lim, horizon(1.0), {2.0}), InadmissibleData);
  CHECK_THROWS_AS(run(RadialField::constant(g, 1.0, FieldKind::density), lim, horizon(1.0), {0.5}), InvalidParameter);
}

TEST_CASE("power-law fit recovers synthetic blow-up") {
  std::vector<double> t, y;
  for (int i = 0; i < 40; ++i) {
    const double ti = 0.5 - 0.1 * std::pow(0.85, i);
    t.push_back(ti);
    y.push_back(3.0 * std::pow(0.5 - ti, -1.5));
  }
  const PowerLawFit fit = fit_power_law_blowup(t, y);
  REQUIRE(fit.ok);
  CHECK(fit.t_max == doctest::Approx(0.5).epsilon(1e-6));
  CHECK(fit.exponent == doctest::Approx(1.5).epsilon(1e-5));
  CHECK(!fit_power_law_blowup({0.0, 1.0}, {1.0, 2.0}).ok);
}
