#include "chemo/bounds.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <queue>
#include <random>
#include <sstream>
#include <utility>

#include "chemo/errors.hpp"

namespace chemo {

namespace {

std::string fmt(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

void require(bool ok, const std::string& inequality) {
  if (!ok) throw InvalidParameter("bound parameters violate " + inequality);
}

// Gauss-Kronrod 7-15 nodes and weights on [-1, 1].
constexpr std::array<double, 8> kXgk = {0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
                                        0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
                                        0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
                                        0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
constexpr std::array<double, 8> kWgk = {0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
                                        0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
                                        0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
                                        0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
constexpr std::array<double, 4> kWg = {0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
                                       0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Segment {
  double a, b, value, error;
  bool operator<(const Segment& o) const { return error < o.error; }
};

template <typename F>
Segment gk15(F&& f, double a, double b) {
  const double c = 0.5 * (a + b), h = 0.5 * (b - a);
  const double fc = f(c);
  double kron = fc * kWgk[7];
  double gauss = fc * kWg[3];
  for (int j = 0; j < 7; ++j) {
    const double x = h * kXgk[j];
    const double s = f(c - x) + f(c + x);
    kron += kWgk[j] * s;
    if (j % 2 == 1) gauss += kWg[j / 2] * s;
  }
  return {a, b, kron * h, std::abs((kron - gauss) * h)};
}

// Globally adaptive Gauss-Kronrod; bisects the segment with the largest error.
template <typename F>
double integrate_adaptive(F&& f, double a, double b, double rel_tol, int max_segments = 4000) {
  std::priority_queue<Segment> heap;
  Segment first = gk15(f, a, b);
  double total = first.value, err = first.error;
  heap.push(first);
  while (err > rel_tol * std::abs(total) && static_cast<int>(heap.size()) < max_segments) {
    const Segment s = heap.top();
    heap.pop();
    const double mid = 0.5 * (s.a + s.b);
    const Segment l = gk15(f, s.a, mid), r = gk15(f, mid, s.b);
    total += l.value + r.value - s.value;
    err += l.error + r.error - s.error;
    heap.push(l);
    heap.push(r);
  }
  // Re-sum to shed the drift of the running updates.
  double sum = 0.0;
  while (!heap.empty()) {
    sum += heap.top().value;
    heap.pop();
  }
  return sum;
}

}  // namespace

double BoundConstants::majorant(double eta) const {
  double d = B1 * eta;
  if (B2 > 0.0) d += B2 * std::pow(eta, gamma1);
  if (B3 > 0.0) d += B3 * std::pow(eta, gamma2);
  if (B4 > 0.0) d += B4 * std::pow(eta, gamma3);
  return d;
}

double BoundConstants::closed_form_coefficient(double psi0) const {
  return B1 * std::pow(psi0, 1.0 - gamma) + B2 * std::pow(psi0, gamma1 - gamma) +
         B3 * std::pow(psi0, gamma2 - gamma) + B4 * std::pow(psi0, gamma3 - gamma);
}

BoundConstants BoundConstants::from_coefficients(double B1, double B2, double B3, double B4, double gamma1,
                                                 double gamma2, double gamma3) {
  require(B1 >= 0.0 && B2 >= 0.0 && B3 >= 0.0 && B4 >= 0.0, "B_i >= 0");
  require(gamma1 > 1.0 && gamma2 >= gamma1, "1 < gamma1 <= gamma2");
  require(gamma3 > 1.0, "gamma3 > 1");
  BoundConstants k;
  k.B1 = B1;
  k.B2 = B2;
  k.B3 = B3;
  k.B4 = B4;
  k.gamma1 = gamma1;
  k.gamma2 = gamma2;
  k.gamma3 = gamma3;
  k.sigma = gamma3;
  k.gamma = std::max(gamma2, gamma3);
  return k;
}

double default_epsilon(int dim, double p) { return 0.05 * (2.0 * p / dim - 1.0); }

double holder_constant(int dim, double radius, double p, double epsilon) {
  const double n = dim;
  const double omega = unit_sphere_area(dim);
  // M(r) <= (r^N/N)^{p/(p+1)} (int_0^r u^{p+1} rho^{N-1})^{1/(p+1)}, then
  // Hoelder with exponents (p+1+eps)/p and (p+1+eps)/(1+eps) on the
  // remaining r-integral leaves int_0^R r^{e} dr, e + 1 = eps N p / ((p+1)(1+eps)).
  const double e1 = epsilon * n * p / ((p + 1.0) * (1.0 + epsilon));
  const double r_integral = std::pow(radius, e1) / e1;
  return std::pow(n, -p / (p + 1.0)) * std::pow(omega, p / (p + 1.0) - p / (p + 1.0 + epsilon)) *
         std::pow(r_integral, (1.0 + epsilon) / (p + 1.0 + epsilon));
}

BoundConstants build_constants(const ModelParams& params, double p, double epsilon, double c_gn) {
  const int dim = params.dim;
  const double n = dim;
  require(dim >= 3, "N >= 3");
  require(params.radius > 0.0, "R > 0");
  require(params.k_f > 0.0, "k_f > 0");
  require(params.mu > 0.0, "mu > 0");
  require(params.alpha > 0.0 && params.alpha < alpha_upper_bound(dim), "0 < alpha < (N-2)/(2(N-1))");
  require(p > 0.5 * n && p < n, "N/2 < p < N");
  require(epsilon > 0.0, "epsilon > 0");
  require(2.0 * p - n * (1.0 + epsilon) > 0.0, "2p - N(1+epsilon) > 0");
  require(c_gn > 0.0 && std::isfinite(c_gn), "C_GN > 0");

  BoundConstants k;
  k.dim = dim;
  k.p = p;
  k.epsilon = epsilon;
  k.c_gn = c_gn;
  auto& trace = k.provenance;
  auto note = [&trace](const char* label, double v, const char* formula) {
    trace.push_back({label, v, formula});
    return v;
  };

  const double alpha = params.alpha, mu = params.mu, kf = params.k_f;
  note("N", n, "spatial dimension");
  note("R", params.radius, "ball radius");
  note("alpha", alpha, "flux-limitation exponent");
  note("k_f", kf, "sensitivity scale");
  note("mu", mu, "mean density");
  note("p", p, "energy exponent, N/2 < p < N");
  note("epsilon", epsilon, "Hoelder slack, 2p - N(1+eps) > 0");
  note("C_GN", c_gn, "Gagliardo-Nirenberg constant (supplied)");
  note("omega_N", unit_sphere_area(dim), "2 pi^{N/2} / Gamma(N/2), unit sphere area");

  k.c_holder = note("c_holder", holder_constant(dim, params.radius, p, epsilon),
                    "N^{-p/(p+1)} omega^{p/(p+1)-p/(p+1+eps)} [R^{e1}/e1]^{(1+eps)/(p+1+eps)}, "
                    "e1 = eps N p/((p+1)(1+eps))");
  const double c = k.c_holder;
  k.c1 = note("c1", 2.0 * alpha * mu * kf * (p - 1.0) / p, "2 alpha mu k_f (p-1)/p");
  k.c2 = note("c2", kf * (p - 1.0) / p + 2.0 * alpha * n * (n - 1.0) * c * kf * (p - 1.0) / (p * (p + 1.0)),
              "k_f (p-1)/p + 2 alpha N(N-1) c k_f (p-1)/(p(p+1))");
  k.c3 = note("c3", 2.0 * alpha * n * (n - 1.0) * c * kf * (p - 1.0) / (p + 1.0),
              "2 alpha N(N-1) c k_f (p-1)/(p+1)");

  const double theta0 = note("theta0", n / (2.0 * (p + 1.0)), "N/(2(p+1)), GN exponent for int u^{p+1}");
  const double theta_eps =
      note("theta_eps", n * (1.0 + epsilon) / (2.0 * (p + 1.0 + epsilon)),
           "N(1+eps)/(2(p+1+eps)), GN exponent for int u^{p+1+eps}");
  require(theta0 < 1.0 && theta_eps < 1.0, "GN interpolation exponents < 1");
  const double q1 = note("young_q_eps", (p + 1.0) * theta_eps / p, "(p+1) theta_eps / p = N(1+eps)(p+1)/(2p(p+1+eps))");
  const double q0 = note("young_q0", n / (2.0 * p), "N/(2p), gradient power in the int u^{p+1} GN bound");
  require(q1 < 1.0, "N(1+eps)(p+1) < 2p(p+1+eps)");

  k.c4 = note("c4", q1 * c_gn, "N(1+eps)(p+1)/(2p(p+1+eps)) C_GN");
  k.c5 = note("c5", (1.0 - q1) * c_gn, "C_GN (2p(p+1+eps) - N(p+1)(1+eps))/(2p(p+1+eps))");
  k.sigma = note("sigma", ((p + 1.0) / p - q1) / (1.0 - q1),
                 "(2(p+1) - N(p+1)(1+eps)/(p+1+eps)) / (2p - N(1+eps)(p+1)/(p+1+eps))");

  // Both Young splittings of the gradient factor share the weight eps1; it
  // is fixed so that the total gradient coefficient equals the dissipation
  // 4(p-1)/p^2:  eps1 C_GN (c2 N/(2p) + c3 q1) = 4(p-1)/p^2.
  const double dissipation = note("dissipation", 4.0 * (p - 1.0) / (p * p), "4(p-1)/p^2, from int u^{p-1} Delta u");
  const double grad_coeff = note("gradient_coefficient", c_gn * (k.c2 * q0 + k.c3 * q1),
                                 "C_GN (c2 N/(2p) + c3 N(1+eps)(p+1)/(2p(p+1+eps))), per unit eps1");
  k.epsilon1 = note("epsilon1", dissipation / grad_coeff, "4(p-1)/p^2 / gradient_coefficient");
  k.c_tilde1 = note("c_tilde1", c_gn * (2.0 * p - n) / (2.0 * p * std::pow(k.epsilon1, n / (2.0 * p - n))) * k.c2,
                    "C_GN (2p-N)/(2p eps1^{N/(2p-N)}) c2");
  const double c5_weighted = note("c5_weighted", k.c5 * std::pow(k.epsilon1, -q1 / (1.0 - q1)),
                                  "c5 eps1^{-q/(1-q)}, q = (p+1) theta_eps / p");

  k.gamma1 = note("gamma1", (p + 1.0) / p, "(p+1)/p");
  k.gamma2 = note("gamma2", (2.0 * (p + 1.0) - n) / (2.0 * p - n), "(2(p+1)-N)/(2p-N)");
  k.gamma3 = note("gamma3", k.sigma, "sigma");
  k.gamma = note("gamma", std::max(k.gamma2, k.gamma3), "max(gamma2, gamma3)");

  // int u^p = p Psi converts each J^{g} term into p^{g} Psi^{g}.
  k.B1 = note("B1", p * k.c1, "p c1");
  k.B2 = note("B2", std::pow(p, k.gamma1) * c_gn * (k.c2 + k.c3), "p^{gamma1} C_GN (c2 + c3)");
  k.B3 = note("B3", std::pow(p, k.gamma2) * k.c_tilde1, "p^{gamma2} c_tilde1");
  k.B4 = note("B4", std::pow(p, k.gamma3) * k.c3 * c5_weighted, "p^{gamma3} c3 c5_weighted");

  require(k.gamma1 > 1.0 && k.gamma1 < k.gamma2, "1 < gamma1 < gamma2");
  return k;
}

double lower_bound_quadrature(const BoundConstants& k, double psi0) {
  if (!(psi0 > 0.0) || !std::isfinite(psi0)) throw InvalidParameter("Psi0 must be positive");
  struct Term {
    double b, g;
  };
  std::vector<Term> terms;
  if (k.B1 > 0.0) terms.push_back({k.B1, 1.0});
  if (k.B2 > 0.0) terms.push_back({k.B2, k.gamma1});
  if (k.B3 > 0.0) terms.push_back({k.B3, k.gamma2});
  if (k.B4 > 0.0) terms.push_back({k.B4, k.gamma3});
  double g_top = 1.0;
  for (const auto& t : terms) g_top = std::max(g_top, t.g);
  if (g_top <= 1.0) return std::numeric_limits<double>::infinity();

  // eta = Psi0 / s, s = x^m with m = 2/(g_top - 1): the integrand becomes
  //   m x^{m-1} Psi0^{1-g_top} s^{g_top-2} / sum_i b_i (Psi0/s)^{g_i - g_top},
  // which vanishes linearly at x = 0.
  const double m = 2.0 / (g_top - 1.0);
  auto integrand = [&](double x) {
    if (x <= 0.0) return 0.0;
    const double s = std::pow(x, m);
    const double eta = psi0 / s;
    double denom = 0.0;
    for (const auto& t : terms) denom += t.b * std::pow(eta, t.g - g_top);
    return m * std::pow(x, m - 1.0) * std::pow(psi0, 1.0 - g_top) * std::pow(s, g_top - 2.0) / denom;
  };
  return integrate_adaptive(integrand, 0.0, 1.0, 1e-12);
}

double lower_bound_closed_form(const BoundConstants& k, double psi0) {
  if (!(psi0 > 0.0) || !std::isfinite(psi0)) throw InvalidParameter("Psi0 must be positive");
  if (!(k.gamma > 1.0)) throw InvalidParameter("closed-form bound needs gamma > 1");
  const double a = k.closed_form_coefficient(psi0);
  if (!(a > 0.0)) return std::numeric_limits<double>::infinity();
  return 1.0 / (a * (k.gamma - 1.0) * std::pow(psi0, k.gamma - 1.0));
}

PsiTrace comparison_ode(const BoundConstants& k, double psi0, double t_end, double phi_cap) {
  if (!(psi0 > 0.0)) throw InvalidParameter("Psi0 must be positive");
  if (!(t_end > 0.0)) throw InvalidParameter("t_end must be positive");
  // Without an explicit cap, stop once the time still needed to reach
  // infinity, at most y^{1-g} / (B (g - 1)) for the top power, is below
  // 1e-10 of the elapsed time. 10^{280/g} keeps the majorant finite.
  const bool adaptive_cap = phi_cap <= 0.0;
  double g_top = 1.0, b_top = 0.0;
  for (auto [b, g] : {std::pair{k.B2, k.gamma1}, std::pair{k.B3, k.gamma2}, std::pair{k.B4, k.gamma3}}) {
    if (!(b > 0.0)) continue;
    if (g > g_top) {
      g_top = g;
      b_top = b;
    } else if (g == g_top) {
      b_top += b;
    }
  }
  const double cap_floor = 1e12 * std::max(1.0, psi0);
  const double cap_ceiling = g_top > 1.0 ? std::max(cap_floor, std::pow(10.0, 280.0 / g_top)) : cap_floor;
  auto cap_at = [&](double t) {
    if (!adaptive_cap) return phi_cap;
    if (!(g_top > 1.0) || !(t > 0.0)) return cap_ceiling;
    const double need = std::pow(1e-10 * t * b_top * (g_top - 1.0), -1.0 / (g_top - 1.0));
    return std::clamp(need, cap_floor, cap_ceiling);
  };

  // Dormand-Prince 5(4) tableau; the system is autonomous so the c_i drop out.
  constexpr double a21 = 1.0 / 5;
  constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
  constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
  constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
  constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                   a65 = -5103.0 / 18656;
  constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784, b6 = 11.0 / 84;
  constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                   e6 = 22.0 / 525, e7 = -1.0 / 40;

  auto rhs = [&k](double y) { return k.majorant(y); };
  struct Result {
    double y, err;
  };
  auto attempt = [&](double y, double h) {
    const double k1 = rhs(y);
    const double k2 = rhs(y + h * a21 * k1);
    const double k3 = rhs(y + h * (a31 * k1 + a32 * k2));
    const double k4 = rhs(y + h * (a41 * k1 + a42 * k2 + a43 * k3));
    const double k5 = rhs(y + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4));
    const double k6 = rhs(y + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5));
    const double y5 = y + h * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
    const double k7 = rhs(y5);
    const double err = h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);
    return Result{y5, err};
  };

  constexpr double rtol = 1e-11;
  PsiTrace out;
  double t = 0.0, y = psi0;
  out.t.push_back(t);
  out.psi.push_back(y);
  const double d0 = rhs(y);
  if (d0 <= 0.0) {
    out.t.push_back(t_end);
    out.psi.push_back(y);
    out.dpsi = {0.0, 0.0};
    return out;
  }
  double h = std::min(t_end, 1e-3 * y / d0);
  for (int iter = 0; iter < 10'000'000 && t < t_end; ++iter) {
    h = std::min(h, t_end - t);
    const Result r = attempt(y, h);
    const double scale = rtol * std::max(std::abs(y), std::abs(r.y));
    const double ratio = std::abs(r.err) / scale;
    if (!(ratio <= 1.0) || !std::isfinite(r.y)) {
      h *= std::max(0.1, 0.9 * std::pow(std::isfinite(ratio) ? ratio : 1e10, -0.2));
      continue;
    }
    const double cap = cap_at(t + h);
    if (r.y >= cap) {
      // Shrink the final step onto the cap by secant iteration in h.
      double lo = 0.0, hi = h, y_lo = y, y_hi = r.y;
      for (int s = 0; s < 60 && (hi - lo) > 1e-16 * std::max(1.0, t); ++s) {
        const double w = (cap - y_lo) / (y_hi - y_lo);
        double mid = lo + std::clamp(w, 0.05, 0.95) * (hi - lo);
        const double ym = attempt(y, mid).y;
        if (ym >= cap) {
          hi = mid;
          y_hi = ym;
        } else {
          lo = mid;
          y_lo = ym;
        }
      }
      t += 0.5 * (lo + hi);
      out.t.push_back(t);
      out.psi.push_back(cap);
      out.blowup_time = t;
      break;
    }
    t += h;
    y = r.y;
    out.t.push_back(t);
    out.psi.push_back(y);
    h *= std::min(5.0, 0.9 * std::pow(std::max(ratio, 1e-10), -0.2));
  }
  const std::size_t n = out.t.size();
  out.dpsi.resize(n);
  for (std::size_t i = 0; i + 1 < n; ++i) out.dpsi[i] = (out.psi[i + 1] - out.psi[i]) / (out.t[i + 1] - out.t[i]);
  if (n > 1) out.dpsi[n - 1] = out.dpsi[n - 2];
  return out;
}

PsiTrace psi_trace_from_run(const RunRecord& rec, double p) {
  const auto it = std::find(rec.probes.begin(), rec.probes.end(), p);
  if (it == rec.probes.end()) throw ContractViolation("run has no probe with exponent " + fmt(p));
  const std::size_t j = static_cast<std::size_t>(it - rec.probes.begin());
  PsiTrace out;
  for (const auto& s : rec.samples) {
    if (!out.t.empty() && s.t <= out.t.back()) continue;
    out.t.push_back(s.t);
    out.psi.push_back(s.psi[j]);
  }
  const std::size_t n = out.t.size();
  out.dpsi.resize(n);
  for (std::size_t i = 0; i + 1 < n; ++i) out.dpsi[i] = (out.psi[i + 1] - out.psi[i]) / (out.t[i + 1] - out.t[i]);
  if (n > 1) out.dpsi[n - 1] = out.dpsi[n - 2];
  return out;
}

PsiInequalityReport check_psi_inequality(const PsiTrace& trace, const BoundConstants& k, double tol) {
  const std::size_t n = trace.t.size();
  if (n < 3 || trace.psi.size() != n) throw InvalidParameter("Psi trace needs at least 3 samples");
  PsiInequalityReport rep;
  for (std::size_t i = 1; i + 1 < n; ++i) {
    const double dpsi = (trace.psi[i + 1] - trace.psi[i - 1]) / (trace.t[i + 1] - trace.t[i - 1]);
    const double rhs = k.majorant(trace.psi[i]);
    const double slack = rhs - dpsi;
    ++rep.checked;
    if (slack < -tol * rhs) ++rep.violations;
    if (slack < rep.min_slack) {
      rep.min_slack = slack;
      rep.worst_time = trace.t[i];
    }
    if (rhs > 0.0) rep.min_relative_slack = std::min(rep.min_relative_slack, slack / rhs);
  }
  return rep;
}

GnConfiguration gn_configuration(int dim, double p) {
  const double q = 2.0 * (p + 1.0) / p;
  return {q, q, dim / (2.0 * (p + 1.0))};
}

GnConfiguration gn_configuration(int dim, double p, double epsilon) {
  return {2.0 * (p + 1.0 + epsilon) / p, 2.0 * (p + 1.0) / p, dim * (1.0 + epsilon) / (2.0 * (p + 1.0 + epsilon))};
}

double gn_ratio(const RadialGrid& grid, const Array& w, const Array& dw, const GnConfiguration& cfg) {
  const Array& vol = grid.volumes();
  const double lq = std::pow((w.abs().pow(cfg.norm_exponent) * vol).sum(), 1.0 / cfg.norm_exponent);
  const double l2 = std::sqrt((w.square() * vol).sum());
  const double grad = std::sqrt((dw.square() * vol).sum());
  const double lhs = std::pow(lq, cfg.power);
  const double rhs = std::pow(grad, cfg.power * cfg.theta) * std::pow(l2, cfg.power * (1.0 - cfg.theta)) +
                     std::pow(l2, cfg.power);
  return lhs / rhs;
}

namespace {

// Member k of the GN test family, sampled at the cell centers.
void gn_family_member(const RadialGrid& g, int k, Array& w, Array& dw) {
  const Array& r = g.centers();
  const double big_r = g.radius();
  const double h = g.faces()(1);
  // Low-discrepancy parameters keep the family prefix-stable.
  const double u1 = std::fmod(0.5 + k * 0.6180339887498949, 1.0);
  const double u2 = std::fmod(0.5 + k * 0.7548776662466927, 1.0);
  const double width = std::exp(std::log(2.0 * h) + u1 * (std::log(big_r) - std::log(2.0 * h)));
  switch (k % 4) {
    case 0: {  // Gaussian centered at the origin
      const Array z = r / width;
      w = (-z.square()).exp();
      dw = -2.0 * z / width * w;
      break;
    }
    case 1: {  // Gaussian shell
      const double c = u2 * big_r;
      const Array z = (r - c) / width;
      w = (-z.square()).exp();
      dw = -2.0 * z / width * w;
      break;
    }
    case 2: {  // (1 - (r/a)^2)^2 on B_a
      const Array s = (r / width).min(1.0);
      const Array base = 1.0 - s.square();
      w = base.square();
      dw = (r < width).select(-4.0 * base * s / width, 0.0);
      break;
    }
    default: {  // near-constant perturbation 1 + delta cos(j pi r / R)
      const double delta = 0.05 + 0.9 * u2;
      const double j = 1.0 + std::floor(8.0 * u1);
      const double kk = j * std::numbers::pi / big_r;
      w = 1.0 + delta * (kk * r).cos();
      dw = -delta * kk * (kk * r).sin();
      break;
    }
  }
}

double estimate_gn(const RadialGrid& grid, const std::vector<GnConfiguration>& cfgs, int family_size) {
  if (family_size < 8) throw InvalidParameter("GN estimate needs a family of at least 8 profiles");
  double best = 0.0;
  Array w, dw;
  for (int k = 0; k < family_size; ++k) {
    gn_family_member(grid, k, w, dw);
    for (const auto& cfg : cfgs) best = std::max(best, gn_ratio(grid, w, dw, cfg));
  }
  return best;
}

}  // namespace

double estimate_gn_constant(const RadialGrid& grid, double p, int family_size) {
  return estimate_gn(grid, {gn_configuration(grid.dim(), p)}, family_size);
}

double estimate_gn_constant(const RadialGrid& grid, double p, double epsilon, int family_size) {
  return estimate_gn(grid, {gn_configuration(grid.dim(), p), gn_configuration(grid.dim(), p, epsilon)}, family_size);
}

double holder_ratio(const RadialField& u, double p, double epsilon) {
  const RadialGrid& g = u.grid();
  const Eigen::Index n = g.size();
  const int dim = g.dim();
  const Array& f = g.faces();
  const Array& mom = g.face_moments();
  const FaceProfile m = cumulative_mass(u);
  // Inside cell i, M(r) = M_i + u_i (r^N - f_i^N)/N, so int_cell M(r)/r dr is
  // (M_i - u_i f_i^N/N) log(f_{i+1}/f_i) + u_i (f_{i+1}^N - f_i^N)/N^2.
  double lhs = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    double cell = u[i] * (mom(i + 1) - mom(i)) / dim;
    if (i > 0) cell += (m.values(i) - u[i] * mom(i)) * std::log(f(i + 1) / f(i));
    lhs += std::pow(u[i], p) * cell;
  }
  lhs *= g.omega();
  const double a = lp_norm_pow(u, p + 1.0);
  const double b = lp_norm_pow(u, p + 1.0 + epsilon);
  return lhs / (std::pow(a, 1.0 / (p + 1.0)) * std::pow(b, p / (p + 1.0 + epsilon)));
}

HolderValidation validate_holder_constant(const GridPtr& grid, double p, double epsilon, int trials,
                                          std::uint64_t seed) {
  const RadialGrid& g = *grid;
  const Eigen::Index n = g.size();
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  const Array& r = g.centers();
  const double big_r = g.radius();

  auto random_density = [&](int kind) {
    Array u(n);
    switch (kind % 5) {
      case 0:  // i.i.d. cell values
        for (Eigen::Index i = 0; i < n; ++i) u(i) = uni(rng);
        break;
      case 1: {  // truncated power law r^{-beta}
        const double beta = 3.0 * uni(rng);
        const double cut = big_r * std::pow(10.0, -3.0 * uni(rng));
        u = (r.max(cut) / big_r).pow(-beta);
        break;
      }
      case 2: {  // Gaussian at the origin
        const double w = big_r * std::pow(10.0, -2.0 * uni(rng));
        u = (-(r / w).square()).exp() + 1e-12;
        break;
      }
      case 3: {  // shell
        const double c = big_r * uni(rng), w = big_r * std::pow(10.0, -2.0 * uni(rng));
        u = (-((r - c) / w).square()).exp() + 1e-12;
        break;
      }
      default: {  // indicator of a ball plus a floor
        const double a = big_r * uni(rng);
        u = (r < a).select(Array::Constant(n, 1.0), Array::Constant(n, 1e-3 * uni(rng)));
        break;
      }
    }
    return u;
  };

  HolderValidation out;
  out.symbolic = holder_constant(g.dim(), big_r, p, epsilon);
  Array best_u;
  for (int t = 0; t < trials; ++t) {
    Array u = random_density(t);
    const double ratio = holder_ratio(RadialField(grid, u, FieldKind::density), p, epsilon);
    ++out.trials;
    if (ratio > out.max_ratio) {
      out.max_ratio = ratio;
      best_u = u;
    }
  }
  // Multiplicative hill climbing from the best random density.
  if (best_u.size() == n) {
    std::normal_distribution<double> gauss(0.0, 0.3);
    for (int it = 0; it < 4 * trials; ++it) {
      Array trial = best_u;
      const Eigen::Index lo = static_cast<Eigen::Index>(uni(rng) * n);
      const Eigen::Index len = 1 + static_cast<Eigen::Index>(uni(rng) * (n - lo - 1));
      trial.segment(lo, len) *= std::exp(gauss(rng));
      const double ratio = holder_ratio(RadialField(grid, trial, FieldKind::density), p, epsilon);
      ++out.trials;
      if (ratio > out.max_ratio) {
        out.max_ratio = ratio;
        best_u = std::move(trial);
      }
    }
  }
  out.dominates = out.symbolic >= out.max_ratio;
  return out;
}

std::string provenance_report(const BoundConstants& k) {
  std::ostringstream os;
  for (const auto& e : k.provenance) os << e.label << " = " << fmt(e.value) << " # " << e.formula << '\n';
  return os.str();
}

}  // namespace chemo
