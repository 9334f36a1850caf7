#include "chemo/harness.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <future>
#include <sstream>
#include <thread>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "chemo/errors.hpp"

namespace chemo {

namespace pt = boost::property_tree;

namespace {

std::string fmt(double x) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

double parse_double(const std::string& key, const std::string& raw) {
  const std::string s = trim(raw);
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ConfigError("key '" + key + "': expected a number, got '" + s + "'");
  }
}

template <class T>
T parse_int(const std::string& key, const std::string& raw) {
  const std::string s = trim(raw);
  T v{};
  const auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc() || end != s.data() + s.size())
    throw ConfigError("key '" + key + "': expected an integer, got '" + s + "'");
  return v;
}

bool parse_bool(const std::string& key, const std::string& raw) {
  const std::string s = trim(raw);
  if (s == "true" || s == "1" || s == "yes") return true;
  if (s == "false" || s == "0" || s == "no") return false;
  throw ConfigError("key '" + key + "': expected true/false, got '" + s + "'");
}

std::vector<double> parse_list(const std::string& key, const std::string& raw) {
  std::vector<double> out;
  std::stringstream ss(raw);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (trim(item).empty()) continue;
    out.push_back(parse_double(key, item));
  }
  if (out.empty()) throw ConfigError("key '" + key + "': empty list");
  return out;
}

std::string join(const std::vector<double>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ", " : "") + fmt(v[i]);
  return s;
}

// One typed field: how to read it from text and print it back.
struct Field {
  std::string key;
  bool scalar;
  std::function<void(RunConfig&, const std::string&)> read;
  std::function<std::string(const RunConfig&)> write;
};

#define CHEMO_REAL(KEY, MEMBER)                                                              \
  Field {                                                                                    \
    KEY, true, [](RunConfig& c, const std::string& s) { c.MEMBER = parse_double(KEY, s); }, \
        [](const RunConfig& c) { return fmt(c.MEMBER); }                                     \
  }
#define CHEMO_INT(KEY, MEMBER, TYPE)                                                                          \
  Field {                                                                                                     \
    KEY, true, [](RunConfig& c, const std::string& s) { c.MEMBER = parse_int<TYPE>(KEY, s); }, \
        [](const RunConfig& c) { return std::to_string(c.MEMBER); }                                           \
  }

const std::vector<Field>& fields() {
  static const std::vector<Field> table = {
      CHEMO_INT("model.N", model.dim, int),
      CHEMO_REAL("model.R", model.radius),
      CHEMO_REAL("model.alpha", model.alpha),
      CHEMO_REAL("model.k_f", model.k_f),
      CHEMO_INT("grid.n_cells", n_cells, Eigen::Index),
      CHEMO_REAL("grid.grading", grading),
      {"initial.generator", false, [](RunConfig& c, const std::string& s) { c.generator = trim(s); },
       [](const RunConfig& c) { return c.generator; }},
      CHEMO_REAL("initial.mu", mu),
      CHEMO_REAL("initial.concentration", concentration),
      CHEMO_REAL("initial.core_radius", core_radius),
      {"initial.profile_path", false, [](RunConfig& c, const std::string& s) { c.profile_path = trim(s); },
       [](const RunConfig& c) { return c.profile_path; }},
      CHEMO_REAL("controller.cfl_diffusion", controller.cfl_diffusion),
      CHEMO_REAL("controller.cfl_advection", controller.cfl_advection),
      CHEMO_REAL("controller.dt_min", controller.dt_min),
      CHEMO_REAL("controller.u_blow_factor", controller.u_blow_factor),
      CHEMO_REAL("controller.t_end", controller.t_end),
      CHEMO_REAL("controller.sample_interval", controller.sample_interval),
      CHEMO_REAL("controller.sample_growth", controller.sample_growth),
      CHEMO_INT("controller.max_steps", controller.max_steps, std::int64_t),
      {"probes.p", false, [](RunConfig& c, const std::string& s) { c.probes = parse_list("probes.p", s); },
       [](const RunConfig& c) { return join(c.probes); }},
      CHEMO_REAL("bound.p", bound_p),
      {"bound.epsilon", true,
       [](RunConfig& c, const std::string& s) { c.epsilon = trim(s) == "auto" ? 0.0 : parse_double("bound.epsilon", s); },
       [](const RunConfig& c) { return c.epsilon == 0.0 ? std::string("auto") : fmt(c.epsilon); }},
      {"bound.c_gn", true,
       [](RunConfig& c, const std::string& s) { c.c_gn = trim(s) == "estimate" ? 0.0 : parse_double("bound.c_gn", s); },
       [](const RunConfig& c) { return c.c_gn == 0.0 ? std::string("estimate") : fmt(c.c_gn); }},
      CHEMO_REAL("bound.gn_safety", gn_safety),
      CHEMO_INT("bound.gn_family", gn_family, int),
      CHEMO_INT("bound.holder_trials", holder_trials, int),
      CHEMO_REAL("bound.R0", r0),
      {"admissibility.mode", false,
       [](RunConfig& c, const std::string& s) {
         const std::string v = trim(s);
         if (v == "corrected")
           c.concentration_mode = ConcentrationMode::corrected;
         else if (v == "literal")
           c.concentration_mode = ConcentrationMode::literal;
         else
           throw ConfigError("admissibility.mode must be 'corrected' or 'literal'");
       },
       [](const RunConfig& c) {
         return std::string(c.concentration_mode == ConcentrationMode::corrected ? "corrected" : "literal");
       }},
      {"admissibility.allow_inadmissible", false,
       [](RunConfig& c, const std::string& s) { c.allow_inadmissible = parse_bool("admissibility.allow_inadmissible", s); },
       [](const RunConfig& c) { return std::string(c.allow_inadmissible ? "true" : "false"); }},
      {"output.dir", false, [](RunConfig& c, const std::string& s) { c.output_dir = trim(s); },
       [](const RunConfig& c) { return c.output_dir; }},
      CHEMO_INT("run.seed", seed, std::uint64_t),
  };
  return table;
}

#undef CHEMO_REAL
#undef CHEMO_INT

const Field* find_field(const std::string& key) {
  for (const auto& f : fields())
    if (f.key == key) return &f;
  return nullptr;
}

void validate(const RunConfig& c) {
  if (c.model.dim < 3) throw ConfigError("model.N must be >= 3");
  if (!(c.model.radius > 0.0)) throw ConfigError("model.R must be positive");
  if (!(c.model.k_f >= 0.0)) throw ConfigError("model.k_f must be >= 0");
  if (c.n_cells < 8) throw ConfigError("grid.n_cells must be >= 8");
  if (!(c.grading >= 1.0)) throw ConfigError("grid.grading must be >= 1");
  if (c.generator != "bump" && c.generator != "constant" && c.generator != "profile")
    throw ConfigError("initial.generator must be bump, constant or profile");
  if (c.generator == "profile" && !std::filesystem::exists(c.profile_path))
    throw ConfigError("initial.profile_path '" + c.profile_path + "' does not exist");
  if (c.generator != "profile" && !(c.mu > 0.0)) throw ConfigError("initial.mu must be positive");
  for (double p : c.probes)
    if (!(p >= 1.0)) throw ConfigError("probes.p entries must be >= 1");
  if (!(c.gn_safety >= 1.0)) throw ConfigError("bound.gn_safety must be >= 1");
  if (c.gn_family < 8) throw ConfigError("bound.gn_family must be >= 8");
  if (c.holder_trials < 0) throw ConfigError("bound.holder_trials must be >= 0");
  if (!(c.r0 > 0.0 && c.r0 < c.model.radius)) throw ConfigError("bound.R0 must lie in (0, R)");
  try {
    c.controller.validate();
  } catch (const InvalidParameter& e) {
    throw ConfigError(std::string("controller: ") + e.what());
  }
}

}  // namespace

const std::vector<std::string>& scalar_config_keys() {
  static const std::vector<std::string> keys = [] {
    std::vector<std::string> k;
    for (const auto& f : fields())
      if (f.scalar) k.push_back(f.key);
    return k;
  }();
  return keys;
}

RunConfig parse_config(const std::string& text, const std::vector<std::string>& overrides) {
  pt::ptree tree;
  try {
    std::istringstream in(text);
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError(std::string("malformed config: ") + e.what());
  }
  std::map<std::string, std::string> flat;
  for (const auto& [section, body] : tree) {
    if (body.empty()) throw ConfigError("key '" + section + "' outside of any section");
    for (const auto& [key, value] : body) flat[section + "." + key] = value.data();
  }
  for (const auto& o : overrides) {
    const auto eq = o.find('=');
    if (eq == std::string::npos) throw ConfigError("override '" + o + "' is not key=value");
    flat[trim(o.substr(0, eq))] = o.substr(eq + 1);
  }
  RunConfig c;
  for (const auto& [key, value] : flat) {
    const Field* f = find_field(key);
    if (!f) throw ConfigError("unknown config key '" + key + "'");
    f->read(c, value);
  }
  validate(c);
  return c;
}

RunConfig load_config(const std::string& path, const std::vector<std::string>& overrides) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), overrides);
}

std::string serialize_config(const RunConfig& config) {
  std::ostringstream os;
  std::string section;
  for (const auto& f : fields()) {
    const auto dot = f.key.find('.');
    const std::string sec = f.key.substr(0, dot);
    if (sec != section) {
      os << (section.empty() ? "" : "\n") << '[' << sec << "]\n";
      section = sec;
    }
    os << f.key.substr(dot + 1) << " = " << f.write(config) << '\n';
  }
  return os.str();
}

GridPtr make_grid(const RunConfig& config) {
  return RadialGrid::graded(config.model.dim, config.model.radius, config.n_cells, config.grading);
}

RadialField make_initial_data(const RunConfig& config, const GridPtr& grid) {
  if (config.generator == "constant") return RadialField::constant(grid, config.mu, FieldKind::density);
  if (config.generator == "bump") return make_bump(grid, config.mu, config.concentration, config.core_radius);
  std::ifstream in(config.profile_path);
  if (!in) throw ConfigError("cannot open profile '" + config.profile_path + "'");
  std::vector<double> values;
  std::string line;
  while (std::getline(in, line)) {
    line = trim(line);
    if (line.empty() || line[0] == '#') continue;
    values.push_back(parse_double("profile", line));
  }
  if (static_cast<Eigen::Index>(values.size()) != grid->size())
    throw ConfigError("profile has " + std::to_string(values.size()) + " values, grid has " +
                      std::to_string(grid->size()) + " cells");
  try {
    return RadialField(grid, Eigen::Map<const Array>(values.data(), grid->size()), FieldKind::density);
  } catch (const DensityViolation& e) {
    throw InadmissibleData(e.what());
  }
}

BoundSummary compute_bounds(const RunConfig& config, const RadialField& u0) {
  BoundSummary out;
  const RadialGrid& g = u0.grid();
  ModelParams params = config.model;
  params.mu = integrate(u0) / g.ball_volume();
  const double p = config.bound_p;
  const double eps = config.epsilon > 0.0 ? config.epsilon : default_epsilon(params.dim, p);
  double c_gn = config.c_gn;
  if (c_gn <= 0.0) {
    out.c_gn_estimate = estimate_gn_constant(g, p, eps, config.gn_family);
    c_gn = config.gn_safety * out.c_gn_estimate;
  }
  out.constants = build_constants(params, p, eps, c_gn);
  out.constants.provenance.push_back({"C_GN_estimate", out.c_gn_estimate,
                                      "max GN ratio over the radial test family (0 when C_GN is supplied)"});
  out.psi0 = lp_norm_pow(u0, p) / p;
  out.t_quadrature = lower_bound_quadrature(out.constants, out.psi0);
  out.t_closed = lower_bound_closed_form(out.constants, out.psi0);
  if (config.holder_trials > 0)
    out.holder = validate_holder_constant(u0.grid_ptr(), p, eps, config.holder_trials, config.seed);
  else
    out.holder = {out.constants.c_holder, 0.0, 0, true};
  return out;
}

ExperimentRecord run_experiment(const RunConfig& config) {
  ExperimentRecord rec;
  rec.config = config;
  const GridPtr grid = make_grid(config);
  const RadialField u0 = make_initial_data(config, grid);
  rec.mu = integrate(u0) / grid->ball_volume();
  ModelParams params = config.model;
  params.mu = rec.mu;

  rec.admissibility = check_all(params, u0, config.r0, config.concentration_mode);
  if (!rec.admissibility.all_pass() && !config.allow_inadmissible) {
    std::string failed;
    for (const auto& v : rec.admissibility.verdicts)
      if (!v.pass) failed += (failed.empty() ? "" : ", ") + v.condition;
    throw InadmissibleData("initial data or parameters fail: " + failed);
  }

  rec.bounds = compute_bounds(config, u0);

  std::vector<double> probes = config.probes;
  if (std::find(probes.begin(), probes.end(), config.bound_p) == probes.end()) probes.push_back(config.bound_p);
  const FluxLimiter limiter{config.model.k_f, config.model.alpha};
  rec.run = run(u0, limiter, config.controller, probes);

  const PsiTrace trace = psi_trace_from_run(rec.run, config.bound_p);
  if (trace.t.size() >= 3) rec.psi_check = check_psi_inequality(trace, rec.bounds.constants, 0.05);

  rec.bound_below_detect = rec.run.termination != Termination::blowup_detected ||
                           rec.bounds.t_quadrature <= rec.run.t_detect;
  if (rec.run.termination == Termination::step_failure || !rec.bounds.holder.dominates)
    rec.exit_code = kExitNumerical;
  return rec;
}

std::string series_csv(const RunRecord& run) {
  std::ostringstream os;
  os << "t,mass,linf";
  for (double p : run.probes) os << ",lp_" << fmt(p);
  for (double p : run.probes) os << ",psi_" << fmt(p);
  os << ",dt\n";
  for (const auto& s : run.samples) {
    os << fmt(s.t) << ',' << fmt(s.mass) << ',' << fmt(s.linf);
    for (double v : s.lp) os << ',' << fmt(v);
    for (double v : s.psi) os << ',' << fmt(v);
    os << ',' << fmt(s.dt) << '\n';
  }
  return os.str();
}

std::string bounds_text(const BoundSummary& b) {
  std::ostringstream os;
  os << provenance_report(b.constants);
  os << "Psi0 = " << fmt(b.psi0) << " # (1/p) ||u0||_p^p\n";
  os << "A = " << fmt(b.constants.closed_form_coefficient(b.psi0))
     << " # B1 Psi0^{1-gamma} + B2 Psi0^{gamma1-gamma} + B3 Psi0^{gamma2-gamma} + B4 Psi0^{gamma3-gamma}\n";
  os << "T_quadrature = " << fmt(b.t_quadrature) << " # int_{Psi0}^inf d eta / (B1 eta + B2 eta^g1 + B3 eta^g2 + B4 eta^g3)\n";
  os << "T_closed = " << fmt(b.t_closed) << " # 1 / (A (gamma-1) Psi0^{gamma-1})\n";
  os << "holder_symbolic = " << fmt(b.holder.symbolic) << " # c_holder\n";
  os << "holder_max_ratio = " << fmt(b.holder.max_ratio) << " # max empirical Hoelder ratio over "
     << b.holder.trials << " densities\n";
  os << "holder_validated = " << (b.holder.dominates ? 1 : 0) << " # c_holder >= max ratio\n";
  return os.str();
}

std::string manifest_text(const ExperimentRecord& rec) {
  const RunRecord& r = rec.run;
  std::ostringstream os;
  os << "verdict = " << to_string(r.termination) << '\n';
  if (!r.failure_reason.empty()) os << "failure_reason = " << r.failure_reason << '\n';
  os << "mu = " << fmt(rec.mu) << '\n';
  os << "t_final = " << fmt(r.t_final) << '\n';
  os << "t_detect = " << fmt(r.t_detect) << '\n';
  os << "t_max_extrapolated = " << fmt(r.t_max_extrapolated) << '\n';
  os << "blowup_exponent = " << fmt(r.blowup_exponent) << '\n';
  os << "u_blow = " << fmt(r.u_blow) << '\n';
  os << "steps = " << r.steps << '\n';
  os << "rejections = " << r.rejections << '\n';
  os << "samples = " << r.samples.size() << '\n';
  os << "max_mass_drift = " << fmt(r.max_mass_drift()) << '\n';
  os << "admissible = " << (rec.admissibility.all_pass() ? "true" : "false") << '\n';
  for (const auto& v : rec.admissibility.verdicts)
    os << "admissibility." << v.condition << " = " << (v.pass ? "pass" : "fail") << " margin " << fmt(v.margin)
       << '\n';
  os << "C_GN = " << fmt(rec.bounds.constants.c_gn) << '\n';
  os << "T_quadrature = " << fmt(rec.bounds.t_quadrature) << '\n';
  os << "T_closed = " << fmt(rec.bounds.t_closed) << '\n';
  os << "bound_below_detect = " << (rec.bound_below_detect ? "true" : "false")
     << (r.termination == Termination::blowup_detected ? "" : " # no blow-up observed") << '\n';
  os << "psi_check.checked = " << rec.psi_check.checked << '\n';
  os << "psi_check.violations = " << rec.psi_check.violations << '\n';
  os << "psi_check.min_relative_slack = " << fmt(rec.psi_check.min_relative_slack) << '\n';
  os << "holder_validated = " << (rec.bounds.holder.dominates ? "true" : "false") << '\n';
  os << "t_max_convention = threshold crossing at u_blow_factor*mu; power-law extrapolation over the last decade\n";
  return os.str();
}

void write_experiment(const ExperimentRecord& rec, const std::string& dir) {
  std::filesystem::create_directories(dir);
  auto put = [&](const std::string& name, const std::string& body) {
    std::ofstream out(std::filesystem::path(dir) / name);
    if (!out) throw ConfigError("cannot write " + name + " into '" + dir + "'");
    out << body;
  };
  put("series.csv", series_csv(rec.run));
  put("bounds.txt", bounds_text(rec.bounds));
  put("manifest.txt", manifest_text(rec));
  put("config.ini", serialize_config(rec.config));
}

std::vector<SweepRow> sweep(const RunConfig& base, const std::string& axis, const std::vector<double>& values,
                            unsigned max_threads) {
  const auto& keys = scalar_config_keys();
  if (std::find(keys.begin(), keys.end(), axis) == keys.end())
    throw ConfigError("sweep axis '" + axis + "' is not a scalar config field");
  const std::string base_text = serialize_config(base);
  if (max_threads == 0) max_threads = std::max(1u, std::thread::hardware_concurrency());

  auto one = [&](double value) {
    SweepRow row;
    row.axis_value = value;
    try {
      const RunConfig cfg = parse_config(base_text, {axis + "=" + fmt(value)});
      const ExperimentRecord rec = run_experiment(cfg);
      row.verdict = to_string(rec.run.termination);
      row.t_detect = rec.run.t_detect;
      row.t_quadrature = rec.bounds.t_quadrature;
      row.t_closed = rec.bounds.t_closed;
      row.ratio = rec.run.t_detect / rec.bounds.t_quadrature;
      row.mass_drift = rec.run.max_mass_drift();
      row.psi0 = rec.bounds.psi0;
    } catch (const std::exception& e) {
      row.verdict = std::string("error: ") + e.what();
      row.t_detect = row.t_quadrature = row.t_closed = row.ratio = row.mass_drift = row.psi0 =
          std::numeric_limits<double>::quiet_NaN();
    }
    return row;
  };

  std::vector<SweepRow> rows;
  for (std::size_t start = 0; start < values.size(); start += max_threads) {
    std::vector<std::future<SweepRow>> batch;
    for (std::size_t i = start; i < std::min(values.size(), start + max_threads); ++i)
      batch.push_back(std::async(std::launch::async, one, values[i]));
    for (auto& f : batch) rows.push_back(f.get());
  }
  std::stable_sort(rows.begin(), rows.end(),
                   [](const SweepRow& a, const SweepRow& b) { return a.axis_value < b.axis_value; });
  return rows;
}

std::string sweep_csv(const std::string& axis, const std::vector<SweepRow>& rows) {
  std::ostringstream os;
  os << axis << ",verdict,t_detect,T_quadrature,T_closed,ratio,mass_drift,psi0\n";
  for (const auto& r : rows) {
    std::string verdict = r.verdict;
    std::replace(verdict.begin(), verdict.end(), ',', ';');
    os << fmt(r.axis_value) << ',' << verdict << ',' << fmt(r.t_detect) << ',' << fmt(r.t_quadrature) << ','
       << fmt(r.t_closed) << ',' << fmt(r.ratio) << ',' << fmt(r.mass_drift) << ',' << fmt(r.psi0) << '\n';
  }
  return os.str();
}

}  // namespace chemo
