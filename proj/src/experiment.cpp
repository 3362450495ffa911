#include "torpsi/experiment.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <numbers>
#include <ostream>
#include <random>
#include <set>
#include <sstream>

#include "svg_plot.hpp"
#include "torpsi/calculus.hpp"
#include "torpsi/hyperbolic.hpp"
#include "torpsi/quantize.hpp"
#include "torpsi/symbol.hpp"

namespace torpsi {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

// ---------------------------------------------------------------- scenario table

struct ScenarioInfo {
  const char* name;
  const char* description;
  const char* exercises;
  const char* csv;
  std::set<std::string> keys;
};

const std::set<std::string> kCommonKeys = {"scenario", "dim", "G", "N", "seed", "out", "plot"};
const std::set<std::string> kOperatorKeys = {"operator", "nu", "coefficient", "shift"};
const std::set<std::string> kTimeKeys = {"T", "dt", "integrator", "record_stride",
                                         "auto_substep"};

std::set<std::string> keys_of(std::initializer_list<std::set<std::string>> groups,
                              std::initializer_list<const char*> extra) {
  std::set<std::string> out = kCommonKeys;
  for (const auto& g : groups) out.insert(g.begin(), g.end());
  for (const char* k : extra) out.insert(k);
  return out;
}

const std::vector<ScenarioInfo>& scenarios() {
  static const std::vector<ScenarioInfo> table = {
      {"exact_mode", "single Fourier mode under a multiplier P against cos(lambda t) e_xi0",
       "fractional wave energy estimate; exact mode solution",
       "exact_mode_error.csv: t,rel_error | exact_mode_ledger.csv: "
       "t,u_Hs,ut_Hs_minus_nu_half,forcing_integral,E_conserved,bound_rhs",
       keys_of({kOperatorKeys, kTimeKeys}, {"xi0", "tolerance"})},
      {"manufactured", "manufactured solution cos(t) sin(2 pi x) at dt and dt/2",
       "well-posedness of u_tt = -P u + w; rk4 convergence order",
       "manufactured_convergence.csv: dt,error",
       keys_of({kOperatorKeys, kTimeKeys}, {"tolerance", "ratio_min", "ratio_max"})},
      {"energy_study", "energy ledger, minimal constants C* and a tampered-ledger control",
       "wave energy estimate; first-order Gronwall estimate",
       "energy_ledger.csv: t,u_Hs,ut_Hs_minus_nu_half,forcing_integral,E_conserved,bound_rhs",
       keys_of({kOperatorKeys, kTimeKeys},
               {"f0", "f1", "random_data", "s", "forcing", "forcing_time", "forcing_omega",
                "c_max", "drift_tolerance"})},
      {"symbol_order", "dyadic-shell regression of differences and x-derivatives of a symbol",
       "toroidal symbol inequalities; ellipticity and strong ellipticity",
       "symbol_order.csv: alpha,beta,slope,claimed,residual,pass",
       keys_of({}, {"operator", "nu", "rho", "coefficient", "declared_order", "declared_rho",
                    "declared_delta", "max_alpha", "max_beta", "slack", "margin",
                    "ellipticity"})},
      {"calculus_check", "remainders of truncated adjoint / composition expansions",
       "asymptotic expansion of adjoints and compositions",
       "calculus_check.csv: N,shell,sup,fitted_slope,claimed_order,pass",
       keys_of({}, {"expansion", "m1", "c1", "m2", "c2", "truncation", "slack", "min_gain"})},
      {"symmetrizer_check", "shell norms of K + K* for the first-order reduction",
       "first-order reduction, K + K* of order zero; structural identities",
       "symmetrizer_shells.csv: shell,norm",
       keys_of({kOperatorKeys}, {"negative_control"})},
  };
  return table;
}

const ScenarioInfo& scenario_info(const std::string& name) {
  for (const auto& s : scenarios())
    if (name == s.name) return s;
  throw ConfigError("unknown scenario '" + name + "' (see `list`)");
}

// ---------------------------------------------------------------- run context

struct Context {
  const ExperimentConfig& cfg;
  RunReport& report;
  std::filesystem::path out;
  bool plot;
  long long seed;

  void metric(const std::string& name, double value) { report.metrics.emplace_back(name, value); }
  void verdict(const std::string& name, double value, const std::string& criterion, bool pass) {
    report.verdicts.push_back(Verdict{name, value, criterion, pass});
  }
  std::ofstream open(const std::string& file) {
    const auto path = out / file;
    std::ofstream os(path);
    if (!os) throw ConfigError("cannot write " + path.string());
    os << std::setprecision(17);
    report.outputs.push_back(path);
    return os;
  }
  void svg(const std::string& file, const detail::PlotSpec& spec,
           const std::vector<detail::Series>& series) {
    if (!plot) return;
    detail::write_line_plot(out / file, spec, series);
    report.outputs.push_back(out / file);
  }
};

std::string format_bound(const char* op, double v) {
  std::ostringstream s;
  s << op << ' ' << v;
  return s.str();
}

GridSpec make_spec(const ExperimentConfig& cfg, int default_g) {
  const int dim = cfg.get_int("dim", 1);
  const int g = cfg.get_int("G", default_g);
  const int n = cfg.get_int("N", g / 2 - 1);
  try {
    return GridSpec(dim, g, n);
  } catch (const DomainError& e) {
    throw ConfigError(e.what());
  }
}

Frequency parse_frequency(const std::string& text, int dim) {
  Frequency xi(dim);
  std::stringstream in(text);
  std::string comp;
  int i = 0;
  while (std::getline(in, comp, ',')) {
    if (i >= dim) throw ConfigError("frequency '" + text + "' has too many components");
    try {
      xi[i++] = std::stoi(comp);
    } catch (const std::exception&) {
      throw ConfigError("malformed frequency '" + text + "'");
    }
  }
  if (i != dim) throw ConfigError("frequency '" + text + "' needs " + std::to_string(dim) +
                                  " components");
  return xi;
}

Coefficient parse_coefficient(const ExperimentConfig& cfg, const std::string& key, int dim,
                              const std::string& fallback) {
  try {
    return Coefficient::parse(cfg.get(key, fallback), dim);
  } catch (const DomainError& e) {
    throw ConfigError(key + ": " + e.what());
  }
}

Integrator parse_integrator(const ExperimentConfig& cfg) {
  const std::string s = cfg.get("integrator", "rk4");
  if (s == "rk4") return Integrator::kRk4;
  if (s == "exp_midpoint") return Integrator::kExpMidpoint;
  throw ConfigError("integrator must be rk4 or exp_midpoint, got '" + s + "'");
}

SolverConfig solver_config(const ExperimentConfig& cfg) {
  SolverConfig sc;
  sc.dt = cfg.get_double("dt", 1e-3);
  sc.integrator = parse_integrator(cfg);
  sc.record_stride = cfg.get_int("record_stride", 1);
  sc.auto_substep = cfg.get_bool("auto_substep", false);
  if (!(sc.dt > 0.0)) throw ConfigError("dt must be positive");
  if (sc.record_stride < 1) throw ConfigError("record_stride must be positive");
  return sc;
}

double horizon(const ExperimentConfig& cfg) {
  const double T = cfg.get_double("T", 1.0);
  if (!(T > 0.0)) throw ConfigError("T must be positive");
  return T;
}

ScalarSymbol operator_symbol(const ExperimentConfig& cfg, const GridSpec& spec,
                             const std::string& fallback_kind) {
  const std::string kind = cfg.get("operator", fallback_kind);
  BuiltinParams p;
  p.nu = cfg.get_double("nu", 2.0);
  p.rho = cfg.get_double("rho", 1.0);
  p.margin = cfg.get_int("margin", kDefaultMargin);
  p.q = parse_coefficient(cfg, "coefficient", spec.dim(), "");
  if (kind != "frac_laplacian" && kind != "bessel" && kind != "variable" && kind != "oscillating")
    throw ConfigError("unknown operator '" + kind + "'");
  try {
    return builtin_symbol(spec, kind, p);
  } catch (const DomainError& e) {
    throw ConfigError(e.what());
  }
}

/// Band-projected, symmetrized and shifted finite section of the configured symbol.
DenseOperator positive_operator(const ExperimentConfig& cfg, const GridSpec& spec,
                                const std::string& fallback_kind) {
  const std::string kind = cfg.get("operator", fallback_kind);
  if (kind == "oscillating") throw ConfigError("the oscillating symbol cannot serve as P");
  const double shift = cfg.get_double("shift", 0.0);
  if (shift < 0.0) throw ConfigError("shift must be nonnegative");
  return symmetrize_positive(band_project(materialize(operator_symbol(cfg, spec, fallback_kind))),
                             shift);
}

GridFunction sample(const GridSpec& spec, const Coefficient& c) {
  return GridFunction::from_function(spec, [&](std::span<const double> x) { return Complex(c(x)); });
}

GridFunction random_band_limited(const GridSpec& spec, int band, std::mt19937_64& rng) {
  std::normal_distribution<double> nd;
  SpectralCoeffs c(spec, 1);
  const LatticeBox lattice = spec.lattice();
  for (std::size_t k = 0; k < lattice.size(); ++k) {
    const Frequency xi = lattice.point(k);
    bool inside = true;
    for (int i = 0; i < spec.dim(); ++i) inside = inside && std::abs(xi[i]) <= band;
    if (inside) c(xi) = Complex(nd(rng), nd(rng)) / japanese_bracket(xi);
  }
  return inverse_transform(c);
}

std::vector<double> squares(const std::vector<double>& v) {
  std::vector<double> out;
  for (double x : v) out.push_back(x * x);
  return out;
}

// ---------------------------------------------------------------- scenarios

void run_exact_mode(Context& ctx) {
  const auto& cfg = ctx.cfg;
  const GridSpec spec = make_spec(cfg, 128);
  const std::string kind = cfg.get("operator", "frac_laplacian");
  if (kind != "frac_laplacian" && kind != "bessel")
    throw ConfigError("exact_mode needs a multiplier operator (frac_laplacian or bessel)");
  const double nu = cfg.get_double("nu", 2.0);
  const Frequency xi0 = parse_frequency(cfg.get("xi0", spec.dim() == 1 ? "1" : "1,0"), spec.dim());
  if (!spec.lattice().contains(xi0)) throw ConfigError("xi0 lies outside the lattice");
  const double T = horizon(cfg);
  const SolverConfig sc = solver_config(cfg);
  const double tol = cfg.get_double("tolerance", 1e-6);

  const double r = std::sqrt(static_cast<double>(norm_sq(xi0)));
  const double symbol_value =
      kind == "bessel" ? std::pow(japanese_bracket(xi0), nu) : (r == 0.0 ? 0.0 : std::pow(kTwoPi * r, nu));
  const double lambda = std::sqrt(symbol_value);

  const DenseOperator P = positive_operator(cfg, spec, "frac_laplacian");
  const FirstOrderSystem sys = build_first_order_system(P);
  const GridFunction e = make_exponential(spec, xi0);
  CauchyData data{e, GridFunction(spec, 1), 0.0, nu, T};
  const WaveSolution sol = solve_wave(sys, data, Forcing(), sc);

  auto out = ctx.open("exact_mode_error.csv");
  out << "t,rel_error\n";
  std::vector<double> errs;
  double max_err = 0.0;
  for (std::size_t i = 0; i < sol.times.size(); ++i) {
    const double t = sol.times[i];
    const Eigen::VectorXcd diff = sol.u[i].values() - std::cos(lambda * t) * e.values();
    const double err = std::sqrt(diff.squaredNorm() / e.values().squaredNorm());
    errs.push_back(err);
    max_err = std::max(max_err, err);
    out << t << ',' << err << '\n';
  }
  auto led = ctx.open("exact_mode_ledger.csv");
  write_ledger_csv(led, sol.ledger);

  const auto drift = conserved_energy_probe(P, sol.u, sol.ut);
  ctx.metric("lambda", lambda);
  ctx.metric("spectral_radius_K", sys.spectral_radius);
  ctx.metric("final_rel_error", errs.back());
  ctx.metric("max_rel_error", max_err);
  ctx.metric("energy_drift", drift.max_drift);
  ctx.metric("C_star_wave", sol.ledger.fitted_C);
  ctx.verdict("final_rel_error", errs.back(), format_bound("<=", tol), errs.back() <= tol);
  ctx.svg("exact_mode_error.svg", {"exact mode error", "t", "relative L2 error", false, true},
          {{"rel_error", sol.times, errs}});
}

void run_manufactured(Context& ctx) {
  const auto& cfg = ctx.cfg;
  const GridSpec spec = make_spec(cfg, 64);
  const double T = horizon(cfg);
  SolverConfig sc = solver_config(cfg);
  const double tol = cfg.get_double("tolerance", 1e-5);
  const double rmin = cfg.get_double("ratio_min", 12.0);
  const double rmax = cfg.get_double("ratio_max", 20.0);

  ExperimentConfig local = cfg;
  if (!cfg.has("operator")) local.set("operator", "variable");
  if (!cfg.has("coefficient") && local.get("operator", "") == "variable")
    local.set("coefficient", "sin 1 0.5");
  if (!cfg.has("shift") && local.get("operator", "") == "variable") local.set("shift", "2");
  const DenseOperator P = positive_operator(local, spec, "variable");
  const FirstOrderSystem sys = build_first_order_system(P);

  // u*(t, x) = cos(t) sin(2 pi x_1), w = u*_tt + P u*
  const GridFunction s = GridFunction::from_function(
      spec, [](std::span<const double> x) { return Complex(std::sin(kTwoPi * x[0])); });
  const GridFunction ps = P.apply(s);
  const Eigen::VectorXcd profile = ps.values() - s.values();
  Forcing w([spec, profile](double t) { return GridFunction(spec, 1, std::cos(t) * profile); });
  CauchyData data{s, GridFunction(spec, 1), 0.0, cfg.get_double("nu", 2.0), T};

  auto error_at = [&](double dt) {
    SolverConfig c = sc;
    c.dt = dt;
    const WaveSolution sol = solve_wave(sys, data, w, c);
    double err = 0.0;
    for (std::size_t i = 0; i < sol.times.size(); ++i) {
      const Eigen::VectorXcd exact = std::cos(sol.times[i]) * s.values();
      err = std::max(err, (sol.u[i].values() - exact).norm() / exact.norm());
    }
    return err;
  };
  const double e1 = error_at(sc.dt);
  const double e2 = error_at(sc.dt / 2.0);
  const double ratio = e1 / e2;

  auto out = ctx.open("manufactured_convergence.csv");
  out << "dt,error\n" << sc.dt << ',' << e1 << '\n' << sc.dt / 2.0 << ',' << e2 << '\n';
  ctx.metric("error_dt", e1);
  ctx.metric("error_dt_half", e2);
  ctx.metric("ratio", ratio);
  ctx.verdict("error_dt_half", e2, format_bound("<=", tol), e2 <= tol);
  std::ostringstream range;
  range << "in [" << rmin << ", " << rmax << "]";
  ctx.verdict("ratio", ratio, range.str(), ratio >= rmin && ratio <= rmax);
  ctx.svg("manufactured_convergence.svg", {"manufactured solution", "dt", "error", true, true},
          {{"sup_t relative error", {sc.dt, sc.dt / 2.0}, {e1, e2}}});
}

void run_energy_study(Context& ctx) {
  const auto& cfg = ctx.cfg;
  const GridSpec spec = make_spec(cfg, 64);
  const double T = horizon(cfg);
  const SolverConfig sc = solver_config(cfg);
  const double nu = cfg.get_double("nu", 2.0);
  const double s_index = cfg.get_double("s", 0.0);
  const double c_max = cfg.get_double("c_max", 5.0);

  const DenseOperator P = positive_operator(cfg, spec, "frac_laplacian");
  const FirstOrderSystem sys = build_first_order_system(P);

  GridFunction f0(spec, 1), f1(spec, 1);
  if (cfg.has("random_data")) {
    const int band = cfg.get_int("random_data", 4);
    if (band < 0 || band > spec.cutoff()) throw ConfigError("random_data band outside lattice");
    std::mt19937_64 rng(static_cast<std::uint64_t>(ctx.seed));
    f0 = random_band_limited(spec, band, rng);
    f1 = random_band_limited(spec, band, rng);
  } else {
    f0 = sample(spec, parse_coefficient(cfg, "f0", spec.dim(), "cos 1 1"));
    f1 = sample(spec, parse_coefficient(cfg, "f1", spec.dim(), ""));
  }

  Forcing w;
  if (cfg.has("forcing")) {
    const GridFunction g = sample(spec, parse_coefficient(cfg, "forcing", spec.dim(), ""));
    const std::string profile = cfg.get("forcing_time", "sin");
    const double omega = cfg.get_double("forcing_omega", 3.0);
    if (profile != "sin" && profile != "cos" && profile != "const")
      throw ConfigError("forcing_time must be sin, cos or const");
    w = Forcing([g, profile, omega](double t) {
      const double a = profile == "sin" ? std::sin(omega * t)
                       : profile == "cos" ? std::cos(omega * t)
                                          : 1.0;
      return GridFunction(g.spec(), 1, a * g.values());
    });
  }

  CauchyData data{f0, f1, s_index, nu, T};
  const WaveSolution sol = solve_wave(sys, data, w, sc);
  const EnergyReport wave = verify_energy_estimate(sol.ledger, sol.ledger.fitted_C, EnergyForm::kWave);
  const EnergyReport first = verify_energy_estimate(sol.ledger, 0.0, EnergyForm::kFirstOrder);

  // double the u-norm where the bound is tightest and re-check with the same C*
  EnergyLedger tampered = sol.ledger;
  std::size_t worst = 0;
  double worst_ratio = -1.0;
  for (std::size_t i = 0; i < tampered.times.size(); ++i) {
    const double b = energy_bound(tampered, i, wave.C_star, EnergyForm::kWave);
    const double ratio = b > 0.0 ? tampered.u_norms[i] * tampered.u_norms[i] / b : 0.0;
    if (ratio > worst_ratio) {
      worst_ratio = ratio;
      worst = i;
    }
  }
  tampered.u_norms[worst] *= 2.0;
  const EnergyReport control = verify_energy_estimate(tampered, wave.C_star, EnergyForm::kWave);

  auto led = ctx.open("energy_ledger.csv");
  write_ledger_csv(led, sol.ledger);

  ctx.metric("C_star_wave", wave.C_star);
  ctx.metric("C_star_first_order", first.C_star);
  ctx.metric("tampered_time", tampered.times[worst]);
  ctx.verdict("C_star_wave", wave.C_star, format_bound("<=", c_max),
              wave.C_star <= c_max && wave.holds);
  ctx.verdict("tampered_ledger_rejected", control.worst_ratio, "> 1", !control.holds);
  if (w.is_zero()) {
    const auto drift = conserved_energy_probe(P, sol.u, sol.ut);
    const double tol = cfg.get_double("drift_tolerance", 1e-7);
    ctx.metric("energy_drift", drift.max_drift);
    ctx.verdict("energy_drift", drift.max_drift, format_bound("<=", tol), drift.max_drift <= tol);
  }

  std::vector<double> lhs = squares(sol.ledger.u_norms), rhs;
  for (std::size_t i = 0; i < sol.times.size(); ++i)
    rhs.push_back(energy_bound(sol.ledger, i, wave.C_star, EnergyForm::kWave));
  ctx.svg("energy_ledger.svg", {"energy estimate", "t", "squared norm", false, true},
          {{"||u||^2_{H^s}", sol.times, lhs}, {"bound at C*", sol.times, rhs}});
}

ScalarSymbol white_noise_symbol(const GridSpec& spec, double m, int margin, long long seed) {
  std::mt19937_64 rng(static_cast<std::uint64_t>(seed));
  std::normal_distribution<double> nd;
  const LatticeBox box = LatticeBox::symmetric(spec.dim(), spec.cutoff() + margin);
  std::vector<Complex> values(spec.grid_size() * box.size());
  for (std::size_t j = 0; j < spec.grid_size(); ++j)
    for (std::size_t k = 0; k < box.size(); ++k)
      values[j * box.size() + k] =
          Complex(nd(rng), nd(rng)) * std::pow(japanese_bracket(box.point(k)), m);
  return ScalarSymbol(spec, SymbolClass{m, 1.0, 0.0}, box, std::move(values), "white_noise");
}

void run_symbol_order(Context& ctx) {
  const auto& cfg = ctx.cfg;
  const GridSpec spec = make_spec(cfg, 128);
  const std::string kind = cfg.get("operator", "frac_laplacian");
  const int margin = cfg.get_int("margin", kDefaultMargin);
  ScalarSymbol a = kind == "white_noise"
                       ? white_noise_symbol(spec, cfg.get_double("nu", 1.0), margin, ctx.seed)
                       : operator_symbol(cfg, spec, "frac_laplacian");
  const SymbolClass base = a.symbol_class();
  SymbolClass declared;
  try {
    declared = SymbolClass::make(cfg.get_double("declared_order", base.order),
                                 cfg.get_double("declared_rho", base.rho),
                                 cfg.get_double("declared_delta", base.delta));
  } catch (const DomainError& e) {
    throw ConfigError(e.what());
  }
  a = a.with_class(declared);
  const int max_alpha = cfg.get_int("max_alpha", 2);
  const int max_beta = cfg.get_int("max_beta", 1);
  const double slack = cfg.get_double("slack", kClassSlack);
  if (max_alpha < 0 || max_beta < 0) throw ConfigError("max_alpha and max_beta must be >= 0");
  if (max_alpha > margin) throw ConfigError("max_alpha exceeds the symbol margin");

  const ClassProbeReport probe = class_membership_probe(a, max_alpha, max_beta, slack);
  auto out = ctx.open("symbol_order.csv");
  out << "alpha,beta,slope,claimed,residual,pass\n";
  auto fmt = [](const MultiIndex& m) {
    std::string s;
    for (int i = 0; i < m.dim; ++i) s += (i ? ":" : "") + std::to_string(m[i]);
    return s;
  };
  std::vector<double> orders, slopes, claimed;
  for (const auto& e : probe.entries) {
    out << fmt(e.alpha) << ',' << fmt(e.beta) << ',' << e.slope << ',' << e.claimed << ','
        << e.residual << ',' << (e.pass ? 1 : 0) << '\n';
    if (order(e.beta) == 0) {
      orders.push_back(order(e.alpha));
      slopes.push_back(e.slope);
      claimed.push_back(e.claimed);
    }
  }
  double worst = -std::numeric_limits<double>::infinity();
  for (const auto& e : probe.entries) worst = std::max(worst, e.slope - e.claimed);
  ctx.metric("worst_excess", worst);

  if (cfg.get_bool("ellipticity", false)) {
    const auto el = ellipticity_check(a, 1);
    const auto st = strong_ellipticity_check(a, 1);
    ctx.metric("ellipticity_C0", el.c0);
    ctx.metric("strong_ellipticity_C0", st.c0);
    ctx.verdict("strongly_elliptic", st.c0, "> 0", st.elliptic);
  }
  ctx.verdict("class_probe", worst, format_bound("<=", slack), probe.pass);
  ctx.svg("symbol_order.svg", {"difference slopes (beta = 0)", "|alpha|", "slope", false, false},
          {{"fitted", orders, slopes}, {"class exponent", orders, claimed}});
}

void run_calculus_check(Context& ctx) {
  const auto& cfg = ctx.cfg;
  const GridSpec spec = make_spec(cfg, 128);
  const std::string expansion = cfg.get("expansion", "adjoint");
  if (expansion != "adjoint" && expansion != "composition")
    throw ConfigError("expansion must be adjoint or composition");
  const int max_n = cfg.get_int("truncation", 1);
  const double slack = cfg.get_double("slack", kClassSlack);
  const double min_gain = cfg.get_double("min_gain", 0.7);
  if (max_n < 0 || max_n >= kDefaultMargin) throw ConfigError("truncation must be in 0..3");

  const ScalarSymbol a1 = modulated_bracket_symbol(
      spec, cfg.get_double("m1", 1.0), parse_coefficient(cfg, "c1", spec.dim(), "cos 1 1; sin 1 0"));
  std::optional<ScalarSymbol> a2;
  if (expansion == "composition")
    a2 = modulated_bracket_symbol(spec, cfg.get_double("m2", 0.0),
                                  parse_coefficient(cfg, "c2", spec.dim(), "sin 1 1"));

  std::vector<ExpansionCheck> checks;
  for (int n = 0; n <= max_n; ++n) {
    const ExpansionResult r =
        a2 ? composition_expansion(a1, *a2, n) : adjoint_expansion(a1, n);
    checks.push_back(check_expansion(r, slack));
  }
  auto out = ctx.open("calculus_check.csv");
  write_expansion_csv(out, checks);

  std::vector<detail::Series> series;
  for (const auto& c : checks) {
    const std::string tag = "N" + std::to_string(c.truncation);
    ctx.metric("slope_" + tag, c.base.slope);
    ctx.metric("slope_differenced_" + tag, c.differenced.slope);
    ctx.metric("claimed_" + tag, c.claimed);
    ctx.verdict("remainder_" + tag, c.base.slope, format_bound("<=", c.claimed + slack), c.pass);
    detail::Series s{tag, {}, {}};
    for (const auto& sh : c.base.shells) {
      s.x.push_back(sh.bracket);
      s.y.push_back(sh.sup);
    }
    series.push_back(std::move(s));
  }
  for (std::size_t i = 0; i + 1 < checks.size(); ++i) {
    if (!std::isfinite(checks[i].base.slope)) continue;
    const double gain = checks[i].base.slope - checks[i + 1].base.slope;
    ctx.verdict("gain_N" + std::to_string(i) + "_to_N" + std::to_string(i + 1), gain,
                format_bound(">=", min_gain), gain >= min_gain);
  }
  ctx.svg("calculus_check.svg", {"remainder shell suprema", "<xi>", "sup |r|", true, true},
          series);
}

void run_symmetrizer_check(Context& ctx) {
  const auto& cfg = ctx.cfg;
  const GridSpec spec = make_spec(cfg, 64);
  const bool negative = cfg.get_bool("negative_control", false);
  const DenseOperator P = positive_operator(cfg, spec, "frac_laplacian");
  const FirstOrderSystem sys = negative ? build_adversarial_system(P) : build_first_order_system(P);
  const ZeroOrderReport zr = check_zero_order_condition(sys);

  auto out = ctx.open("symmetrizer_shells.csv");
  out << "shell,norm\n";
  std::vector<double> ks;
  for (std::size_t i = 0; i < zr.shells.size(); ++i) {
    out << zr.shells[i] << ',' << zr.shell_norms[i] << '\n';
    ks.push_back(std::ldexp(1.0, zr.shells[i]));
  }
  ctx.metric("slope", zr.slope);
  ctx.metric("defect", sys.defect);
  if (!negative) {
    const StructureReport st = check_structure(sys);
    ctx.metric("sqrt_defect", st.sqrt_defect);
    ctx.metric("inverse_defect", st.inverse_defect);
    ctx.verdict("sqrt_identity", st.sqrt_defect, "<= 1e-09", st.sqrt_defect <= 1e-9);
    ctx.verdict("inverse_identity", st.inverse_defect, "<= 1e-09", st.inverse_defect <= 1e-9);
    ctx.verdict("off_diagonal", st.off_diagonal ? 1.0 : 0.0, "== 1", st.off_diagonal);
  }
  ctx.verdict("shell_slope", zr.slope, format_bound("<=", zr.threshold), zr.pass);
  ctx.svg("symmetrizer_shells.svg", {"||K + K*|| on dyadic shells", "2^k", "norm", true, true},
          {{"shell norm", ks, zr.shell_norms}});
}

}  // namespace

// ---------------------------------------------------------------- config

ExperimentConfig ExperimentConfig::parse(std::istream& is) {
  std::map<std::string, std::string> values;
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) throw ConfigError("line " + std::to_string(lineno) + ": empty key");
    if (!values.emplace(key, value).second)
      throw ConfigError("line " + std::to_string(lineno) + ": duplicate key '" + key + "'");
  }
  return from_map(std::move(values));
}

ExperimentConfig ExperimentConfig::load(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot open config file " + path.string());
  return parse(is);
}

ExperimentConfig ExperimentConfig::from_map(std::map<std::string, std::string> values) {
  const auto it = values.find("scenario");
  if (it == values.end()) throw ConfigError("missing key 'scenario'");
  const ScenarioInfo& info = scenario_info(it->second);
  for (const auto& [key, value] : values)
    if (!info.keys.count(key))
      throw ConfigError("unknown key '" + key + "' for scenario " + info.name);
  ExperimentConfig cfg;
  cfg.scenario_ = it->second;
  cfg.values_ = std::move(values);
  return cfg;
}

std::string ExperimentConfig::get(const std::string& key, const std::string& fallback) const {
  const auto it = values_.find(key);
  return it == values_.end() ? fallback : it->second;
}

double ExperimentConfig::get_double(const std::string& key, double fallback) const {
  const auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  try {
    std::size_t pos = 0;
    const double v = std::stod(it->second, &pos);
    if (pos != it->second.size() || !std::isfinite(v)) throw std::invalid_argument(key);
    return v;
  } catch (const std::exception&) {
    throw ConfigError("key '" + key + "' expects a number, got '" + it->second + "'");
  }
}

int ExperimentConfig::get_int(const std::string& key, int fallback) const {
  const auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  try {
    std::size_t pos = 0;
    const int v = std::stoi(it->second, &pos);
    if (pos != it->second.size()) throw std::invalid_argument(key);
    return v;
  } catch (const std::exception&) {
    throw ConfigError("key '" + key + "' expects an integer, got '" + it->second + "'");
  }
}

bool ExperimentConfig::get_bool(const std::string& key, bool fallback) const {
  const auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  if (it->second == "true" || it->second == "1" || it->second == "yes") return true;
  if (it->second == "false" || it->second == "0" || it->second == "no") return false;
  throw ConfigError("key '" + key + "' expects true or false, got '" + it->second + "'");
}

void ExperimentConfig::set(const std::string& key, const std::string& value) {
  values_[key] = value;
}

// ---------------------------------------------------------------- runner

bool RunReport::all_pass() const {
  for (const auto& v : verdicts)
    if (!v.pass) return false;
  return true;
}

int exit_code(const RunReport& report) { return report.all_pass() ? 0 : 2; }

RunReport run(const ExperimentConfig& config, const RunOptions& options) {
  const auto start = std::chrono::steady_clock::now();
  RunReport report;
  report.scenario = config.scenario();
  report.config = config.values();

  const std::filesystem::path out = options.out_dir ? *options.out_dir
                                                    : std::filesystem::path(config.get("out", "out"));
  const long long seed = options.seed ? *options.seed : config.get_int("seed", 0);
  Context ctx{config, report, out, options.plot || config.get_bool("plot", false), seed};
  // validate the grid before touching the file system
  make_spec(config, 64);
  std::error_code ec;
  std::filesystem::create_directories(out, ec);
  if (ec) throw ConfigError("cannot create output directory " + out.string());

  const std::string& s = config.scenario();
  if (s == "exact_mode") run_exact_mode(ctx);
  else if (s == "manufactured") run_manufactured(ctx);
  else if (s == "energy_study") run_energy_study(ctx);
  else if (s == "symbol_order") run_symbol_order(ctx);
  else if (s == "calculus_check") run_calculus_check(ctx);
  else if (s == "symmetrizer_check") run_symmetrizer_check(ctx);

  auto summary = ctx.open(s + "_summary.csv");
  summary << "kind,name,value,criterion,pass\n";
  for (const auto& [name, value] : report.metrics) summary << "metric," << name << ',' << value << ",,\n";
  for (const auto& v : report.verdicts)
    summary << "verdict," << v.name << ',' << v.value << ',' << v.criterion << ','
            << (v.pass ? 1 : 0) << '\n';

  report.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return report;
}

void print_report(std::ostream& os, const RunReport& report) {
  const auto prec = os.precision();
  os << std::setprecision(6);
  os << "scenario " << report.scenario << '\n';
  for (const auto& [k, v] : report.config) os << "  " << k << " = " << v << '\n';
  for (const auto& [name, value] : report.metrics) os << "  " << name << ": " << value << '\n';
  for (const auto& v : report.verdicts)
    os << (v.pass ? "PASS " : "FAIL ") << v.name << " = " << v.value << " (" << v.criterion
       << ")\n";
  for (const auto& p : report.outputs) os << "  wrote " << p.string() << '\n';
  os << "wall-clock " << report.wall_seconds << " s\n";
  os.precision(prec);
}

std::string list_scenarios() {
  std::ostringstream os;
  for (const auto& s : scenarios()) {
    os << s.name << "\n    " << s.description << "\n    exercises: " << s.exercises
       << "\n    csv: " << s.csv << "\n    keys:";
    for (const auto& k : s.keys) os << ' ' << k;
    os << '\n';
  }
  return os.str();
}

}  // namespace torpsi
