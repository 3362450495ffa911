#include "torpsi/hyperbolic.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "torpsi/error.hpp"
#include "torpsi/shells.hpp"

namespace torpsi {

namespace {

double spectral_norm(const Eigen::MatrixXcd& m) {
  if (m.size() == 0) return 0.0;
  Eigen::BDCSVD<Eigen::MatrixXcd> svd(m);
  return svd.singularValues()[0];
}

GridFunction stack(const GridFunction& a, const GridFunction& b) {
  const auto n = static_cast<Eigen::Index>(a.spec().grid_size());
  Eigen::VectorXcd v(2 * n);
  v.head(n) = a.values();
  v.tail(n) = b.values();
  return GridFunction(a.spec(), 2, std::move(v));
}

// (0, w(t))
GridFunction source(const Forcing& w, double t, const GridSpec& spec) {
  if (w.is_zero()) return GridFunction(spec, 2);
  return stack(GridFunction(spec, 1), w(t, spec));
}

FirstOrderSystem assemble(const DenseOperator& P, bool adversarial) {
  if (P.channels != 1) throw ShapeError("P must act on one channel");
  if (!P.positive) throw NotPositiveError("P must be flagged positive (use symmetrize_positive)");
  EigenDecomposition eig = hermitian_eigen(P);
  const double tol = hermitian_tolerance(eig.eigenvalues.cwiseAbs().maxCoeff());
  const Eigen::Index n = eig.eigenvalues.size();
  Eigen::VectorXd lambda(n), up(n), low(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    if (eig.eigenvalues[i] < -tol) throw NotPositiveError("P has a negative eigenvalue");
    lambda[i] = std::max(0.0, eig.eigenvalues[i]);
    up[i] = std::sqrt(1.0 + lambda[i]);
    low[i] = adversarial ? -lambda[i] : -lambda[i] / up[i];
  }
  const auto& v = eig.eigenvectors;
  DenseOperator A(P.spec, 1, v * up.asDiagonal() * v.adjoint(), P.order / 2.0);
  DenseOperator Ainv(P.spec, 1, v * up.cwiseInverse().asDiagonal() * v.adjoint(),
                     -P.order / 2.0);
  A.hermitian = A.positive = true;
  Ainv.hermitian = Ainv.positive = true;

  Eigen::MatrixXcd lower = adversarial ? Eigen::MatrixXcd(-P.matrix)
                                       : Eigen::MatrixXcd(-P.matrix * Ainv.matrix);
  double radius = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) radius = std::max(radius, std::sqrt(std::abs(up[i] * low[i])));
  const double defect = spectral_norm(A.matrix + lower.adjoint());

  return FirstOrderSystem{P,  std::move(A), std::move(Ainv), std::move(lower), std::move(eig),
                          up, low,          radius,          defect,           adversarial};
}

}  // namespace

void CauchyData::validate() const {
  if (!(f0.spec() == f1.spec())) throw ShapeError("f0 and f1 live on different grids");
  if (f0.channels() != 1 || f1.channels() != 1) throw ShapeError("Cauchy data must be scalar");
  if (!(T > 0.0)) throw DomainError("time horizon T must be positive");
  if (!(nu > 0.0)) throw DomainError("operator order nu must be positive");
  if (!std::isfinite(s)) throw DomainError("Sobolev index must be finite");
}

GridFunction Forcing::operator()(double t, const GridSpec& spec) const {
  if (!provider_) return GridFunction(spec, 1);
  GridFunction w = provider_(t);
  if (!(w.spec() == spec) || w.channels() != 1)
    throw ShapeError("forcing does not match the system grid");
  return w;
}

// ---------------------------------------------------------------- system

DenseOperator FirstOrderSystem::K() const {
  const auto n = A.rows();
  Eigen::MatrixXcd k = Eigen::MatrixXcd::Zero(2 * n, 2 * n);
  k.topRightCorner(n, n) = A.matrix;
  k.bottomLeftCorner(n, n) = lower_left;
  return DenseOperator(P.spec, 2, std::move(k), P.order / 2.0);
}

GridFunction FirstOrderSystem::apply_K(const GridFunction& v) const {
  if (v.channels() != 2 || !(v.spec() == P.spec)) throw ShapeError("state must be 2-channel");
  const auto n = A.rows();
  Eigen::VectorXcd out(2 * n);
  out.head(n).noalias() = A.matrix * v.values().tail(n);
  out.tail(n).noalias() = lower_left * v.values().head(n);
  return GridFunction(P.spec, 2, std::move(out));
}

FirstOrderSystem build_first_order_system(const DenseOperator& P) { return assemble(P, false); }

FirstOrderSystem build_adversarial_system(const DenseOperator& P) { return assemble(P, true); }

StructureReport check_structure(const FirstOrderSystem& sys) {
  const auto n = sys.A.rows();
  const Eigen::MatrixXcd id = Eigen::MatrixXcd::Identity(n, n);
  const Eigen::MatrixXcd ip = id + sys.P.matrix;
  StructureReport r;
  r.sqrt_defect = spectral_norm(sys.A.matrix * sys.A.matrix - ip) / spectral_norm(ip);
  r.inverse_defect = spectral_norm(sys.A.matrix * sys.Ainv.matrix - id);
  const DenseOperator k = sys.K();
  r.off_diagonal = k.matrix.topLeftCorner(n, n).isZero(0.0) &&
                   k.matrix.bottomRightCorner(n, n).isZero(0.0);
  return r;
}

ZeroOrderReport check_zero_order_condition(const FirstOrderSystem& sys, double threshold) {
  const GridSpec& spec = sys.P.spec;
  const LatticeBox lattice = spec.lattice();
  const auto shells = dyadic_shells(lattice, spec.cutoff());
  if (shells.size() < 4) throw ShellError("symmetrizer check needs at least four dyadic shells");

  // K + K* = [[0, C], [C*, 0]] with C = A + B*; its norm on a shell is ||C||.
  const Eigen::MatrixXcd c = sys.A.matrix + sys.lower_left.adjoint();
  const auto tw = twiddle_table(spec.points());
  const double scale = 1.0 / std::sqrt(static_cast<double>(spec.grid_size()));

  ZeroOrderReport r;
  r.threshold = threshold;
  std::vector<double> xs;
  for (const DyadicShell& shell : shells) {
    Eigen::MatrixXcd q(spec.grid_size(), shell.members.size());
    for (std::size_t m = 0; m < shell.members.size(); ++m) {
      const Frequency xi = lattice.point(shell.members[m]);
      for (std::size_t j = 0; j < spec.grid_size(); ++j)
        q(j, m) = scale * tw[spec.phase_index(j, xi)];
    }
    r.shells.push_back(shell.k);
    r.shell_norms.push_back(spectral_norm(q.adjoint() * c * q));
    xs.push_back(std::ldexp(1.0, shell.k));
  }
  const SlopeFit fit = fit_log_slope(xs, r.shell_norms, 0.0);
  r.slope = fit.slope;
  r.pass = fit.slope <= threshold;
  return r;
}

// ---------------------------------------------------------------- time stepping

double stable_dt(const FirstOrderSystem& sys) {
  if (sys.spectral_radius == 0.0) return std::numeric_limits<double>::infinity();
  return kRk4StabilityLimit * kStabilitySafety / sys.spectral_radius;
}

namespace {

GridFunction rk4_step(const FirstOrderSystem& sys, const GridFunction& v, double t, double dt,
                      const Forcing& w) {
  const GridSpec& spec = sys.P.spec;
  const GridFunction w0 = source(w, t, spec);
  const GridFunction wh = source(w, t + 0.5 * dt, spec);
  const GridFunction w1 = source(w, t + dt, spec);
  auto rhs = [&](const Eigen::VectorXcd& x, const GridFunction& src) {
    return Eigen::VectorXcd(sys.apply_K(GridFunction(spec, 2, x)).values() + src.values());
  };
  const Eigen::VectorXcd& y = v.values();
  const Eigen::VectorXcd k1 = rhs(y, w0);
  const Eigen::VectorXcd k2 = rhs(y + 0.5 * dt * k1, wh);
  const Eigen::VectorXcd k3 = rhs(y + 0.5 * dt * k2, wh);
  const Eigen::VectorXcd k4 = rhs(y + dt * k3, w1);
  return GridFunction(spec, 2, y + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4));
}

// exact propagator of v' = K v, block by block in P's eigenbasis
Eigen::VectorXcd propagate(const FirstOrderSystem& sys, const Eigen::VectorXcd& v, double tau) {
  const auto n = sys.A.rows();
  const auto& vec = sys.eig.eigenvectors;
  const Eigen::VectorXcd y = vec.adjoint() * v.head(n);
  const Eigen::VectorXcd z = vec.adjoint() * v.tail(n);
  Eigen::VectorXcd y1(n), z1(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double a = sys.upper_diag[i];
    const double b = sys.lower_diag[i];
    const double ab = a * b;
    double c, s_over;  // cos(w tau), sin(w tau) / w
    if (ab <= 0.0) {
      const double w = std::sqrt(-ab);
      c = std::cos(w * tau);
      s_over = w * tau < 1e-8 ? tau : std::sin(w * tau) / w;
    } else {
      const double w = std::sqrt(ab);
      c = std::cosh(w * tau);
      s_over = w * tau < 1e-8 ? tau : std::sinh(w * tau) / w;
    }
    y1[i] = c * y[i] + a * s_over * z[i];
    z1[i] = b * s_over * y[i] + c * z[i];
  }
  Eigen::VectorXcd out(2 * n);
  out.head(n) = vec * y1;
  out.tail(n) = vec * z1;
  return out;
}

GridFunction exp_midpoint_step(const FirstOrderSystem& sys, const GridFunction& v, double t,
                               double dt, const Forcing& w) {
  const GridSpec& spec = sys.P.spec;
  Eigen::VectorXcd out = propagate(sys, v.values(), dt);
  if (!w.is_zero())
    out += dt * propagate(sys, source(w, t + 0.5 * dt, spec).values(), 0.5 * dt);
  return GridFunction(spec, 2, std::move(out));
}

void require_stable(const FirstOrderSystem& sys, double dt) {
  const double limit = stable_dt(sys);
  if (dt > limit * (1.0 + 1e-12)) {
    std::ostringstream msg;
    msg << "rk4 step dt=" << dt << " exceeds the stability bound " << limit
        << " (spectral radius of K " << sys.spectral_radius << ")";
    throw StabilityError(msg.str());
  }
}

}  // namespace

GridFunction step(const FirstOrderSystem& sys, const GridFunction& v, double t, double dt,
                  const Forcing& w, Integrator integrator) {
  if (!(dt > 0.0)) throw DomainError("time step must be positive");
  if (v.channels() != 2 || !(v.spec() == sys.P.spec)) throw ShapeError("state must be 2-channel");
  if (integrator == Integrator::kExpMidpoint) return exp_midpoint_step(sys, v, t, dt, w);
  require_stable(sys, dt);
  return rk4_step(sys, v, t, dt, w);
}

FirstOrderSolution solve_first_order(const FirstOrderSystem& sys, const GridFunction& v0,
                                     const Forcing& w, double T, const SolverConfig& cfg,
                                     double sigma) {
  const GridSpec& spec = sys.P.spec;
  if (v0.channels() != 2 || !(v0.spec() == spec)) throw ShapeError("state must be 2-channel");
  if (!(T > 0.0)) throw DomainError("time horizon T must be positive");
  if (!(cfg.dt > 0.0) || cfg.dt > T) throw DomainError("time step must satisfy 0 < dt <= T");
  if (cfg.record_stride < 1) throw DomainError("record_stride must be positive");
  const long long steps = std::llround(T / cfg.dt);
  if (std::abs(static_cast<double>(steps) * cfg.dt - T) > 1e-9 * T)
    throw DomainError("time step must divide the horizon T");

  int substeps = 1;
  if (cfg.integrator == Integrator::kRk4 && cfg.dt > stable_dt(sys)) {
    if (!cfg.auto_substep) require_stable(sys, cfg.dt);
    substeps = static_cast<int>(std::ceil(cfg.dt / stable_dt(sys)));
  }
  const double h = cfg.dt / substeps;

  FirstOrderSolution sol;
  EnergyLedger& led = sol.ledger;
  led.s = sigma;
  led.v0_norm = sobolev_norm(v0, sigma);

  auto wnorms = [&](double t) {
    if (w.is_zero()) return std::pair<double, double>(0.0, 0.0);
    const GridFunction wt = w(t, spec);
    const double hs = sobolev_norm(wt, sigma);
    return std::pair<double, double>(hs * hs, l2_inner_product(wt, wt).real());
  };

  double integral = 0.0, integral_l2 = 0.0;
  const double v0_l2 = l2_inner_product(v0, v0).real();
  auto record = [&](double t, const GridFunction& v) {
    sol.times.push_back(t);
    sol.states.push_back(v);
    led.times.push_back(t);
    led.v_norms.push_back(sobolev_norm(v, sigma));
    led.forcing_integral.push_back(integral);
  };

  GridFunction v = v0;
  record(0.0, v);
  auto wa = wnorms(0.0);
  for (long long i = 0; i < steps; ++i) {
    const double t = static_cast<double>(i) * cfg.dt;
    for (int sub = 0; sub < substeps; ++sub) {
      const double ts = t + sub * h;
      v = cfg.integrator == Integrator::kRk4 ? rk4_step(sys, v, ts, h, w)
                                             : exp_midpoint_step(sys, v, ts, h, w);
      if (!w.is_zero()) {
        const auto wm = wnorms(ts + 0.5 * h);
        const auto wb = wnorms(ts + h);
        integral += h / 6.0 * (wa.first + 4.0 * wm.first + wb.first);
        integral_l2 += h / 6.0 * (wa.second + 4.0 * wm.second + wb.second);
        wa = wb;
      }
    }
    const double t1 = static_cast<double>(i + 1) * cfg.dt;
    const double norm2 = l2_inner_product(v, v).real();
    const double envelope = 10.0 * std::exp((sys.defect + 1.0) * t1) * (v0_l2 + integral_l2);
    if (!std::isfinite(norm2) || norm2 > envelope) {
      std::ostringstream msg;
      msg << "solution left the energy envelope at t=" << t1 << " (||v||^2=" << norm2
          << ", envelope " << envelope << ")";
      throw StabilityError(msg.str());
    }
    if ((i + 1) % cfg.record_stride == 0 || i + 1 == steps) record(t1, v);
  }
  return sol;
}

WaveSolution solve_wave(const FirstOrderSystem& sys, const CauchyData& data, const Forcing& w,
                        const SolverConfig& cfg) {
  data.validate();
  if (!(data.f0.spec() == sys.P.spec)) throw ShapeError("Cauchy data and P use different grids");
  const double sigma = data.s - data.nu / 2.0;
  const GridFunction v0 = stack(sys.A.apply(data.f0), data.f1);
  FirstOrderSolution fo = solve_first_order(sys, v0, w, data.T, cfg, sigma);

  WaveSolution sol;
  sol.times = fo.times;
  sol.ledger = std::move(fo.ledger);
  EnergyLedger& led = sol.ledger;
  led.s = data.s;
  led.nu = data.nu;
  led.f0_norm = sobolev_norm(data.f0, data.s);
  led.f1_norm = sobolev_norm(data.f1, sigma);
  for (const GridFunction& v : fo.states) {
    GridFunction u = sys.Ainv.apply(v.extract_channel(0));
    GridFunction ut = v.extract_channel(1);
    led.u_norms.push_back(sobolev_norm(u, data.s));
    led.ut_norms.push_back(sobolev_norm(ut, sigma));
    led.conserved_E.push_back(l2_inner_product(ut, ut).real() +
                              l2_inner_product(sys.P.apply(u), u).real());
    sol.u.push_back(std::move(u));
    sol.ut.push_back(std::move(ut));
  }
  led.fitted_C = verify_energy_estimate(led, 0.0, EnergyForm::kWave).C_star;
  return sol;
}

}  // namespace torpsi
