#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "oracles.hpp"
#include "torpsi/error.hpp"
#include "torpsi/hyperbolic.hpp"

using namespace torpsi;

namespace {

constexpr double kPi = std::numbers::pi;

DenseOperator multiplier_P(const GridSpec& spec, double nu) {
  return symmetrize_positive(materialize(frac_laplacian_symbol(spec, nu)));
}

GridFunction two_channel(const GridFunction& a, const GridFunction& b) {
  Eigen::VectorXcd v(a.values().size() * 2);
  v << a.values(), b.values();
  return GridFunction(a.spec(), 2, v);
}

CauchyData data_for(const GridSpec& spec, const Frequency& xi, double T, double nu = 2.0) {
  return CauchyData{make_exponential(spec, xi), GridFunction(spec), 1.0, nu, T};
}

}  // namespace

TEST(FirstOrderSystem, ZeroOperator) {
  const GridSpec spec(1, 16, 5);
  const auto sys = build_first_order_system(symmetrize_positive(materialize(constant_symbol(spec, 0.0))));
  EXPECT_LT((sys.A.matrix - Eigen::MatrixXcd::Identity(16, 16)).norm(), 1e-14);
  EXPECT_LT(sys.lower_left.norm(), 1e-14);
  EXPECT_EQ(sys.spectral_radius, 0.0);
  EXPECT_NEAR(sys.defect, 1.0, 1e-13);
  EXPECT_EQ(stable_dt(sys), std::numeric_limits<double>::infinity());
}

TEST(FirstOrderSystem, RequiresPositiveFlag) {
  const GridSpec spec(1, 16, 5);
  EXPECT_THROW(build_first_order_system(materialize(frac_laplacian_symbol(spec, 2.0))), NotPositiveError);
}

TEST(FirstOrderSystem, MultiplierStructure) {
  const GridSpec spec(1, 32, 15);
  const auto sys = build_first_order_system(multiplier_P(spec, 2.0));
  const auto st = check_structure(sys);
  EXPECT_LT(st.sqrt_defect, 1e-12);
  EXPECT_LT(st.inverse_defect, 1e-12);
  EXPECT_TRUE(st.off_diagonal);
  // eigenvalues of K are +-i (2 pi |xi|)^{nu/2}: radius at the corner of L
  EXPECT_NEAR(sys.spectral_radius, std::pow(2 * kPi * 15, 1.0), 1e-8);
  // A + B* = A - P A^{-1} = A^{-1}, norm 1 at xi = 0
  EXPECT_NEAR(sys.defect, 1.0, 1e-10);
}

TEST(ZeroOrderCondition, SymmetrizedSystemPassesAdversarialFails) {
  const GridSpec spec(1, 64, 31);
  const auto P = multiplier_P(spec, 2.0);
  const auto good = check_zero_order_condition(build_first_order_system(P));
  EXPECT_TRUE(good.pass);
  EXPECT_LT(good.slope, 0.0);
  const auto bad = check_zero_order_condition(build_adversarial_system(P));
  EXPECT_FALSE(bad.pass);
  EXPECT_GE(bad.slope, 1.0 - 0.15);
  EXPECT_THROW(check_zero_order_condition(build_first_order_system(multiplier_P(GridSpec(1, 16, 6), 2.0))),
               ShellError);
}

TEST(Step, ZeroOperatorWithConstantForcingIsExact) {
  const GridSpec spec(1, 16, 5);
  const auto sys = build_first_order_system(symmetrize_positive(materialize(constant_symbol(spec, 0.0))));
  const GridFunction w0 = make_exponential(spec, Frequency{2});
  const Forcing w([w0](double) { return w0; });
  std::mt19937_64 rng(3);
  const GridFunction u(spec, 1, oracle::random_band_limited(spec, rng));
  const GridFunction v = two_channel(u, u);
  // v1' = v2, v2' = w: v1 gains dt v2 + dt^2/2 w
  const double dt = 0.1;
  const Eigen::VectorXcd e1 = u.values() + dt * u.values() + 0.5 * dt * dt * w0.values();
  const Eigen::VectorXcd e2 = u.values() + dt * w0.values();
  for (auto integ : {Integrator::kRk4, Integrator::kExpMidpoint}) {
    const auto out = step(sys, v, 0.0, dt, w, integ);
    EXPECT_LT((out.channel(0) - e1).norm(), 1e-13);
    EXPECT_LT((out.channel(1) - e2).norm(), 1e-13);
  }
}

TEST(Step, RejectsUnstableRk4AndBadInput) {
  const GridSpec spec(1, 32, 15);
  const auto sys = build_first_order_system(multiplier_P(spec, 2.0));
  const GridFunction v(spec, 2);
  EXPECT_THROW(step(sys, v, 0.0, 2.0 * stable_dt(sys), Forcing{}), StabilityError);
  EXPECT_NO_THROW(step(sys, v, 0.0, 2.0 * stable_dt(sys), Forcing{}, Integrator::kExpMidpoint));
  EXPECT_THROW(step(sys, v, 0.0, -1.0, Forcing{}), DomainError);
  EXPECT_THROW(step(sys, GridFunction(spec, 1), 0.0, 1e-4, Forcing{}), ShapeError);
}

TEST(SolveWave, SingleModeMatchesCosine) {
  const GridSpec spec(1, 16, 5);
  const auto sys = build_first_order_system(multiplier_P(spec, 2.0));
  const Frequency xi{2};
  const double omega = 4 * kPi;  // sqrt((2 pi 2)^2)
  const double T = 0.5;
  for (auto integ : {Integrator::kRk4, Integrator::kExpMidpoint}) {
    SolverConfig cfg;
    cfg.dt = 1e-3;
    cfg.integrator = integ;
    const auto sol = solve_wave(sys, data_for(spec, xi, T), Forcing{}, cfg);
    const Eigen::VectorXcd exact = std::cos(omega * T) * make_exponential(spec, xi).values();
    EXPECT_LT((sol.u.back().values() - exact).norm() / std::sqrt(16.0), 1e-8);
    const Eigen::VectorXcd exact_t = -omega * std::sin(omega * T) * make_exponential(spec, xi).values();
    EXPECT_LT((sol.ut.back().values() - exact_t).norm() / std::sqrt(16.0), 1e-7);
  }
}

TEST(SolveWave, ForcingOnlyGrowsLinearly) {
  const GridSpec spec(1, 16, 5);
  const auto sys = build_first_order_system(symmetrize_positive(materialize(constant_symbol(spec, 0.0))));
  const GridFunction w0 = make_exponential(spec, Frequency{0});
  const Forcing w([w0](double) { return w0; });
  CauchyData data{GridFunction(spec), GridFunction(spec), 0.0, 2.0, 1.0};
  SolverConfig cfg;
  cfg.dt = 0.01;
  const auto sol = solve_wave(sys, data, w, cfg);
  for (std::size_t i = 0; i < sol.times.size(); ++i) {
    const double t = sol.times[i];
    EXPECT_NEAR(sol.ledger.ut_norms[i], t, 1e-12);
    EXPECT_NEAR(sol.ledger.u_norms[i], 0.5 * t * t, 1e-12);
    EXPECT_NEAR(sol.ledger.forcing_integral[i], t, 1e-12);
  }
}

TEST(SolveFirstOrder, Validation) {
  const GridSpec spec(1, 16, 5);
  const auto sys = build_first_order_system(multiplier_P(spec, 1.0));
  const GridFunction v0(spec, 2);
  SolverConfig cfg;
  cfg.dt = 0.3;
  EXPECT_THROW(solve_first_order(sys, v0, Forcing{}, 1.0, cfg), DomainError);
  cfg.dt = 0.25;
  cfg.record_stride = 0;
  EXPECT_THROW(solve_first_order(sys, v0, Forcing{}, 1.0, cfg), DomainError);
  EXPECT_THROW((CauchyData{GridFunction(spec), GridFunction(spec), 0.0, 1.0, -1.0}.validate()), DomainError);
  EXPECT_THROW((CauchyData{GridFunction(spec), GridFunction(GridSpec(1, 8, 3)), 0.0, 1.0, 1.0}.validate()),
               ShapeError);
}

TEST(SolveFirstOrder, AutoSubstepRunsWhereStrictModeThrows) {
  const GridSpec spec(1, 32, 15);
  const auto sys = build_first_order_system(multiplier_P(spec, 3.0));
  const auto f = make_exponential(spec, Frequency{15});
  const GridFunction v0 = two_channel(sys.A.apply(f), GridFunction(spec));
  SolverConfig cfg;
  cfg.dt = 4.0 * stable_dt(sys);
  const double T = 8.0 * cfg.dt;
  EXPECT_THROW(solve_first_order(sys, v0, Forcing{}, T, cfg), StabilityError);
  cfg.auto_substep = true;
  const auto sol = solve_first_order(sys, v0, Forcing{}, T, cfg);
  // rk4 near its stability limit damps the top mode but never amplifies it
  EXPECT_EQ(sol.times.size(), 9u);
  EXPECT_LE(sol.ledger.v_norms.back(), sol.ledger.v_norms.front());
  EXPECT_GT(sol.ledger.v_norms.back(), 0.0);
}

TEST(SolveFirstOrder, GrowingSystemAbortsOnline) {
  const GridSpec spec(1, 16, 5);
  auto sys = build_first_order_system(multiplier_P(spec, 2.0));
  sys.lower_left = sys.P.matrix;  // v2' = +P v1: exponential growth
  const auto f = make_exponential(spec, Frequency{5});
  const GridFunction v0 = two_channel(f, GridFunction(spec));
  SolverConfig cfg;
  cfg.dt = 1e-3;
  EXPECT_THROW(solve_first_order(sys, v0, Forcing{}, 1.0, cfg), StabilityError);
}

TEST(Energy, ZeroDataGivesZeroConstant) {
  const GridSpec spec(1, 16, 5);
  const auto sys = build_first_order_system(multiplier_P(spec, 2.0));
  CauchyData data{GridFunction(spec), GridFunction(spec), 1.0, 2.0, 0.5};
  SolverConfig cfg;
  cfg.dt = 1e-3;
  const auto sol = solve_wave(sys, data, Forcing{}, cfg);
  EXPECT_EQ(verify_energy_estimate(sol.ledger, 0.0).C_star, 0.0);
  EXPECT_EQ(verify_energy_estimate(sol.ledger, 0.0, EnergyForm::kFirstOrder).C_star, 0.0);
}

TEST(Energy, MultiplierFirstOrderFormNeedsNoGrowth) {
  const GridSpec spec(1, 32, 15);
  const auto sys = build_first_order_system(multiplier_P(spec, 1.0));
  std::mt19937_64 rng(7);
  CauchyData data{GridFunction(spec, 1, oracle::random_band_limited(spec, rng)),
                  GridFunction(spec, 1, oracle::random_band_limited(spec, rng)), 0.5, 1.0, 1.0};
  SolverConfig cfg;
  cfg.dt = 1e-3;
  cfg.integrator = Integrator::kExpMidpoint;
  const auto sol = solve_wave(sys, data, Forcing{}, cfg);
  const auto fo = verify_energy_estimate(sol.ledger, 0.0, EnergyForm::kFirstOrder);
  EXPECT_LE(fo.C_star, 0.05);
  const auto wave = verify_energy_estimate(sol.ledger, 0.0);
  EXPECT_LE(wave.C_star, 5.0);
  EXPECT_DOUBLE_EQ(sol.ledger.fitted_C, wave.C_star);
  EXPECT_TRUE(verify_energy_estimate(sol.ledger, wave.C_star).holds);
}

TEST(Energy, TamperedLedgerViolatesFittedConstant) {
  const GridSpec spec(1, 32, 15);
  const auto sys = build_first_order_system(multiplier_P(spec, 2.0));
  std::mt19937_64 rng(8);
  CauchyData data{GridFunction(spec, 1, oracle::random_band_limited(spec, rng)),
                  GridFunction(spec, 1, oracle::random_band_limited(spec, rng)), 1.0, 2.0, 0.5};
  SolverConfig cfg;
  cfg.dt = 5e-4;
  const auto sol = solve_wave(sys, data, Forcing{}, cfg);
  const auto r = verify_energy_estimate(sol.ledger, 0.0);
  ASSERT_GT(r.C_star, 0.0);
  EnergyLedger tampered = sol.ledger;
  std::size_t binding = 0;
  double worst = -1.0;
  for (std::size_t i = 0; i < tampered.times.size(); ++i) {
    const double ratio = std::pow(tampered.u_norms[i], 2) / energy_bound(tampered, i, r.C_star, EnergyForm::kWave);
    if (ratio > worst) {
      worst = ratio;
      binding = i;
    }
  }
  tampered.u_norms[binding] *= 2.0;
  EXPECT_FALSE(verify_energy_estimate(tampered, r.C_star).holds);
  EXPECT_GT(verify_energy_estimate(tampered, r.C_star).worst_ratio, 1.0);
}

TEST(Energy, ConservedForExactPropagatorAndBandLimited) {
  const GridSpec spec(2, 16, 7);
  const auto sys = build_first_order_system(multiplier_P(spec, 2.0));
  std::mt19937_64 rng(9);
  CauchyData data{GridFunction(spec, 1, oracle::random_band_limited(spec, rng)),
                  GridFunction(spec, 1, oracle::random_band_limited(spec, rng)), 1.0, 2.0, 0.5};
  SolverConfig cfg;
  cfg.dt = 0.01;
  cfg.integrator = Integrator::kExpMidpoint;
  const auto sol = solve_wave(sys, data, Forcing{}, cfg);
  const auto drift = conserved_energy_probe(sys.P, sol.u, sol.ut);
  EXPECT_TRUE(drift.relative);
  EXPECT_LT(drift.max_drift, 1e-10);
  for (const auto& u : sol.u) EXPECT_LT(band_limit_defect(u), 1e-10);
}

TEST(Energy, Rk4DriftShrinksWithStep) {
  const GridSpec spec(1, 32, 15);
  const auto sys = build_first_order_system(multiplier_P(spec, 1.0));
  std::mt19937_64 rng(10);
  CauchyData data{GridFunction(spec, 1, oracle::random_band_limited(spec, rng)), GridFunction(spec), 0.0, 1.0, 1.0};
  double prev = 0.0;
  for (double dt : {4e-3, 2e-3}) {
    SolverConfig cfg;
    cfg.dt = dt;
    const auto sol = solve_wave(sys, data, Forcing{}, cfg);
    const double d = conserved_energy_probe(sys.P, sol.u, sol.ut).max_drift;
    EXPECT_LT(d, 1e-7);
    if (prev > 0.0) EXPECT_LT(d, prev / 8.0);
    prev = d;
  }
}

TEST(LedgerCsv, Header) {
  EnergyLedger led;
  led.times = {0.0};
  led.u_norms = {1.0};
  led.ut_norms = {0.0};
  led.forcing_integral = {0.0};
  led.conserved_E = {1.0};
  led.f0_norm = 1.0;
  std::ostringstream os;
  write_ledger_csv(os, led);
  EXPECT_EQ(os.str().substr(0, os.str().find('\n')),
            "t,u_Hs,ut_Hs_minus_nu_half,forcing_integral,E_conserved,bound_rhs");
}
