#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "oracles.hpp"
#include "torpsi/calculus.hpp"
#include "torpsi/error.hpp"
#include "torpsi/quantize.hpp"

using namespace torpsi;

namespace {

constexpr double kPi = std::numbers::pi;

double max_abs(const ScalarSymbol& a) {
  double m = 0.0;
  for (const Complex& v : a.values()) m = std::max(m, std::abs(v));
  return m;
}

ScalarSymbol modulated(const GridSpec& spec, double m, const std::string& coeff) {
  return modulated_bracket_symbol(spec, m, Coefficient::parse(coeff, spec.dim()));
}

}  // namespace

TEST(RemainderOrder, RecoversBracketPowers) {
  const GridSpec spec(1, 128, 63);
  EXPECT_NEAR(remainder_order_estimate(bessel_symbol(spec, -2.0)).slope, -2.0, 0.15);
  EXPECT_NEAR(remainder_order_estimate(bessel_symbol(spec, 0.0)).slope, 0.0, 0.1);
  const auto zero = remainder_order_estimate(constant_symbol(spec, 0.0));
  EXPECT_EQ(zero.slope, kMinusInfinity);
  EXPECT_EQ(zero.used, 0);
}

TEST(RemainderOrder, TooFewShellsThrow) {
  EXPECT_THROW(remainder_order_estimate(bessel_symbol(GridSpec(1, 32, 12), 1.0)), ShellError);
}

TEST(AdjointExpansion, MultiplierIsExactAtOrderZero) {
  const GridSpec spec(2, 16, 7);
  const auto a = ScalarSymbol::tabulate(spec, {1, 1, 0}, [](std::span<const double>, const Frequency& xi) {
    return Complex(japanese_bracket(xi), 0.5 * xi[0]);
  });
  const auto e = adjoint_expansion(a, 0);
  EXPECT_LT(max_abs(e.remainder), 1e-12 * max_abs(e.reference));
}

TEST(AdjointExpansion, SelfAdjointnessForRealMultiplier) {
  const GridSpec spec(1, 32, 12);
  const auto a = frac_laplacian_symbol(spec, 1.0);
  const auto e = adjoint_expansion(a, 2);
  EXPECT_LT(oracle::symbol_distance(e.reference, a.restricted(spec.lattice())), 1e-12);
}

TEST(AdjointExpansion, ExactForFirstDegreeXDependence) {
  // conj a = e^{2 pi i x} b(xi): the falling factorial multiplier C(1, alpha)
  // vanishes for alpha >= 2.  The top row of L loses its shifted partner.
  const GridSpec spec(1, 32, 12);
  const auto a = ScalarSymbol::tabulate(spec, {1, 1, 0}, [](std::span<const double> x, const Frequency& xi) {
    return std::polar(1.0, -2 * kPi * x[0]) * japanese_bracket(xi);
  });
  const auto inner = LatticeBox::symmetric(1, 11);
  const auto e = adjoint_expansion(a, 1);
  EXPECT_LT(max_abs(e.remainder.restricted(inner)), 1e-11 * max_abs(e.reference));
  const auto e0 = adjoint_expansion(a, 0);
  EXPECT_GT(max_abs(e0.remainder.restricted(inner)), 0.1);
}

TEST(AdjointExpansion, RemainderDecaysWithTruncation) {
  const GridSpec spec(1, 128, 63);
  const auto a = modulated(spec, 1.0, "const 1; cos 1 0.3; sin 2 0.2");
  std::vector<double> slopes;
  for (int t = 0; t <= 2; ++t) {
    const auto chk = check_expansion(adjoint_expansion(a, t));
    EXPECT_TRUE(chk.pass) << "truncation " << t << " slope " << chk.base.slope;
    slopes.push_back(chk.base.slope);
  }
  EXPECT_LE(slopes[1], slopes[0] - 0.7);
}

TEST(CompositionExpansion, SplitCaseIsExactAtOrderZero) {
  // a1 depends on x only, a2 on xi only: Op(a1) Op(a2) = Op(a1 a2)
  const GridSpec spec(2, 16, 7);
  const auto a1 = ScalarSymbol::tabulate(spec, {0, 1, 0}, [](std::span<const double> x, const Frequency&) {
    return Complex(1.0 + 0.5 * std::cos(2 * kPi * x[0]), 0.25 * std::sin(2 * kPi * x[1]));
  });
  const auto a2 = bessel_symbol(spec, 1.0);
  const auto e = composition_expansion(a1, a2, 0);
  EXPECT_LT(max_abs(e.remainder), 1e-12 * max_abs(e.reference));
}

TEST(CompositionExpansion, XIndependentRightFactorIsExact) {
  std::mt19937_64 rng(13);
  const GridSpec spec(1, 16, 6);
  const auto a1 = oracle::random_symbol(spec, rng);
  const auto a2 = frac_laplacian_symbol(spec, 0.5);
  const auto e = composition_expansion(a1, a2, 0);
  EXPECT_LT(max_abs(e.remainder), 1e-12 * max_abs(e.reference));
}

TEST(CompositionExpansion, SwappedOrderLeavesCommutatorRemainder) {
  // b(xi) c(x): the order-zero term misses the commutator, the first-order
  // term captures its leading part.
  const GridSpec spec(1, 128, 63);
  const auto b = bessel_symbol(spec, 1.0);
  const auto c = modulated(spec, 0.0, "const 1; cos 1 0.4");
  const auto e0 = check_expansion(composition_expansion(b, c, 0));
  const auto e1 = check_expansion(composition_expansion(b, c, 1));
  EXPECT_NEAR(e0.base.slope, 0.0, 0.3);
  EXPECT_LE(e1.base.slope, e0.base.slope - 0.7);
  EXPECT_TRUE(e0.pass);
  EXPECT_TRUE(e1.pass);
}

TEST(CompositionExpansion, ModulatedBracketsPassChecks) {
  const GridSpec spec(1, 128, 63);
  const auto a1 = modulated(spec, 1.0, "const 1; cos 1 0.3");
  const auto a2 = modulated(spec, -1.0, "const 1; sin 1 0.25; cos 2 0.1");
  for (int t = 0; t <= 3; ++t) {
    const auto chk = check_expansion(composition_expansion(a1, a2, t));
    EXPECT_TRUE(chk.pass) << "truncation " << t << " slope " << chk.base.slope;
    EXPECT_DOUBLE_EQ(chk.claimed, -(t + 1.0));
  }
}

TEST(CompositionExpansion, Validation) {
  const GridSpec spec(1, 16, 6);
  const auto a = bessel_symbol(spec, 1.0, 2);
  EXPECT_THROW(composition_expansion(a, a, 3), MarginError);
  EXPECT_THROW(adjoint_expansion(a, -1), DomainError);
  EXPECT_THROW(composition_expansion(a, bessel_symbol(GridSpec(1, 8, 3), 1.0), 0), ShapeError);
}

TEST(ExpansionCsv, HeaderAndRows) {
  const GridSpec spec(1, 64, 31);
  const auto a = modulated(spec, 1.0, "const 1; cos 1 0.3");
  std::vector<ExpansionCheck> checks{check_expansion(adjoint_expansion(a, 0))};
  std::ostringstream os;
  write_expansion_csv(os, checks);
  std::istringstream is(os.str());
  std::string line;
  std::getline(is, line);
  EXPECT_EQ(line, "N,shell,sup,fitted_slope,claimed_order,pass");
  int rows = 0;
  while (std::getline(is, line)) ++rows;
  EXPECT_EQ(rows, static_cast<int>(checks[0].base.shells.size()));
}
