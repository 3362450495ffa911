#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "oracles.hpp"
#include "torpsi/error.hpp"
#include "torpsi/symbol.hpp"

using namespace torpsi;

namespace {

constexpr double kPi = std::numbers::pi;

ScalarSymbol x_only(const GridSpec& spec, std::function<Complex(double)> f, int margin = kDefaultMargin) {
  return ScalarSymbol::tabulate(
      spec, SymbolClass{0, 1, 0}, [f](std::span<const double> x, const Frequency&) { return f(x[0]); },
      margin);
}

ScalarSymbol xi_only(const GridSpec& spec, std::function<Complex(const Frequency&)> f,
                     SymbolClass cls = {0, 1, 0}, int margin = kDefaultMargin) {
  return ScalarSymbol::tabulate(
      spec, cls, [f](std::span<const double>, const Frequency& xi) { return f(xi); }, margin);
}

double max_abs_on_lattice(const ScalarSymbol& a, const ScalarSymbol& b) {
  const auto lattice = a.spec().lattice();
  double m = 0.0;
  for (std::size_t j = 0; j < a.spec().grid_size(); ++j)
    for (std::size_t k = 0; k < lattice.size(); ++k)
      m = std::max(m, std::abs(a(j, lattice.point(k)) - b(j, lattice.point(k))));
  return m;
}

}  // namespace

TEST(SymbolClass, Validation) {
  EXPECT_NO_THROW(SymbolClass::make(2.0, 1.0, 0.0));
  EXPECT_THROW(SymbolClass::make(2.0, 1.5, 0.0), DomainError);
  EXPECT_THROW(SymbolClass::make(2.0, 1.0, -0.1), DomainError);
}

TEST(ScalarSymbol, ConstructorChecksShapeAndFiniteness) {
  const GridSpec spec(1, 8, 3);
  const auto box = LatticeBox::symmetric(1, 5);
  EXPECT_THROW(ScalarSymbol(spec, {}, box, std::vector<Complex>(10)), ShapeError);
  std::vector<Complex> v(8 * box.size(), 1.0);
  v[3] = Complex(INFINITY, 0.0);
  EXPECT_THROW(ScalarSymbol(spec, {}, box, v), DomainError);
  const ScalarSymbol ok(spec, {}, box, std::vector<Complex>(8 * box.size(), 1.0));
  EXPECT_EQ(ok.margin(), 2);
}

TEST(ForwardDifference, Examples1d) {
  const GridSpec spec(1, 16, 6);
  const auto lin = xi_only(spec, [](const Frequency& xi) { return Complex(xi[0]); });
  const auto d = forward_difference(lin, make_multi_index({1}));
  const auto sq = xi_only(spec, [](const Frequency& xi) { return Complex(double(xi[0]) * xi[0]); });
  const auto d2 = forward_difference(sq, make_multi_index({2}));
  const auto lattice = spec.lattice();
  for (std::size_t k = 0; k < lattice.size(); ++k) {
    const auto xi = lattice.point(k);
    EXPECT_EQ(d(0, xi), Complex(1.0));
    EXPECT_EQ(d2(0, xi), Complex(2.0));
  }
  const auto c = constant_symbol(spec, Complex(3.0, -1.0));
  EXPECT_EQ(forward_difference(c, make_multi_index({1}))(0, Frequency{2}), Complex(0.0));
  EXPECT_EQ(forward_difference(c, make_multi_index({0})).box(), c.box());
}

TEST(ForwardDifference, Mixed2d) {
  const GridSpec spec(2, 10, 3);
  const auto prod = xi_only(spec, [](const Frequency& xi) { return Complex(double(xi[0]) * xi[1]); });
  const auto d = forward_difference(prod, make_multi_index({1, 1}));
  const auto lattice = spec.lattice();
  for (std::size_t k = 0; k < lattice.size(); ++k) EXPECT_EQ(d(5, lattice.point(k)), Complex(1.0));
  EXPECT_DOUBLE_EQ(d.symbol_class().order, -2.0);
}

TEST(ForwardDifference, MarginErrorWhenLatticeNotCovered) {
  const GridSpec spec(1, 8, 3);
  const auto a = constant_symbol(spec, 1.0, 2);
  EXPECT_NO_THROW(forward_difference(a, make_multi_index({2})));
  EXPECT_THROW(forward_difference(a, make_multi_index({3})), MarginError);
  EXPECT_NO_THROW(forward_difference(a, make_multi_index({3}), Coverage::kAvailable));
}

TEST(DifferenceBinomial, AgreesExactlyWithRecursionOnIntegers) {
  std::mt19937_64 rng(17);
  for (int dim = 1; dim <= 2; ++dim) {
    const GridSpec spec(dim, 6, 2);
    const auto a = oracle::random_symbol(spec, rng, 4, true);
    for (const auto& alpha : multi_indices_up_to(dim, 4)) {
      const auto r = forward_difference(a, alpha);
      const auto b = difference_binomial(a, alpha);
      ASSERT_EQ(r.box(), b.box());
      for (std::size_t i = 0; i < r.values().size(); ++i) EXPECT_EQ(r.values()[i], b.values()[i]);
    }
  }
}

TEST(DifferenceBinomial, KillsPolynomialsOfLowerDegree) {
  const GridSpec spec(1, 16, 6);
  const auto cubic = xi_only(spec, [](const Frequency& xi) { return Complex(std::pow(double(xi[0]), 3)); });
  const auto d3 = difference_binomial(cubic, make_multi_index({3}));
  const auto d4 = difference_binomial(cubic, make_multi_index({4}));
  const auto lattice = spec.lattice();
  for (std::size_t k = 0; k < lattice.size(); ++k) {
    EXPECT_EQ(d3(0, lattice.point(k)), Complex(6.0));
    EXPECT_EQ(d4(0, lattice.point(k)), Complex(0.0));
  }
}

TEST(XDerivative, TrigExamples) {
  const GridSpec spec(1, 16, 4);
  const auto s = x_only(spec, [](double x) { return Complex(std::sin(2 * kPi * x)); });
  const auto ds = x_derivative(s, make_multi_index({1}));
  const auto expected = x_only(spec, [](double x) { return Complex(2 * kPi * std::cos(2 * kPi * x)); });
  EXPECT_LT(max_abs_on_lattice(ds, expected), 1e-12);

  const auto e3 = x_only(spec, [](double x) { return std::polar(1.0, 2 * kPi * 3 * x); });
  const auto d2 = x_derivative(e3, make_multi_index({2}));
  const auto ex2 = x_only(spec, [](double x) { return -std::pow(6 * kPi, 2) * std::polar(1.0, 2 * kPi * 3 * x); });
  EXPECT_LT(max_abs_on_lattice(d2, ex2) / std::pow(6 * kPi, 2), 1e-13);

  const auto c = constant_symbol(spec, 2.0);
  EXPECT_LT(max_abs_on_lattice(x_derivative(c, make_multi_index({1})), constant_symbol(spec, 0.0)), 1e-13);
}

TEST(XDerivative, SerialAndParallelAgreeBitwise) {
  std::mt19937_64 rng(8);
  const GridSpec spec(2, 8, 3);
  const auto a = oracle::random_symbol(spec, rng);
  const auto beta = make_multi_index({1, 2});
  const auto p = x_derivative(a, beta);
  const auto s = x_derivative_serial(a, beta);
  for (std::size_t i = 0; i < p.values().size(); ++i) EXPECT_EQ(p.values()[i], s.values()[i]);
}

TEST(XDerivative, MatchesTrigPolynomialOracle2d) {
  const GridSpec spec(2, 12, 3);
  // a(x, xi) = cos(2 pi (x1 + 2 x2)) <xi>
  const auto a = ScalarSymbol::tabulate(spec, {1, 1, 0}, [](std::span<const double> x, const Frequency& xi) {
    return Complex(std::cos(2 * kPi * (x[0] + 2 * x[1])) * japanese_bracket(xi));
  });
  const auto d = x_derivative(a, make_multi_index({1, 1}));
  // d1 d2 cos(2 pi (x1 + 2 x2)) = -(2 pi)(4 pi) cos(...)
  const auto ex = ScalarSymbol::tabulate(spec, {1, 1, 0}, [](std::span<const double> x, const Frequency& xi) {
    return Complex(-8 * kPi * kPi * std::cos(2 * kPi * (x[0] + 2 * x[1])) * japanese_bracket(xi));
  });
  EXPECT_LT(max_abs_on_lattice(d, ex), 1e-10);
}

TEST(XFallingDerivative, BinomialMultiplier) {
  const GridSpec spec(1, 16, 4);
  // e^{2 pi i 3 x}: (1/2!) D^(2) multiplies by C(3, 2) = 3
  const auto e3 = x_only(spec, [](double x) { return std::polar(1.0, 2 * kPi * 3 * x); });
  const auto f = x_falling_derivative(e3, make_multi_index({2}));
  const auto ex = x_only(spec, [](double x) { return 3.0 * std::polar(1.0, 2 * kPi * 3 * x); });
  EXPECT_LT(max_abs_on_lattice(f, ex), 1e-12);
  // e^{-2 pi i x}: C(-1, 2) = 1
  const auto em = x_only(spec, [](double x) { return std::polar(1.0, -2 * kPi * x); });
  EXPECT_LT(max_abs_on_lattice(x_falling_derivative(em, make_multi_index({2})), em), 1e-12);
  // first order reduces to D = (2 pi i)^{-1} d_x
  const auto d1 = x_falling_derivative(e3, make_multi_index({1}));
  EXPECT_LT(max_abs_on_lattice(d1, 3.0 * e3), 1e-12);
}

TEST(Seminorm, Examples) {
  const GridSpec spec(1, 16, 6);
  const auto c = constant_symbol(spec, 1.0);
  EXPECT_NEAR(seminorm_estimate(c, make_multi_index({0}), make_multi_index({0})).value, 1.0, 1e-15);

  const auto s = ScalarSymbol::tabulate(spec, {0, 1, 0}, [](std::span<const double> x, const Frequency&) {
    return Complex(std::sin(2 * kPi * x[0]));
  });
  EXPECT_NEAR(seminorm_estimate(s, make_multi_index({0}), make_multi_index({1})).value, 2 * kPi, 1e-10);

  const auto b = bessel_symbol(spec, 2.0);
  EXPECT_NEAR(seminorm_estimate(b, make_multi_index({0}), make_multi_index({0})).value, 1.0, 1e-13);
}

TEST(ShellSuprema, ReportsArgmax) {
  const GridSpec spec(1, 64, 31);
  const auto b = bessel_symbol(spec, 1.0);
  const auto shells = shell_suprema(b, 31.0);
  ASSERT_EQ(shells.size(), 5u);
  for (const auto& s : shells) {
    EXPECT_NEAR(s.sup, s.bracket, 1e-12);
    EXPECT_EQ(std::abs(s.argmax[0]), (1 << (s.k + 1)) - 1);
  }
}

TEST(ClassProbe, BracketPowerHasExpectedSlopes) {
  const GridSpec spec(1, 128, 63);
  const auto a = bessel_symbol(spec, 0.5);
  const auto r = class_membership_probe(a, 1, 0);
  ASSERT_EQ(r.entries.size(), 2u);
  EXPECT_NEAR(r.entries[0].slope, 0.5, 0.1);
  EXPECT_NEAR(r.entries[1].slope, -0.5, 0.1);
  EXPECT_TRUE(r.pass);
}

TEST(ClassProbe, FracLaplacianInItsClass) {
  const GridSpec spec(2, 32, 15);
  const auto r = class_membership_probe(frac_laplacian_symbol(spec, 1.0), 2, 1);
  EXPECT_TRUE(r.pass);
  for (const auto& e : r.entries) EXPECT_LE(e.slope, e.claimed + r.slack);
}

TEST(ClassProbe, OscillatingSymbolDetectsRho) {
  const GridSpec spec(1, 256, 127);
  const auto a = oscillating_symbol(spec, 1.0, 0.4);
  EXPECT_TRUE(class_membership_probe(a, 3, 0).pass);
  EXPECT_FALSE(class_membership_probe(a.with_class({1.0, 0.7, 0.0}), 3, 0).pass);
}

TEST(ClassProbe, WhiteNoiseFailsDeclaredDecay) {
  std::mt19937_64 rng(21);
  const GridSpec spec(1, 64, 31);
  const auto noise = oracle::random_symbol(spec, rng).with_class({-1.0, 1.0, 0.0});
  EXPECT_FALSE(class_membership_probe(noise, 1, 0).pass);
}

TEST(ClassProbe, ZeroSymbolPassesAndFewShellsThrow) {
  EXPECT_TRUE(class_membership_probe(constant_symbol(GridSpec(1, 64, 31), 0.0), 2, 1).pass);
  EXPECT_THROW(class_membership_probe(constant_symbol(GridSpec(1, 16, 6), 1.0), 1, 0), ShellError);
}

TEST(Ellipticity, FracLaplacianConstant) {
  const GridSpec spec(1, 32, 15);
  const auto r = strong_ellipticity_check(frac_laplacian_symbol(spec, 2.0), 1);
  EXPECT_TRUE(r.elliptic);
  EXPECT_NEAR(r.c0, 4 * kPi * kPi / 2.0, 1e-10);
  EXPECT_EQ(std::abs(r.xi[0]), 1);
}

TEST(Ellipticity, ImaginaryBracketNotStronglyElliptic) {
  const GridSpec spec(2, 16, 7);
  const auto a = ScalarSymbol::tabulate(spec, {1, 1, 0}, [](std::span<const double>, const Frequency& xi) {
    return Complex(0.0, japanese_bracket(xi));
  });
  EXPECT_TRUE(ellipticity_check(a).elliptic);
  EXPECT_NEAR(ellipticity_check(a).c0, 1.0, 1e-14);
  EXPECT_FALSE(strong_ellipticity_check(a).elliptic);
  EXPECT_THROW(ellipticity_check(a, 7), DomainError);
}

TEST(Arithmetic, ProductOrderAndIntersection) {
  const GridSpec spec(1, 16, 6);
  const auto a = bessel_symbol(spec, 1.0, 4);
  const auto b = bessel_symbol(spec, 1.0, 2);
  const auto p = a * b;
  EXPECT_DOUBLE_EQ(p.symbol_class().order, 2.0);
  EXPECT_EQ(p.box(), b.box());
  EXPECT_NEAR(std::abs(p(0, Frequency{3}) - 10.0), 0.0, 1e-13);
  EXPECT_NEAR(std::abs(conjugate(Complex(0, 1) * a)(2, Frequency{1}) - Complex(0.0, -std::sqrt(2.0))), 0.0, 1e-15);
  EXPECT_THROW(a + bessel_symbol(GridSpec(1, 8, 3), 1.0), ShapeError);
}

TEST(Builtins, ValuesAndValidation) {
  const GridSpec spec(1, 16, 6);
  EXPECT_NEAR(frac_laplacian_symbol(spec, 1.5)(0, Frequency{2}).real(), std::pow(4 * kPi, 1.5), 1e-10);
  EXPECT_EQ(frac_laplacian_symbol(spec, 1.5)(0, Frequency{0}), Complex(0.0));
  const auto osc = oscillating_symbol(spec, 1.0, 0.5);
  EXPECT_NEAR(std::abs(osc(0, Frequency{3})), 6 * kPi, 1e-12);
  EXPECT_NEAR(std::arg(osc(0, Frequency{1})), std::remainder(std::sqrt(2 * kPi), 2 * kPi), 1e-12);

  const auto q = Coefficient::parse("cos 1 0.5", 1);
  const auto v = variable_symbol(spec, 2.0, q);
  EXPECT_NEAR(v(0, Frequency{1}).real(), 1.5 * 4 * kPi * kPi, 1e-10);
  EXPECT_THROW(variable_symbol(spec, 2.0, Coefficient::parse("cos 1 1.5", 1)), DomainError);
  EXPECT_THROW(Coefficient::parse("tan 1 1", 1), DomainError);
  EXPECT_THROW(Coefficient::parse("cos 1,2 1", 1), DomainError);
  BuiltinParams params;
  EXPECT_THROW(builtin_symbol(spec, "nonsense", params), DomainError);
}

TEST(Coefficient, ParseAndEvaluate) {
  const auto c = Coefficient::parse("const 0.25; cos 1,0 0.5; sin 0,2 -1", 2);
  const double x[2] = {0.125, 0.0625};
  const double expected = 0.25 + 0.5 * std::cos(2 * kPi * 0.125) - std::sin(2 * kPi * 2 * 0.0625);
  EXPECT_NEAR(c(x), expected, 1e-15);
}

TEST(SymbolIo, RoundTripIsExact) {
  std::mt19937_64 rng(99);
  const GridSpec spec(2, 6, 2);
  const auto a = oracle::random_symbol(spec, rng, 2).with_class({1.5, 0.5, 0.25});
  std::stringstream ss;
  write_symbol(ss, a);
  const auto b = read_symbol(ss);
  EXPECT_EQ(a.box(), b.box());
  EXPECT_EQ(b.spec(), spec);
  EXPECT_DOUBLE_EQ(b.symbol_class().rho, 0.5);
  for (std::size_t i = 0; i < a.values().size(); ++i) EXPECT_EQ(a.values()[i], b.values()[i]);
}

TEST(SymbolIo, MalformedInputRejected) {
  std::stringstream bad("symbol 1 8 3 4 0 1 0\n0 0 1.0\n");
  EXPECT_THROW(read_symbol(bad), Error);
  std::stringstream header("matrix 1 8 3\n");
  EXPECT_THROW(read_symbol(header), Error);
}
