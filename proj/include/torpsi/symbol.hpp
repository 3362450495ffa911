#pragma once

// Toroidal symbols a(x, xi) tabulated on grid x lattice, their difference and
// derivative calculus, seminorms, class diagnostics and ellipticity checks.

#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "torpsi/grid.hpp"
#include "torpsi/shells.hpp"

namespace torpsi {

/// Class parameters (m, rho, delta) of S^m_{rho,delta}.
struct SymbolClass {
  double order = 0.0;
  double rho = 1.0;
  double delta = 0.0;

  /// Throws DomainError unless 0 <= rho, delta <= 1.
  static SymbolClass make(double order, double rho, double delta);
};

inline constexpr int kDefaultMargin = 4;

/// Symbol values on grid x box.  The box normally is the inflated lattice
/// [-(N+D), N+D]^n so that differences up to order D stay exact on L.
class ScalarSymbol {
 public:
  using Generator = std::function<Complex(std::span<const double> x, const Frequency& xi)>;

  ScalarSymbol(GridSpec spec, SymbolClass cls, LatticeBox box, std::vector<Complex> values,
               std::string origin = "tabulated");

  /// Samples `gen` on the grid and the lattice inflated by `margin`.
  static ScalarSymbol tabulate(const GridSpec& spec, SymbolClass cls, const Generator& gen,
                               int margin = kDefaultMargin, std::string origin = "tabulated");

  const GridSpec& spec() const { return spec_; }
  const SymbolClass& symbol_class() const { return class_; }
  const LatticeBox& box() const { return box_; }
  const std::string& origin() const { return origin_; }
  std::span<const Complex> values() const { return values_; }
  std::span<Complex> values() { return values_; }

  /// Smallest number of lattice steps past +N available on any axis.
  int margin() const;

  Complex operator()(std::size_t x_index, const Frequency& xi) const {
    return values_[x_index * box_.size() + box_.index(xi)];
  }
  Complex& at(std::size_t x_index, const Frequency& xi) {
    return values_[x_index * box_.size() + box_.index(xi)];
  }
  /// All box values at one grid point.
  std::span<const Complex> row(std::size_t x_index) const {
    return {values_.data() + x_index * box_.size(), box_.size()};
  }

  ScalarSymbol with_class(SymbolClass cls) const;
  /// Values restricted to a sub-box.
  ScalarSymbol restricted(const LatticeBox& sub) const;
  bool x_independent(double tol = 0.0) const;

 private:
  GridSpec spec_;
  SymbolClass class_;
  LatticeBox box_;
  std::vector<Complex> values_;
  std::string origin_;
};

/// l x l matrix of scalar symbols on a common grid.
class MatrixSymbol {
 public:
  MatrixSymbol(int size, std::vector<ScalarSymbol> entries);

  int size() const { return size_; }
  const ScalarSymbol& entry(int i, int j) const { return entries_[i * size_ + j]; }
  const GridSpec& spec() const { return entries_.front().spec(); }

 private:
  int size_;
  std::vector<ScalarSymbol> entries_;
};

// ------------------------------------------------------------ arithmetic

ScalarSymbol conjugate(const ScalarSymbol& a);
/// Pointwise a + b, a - b, a * b on the common box.
ScalarSymbol operator+(const ScalarSymbol& a, const ScalarSymbol& b);
ScalarSymbol operator-(const ScalarSymbol& a, const ScalarSymbol& b);
ScalarSymbol operator*(const ScalarSymbol& a, const ScalarSymbol& b);
ScalarSymbol operator*(Complex lambda, const ScalarSymbol& a);

// ------------------------------------------------------------ differences

/// Which lattice the result of a difference must still cover.
enum class Coverage {
  kLattice,    // must cover L; MarginError otherwise
  kAvailable,  // whatever remains of the box
};

/// Delta_xi^alpha by iterated one-step forward differences.  The result box
/// loses alpha_i points at the top of each axis; class order becomes
/// m - rho |alpha|.
ScalarSymbol forward_difference(const ScalarSymbol& a, const MultiIndex& alpha,
                                Coverage coverage = Coverage::kLattice);

/// Delta_xi^alpha by the closed binomial sum
///   sum_{beta <= alpha} (-1)^{|alpha - beta|} C(alpha, beta) a(xi + beta).
ScalarSymbol difference_binomial(const ScalarSymbol& a, const MultiIndex& alpha,
                                 Coverage coverage = Coverage::kLattice);

/// d_x^beta, spectrally in x for every lattice point.  Class order becomes
/// m + delta |beta|.  The Nyquist coefficient is dropped.
ScalarSymbol x_derivative(const ScalarSymbol& a, const MultiIndex& beta);
ScalarSymbol x_derivative_serial(const ScalarSymbol& a, const MultiIndex& beta);

/// (1/alpha!) D_x^{(alpha)} with D = (2 pi i)^{-1} d_x and
/// D^{(k)} = D (D - 1) ... (D - k + 1): x-Fourier multiplier prod_i C(k_i, alpha_i).
ScalarSymbol x_falling_derivative(const ScalarSymbol& a, const MultiIndex& alpha);

// ------------------------------------------------------------ diagnostics

struct SeminormEstimate {
  double value = 0.0;
  std::size_t x_index = 0;
  Frequency xi;
};

/// sup over grid x available box of <xi>^{rho|alpha| - delta|beta| - m} |d_x^beta Delta^alpha a|.
SeminormEstimate seminorm_estimate(const ScalarSymbol& a, const MultiIndex& alpha,
                                   const MultiIndex& beta);

struct ShellSup {
  int k = 0;
  double sup = 0.0;
  double bracket = 1.0;  // <xi> at the arg-max
  Frequency argmax;
};

/// Per-shell sup over the grid of |a| for shells inside radius R.
std::vector<ShellSup> shell_suprema(const ScalarSymbol& a, double max_radius);

struct ClassProbeEntry {
  MultiIndex alpha;
  MultiIndex beta;
  double slope = 0.0;
  double claimed = 0.0;  // m - rho|alpha| + delta|beta|
  double residual = 0.0;
  bool pass = false;
};

struct ClassProbeReport {
  SymbolClass declared;
  double slack = 0.3;
  std::vector<ClassProbeEntry> entries;
  bool pass = false;
};

inline constexpr double kClassSlack = 0.3;

/// Dyadic-shell regression of sup |d_x^beta Delta^alpha a| against <xi> for
/// every |alpha| <= max_alpha, |beta| <= max_beta; an entry passes when the
/// fitted slope is at most the class exponent plus `slack`.  Shells are taken
/// inside |xi| <= N.  Throws ShellError with fewer than four shells.
ClassProbeReport class_membership_probe(const ScalarSymbol& a, int max_alpha, int max_beta,
                                        double slack = kClassSlack);

struct EllipticityReport {
  bool elliptic = false;
  double c0 = 0.0;
  std::size_t x_index = 0;
  Frequency xi;
};

/// min over grid x {xi in L : |xi| >= n0} of |a| / <xi>^m.
EllipticityReport ellipticity_check(const ScalarSymbol& a, int n0 = 1);
/// Same with Re a in place of |a|.
EllipticityReport strong_ellipticity_check(const ScalarSymbol& a, int n0 = 1);

// ------------------------------------------------------------ built-in symbols

/// Real band-limited periodic coefficient
///   q(x) = constant + sum_k (cos_amp cos(2 pi k.x) + sin_amp sin(2 pi k.x)).
struct TrigTerm {
  Frequency k;
  double cos_amp = 0.0;
  double sin_amp = 0.0;
};

struct Coefficient {
  double constant = 0.0;
  std::vector<TrigTerm> terms;

  double operator()(std::span<const double> x) const;
  /// Parses "cos 1 0.5; sin 1,2 0.25" (kind, comma-separated k, amplitude).
  static Coefficient parse(const std::string& text, int dim);
};

/// (2 pi |xi|)^nu, class (nu, 1, 0); zero at xi = 0.
ScalarSymbol frac_laplacian_symbol(const GridSpec& spec, double nu, int margin = kDefaultMargin);
/// (1 + |xi|^2)^{s/2}, class (s, 1, 0).
ScalarSymbol bessel_symbol(const GridSpec& spec, double s, int margin = kDefaultMargin);
/// (2 pi |xi|)^nu exp(i (2 pi |xi|)^{1 - rho}), class (nu, rho, 0).
ScalarSymbol oscillating_symbol(const GridSpec& spec, double nu, double rho,
                                int margin = kDefaultMargin);
/// (1 + q(x)) (2 pi |xi|)^nu with q > -1 on the grid, class (nu, 1, 0).
ScalarSymbol variable_symbol(const GridSpec& spec, double nu, const Coefficient& q,
                             int margin = kDefaultMargin);
/// c(x) <xi>^m for a band-limited c, class (m, 1, 0).
ScalarSymbol modulated_bracket_symbol(const GridSpec& spec, double m, const Coefficient& c,
                                      int margin = kDefaultMargin);
/// Constant value, class (0, 1, 0).
ScalarSymbol constant_symbol(const GridSpec& spec, Complex value, int margin = kDefaultMargin);

struct BuiltinParams {
  double nu = 2.0;
  double rho = 1.0;
  Coefficient q;
  int margin = kDefaultMargin;
};

/// Dispatch by name: frac_laplacian, bessel, oscillating, variable.
ScalarSymbol builtin_symbol(const GridSpec& spec, const std::string& kind,
                            const BuiltinParams& params);

// ------------------------------------------------------------ text format

/// Header line "symbol n G N Dmax m rho delta", then one row per value:
/// x-index, xi components, Re, Im (17 significant digits).
void write_symbol(std::ostream& os, const ScalarSymbol& a);
ScalarSymbol read_symbol(std::istream& is);

}  // namespace torpsi
