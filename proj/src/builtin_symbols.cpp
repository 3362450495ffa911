#include <cmath>
#include <numbers>
#include <sstream>

#include "torpsi/error.hpp"
#include "torpsi/symbol.hpp"

namespace torpsi {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

double lattice_radius(const Frequency& xi) {
  return std::sqrt(static_cast<double>(norm_sq(xi)));
}

// (2 pi |xi|)^nu with the value 0 at the origin
double frac_power(const Frequency& xi, double nu) {
  const double r = lattice_radius(xi);
  return r == 0.0 ? 0.0 : std::pow(kTwoPi * r, nu);
}

}  // namespace

double Coefficient::operator()(std::span<const double> x) const {
  double v = constant;
  for (const TrigTerm& t : terms) {
    double phase = 0.0;
    for (int i = 0; i < t.k.dim; ++i) phase += t.k[i] * x[i];
    phase *= kTwoPi;
    v += t.cos_amp * std::cos(phase) + t.sin_amp * std::sin(phase);
  }
  return v;
}

Coefficient Coefficient::parse(const std::string& text, int dim) {
  Coefficient c;
  std::stringstream all(text);
  std::string item;
  while (std::getline(all, item, ';')) {
    std::istringstream in(item);
    std::string kind;
    if (!(in >> kind)) continue;
    if (kind == "const") {
      double v;
      if (!(in >> v)) throw DomainError("coefficient term 'const' needs a value: " + item);
      c.constant += v;
      continue;
    }
    if (kind != "cos" && kind != "sin")
      throw DomainError("coefficient term must start with cos, sin or const: " + item);
    std::string ks;
    double amp;
    if (!(in >> ks >> amp)) throw DomainError("malformed coefficient term: " + item);
    TrigTerm term;
    term.k = Frequency(dim);
    std::stringstream kin(ks);
    std::string comp;
    int i = 0;
    while (std::getline(kin, comp, ',')) {
      if (i >= dim) throw DomainError("coefficient frequency has too many components: " + ks);
      term.k[i++] = std::stoi(comp);
    }
    if (i != dim) throw DomainError("coefficient frequency needs " + std::to_string(dim) +
                                    " components: " + ks);
    (kind == "cos" ? term.cos_amp : term.sin_amp) = amp;
    c.terms.push_back(term);
  }
  return c;
}

ScalarSymbol frac_laplacian_symbol(const GridSpec& spec, double nu, int margin) {
  if (!(nu > 0.0)) throw DomainError("fractional Laplacian order must be positive");
  return ScalarSymbol::tabulate(
      spec, SymbolClass{nu, 1.0, 0.0},
      [nu](std::span<const double>, const Frequency& xi) { return Complex(frac_power(xi, nu)); },
      margin, "frac_laplacian");
}

ScalarSymbol bessel_symbol(const GridSpec& spec, double s, int margin) {
  return ScalarSymbol::tabulate(
      spec, SymbolClass{s, 1.0, 0.0},
      [s](std::span<const double>, const Frequency& xi) {
        return Complex(std::pow(japanese_bracket(xi), s));
      },
      margin, "bessel");
}

ScalarSymbol oscillating_symbol(const GridSpec& spec, double nu, double rho, int margin) {
  if (!(nu > 0.0)) throw DomainError("oscillating symbol order must be positive");
  if (!(rho > 0.0 && rho <= 1.0)) throw DomainError("oscillating symbol needs 0 < rho <= 1");
  return ScalarSymbol::tabulate(
      spec, SymbolClass{nu, rho, 0.0},
      [nu, rho](std::span<const double>, const Frequency& xi) {
        const double r = kTwoPi * lattice_radius(xi);
        return frac_power(xi, nu) * std::polar(1.0, std::pow(r, 1.0 - rho));
      },
      margin, "oscillating");
}

ScalarSymbol variable_symbol(const GridSpec& spec, double nu, const Coefficient& q, int margin) {
  if (!(nu > 0.0)) throw DomainError("variable symbol order must be positive");
  for (std::size_t j = 0; j < spec.grid_size(); ++j) {
    const auto x = spec.coordinates(j);
    if (!(q(std::span<const double>(x.data(), spec.dim())) > -1.0))
      throw DomainError("variable coefficient needs q > -1 on the grid");
  }
  return ScalarSymbol::tabulate(
      spec, SymbolClass{nu, 1.0, 0.0},
      [nu, q](std::span<const double> x, const Frequency& xi) {
        return Complex((1.0 + q(x)) * frac_power(xi, nu));
      },
      margin, "variable");
}

ScalarSymbol modulated_bracket_symbol(const GridSpec& spec, double m, const Coefficient& c,
                                      int margin) {
  return ScalarSymbol::tabulate(
      spec, SymbolClass{m, 1.0, 0.0},
      [m, c](std::span<const double> x, const Frequency& xi) {
        return Complex(c(x) * std::pow(japanese_bracket(xi), m));
      },
      margin, "modulated_bracket");
}

ScalarSymbol constant_symbol(const GridSpec& spec, Complex value, int margin) {
  return ScalarSymbol::tabulate(
      spec, SymbolClass{0.0, 1.0, 0.0},
      [value](std::span<const double>, const Frequency&) { return value; }, margin, "constant");
}

ScalarSymbol builtin_symbol(const GridSpec& spec, const std::string& kind,
                            const BuiltinParams& params) {
  if (kind == "frac_laplacian") return frac_laplacian_symbol(spec, params.nu, params.margin);
  if (kind == "bessel") return bessel_symbol(spec, params.nu, params.margin);
  if (kind == "oscillating")
    return oscillating_symbol(spec, params.nu, params.rho, params.margin);
  if (kind == "variable") return variable_symbol(spec, params.nu, params.q, params.margin);
  throw DomainError("unknown symbol kind '" + kind + "'");
}

}  // namespace torpsi
