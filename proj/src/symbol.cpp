#include "torpsi/symbol.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "detail/axis_dft.hpp"
#include "torpsi/error.hpp"

namespace torpsi {

SymbolClass SymbolClass::make(double order, double rho, double delta) {
  if (!(rho >= 0.0 && rho <= 1.0) || !(delta >= 0.0 && delta <= 1.0))
    throw DomainError("symbol class requires 0 <= rho, delta <= 1");
  if (!std::isfinite(order)) throw DomainError("symbol order must be finite");
  return SymbolClass{order, rho, delta};
}

// ---------------------------------------------------------------- ScalarSymbol

ScalarSymbol::ScalarSymbol(GridSpec spec, SymbolClass cls, LatticeBox box,
                           std::vector<Complex> values, std::string origin)
    : spec_(spec),
      class_(cls),
      box_(box),
      values_(std::move(values)),
      origin_(std::move(origin)) {
  if (box_.dim() != spec_.dim()) throw ShapeError("symbol box dimension differs from grid");
  if (values_.size() != spec_.grid_size() * box_.size())
    throw ShapeError("symbol table size does not match grid x box");
  for (const Complex& v : values_)
    if (!std::isfinite(v.real()) || !std::isfinite(v.imag()))
      throw DomainError("symbol values must be finite");
}

ScalarSymbol ScalarSymbol::tabulate(const GridSpec& spec, SymbolClass cls, const Generator& gen,
                                    int margin, std::string origin) {
  if (margin < 0) throw DomainError("symbol margin must be nonnegative");
  const LatticeBox box = LatticeBox::symmetric(spec.dim(), spec.cutoff() + margin);
  std::vector<Complex> values(spec.grid_size() * box.size());
  for (std::size_t j = 0; j < spec.grid_size(); ++j) {
    const auto x = spec.coordinates(j);
    const std::span<const double> xs(x.data(), spec.dim());
    for (std::size_t k = 0; k < box.size(); ++k) values[j * box.size() + k] = gen(xs, box.point(k));
  }
  return ScalarSymbol(spec, cls, box, std::move(values), std::move(origin));
}

int ScalarSymbol::margin() const {
  int m = std::numeric_limits<int>::max();
  for (int i = 0; i < box_.dim(); ++i) m = std::min(m, box_.hi(i) - spec_.cutoff());
  return m;
}

ScalarSymbol ScalarSymbol::with_class(SymbolClass cls) const {
  ScalarSymbol out = *this;
  out.class_ = cls;
  return out;
}

ScalarSymbol ScalarSymbol::restricted(const LatticeBox& sub) const {
  if (!box_.contains(sub)) throw MarginError("restriction box exceeds the symbol box");
  std::vector<Complex> values(spec_.grid_size() * sub.size());
  for (std::size_t j = 0; j < spec_.grid_size(); ++j)
    for (std::size_t k = 0; k < sub.size(); ++k)
      values[j * sub.size() + k] = (*this)(j, sub.point(k));
  return ScalarSymbol(spec_, class_, sub, std::move(values), origin_);
}

bool ScalarSymbol::x_independent(double tol) const {
  for (std::size_t j = 1; j < spec_.grid_size(); ++j)
    for (std::size_t k = 0; k < box_.size(); ++k)
      if (std::abs(values_[j * box_.size() + k] - values_[k]) > tol) return false;
  return true;
}

MatrixSymbol::MatrixSymbol(int size, std::vector<ScalarSymbol> entries)
    : size_(size), entries_(std::move(entries)) {
  if (size < 1 || entries_.size() != static_cast<std::size_t>(size) * size)
    throw ShapeError("matrix symbol needs size^2 entries");
  for (const auto& e : entries_)
    if (!(e.spec() == entries_.front().spec()))
      throw ShapeError("matrix symbol entries must share a grid");
}

// ---------------------------------------------------------------- arithmetic

namespace {

template <class Op>
ScalarSymbol combine(const ScalarSymbol& a, const ScalarSymbol& b, SymbolClass cls, Op op) {
  if (!(a.spec() == b.spec())) throw ShapeError("symbols live on different grids");
  const LatticeBox box = a.box().intersect(b.box());
  if (box.empty()) throw ShapeError("symbols share no lattice points");
  std::vector<Complex> values(a.spec().grid_size() * box.size());
  for (std::size_t j = 0; j < a.spec().grid_size(); ++j)
    for (std::size_t k = 0; k < box.size(); ++k) {
      const Frequency xi = box.point(k);
      values[j * box.size() + k] = op(a(j, xi), b(j, xi));
    }
  return ScalarSymbol(a.spec(), cls, box, std::move(values), "derived");
}

SymbolClass max_order_class(const ScalarSymbol& a, const ScalarSymbol& b) {
  const auto& ca = a.symbol_class();
  const auto& cb = b.symbol_class();
  return SymbolClass{std::max(ca.order, cb.order), std::min(ca.rho, cb.rho),
                     std::max(ca.delta, cb.delta)};
}

}  // namespace

ScalarSymbol conjugate(const ScalarSymbol& a) {
  std::vector<Complex> values(a.values().begin(), a.values().end());
  for (auto& v : values) v = std::conj(v);
  return ScalarSymbol(a.spec(), a.symbol_class(), a.box(), std::move(values), "derived");
}

ScalarSymbol operator+(const ScalarSymbol& a, const ScalarSymbol& b) {
  return combine(a, b, max_order_class(a, b), [](Complex u, Complex v) { return u + v; });
}

ScalarSymbol operator-(const ScalarSymbol& a, const ScalarSymbol& b) {
  return combine(a, b, max_order_class(a, b), [](Complex u, Complex v) { return u - v; });
}

ScalarSymbol operator*(const ScalarSymbol& a, const ScalarSymbol& b) {
  const auto& ca = a.symbol_class();
  const auto& cb = b.symbol_class();
  SymbolClass cls{ca.order + cb.order, std::min(ca.rho, cb.rho), std::max(ca.delta, cb.delta)};
  return combine(a, b, cls, [](Complex u, Complex v) { return u * v; });
}

ScalarSymbol operator*(Complex lambda, const ScalarSymbol& a) {
  std::vector<Complex> values(a.values().begin(), a.values().end());
  for (auto& v : values) v *= lambda;
  return ScalarSymbol(a.spec(), a.symbol_class(), a.box(), std::move(values), "derived");
}

// ---------------------------------------------------------------- differences

namespace {

LatticeBox deflated_box(const ScalarSymbol& a, const MultiIndex& alpha, Coverage coverage) {
  if (alpha.dim != a.spec().dim()) throw ShapeError("multi-index dimension differs from grid");
  std::array<int, kMaxDim> lo{}, hi{};
  for (int i = 0; i < a.box().dim(); ++i) {
    lo[i] = a.box().lo(i);
    hi[i] = a.box().hi(i) - alpha[i];
    const int needed = coverage == Coverage::kLattice ? a.spec().cutoff() : lo[i];
    if (hi[i] < needed) {
      std::ostringstream msg;
      msg << "difference of order " << alpha[i] << " on axis " << i
          << " exhausts the symbol margin (box top " << a.box().hi(i) << ")";
      throw MarginError(msg.str());
    }
  }
  return LatticeBox(a.box().dim(), lo, hi);
}

SymbolClass differenced_class(const SymbolClass& c, const MultiIndex& alpha) {
  return SymbolClass{c.order - c.rho * order(alpha), c.rho, c.delta};
}

}  // namespace

ScalarSymbol forward_difference(const ScalarSymbol& a, const MultiIndex& alpha,
                                Coverage coverage) {
  const LatticeBox target = deflated_box(a, alpha, coverage);
  const std::size_t gsize = a.spec().grid_size();

  LatticeBox box = a.box();
  std::vector<Complex> cur(a.values().begin(), a.values().end());
  for (int axis = 0; axis < alpha.dim; ++axis) {
    for (int step = 0; step < alpha[axis]; ++step) {
      std::array<int, kMaxDim> lo{}, hi{};
      for (int i = 0; i < box.dim(); ++i) {
        lo[i] = box.lo(i);
        hi[i] = box.hi(i) - (i == axis ? 1 : 0);
      }
      const LatticeBox next(box.dim(), lo, hi);
      std::vector<Complex> out(gsize * next.size());
      for (std::size_t j = 0; j < gsize; ++j) {
        const Complex* src = cur.data() + j * box.size();
        Complex* dst = out.data() + j * next.size();
        for (std::size_t k = 0; k < next.size(); ++k) {
          Frequency xi = next.point(k);
          const Complex here = src[box.index(xi)];
          xi[axis] += 1;
          dst[k] = src[box.index(xi)] - here;
        }
      }
      cur = std::move(out);
      box = next;
    }
  }
  return ScalarSymbol(a.spec(), differenced_class(a.symbol_class(), alpha), target,
                      std::move(cur), "derived");
}

ScalarSymbol difference_binomial(const ScalarSymbol& a, const MultiIndex& alpha,
                                 Coverage coverage) {
  const LatticeBox target = deflated_box(a, alpha, coverage);
  const std::size_t gsize = a.spec().grid_size();

  // (beta, (-1)^{|alpha-beta|} C(alpha, beta)) for beta <= alpha
  struct Term {
    MultiIndex beta;
    double weight;
  };
  std::vector<Term> terms;
  for (const MultiIndex& beta : multi_indices_up_to(alpha.dim, order(alpha))) {
    bool le = true;
    for (int i = 0; i < alpha.dim; ++i) le = le && beta[i] <= alpha[i];
    if (!le) continue;
    double w = ((order(alpha) - order(beta)) % 2 == 0) ? 1.0 : -1.0;
    for (int i = 0; i < alpha.dim; ++i) {
      double c = 1.0;
      for (int t = 1; t <= beta[i]; ++t) c = c * (alpha[i] - beta[i] + t) / t;
      w *= c;
    }
    terms.push_back({beta, w});
  }

  std::vector<Complex> out(gsize * target.size());
  for (std::size_t j = 0; j < gsize; ++j) {
    for (std::size_t k = 0; k < target.size(); ++k) {
      const Frequency xi = target.point(k);
      Complex acc = 0.0;
      for (const Term& t : terms) acc += t.weight * a(j, shifted(xi, t.beta));
      out[j * target.size() + k] = acc;
    }
  }
  return ScalarSymbol(a.spec(), differenced_class(a.symbol_class(), alpha), target,
                      std::move(out), "derived");
}

// ---------------------------------------------------------------- x multipliers

namespace {

// Applies an x-Fourier multiplier m(k) to x -> a(x, xi) for every lattice
// point.  Frequencies k range over [-G/2, G/2 - 1]^n.
template <class Multiplier>
ScalarSymbol apply_x_multiplier(const ScalarSymbol& a, Multiplier multiplier, SymbolClass cls,
                                bool parallel) {
  const GridSpec& spec = a.spec();
  const int g = spec.points();
  const int dim = spec.dim();
  const std::size_t gsize = spec.grid_size();
  const std::size_t bsize = a.box().size();
  const auto tw = twiddle_table(g);

  // multiplier table over the full x-frequency window
  const LatticeBox kbox = [&] {
    std::array<int, kMaxDim> lo{}, hi{};
    for (int i = 0; i < dim; ++i) {
      lo[i] = -g / 2;
      hi[i] = g / 2 - 1;
    }
    return LatticeBox(dim, lo, hi);
  }();
  std::vector<Complex> mult(kbox.size());
  for (std::size_t q = 0; q < kbox.size(); ++q) mult[q] = multiplier(kbox.point(q));

  std::vector<Complex> out(gsize * bsize);
  const long long nb = static_cast<long long>(bsize);
#pragma omp parallel for schedule(dynamic, 4) if (parallel)
  for (long long kk = 0; kk < nb; ++kk) {
    const auto k = static_cast<std::size_t>(kk);
    std::vector<Complex> column(gsize);
    for (std::size_t j = 0; j < gsize; ++j) column[j] = a.values()[j * bsize + k];
    auto coeffs = detail::dft_forward(std::move(column), dim, g, -g / 2, g, tw);
    for (std::size_t q = 0; q < coeffs.size(); ++q) coeffs[q] *= mult[q];
    auto back = detail::dft_inverse(std::move(coeffs), dim, g, -g / 2, g, tw);
    for (std::size_t j = 0; j < gsize; ++j) out[j * bsize + k] = back[j];
  }
  return ScalarSymbol(spec, cls, a.box(), std::move(out), "derived");
}

auto derivative_multiplier(const MultiIndex& beta, int g) {
  return [beta, g](const Frequency& k) {
    Complex m = 1.0;
    for (int i = 0; i < beta.dim; ++i) {
      if (beta[i] == 0) continue;
      if (k[i] == -g / 2) return Complex(0.0);
      const Complex f(0.0, 2.0 * std::numbers::pi * k[i]);
      for (int t = 0; t < beta[i]; ++t) m *= f;
    }
    return m;
  };
}

ScalarSymbol x_derivative_impl(const ScalarSymbol& a, const MultiIndex& beta, bool parallel) {
  if (beta.dim != a.spec().dim()) throw ShapeError("multi-index dimension differs from grid");
  const auto& c = a.symbol_class();
  SymbolClass cls{c.order + c.delta * order(beta), c.rho, c.delta};
  if (order(beta) == 0) return a.with_class(cls);
  return apply_x_multiplier(a, derivative_multiplier(beta, a.spec().points()), cls, parallel);
}

}  // namespace

ScalarSymbol x_derivative(const ScalarSymbol& a, const MultiIndex& beta) {
  return x_derivative_impl(a, beta, true);
}

ScalarSymbol x_derivative_serial(const ScalarSymbol& a, const MultiIndex& beta) {
  return x_derivative_impl(a, beta, false);
}

ScalarSymbol x_falling_derivative(const ScalarSymbol& a, const MultiIndex& alpha) {
  if (alpha.dim != a.spec().dim()) throw ShapeError("multi-index dimension differs from grid");
  const auto& c = a.symbol_class();
  SymbolClass cls{c.order + c.delta * order(alpha), c.rho, c.delta};
  if (order(alpha) == 0) return a.with_class(cls);
  const int g = a.spec().points();
  auto binom = [alpha, g](const Frequency& k) {
    double m = 1.0;
    for (int i = 0; i < alpha.dim; ++i) {
      if (alpha[i] == 0) continue;
      if (k[i] == -g / 2) return Complex(0.0);
      // generalized binomial C(k, a) = k (k-1) ... (k-a+1) / a!
      for (int t = 0; t < alpha[i]; ++t) m *= static_cast<double>(k[i] - t) / (t + 1);
    }
    return Complex(m);
  };
  return apply_x_multiplier(a, binom, cls, true);
}

// ---------------------------------------------------------------- diagnostics

SeminormEstimate seminorm_estimate(const ScalarSymbol& a, const MultiIndex& alpha,
                                   const MultiIndex& beta) {
  const auto& c = a.symbol_class();
  const ScalarSymbol d = x_derivative(forward_difference(a, alpha), beta);
  const double power = c.rho * order(alpha) - c.delta * order(beta) - c.order;
  SeminormEstimate best;
  best.value = -1.0;
  for (std::size_t k = 0; k < d.box().size(); ++k) {
    const Frequency xi = d.box().point(k);
    const double w = std::pow(japanese_bracket(xi), power);
    for (std::size_t j = 0; j < d.spec().grid_size(); ++j) {
      const double v = w * std::abs(d(j, xi));
      if (v > best.value) {
        best.value = v;
        best.x_index = j;
        best.xi = xi;
      }
    }
  }
  return best;
}

std::vector<ShellSup> shell_suprema(const ScalarSymbol& a, double max_radius) {
  std::vector<ShellSup> out;
  for (const DyadicShell& shell : dyadic_shells(a.box(), max_radius)) {
    ShellSup s;
    s.k = shell.k;
    s.sup = -1.0;
    for (std::size_t idx : shell.members) {
      for (std::size_t j = 0; j < a.spec().grid_size(); ++j) {
        const double v = std::abs(a.values()[j * a.box().size() + idx]);
        if (v > s.sup) {
          s.sup = v;
          s.argmax = a.box().point(idx);
        }
      }
    }
    s.bracket = japanese_bracket(s.argmax);
    out.push_back(s);
  }
  return out;
}

ClassProbeReport class_membership_probe(const ScalarSymbol& a, int max_alpha, int max_beta,
                                        double slack) {
  const double radius = a.spec().cutoff();
  const auto base = shell_suprema(a, radius);
  if (base.size() < 4) throw ShellError("class probe needs at least four dyadic shells");
  if (max_alpha > a.margin()) throw MarginError("max_alpha exceeds the symbol margin");

  const auto& c = a.symbol_class();
  ClassProbeReport report;
  report.declared = c;
  report.slack = slack;
  report.pass = true;
  constexpr double kEps = std::numeric_limits<double>::epsilon();

  for (const MultiIndex& beta : multi_indices_up_to(a.spec().dim(), max_beta)) {
    const ScalarSymbol dx = x_derivative(a, beta);
    for (const MultiIndex& alpha : multi_indices_up_to(a.spec().dim(), max_alpha)) {
      const ScalarSymbol d = forward_difference(dx, alpha);
      const auto shells = shell_suprema(d, radius);
      // roundoff floor of a difference / spectral derivative of values of size |a|
      const double amplification = 64.0 * kEps * std::pow(2.0, order(alpha)) *
                                   std::pow(std::numbers::pi * a.spec().points(), order(beta));
      std::vector<double> xs, ys;
      for (std::size_t s = 0; s < shells.size(); ++s) {
        const double floor = amplification * std::max(base[s].sup, 1e-300);
        xs.push_back(shells[s].bracket);
        ys.push_back(shells[s].sup > floor ? shells[s].sup : 0.0);
      }
      const SlopeFit fit = fit_log_slope(xs, ys, 0.0);
      ClassProbeEntry e;
      e.alpha = alpha;
      e.beta = beta;
      e.slope = fit.slope;
      e.residual = fit.residual;
      e.claimed = c.order - c.rho * order(alpha) + c.delta * order(beta);
      e.pass = fit.slope <= e.claimed + slack;
      report.pass = report.pass && e.pass;
      report.entries.push_back(e);
    }
  }
  return report;
}

namespace {

template <class Measure>
EllipticityReport ellipticity_impl(const ScalarSymbol& a, int n0, Measure measure) {
  if (n0 < 0 || n0 >= a.spec().cutoff())
    throw DomainError("ellipticity threshold n0 must be below the lattice radius");
  const LatticeBox lattice = a.spec().lattice();
  const double m = a.symbol_class().order;
  EllipticityReport r;
  r.c0 = std::numeric_limits<double>::infinity();
  bool any = false;
  for (std::size_t k = 0; k < lattice.size(); ++k) {
    const Frequency xi = lattice.point(k);
    if (static_cast<double>(norm_sq(xi)) < static_cast<double>(n0) * n0) continue;
    any = true;
    const double w = std::pow(japanese_bracket(xi), m);
    for (std::size_t j = 0; j < a.spec().grid_size(); ++j) {
      const double v = measure(a(j, xi)) / w;
      if (v < r.c0) {
        r.c0 = v;
        r.x_index = j;
        r.xi = xi;
      }
    }
  }
  if (!any) throw DomainError("no lattice points with |xi| >= n0");
  r.elliptic = r.c0 > 0.0;
  return r;
}

}  // namespace

EllipticityReport ellipticity_check(const ScalarSymbol& a, int n0) {
  return ellipticity_impl(a, n0, [](Complex v) { return std::abs(v); });
}

EllipticityReport strong_ellipticity_check(const ScalarSymbol& a, int n0) {
  return ellipticity_impl(a, n0, [](Complex v) { return v.real(); });
}

}  // namespace torpsi
