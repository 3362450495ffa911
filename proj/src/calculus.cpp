#include "torpsi/calculus.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <optional>
#include <ostream>

#include "torpsi/error.hpp"
#include "torpsi/quantize.hpp"

namespace torpsi {

namespace {

double max_abs(const ScalarSymbol& a) {
  double m = 0.0;
  for (const Complex& v : a.values()) m = std::max(m, std::abs(v));
  return m;
}

// roundoff level of a symbol recovered from a dense finite section
double recovery_floor(const ScalarSymbol& reference) {
  const double eps = std::numeric_limits<double>::epsilon();
  const double size = static_cast<double>(reference.spec().grid_size());
  return std::max(kRemainderFloor, 64.0 * eps * std::sqrt(size) * max_abs(reference));
}

ExpansionResult finish(ScalarSymbol reference, ScalarSymbol sum, int truncation,
                       double claimed) {
  const LatticeBox lattice = reference.spec().lattice();
  ScalarSymbol partial = sum.restricted(lattice).with_class(reference.symbol_class());
  ScalarSymbol rem = (reference - partial).with_class(
      SymbolClass{claimed, reference.symbol_class().rho, reference.symbol_class().delta});
  const double floor = recovery_floor(reference);
  return ExpansionResult{truncation, std::move(reference), std::move(partial), std::move(rem),
                         claimed, floor};
}

void require_truncation(int truncation) {
  if (truncation < 0) throw DomainError("truncation order must be nonnegative");
}

}  // namespace

ExpansionResult adjoint_expansion(const ScalarSymbol& a, int truncation) {
  require_truncation(truncation);
  if (truncation > a.margin()) throw MarginError("truncation order exceeds the symbol margin");
  const auto& c = a.symbol_class();
  const ScalarSymbol conj_a = conjugate(a);

  std::optional<ScalarSymbol> sum;
  for (const MultiIndex& alpha : multi_indices_up_to(a.spec().dim(), truncation)) {
    ScalarSymbol term = forward_difference(x_falling_derivative(conj_a, alpha), alpha);
    sum = sum ? *sum + term : term;
  }
  ScalarSymbol reference = extract_symbol(adjoint(materialize(a)));
  reference = reference.with_class(c);
  return finish(std::move(reference), std::move(*sum), truncation,
                c.order - (c.rho - c.delta) * (truncation + 1));
}

ExpansionResult composition_expansion(const ScalarSymbol& a1, const ScalarSymbol& a2,
                                      int truncation) {
  require_truncation(truncation);
  if (!(a1.spec() == a2.spec())) throw ShapeError("symbols live on different grids");
  if (truncation > a1.margin()) throw MarginError("truncation order exceeds the symbol margin");
  const auto& c1 = a1.symbol_class();
  const auto& c2 = a2.symbol_class();
  const double rho = std::min(c1.rho, c2.rho);
  const double delta = std::max(c1.delta, c2.delta);
  const double m = c1.order + c2.order;

  std::optional<ScalarSymbol> sum;
  for (const MultiIndex& alpha : multi_indices_up_to(a1.spec().dim(), truncation)) {
    ScalarSymbol term = forward_difference(a1, alpha) * x_falling_derivative(a2, alpha);
    sum = sum ? *sum + term : term;
  }
  ScalarSymbol reference = extract_symbol(compose(materialize(a1), materialize(a2)));
  reference = reference.with_class(SymbolClass{m, rho, delta});
  return finish(std::move(reference), std::move(*sum), truncation,
                m - (rho - delta) * (truncation + 1));
}

RemainderEstimate remainder_order_estimate(const ScalarSymbol& r, double max_radius,
                                           double floor) {
  RemainderEstimate est;
  est.shells = shell_suprema(r, max_radius);
  if (est.shells.size() < 4) throw ShellError("remainder regression needs at least four shells");
  std::vector<double> xs, ys;
  for (const ShellSup& s : est.shells) {
    xs.push_back(s.bracket);
    ys.push_back(s.sup);
  }
  const SlopeFit fit = fit_log_slope(xs, ys, floor);
  est.slope = fit.slope;
  est.residual = fit.residual;
  est.used = fit.used;
  return est;
}

RemainderEstimate remainder_order_estimate(const ScalarSymbol& r) {
  return remainder_order_estimate(r, r.spec().cutoff() / 2.0);
}

ExpansionCheck check_expansion(const ExpansionResult& e, double slack) {
  ExpansionCheck chk;
  chk.truncation = e.truncation;
  chk.claimed = e.claimed_remainder_order;
  chk.slack = slack;
  const double radius = e.remainder.spec().cutoff() / 2.0;
  chk.base = remainder_order_estimate(e.remainder, radius, e.noise_floor);

  MultiIndex first(e.remainder.spec().dim());
  first[0] = 1;
  const ScalarSymbol d = forward_difference(e.remainder, first, Coverage::kAvailable);
  chk.differenced = remainder_order_estimate(d, radius, 2.0 * e.noise_floor);

  const double rho = e.remainder.symbol_class().rho;
  chk.pass = chk.base.slope <= chk.claimed + slack &&
             chk.differenced.slope <= chk.claimed - rho + slack;
  return chk;
}

void write_expansion_csv(std::ostream& os, const std::vector<ExpansionCheck>& checks) {
  const auto flags = os.flags();
  const auto prec = os.precision();
  os << std::setprecision(17);
  os << "N,shell,sup,fitted_slope,claimed_order,pass\n";
  for (const ExpansionCheck& c : checks)
    for (const ShellSup& s : c.base.shells)
      os << c.truncation << ',' << s.k << ',' << s.sup << ',' << c.base.slope << ','
         << c.claimed << ',' << (c.pass ? 1 : 0) << '\n';
  os.flags(flags);
  os.precision(prec);
}

}  // namespace torpsi
