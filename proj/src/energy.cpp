#include <cmath>
#include <iomanip>
#include <limits>
#include <ostream>

#include "torpsi/error.hpp"
#include "torpsi/hyperbolic.hpp"

namespace torpsi {

namespace {

double lhs(const EnergyLedger& led, std::size_t i, EnergyForm form) {
  const double n = form == EnergyForm::kWave ? led.u_norms[i] : led.v_norms[i];
  return n * n;
}

// lhs <= rhs up to a few ulps of the right-hand side
bool holds_at(const EnergyLedger& led, double C, EnergyForm form) {
  for (std::size_t i = 0; i < led.times.size(); ++i)
    if (lhs(led, i, form) > energy_bound(led, i, C, form) * (1.0 + 1e-12)) return false;
  return true;
}

}  // namespace

double energy_bound(const EnergyLedger& led, std::size_t i, double C, EnergyForm form) {
  const double t = led.times[i];
  if (form == EnergyForm::kWave)
    return C * std::exp(C * t) *
           (led.f0_norm * led.f0_norm + led.f1_norm * led.f1_norm + led.forcing_integral[i]);
  return std::exp(C * t) * (led.v0_norm * led.v0_norm + led.forcing_integral[i]);
}

EnergyReport verify_energy_estimate(const EnergyLedger& led, double C, EnergyForm form) {
  if (led.times.empty()) throw DomainError("energy ledger is empty");
  const auto& norms = form == EnergyForm::kWave ? led.u_norms : led.v_norms;
  if (norms.size() != led.times.size() || led.forcing_integral.size() != led.times.size())
    throw ShapeError("energy ledger columns have different lengths");

  EnergyReport r;
  r.form = form;
  r.C = C;
  r.holds = holds_at(led, C, form);
  for (std::size_t i = 0; i < led.times.size(); ++i) {
    const double l = lhs(led, i, form);
    const double b = energy_bound(led, i, C, form);
    const double ratio = l == 0.0 ? 0.0 : (b > 0.0 ? l / b : std::numeric_limits<double>::infinity());
    if (ratio > r.worst_ratio) {
      r.worst_ratio = ratio;
      r.worst_time = led.times[i];
    }
  }

  if (holds_at(led, 0.0, form)) {
    r.C_star = 0.0;
    return r;
  }
  double lo = 0.0, hi = 1.0;
  while (!holds_at(led, hi, form)) {
    lo = hi;
    hi *= 2.0;
    if (hi > 1e6) {
      r.C_star = std::numeric_limits<double>::infinity();
      return r;
    }
  }
  while (hi - lo > 1e-3) {
    const double mid = 0.5 * (lo + hi);
    (holds_at(led, mid, form) ? hi : lo) = mid;
  }
  r.C_star = hi;
  return r;
}

ConservedEnergyReport conserved_energy_probe(const DenseOperator& P,
                                             const std::vector<GridFunction>& u,
                                             const std::vector<GridFunction>& ut) {
  if (u.size() != ut.size() || u.empty()) throw ShapeError("trajectory columns mismatch");
  if (!P.hermitian && !is_hermitian(P.matrix)) throw NotPositiveError("P must be self-adjoint");
  auto energy = [&](std::size_t i) {
    return l2_inner_product(ut[i], ut[i]).real() + l2_inner_product(P.apply(u[i]), u[i]).real();
  };
  ConservedEnergyReport r;
  r.E0 = energy(0);
  r.relative = r.E0 > 0.0;
  for (std::size_t i = 1; i < u.size(); ++i) {
    const double d = std::abs(energy(i) - r.E0);
    r.max_drift = std::max(r.max_drift, r.relative ? d / r.E0 : d);
  }
  return r;
}

void write_ledger_csv(std::ostream& os, const EnergyLedger& led) {
  const auto flags = os.flags();
  const auto prec = os.precision();
  os << std::setprecision(17);
  os << "t,u_Hs,ut_Hs_minus_nu_half,forcing_integral,E_conserved,bound_rhs\n";
  for (std::size_t i = 0; i < led.times.size(); ++i) {
    os << led.times[i] << ',' << led.u_norms[i] << ',' << led.ut_norms[i] << ','
       << led.forcing_integral[i] << ',' << led.conserved_E[i] << ','
       << energy_bound(led, i, led.fitted_C, EnergyForm::kWave) << '\n';
  }
  os.flags(flags);
  os.precision(prec);
}

}  // namespace torpsi
