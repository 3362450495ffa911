#pragma once

// Truncated symbol expansions of adjoints and compositions, compared with the
// symbols recovered from materialized finite sections.
//
//   sigma_{A*}    ~ sum_alpha Delta^alpha D^{(alpha)}/alpha! conj(sigma_A)
//   sigma_{A1 A2} ~ sum_alpha (Delta^alpha sigma_1) (D^{(alpha)}/alpha! sigma_2)

#include <iosfwd>
#include <vector>

#include "torpsi/shells.hpp"
#include "torpsi/symbol.hpp"

namespace torpsi {

struct ExpansionResult {
  int truncation = 0;
  ScalarSymbol reference;    // recovered from the finite section, on grid x L
  ScalarSymbol partial_sum;  // terms with |alpha| <= truncation, on grid x L
  ScalarSymbol remainder;    // reference - partial_sum
  double claimed_remainder_order = 0.0;
  double noise_floor = 0.0;  // roundoff level of the reference
};

ExpansionResult adjoint_expansion(const ScalarSymbol& a, int truncation);
ExpansionResult composition_expansion(const ScalarSymbol& a1, const ScalarSymbol& a2,
                                      int truncation);

struct RemainderEstimate {
  double slope = kMinusInfinity;
  double residual = 0.0;
  int used = 0;
  std::vector<ShellSup> shells;
};

inline constexpr double kRemainderFloor = 1e-13;

/// Log-log regression of shell suprema of |r| against <xi> over shells inside
/// `max_radius`; shells at or below `floor` are dropped.  Throws ShellError
/// with fewer than four shells.
RemainderEstimate remainder_order_estimate(const ScalarSymbol& r, double max_radius,
                                           double floor = kRemainderFloor);
/// Shells inside N/2.
RemainderEstimate remainder_order_estimate(const ScalarSymbol& r);

/// Slope of the remainder and of its first outer difference Delta_{xi_1} r.
struct ExpansionCheck {
  int truncation = 0;
  double claimed = 0.0;
  double slack = kClassSlack;
  RemainderEstimate base;
  RemainderEstimate differenced;
  bool pass = false;
};

ExpansionCheck check_expansion(const ExpansionResult& e, double slack = kClassSlack);

/// Rows "N,shell,sup,fitted_slope,claimed_order,pass" for each check.
void write_expansion_csv(std::ostream& os, const std::vector<ExpansionCheck>& checks);

}  // namespace torpsi
