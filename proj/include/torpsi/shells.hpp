#pragma once

// Dyadic shell bookkeeping shared by the symbol-class probe, the calculus
// remainder estimates and the symmetrizer check.  A shell is
// S_k = { xi in L : 2^k <= |xi| < 2^{k+1}, |xi| <= R }.  Polynomial orders in
// <xi> are estimated by least squares on (log x_k, log y_k) pairs.

#include <limits>
#include <span>
#include <vector>

#include "torpsi/grid.hpp"

namespace torpsi {

inline constexpr double kMinusInfinity = -std::numeric_limits<double>::infinity();

/// Lattice indices (into `box`) of each nonempty dyadic shell up to radius R.
struct DyadicShell {
  int k = 0;
  std::vector<std::size_t> members;
};

std::vector<DyadicShell> dyadic_shells(const LatticeBox& box, double max_radius);

/// Result of a log-log least-squares fit.  `slope` is -inf when every sample
/// was below the noise floor.
struct SlopeFit {
  double slope = kMinusInfinity;
  double intercept = 0.0;
  double residual = 0.0;  // RMS of log residuals
  int used = 0;
  bool all_negligible = true;
};

/// Least squares over the points whose y is above `floor`; y <= floor points
/// are dropped.  Fewer than two surviving points report slope = -inf.
SlopeFit fit_log_slope(std::span<const double> x, std::span<const double> y, double floor);

}  // namespace torpsi
