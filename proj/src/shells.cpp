#include "torpsi/shells.hpp"

#include <cmath>

namespace torpsi {

std::vector<DyadicShell> dyadic_shells(const LatticeBox& box, double max_radius) {
  std::vector<DyadicShell> shells;
  for (int k = 0; std::ldexp(1.0, k) <= max_radius; ++k) shells.push_back(DyadicShell{k, {}});
  for (std::size_t i = 0; i < box.size(); ++i) {
    const double r = std::sqrt(static_cast<double>(norm_sq(box.point(i))));
    if (r < 1.0 || r > max_radius) continue;
    const int k = static_cast<int>(std::floor(std::log2(r)));
    // guard log2 rounding at exact powers of two
    int kk = k;
    if (std::ldexp(1.0, kk + 1) <= r) ++kk;
    if (std::ldexp(1.0, kk) > r) --kk;
    if (kk >= 0 && kk < static_cast<int>(shells.size())) shells[kk].members.push_back(i);
  }
  std::erase_if(shells, [](const DyadicShell& s) { return s.members.empty(); });
  return shells;
}

SlopeFit fit_log_slope(std::span<const double> x, std::span<const double> y, double floor) {
  SlopeFit fit;
  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(y[i] > floor)) continue;
    lx.push_back(std::log(x[i]));
    ly.push_back(std::log(y[i]));
  }
  fit.used = static_cast<int>(lx.size());
  fit.all_negligible = lx.empty();
  if (lx.size() < 2) return fit;

  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    mx += lx[i];
    my += ly[i];
  }
  mx /= static_cast<double>(lx.size());
  my /= static_cast<double>(ly.size());
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    sxy += (lx[i] - mx) * (ly[i] - my);
    sxx += (lx[i] - mx) * (lx[i] - mx);
  }
  fit.slope = sxx > 0.0 ? sxy / sxx : 0.0;
  fit.intercept = my - fit.slope * mx;
  double ss = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    const double r = ly[i] - (fit.intercept + fit.slope * lx[i]);
    ss += r * r;
  }
  fit.residual = std::sqrt(ss / static_cast<double>(lx.size()));
  return fit;
}

}  // namespace torpsi
