#include "robreg/mscale.hpp"

#include <cmath>
#include <cstddef>

namespace robreg {

double mean_rho(const std::vector<double>& residuals, double sigma,
                const Bisquare& family) {
  double acc = 0.0;
  for (double r : residuals) acc += family.rho(r / sigma);
  return acc / static_cast<double>(residuals.size());
}

double mscale(const ScaleProblem& p) {
  const auto& r = p.residuals;
  const std::size_t n = r.size();
  std::size_t zeros = 0;
  double max_abs = 0.0;
  for (double v : r) {
    if (v == 0.0) ++zeros;
    max_abs = std::max(max_abs, std::abs(v));
  }
  if (max_abs == 0.0) return 0.0;
  // No positive root when too many residuals are exactly zero: the mean-rho
  // curve tops out at 1 - zeros/n <= kappa.
  if (static_cast<double>(zeros) >= (1.0 - p.kappa) * static_cast<double>(n)) {
    return 0.0;
  }

  // Bracket the root. mean_rho decreases in sigma, from 1 - zeros/n down
  // to 0, so expand until the values straddle kappa.
  double hi = max_abs;
  double lo = max_abs;
  while (mean_rho(r, lo, p.family) <= p.kappa) {
    lo *= 0.5;
    if (lo < 1e-300) return 0.0;
  }
  while (mean_rho(r, hi, p.family) >= p.kappa) {
    hi *= 2.0;
    if (hi > 1e300) return 0.0;
  }

  for (int it = 0; it < 200 && (hi - lo) > 1e-13 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mean_rho(r, mid, p.family) > p.kappa) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

}  // namespace robreg
