#pragma once

#include <cmath>

namespace robreg {

// Cutoff making the expected rho of a standard normal equal 0.5, which
// pairs with kappa = 0.5 for the maximal breakdown point.
inline constexpr double kDefaultTuningC = 1.54764;

// Tukey bisquare family. rho is the bounded loss with rho(inf) = 1 (this is
// also the chi of the scale equation); psi is its derivative rescaled so
// psi'(0) = 1; weight(v) = psi(v)/v is the robustness weight of the
// reweighted least-squares form.
class Bisquare {
 public:
  Bisquare() noexcept : c_(kDefaultTuningC) {}
  explicit Bisquare(double tuning_c) noexcept : c_(tuning_c) {}

  double tuning_c() const noexcept { return c_; }

  // 1 - (1 - (v/c)^2)^3 clipped at 1, even, nondecreasing in |v|
  double rho(double v) const noexcept {
    const double t = v / c_;
    if (std::abs(t) >= 1.0) return 1.0;
    const double s = 1.0 - t * t;
    return 1.0 - s * s * s;
  }

  // v (1 - (v/c)^2)^2 inside the cutoff, 0 beyond; odd, psi'(0) = 1
  double psi(double v) const noexcept {
    const double t = v / c_;
    if (std::abs(t) >= 1.0) return 0.0;
    const double s = 1.0 - t * t;
    return v * s * s;
  }

  // psi(v)/v continued with 1 at v = 0; in [0, 1]
  double weight(double v) const noexcept {
    const double t = v / c_;
    if (std::abs(t) >= 1.0) return 0.0;
    const double s = 1.0 - t * t;
    return s * s;
  }

  // d rho / d v = psi_to_rho_slope() * psi(v)
  double psi_to_rho_slope() const noexcept { return 6.0 / (c_ * c_); }

 private:
  double c_;
};

}  // namespace robreg
