#pragma once

#include <vector>

#include "robreg/linalg.hpp"
#include "robreg/rho.hpp"

namespace robreg {

struct IrlsConfig {
  int max_iter = 200;
  double coef_tol = 1e-8;  // relative coefficient-change stop, see refine()
  Bisquare family;
  double kappa = 0.5;
  bool record_sigma_trace = false;
};

// One refined candidate: coefficients and scale after iterative
// reweighting from a subsample start.
struct Candidate {
  Vector beta;
  double sigma = 0.0;
  int iterations = 0;
  bool converged = false;
  std::vector<double> sigma_trace;  // filled when cfg.record_sigma_trace
};

// Simultaneous M-estimation of regression and scale by iterative
// reweighting. Alternates one multiplicative scale update
//   sigma <- sigma * sqrt(mean_rho(r / sigma) / kappa)
// with one weighted least-squares step using weights w(r_i / sigma),
// starting from the exact M-scale of the initial residuals so the sigma
// iterates are nonincreasing. Stops when the coefficient change per
// iteration, measured relative to the current scale, drops below
// cfg.coef_tol (that yardstick keeps the stopping rule regression- and
// scale-equivariant). After the coefficients settle, the scale update is
// iterated to a tight fixed point so the returned pair satisfies both
// estimating equations by direct substitution.
//
// An exact fit (scale below 1e-10 * (max|y| + 1)) short-circuits to
// sigma = 0, converged. Throws RankError if the weighted normal equations
// become singular (e.g. all weights vanish).
Candidate refine(const Matrix& x, const Vector& y, const Vector& beta0,
                 const IrlsConfig& cfg);

}  // namespace robreg
