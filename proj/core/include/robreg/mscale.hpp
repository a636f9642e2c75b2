#pragma once

#include <vector>

#include "robreg/rho.hpp"

namespace robreg {

// M-estimate of scale: sigma solving mean(rho(r_i / sigma)) = kappa.
struct ScaleProblem {
  std::vector<double> residuals;
  double kappa = 0.5;  // in (0, 1)
  Bisquare family;
};

// Solves the scale equation by bisection (the mean-rho curve is
// nonincreasing in sigma, so the root is unique when it exists). Returns 0
// when the fraction of exactly-zero residuals is >= 1 - kappa: in that
// degenerate case no positive sigma can satisfy the equation, and a
// perfect fit on at least a 1-kappa fraction is declared.
double mscale(const ScaleProblem& p);

// mean(rho(r_i / sigma)); the left-hand side of the scale equation.
double mean_rho(const std::vector<double>& residuals, double sigma,
                const Bisquare& family);

}  // namespace robreg
