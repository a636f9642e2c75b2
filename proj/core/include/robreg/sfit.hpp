#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "robreg/irls.hpp"
#include "robreg/linalg.hpp"
#include "robreg/rho.hpp"

namespace robreg {

enum class Method { nonsingular, rejection, exhaustive };

std::string to_string(Method m);
std::optional<Method> method_from_string(const std::string& s);

struct FitConfig {
  long nsamp = 1000;
  std::optional<double> kappa;     // default (1 - p/n)/2, clamped to [0.05, 0.5)
  double tuning_c = kDefaultTuningC;
  Method method = Method::nonsingular;
  std::uint64_t seed = 0;
  int refine_max_iter = 200;
  double refine_tol = 1e-8;
  std::optional<double> sing_tol;  // default p * eps * max|X_equilibrated|
  int threads = 1;
  // For method == rejection, nsamp normally counts attempted draws. When
  // rejection_max_tries > 0, nsamp instead counts obtained candidates and
  // draws continue (one per stream) up to this many attempts; used for
  // like-for-like benchmark comparisons against the nonsingular method.
  long rejection_max_tries = 0;
  bool collect_candidates = false;
};

struct SFit {
  Vector beta;     // on the original column scaling
  double sigma = 0.0;
  Vector weights;  // robustness weights at the final (beta, sigma)
  long candidates_evaluated = 0;
  long candidates_singular_discarded = 0;
  long observations_examined_total = 0;
  long elimination_steps_total = 0;
  long columns_skipped_total = 0;
  long best_candidate_index = -1;
  double kappa = 0.0;     // resolved value
  double sing_tol = 0.0;  // resolved value
  // (candidate index, refined sigma) pairs when cfg.collect_candidates
  std::vector<std::pair<long, double>> candidate_sigmas;
};

// S-estimate: generate subsample candidates by cfg.method, refine each by
// iterative reweighting, keep the candidate with the smallest scale.
// The design is equilibrated once up front; coefficients are mapped back
// to the original column scaling before returning. Candidate i always
// draws from RNG stream i of cfg.seed and ties on sigma break toward the
// lowest candidate index, so the result does not depend on cfg.threads.
SFit fit(const Matrix& x, const Vector& y, const FitConfig& cfg);

// Algorithm over every size-p subset instead of random draws (guarded at
// binomial(n, p) <= 1e5). Its sigma is a lower bound for any fit() run on
// the same data.
SFit fit_exhaustive(const Matrix& x, const Vector& y, const FitConfig& cfg);

}  // namespace robreg
