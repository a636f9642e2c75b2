#pragma once

#include <cstdint>
#include <vector>

#include "robreg/linalg.hpp"
#include "robreg/rng.hpp"

namespace robreg {

// Outcome of one subsample draw. status == 0 on success; otherwise the
// 1-based elimination step at which the observations ran out (which means
// rank(X) < p or the singularity threshold is too large). For the
// rejection baseline, `exhausted` marks giving up after max_tries draws.
struct SubsampleResult {
  int status = 0;
  bool exhausted = false;
  std::vector<int> selected;     // positions into `permutation`, length p
  std::vector<int> permutation;  // random observation order, length n
  std::vector<int> pivots;       // coordinate pivot per step (nonsingular)
  Vector beta0;                  // exact solution on the selected rows
  long observations_examined = 0;
  long columns_skipped = 0;
  long elimination_steps = 0;  // column eliminations actually executed
  long tries = 0;              // rejection baseline only

  bool ok() const noexcept { return status == 0 && !exhausted; }

  // Selected observation indices in the original row order.
  std::vector<int> selected_rows() const {
    std::vector<int> rows;
    rows.reserve(selected.size());
    for (int s : selected) rows.push_back(permutation[s]);
    return rows;
  }
};

// Nonsingular subsampling: walk the random observation order, building the
// LU factorization of the subsample's transposed design one observation at
// a time, and skip any observation whose working pivot falls below
// sing_tol instead of discarding the draw. Previously eliminated columns
// are never recomputed, so the work is one column elimination per examined
// observation. The subsample it returns is nonsingular by construction,
// and beta0 solves the p x p system of the selected rows.
SubsampleResult nonsingular_subsample(const Matrix& x, const Vector& y,
                                      RngStream rng, double sing_tol);

// Simple random subsampling baseline: draw p observations at once, attempt
// a full factorization, and discard the whole draw when it is singular.
// Gives up (exhausted = true) after max_tries singular draws.
SubsampleResult rejection_subsample(const Matrix& x, const Vector& y,
                                    RngStream rng, double sing_tol,
                                    long max_tries);

// Exact census of the size-p subsets of rows: how many there are and how
// many are nonsingular. Throws RankError when binomial(n, p) exceeds the
// enumeration guard of 1e7.
struct SubsampleCensus {
  std::uint64_t total = 0;
  std::uint64_t nonsingular = 0;
};
SubsampleCensus enumerate_subsamples(const Matrix& x, double sing_tol);

// Smallest N such that N random subsamples contain at least one
// outlier-free one with the given probability, assuming an i.i.d.
// contamination fraction. Throws RankError if N would exceed 2^63.
std::uint64_t required_subsamples(int p, double contamination,
                                  double confidence);

// binomial(n, k) capped at `cap` (returns cap + 1 on overflow past it).
std::uint64_t binomial_capped(int n, int k, std::uint64_t cap);

}  // namespace robreg
