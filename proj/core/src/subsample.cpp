#include "robreg/subsample.hpp"

#include <cmath>
#include <string>
#include <utility>

namespace robreg {

SubsampleResult nonsingular_subsample(const Matrix& x, const Vector& y,
                                      RngStream rng, double sing_tol) {
  const int n = x.rows();
  const int p = x.cols();

  SubsampleResult res;
  res.permutation = rng.permutation(n);

  // a holds the transposed design in permuted observation order: column k
  // of the transposed design is row k of `a`, so each observation is a
  // contiguous p-vector. Coordinate pivoting swaps entries inside the
  // not-yet-consumed rows.
  Matrix a(n, p);
  for (int k = 0; k < n; ++k) {
    const auto src = x.row(res.permutation[k]);
    auto dst = a.row(k);
    for (int i = 0; i < p; ++i) dst[i] = src[i];
  }

  Matrix l = Matrix::identity(p);
  Matrix u(p, p);
  std::vector<int> pivots(p);
  std::vector<int> selected(p);
  Vector v(p), ucol(p);

  int k = 0;  // next observation (column of the transposed design) to try
  for (int j = 0; j < p; ++j) {
    for (;;) {
      if (k >= n) {
        // observations exhausted at this elimination step
        res.status = j + 1;
        res.observations_examined = k;
        res.columns_skipped = k - j;
        return res;
      }
      ++res.elimination_steps;
      const auto obs = a.row(k);
      if (j == 0) {
        for (int i = 0; i < p; ++i) v[i] = obs[i];
      } else {
        // forward-solve for the needed column of U, then form the
        // remaining working column (the delayed Gaxpy update)
        for (int i = 0; i < j; ++i) {
          double acc = obs[i];
          for (int m = 0; m < i; ++m) acc -= l(i, m) * ucol[m];
          ucol[i] = acc;
        }
        for (int t = j; t < p; ++t) {
          double acc = obs[t];
          for (int m = 0; m < j; ++m) acc -= l(t, m) * ucol[m];
          v[t] = acc;
        }
      }

      // pivot: max-abs entry of the working column, lowest index on ties
      int mu = j;
      double best = std::abs(v[j]);
      for (int t = j + 1; t < p; ++t) {
        const double cand = std::abs(v[t]);
        if (cand > best) {
          best = cand;
          mu = t;
        }
      }
      if (best < sing_tol) {
        // collinear with the already-selected observations: drop it and
        // retry this step with the next one
        ++res.columns_skipped;
        ++k;
        continue;
      }

      pivots[j] = mu;
      selected[j] = k;
      if (mu != j) {
        std::swap(v[j], v[mu]);
        for (int kk = k + 1; kk < n; ++kk) {
          std::swap(a(kk, j), a(kk, mu));
        }
        for (int m = 0; m < j; ++m) std::swap(l(j, m), l(mu, m));
      }
      for (int m = 0; m < j; ++m) u(m, j) = ucol[m];
      u(j, j) = v[j];
      for (int t = j + 1; t < p; ++t) l(t, j) = v[t] / v[j];
      ++k;
      break;
    }
  }

  res.observations_examined = k;

  // The factorization is of the transposed selected design (with the
  // coordinate pivoting folded in), so solve U' z = y_s, then L' g = z,
  // then undo the pivot swaps in reverse.
  Vector beta(p);
  for (int i = 0; i < p; ++i) beta[i] = y[res.permutation[selected[i]]];
  for (int i = 0; i < p; ++i) {
    double acc = beta[i];
    for (int m = 0; m < i; ++m) acc -= u(m, i) * beta[m];
    beta[i] = acc / u(i, i);
  }
  for (int i = p - 1; i >= 0; --i) {
    double acc = beta[i];
    for (int m = i + 1; m < p; ++m) acc -= l(m, i) * beta[m];
    beta[i] = acc;
  }
  for (int j = p - 2; j >= 0; --j) {
    if (pivots[j] != j) std::swap(beta[j], beta[pivots[j]]);
  }

  res.pivots = std::move(pivots);
  res.selected = std::move(selected);
  res.beta0 = std::move(beta);
  return res;
}

SubsampleResult rejection_subsample(const Matrix& x, const Vector& y,
                                    RngStream rng, double sing_tol,
                                    long max_tries) {
  const int n = x.rows();
  const int p = x.cols();

  SubsampleResult res;
  Matrix sub(p, p);
  Vector ysub(p);

  for (long attempt = 0; attempt < max_tries; ++attempt) {
    ++res.tries;
    res.observations_examined += p;
    // first p of a fresh permutation: a uniform p-subset, and the same
    // draw the nonsingular sampler starts from on this stream
    res.permutation = rng.permutation(n);
    for (int i = 0; i < p; ++i) {
      const auto src = x.row(res.permutation[i]);
      auto dst = sub.row(i);
      for (int j = 0; j < p; ++j) dst[j] = src[j];
      ysub[i] = y[res.permutation[i]];
    }
    PluFactors f;
    int failing_col = -1;
    if (!try_plu_decompose(sub, sing_tol, f, failing_col)) {
      res.status = failing_col + 1;
      res.elimination_steps += failing_col + 1;
      continue;  // discard the whole draw
    }
    res.status = 0;
    res.elimination_steps += p;
    res.selected.resize(p);
    for (int i = 0; i < p; ++i) res.selected[i] = i;
    res.pivots = f.pivots;
    res.beta0 = solve_plu(f, ysub);
    return res;
  }
  res.exhausted = true;
  return res;
}

std::uint64_t binomial_capped(int n, int k, std::uint64_t cap) {
  if (k < 0 || k > n) return 0;
  if (k > n - k) k = n - k;
  std::uint64_t c = 1;
  for (int i = 1; i <= k; ++i) {
    // c * (n - k + i) / i is always integral at this point
    const std::uint64_t num = static_cast<std::uint64_t>(n - k + i);
    if (c > (cap * static_cast<std::uint64_t>(i)) / num) return cap + 1;
    c = c * num / static_cast<std::uint64_t>(i);
    if (c > cap) return cap + 1;
  }
  return c;
}

SubsampleCensus enumerate_subsamples(const Matrix& x, double sing_tol) {
  const int n = x.rows();
  const int p = x.cols();
  constexpr std::uint64_t kGuard = 10'000'000;
  const std::uint64_t total = binomial_capped(n, p, kGuard);
  if (total > kGuard) {
    throw RankError("binomial(" + std::to_string(n) + ", " +
                    std::to_string(p) + ") exceeds the enumeration guard");
  }

  SubsampleCensus census;
  census.total = total;

  std::vector<int> idx(p);
  for (int i = 0; i < p; ++i) idx[i] = i;
  Matrix sub(p, p);
  PluFactors f;
  for (;;) {
    for (int i = 0; i < p; ++i) {
      const auto src = x.row(idx[i]);
      auto dst = sub.row(i);
      for (int j = 0; j < p; ++j) dst[j] = src[j];
    }
    int failing_col = -1;
    if (try_plu_decompose(sub, sing_tol, f, failing_col)) {
      ++census.nonsingular;
    }
    // next lexicographic combination
    int i = p - 1;
    while (i >= 0 && idx[i] == n - p + i) --i;
    if (i < 0) break;
    ++idx[i];
    for (int t = i + 1; t < p; ++t) idx[t] = idx[t - 1] + 1;
  }
  return census;
}

std::uint64_t required_subsamples(int p, double contamination,
                                  double confidence) {
  const double clean = std::pow(1.0 - contamination, p);
  if (clean <= 0.0) {
    throw RankError("clean-subsample probability underflows to zero");
  }
  // smallest N with 1 - (1 - clean)^N >= confidence
  const double miss = 1.0 - clean;
  if (miss <= 0.0) return 1;
  if (miss >= 1.0) {
    // clean probability below machine epsilon; N would be astronomical
    throw RankError("required subsample count exceeds 2^63");
  }
  const double bound =
      std::log1p(-confidence) / std::log(miss);  // log(1-conf)/log(miss)
  if (!(bound < 9.22e18)) {
    throw RankError("required subsample count exceeds 2^63");
  }
  auto achieves = [&](std::uint64_t n) {
    return -std::expm1(static_cast<double>(n) * std::log(miss)) >= confidence;
  };
  std::uint64_t n = static_cast<std::uint64_t>(std::ceil(bound));
  if (n == 0) n = 1;
  while (!achieves(n)) ++n;        // guard against rounding down
  while (n > 1 && achieves(n - 1)) --n;
  return n;
}

}  // namespace robreg
