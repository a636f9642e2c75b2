#include "robreg/sfit.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <thread>

#include "robreg/mscale.hpp"
#include "robreg/subsample.hpp"

namespace robreg {

std::string to_string(Method m) {
  switch (m) {
    case Method::nonsingular: return "nonsingular";
    case Method::rejection: return "rejection";
    case Method::exhaustive: return "exhaustive";
  }
  return "?";
}

std::optional<Method> method_from_string(const std::string& s) {
  if (s == "nonsingular") return Method::nonsingular;
  if (s == "rejection") return Method::rejection;
  if (s == "exhaustive") return Method::exhaustive;
  return std::nullopt;
}

namespace {

struct Resolved {
  Matrix xe;  // equilibrated design
  Equilibration eq;
  double kappa = 0.0;
  double sing_tol = 0.0;
  IrlsConfig irls;
};

Resolved resolve(const Matrix& x, const FitConfig& cfg) {
  const int n = x.rows();
  const int p = x.cols();
  if (n <= p) {
    throw RankError("need more observations than predictors (n > p)");
  }
  Resolved r;
  auto [xe, eq] = equilibrate(x);
  r.xe = std::move(xe);
  r.eq = std::move(eq);
  r.kappa = cfg.kappa.value_or(std::clamp(
      0.5 * (1.0 - static_cast<double>(p) / static_cast<double>(n)), 0.05,
      0.5));
  r.sing_tol = cfg.sing_tol.value_or(default_sing_tol(p, r.xe.max_abs()));
  r.irls.max_iter = cfg.refine_max_iter;
  r.irls.coef_tol = cfg.refine_tol;
  r.irls.family = Bisquare(cfg.tuning_c);
  r.irls.kappa = r.kappa;
  return r;
}

// Per-candidate outcome, reduced by (sigma, index) lexicographic minimum so
// the winner is independent of evaluation order.
struct Evaluated {
  long index = -1;
  bool obtained = false;
  bool singular_discard = false;
  double sigma = 0.0;
  Vector beta;
  long observations_examined = 0;
  long elimination_steps = 0;
  long columns_skipped = 0;
  std::string error;
};

template <typename Eval>
std::vector<Evaluated> run_candidates(long count, int threads, Eval eval) {
  std::vector<Evaluated> results(count);
  if (threads <= 1 || count <= 1) {
    for (long i = 0; i < count; ++i) results[i] = eval(i);
    return results;
  }
  const int nthreads = static_cast<int>(
      std::min<long>(threads, std::max<long>(1, count)));
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(nthreads);
  pool.reserve(nthreads);
  for (int t = 0; t < nthreads; ++t) {
    pool.emplace_back([&, t] {
      try {
        for (long i = t; i < count; i += nthreads) results[i] = eval(i);
      } catch (...) {
        errors[t] = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return results;
}

SFit reduce(const std::vector<Evaluated>& results, const Matrix& xe,
            const Vector& y, const Resolved& rs, const FitConfig& cfg) {
  SFit out;
  out.kappa = rs.kappa;
  out.sing_tol = rs.sing_tol;

  const Evaluated* best = nullptr;
  for (const auto& ev : results) {
    out.observations_examined_total += ev.observations_examined;
    out.elimination_steps_total += ev.elimination_steps;
    out.columns_skipped_total += ev.columns_skipped;
    if (ev.singular_discard) ++out.candidates_singular_discarded;
    if (!ev.obtained) continue;
    ++out.candidates_evaluated;
    if (cfg.collect_candidates) {
      out.candidate_sigmas.emplace_back(ev.index, ev.sigma);
    }
    if (best == nullptr || ev.sigma < best->sigma ||
        (ev.sigma == best->sigma && ev.index < best->index)) {
      best = &ev;
    }
  }
  if (best == nullptr) {
    throw RankError("no subsample candidate could be refined");
  }

  out.best_candidate_index = best->index;
  out.sigma = best->sigma;

  // robustness weights at the winning (beta, sigma), on the equilibrated
  // scale (residuals are invariant under column scaling)
  const int n = xe.rows();
  Vector fitted = xe.multiply(best->beta);
  out.weights.resize(n);
  double ymax = 0.0;
  for (double v : y) ymax = std::max(ymax, std::abs(v));
  const double exact_fit_tol = 1e-8 * (1.0 + ymax);
  for (int i = 0; i < n; ++i) {
    const double r = y[i] - fitted[i];
    if (out.sigma > 0.0) {
      out.weights[i] = rs.irls.family.weight(r / out.sigma);
    } else {
      out.weights[i] = std::abs(r) <= exact_fit_tol ? 1.0 : 0.0;
    }
  }

  // back to the original column scaling
  const int p = xe.cols();
  out.beta.resize(p);
  for (int j = 0; j < p; ++j) {
    out.beta[j] = best->beta[j] * rs.eq.column_scales[j];
  }
  return out;
}

}  // namespace

SFit fit(const Matrix& x, const Vector& y, const FitConfig& cfg) {
  if (cfg.method == Method::exhaustive) return fit_exhaustive(x, y, cfg);
  const Resolved rs = resolve(x, cfg);
  const Matrix& xe = rs.xe;

  const bool rejection = cfg.method == Method::rejection;
  auto eval = [&](long i) {
    Evaluated ev;
    ev.index = i;
    SubsampleResult sub =
        rejection
            ? rejection_subsample(xe, y, RngStream(cfg.seed, i), rs.sing_tol,
                                  /*max_tries=*/1)
            : nonsingular_subsample(xe, y, RngStream(cfg.seed, i),
                                    rs.sing_tol);
    ev.observations_examined = sub.observations_examined;
    ev.elimination_steps = sub.elimination_steps;
    ev.columns_skipped = sub.columns_skipped;
    if (!sub.ok()) {
      ev.singular_discard = true;
      return ev;
    }
    try {
      Candidate cand = refine(xe, y, sub.beta0, rs.irls);
      ev.obtained = true;
      ev.sigma = cand.sigma;
      ev.beta = std::move(cand.beta);
    } catch (const RankError& e) {
      ev.error = e.what();
    }
    return ev;
  };

  std::vector<Evaluated> results;
  if (rejection && cfg.rejection_max_tries > 0) {
    // Success-counted mode for benchmarking: nsamp is the target number of
    // obtained candidates, drawing one attempt per stream until the target
    // or the try budget is hit. Attempt i is a pure function of stream i,
    // so the stopping index is deterministic.
    long successes = 0;
    for (long i = 0; i < cfg.rejection_max_tries && successes < cfg.nsamp;
         ++i) {
      results.push_back(eval(i));
      if (results.back().obtained) ++successes;
    }
  } else {
    results = run_candidates(cfg.nsamp, cfg.threads, eval);
  }

  // For the nonsingular method a failed draw means the whole design is
  // rank-deficient; surface that instead of "no candidates".
  if (!rejection) {
    for (const auto& ev : results) {
      if (ev.singular_discard) {
        throw RankError(
            "design matrix is rank-deficient: nonsingular subsampling "
            "exhausted the observations");
      }
    }
  }
  return reduce(results, xe, y, rs, cfg);
}

SFit fit_exhaustive(const Matrix& x, const Vector& y, const FitConfig& cfg) {
  const Resolved rs = resolve(x, cfg);
  const Matrix& xe = rs.xe;
  const int n = xe.rows();
  const int p = xe.cols();

  constexpr std::uint64_t kGuard = 100'000;
  const std::uint64_t total = binomial_capped(n, p, kGuard);
  if (total > kGuard) {
    throw RankError("binomial(n, p) exceeds the exhaustive-fit guard of 1e5");
  }

  // materialize the subsets so candidates can be evaluated in parallel
  std::vector<std::vector<int>> subsets;
  subsets.reserve(total);
  std::vector<int> idx(p);
  for (int i = 0; i < p; ++i) idx[i] = i;
  for (;;) {
    subsets.push_back(idx);
    int i = p - 1;
    while (i >= 0 && idx[i] == n - p + i) --i;
    if (i < 0) break;
    ++idx[i];
    for (int t = i + 1; t < p; ++t) idx[t] = idx[t - 1] + 1;
  }

  auto eval = [&](long s) {
    Evaluated ev;
    ev.index = s;
    const auto& rows = subsets[s];
    Matrix sub(p, p);
    Vector ysub(p);
    for (int i = 0; i < p; ++i) {
      const auto src = xe.row(rows[i]);
      auto dst = sub.row(i);
      for (int j = 0; j < p; ++j) dst[j] = src[j];
      ysub[i] = y[rows[i]];
    }
    ev.observations_examined = p;
    PluFactors f;
    int failing_col = -1;
    if (!try_plu_decompose(sub, rs.sing_tol, f, failing_col)) {
      ev.singular_discard = true;
      ev.elimination_steps = failing_col + 1;
      return ev;
    }
    ev.elimination_steps = p;
    try {
      Candidate cand = refine(xe, y, solve_plu(f, ysub), rs.irls);
      ev.obtained = true;
      ev.sigma = cand.sigma;
      ev.beta = std::move(cand.beta);
    } catch (const RankError& e) {
      ev.error = e.what();
    }
    return ev;
  };

  const auto results =
      run_candidates(static_cast<long>(subsets.size()), cfg.threads, eval);
  return reduce(results, xe, y, rs, cfg);
}

}  // namespace robreg
