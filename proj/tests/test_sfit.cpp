#include <algorithm>
#include <cmath>

#include "doctest.h"
#include "oracles.hpp"
#include "robreg/model.hpp"
#include "robreg/mscale.hpp"
#include "robreg/sfit.hpp"

using robreg::FitConfig;
using robreg::Matrix;
using robreg::Method;
using robreg::SFit;
using robreg::Vector;

namespace {

Matrix anova_design() {
  Matrix x(9, 3);
  for (int i = 0; i < 9; ++i) {
    x(i, 0) = 1.0;
    x(i, 1) = (i >= 3 && i < 6) ? 1.0 : 0.0;
    x(i, 2) = (i >= 6) ? 1.0 : 0.0;
  }
  return x;
}

struct Problem {
  Matrix x;
  Vector y;
};

Problem continuous_problem(int n, int p, int n_out, robreg::RngStream& rng,
                           double noise_sd = 1.0) {
  Problem pr{Matrix(n, p), Vector(n)};
  for (int i = 0; i < n; ++i) {
    pr.x(i, 0) = 1.0;
    double fit = 2.0;
    for (int j = 1; j < p; ++j) {
      pr.x(i, j) = rng.next_normal();
      fit += (j + 1.0) * pr.x(i, j);
    }
    pr.y[i] = fit + noise_sd * rng.next_normal();
  }
  for (int i = 0; i < n_out; ++i) pr.y[i] += 100.0;
  return pr;
}

}  // namespace

TEST_CASE("exact-fit anova recovers the treatment contrasts with scale zero") {
  const Matrix x = anova_design();
  const Vector y{1, 1, 1, 3, 3, 3, 5, 5, 5};
  for (Method m : {Method::nonsingular, Method::exhaustive}) {
    FitConfig cfg;
    cfg.method = m;
    cfg.nsamp = 50;
    cfg.seed = 3;
    const SFit fit = robreg::fit(x, y, cfg);
    CHECK(fit.sigma == 0.0);
    CHECK(fit.beta[0] == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(fit.beta[1] == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(fit.beta[2] == doctest::Approx(4.0).epsilon(1e-12));
    for (double w : fit.weights) CHECK(w == 1.0);
  }
}

TEST_CASE("clean continuous data stays close to least squares") {
  robreg::RngStream rng(2025, 0);
  const Problem pr = continuous_problem(50, 2, 0, rng);
  FitConfig cfg;
  cfg.nsamp = 300;
  cfg.seed = 11;
  const SFit fit = robreg::fit(pr.x, pr.y, cfg);

  const Vector ls = oracle::least_squares(pr.x, pr.y);
  Vector resid = pr.x.multiply(ls);
  double rss = 0.0;
  for (int i = 0; i < 50; ++i) {
    resid[i] = pr.y[i] - resid[i];
    rss += resid[i] * resid[i];
  }
  const double s2 = rss / (50 - 2);
  const auto inv_diag = oracle::xtx_inverse_diag(pr.x);
  for (int j = 0; j < 2; ++j) {
    const double se = std::sqrt(s2 * inv_diag[j]);
    CHECK(std::abs(fit.beta[j] - ls[j]) <= 5.0 * se);
  }
  CHECK(std::abs(fit.sigma - 1.0) <= 0.3);
}

TEST_CASE("gross outliers get weight zero and the fit tracks clean points") {
  robreg::GenSpec spec;
  spec.n = 40;
  spec.noise_sd = 1.0;
  spec.outlier_fraction = 0.375;  // 15 of 40
  spec.outlier_shift = 100.0;
  spec.true_beta = {5.0};
  spec.seed = 7;
  const robreg::DataFrame df = robreg::generate(spec);
  const auto d = robreg::build_design(df, robreg::implied_model(spec));
  REQUIRE(d.x.cols() == 1);

  FitConfig cfg;
  cfg.nsamp = 200;
  cfg.seed = 1;
  const SFit fit = robreg::fit(d.x, d.y, cfg);

  double clean_lo = 1e300, clean_hi = -1e300;
  int outliers = 0;
  for (int i = 0; i < 40; ++i) {
    if (d.y[i] > 50.0) {
      ++outliers;
      CHECK(fit.weights[i] == 0.0);
    } else {
      clean_lo = std::min(clean_lo, d.y[i]);
      clean_hi = std::max(clean_hi, d.y[i]);
    }
  }
  CHECK(outliers == 15);
  CHECK(fit.beta[0] >= clean_lo);
  CHECK(fit.beta[0] <= clean_hi);
  // the final scale reproduces the M-scale of its own residuals
  Vector r(40);
  for (int i = 0; i < 40; ++i) r[i] = d.y[i] - fit.beta[0];
  const double check =
      robreg::mscale({r, fit.kappa, robreg::Bisquare(cfg.tuning_c)});
  CHECK(fit.sigma == doctest::Approx(check).epsilon(1e-8));
}

TEST_CASE("exhaustive candidate counts") {
  SUBCASE("anova: all 27 nonsingular subsets are refined") {
    const Matrix x = anova_design();
    const Vector y{1, 1, 1, 3, 3, 3, 5, 5, 5};
    FitConfig cfg;
    cfg.method = Method::exhaustive;
    const SFit fit = robreg::fit_exhaustive(x, y, cfg);
    CHECK(fit.candidates_evaluated == 27);
    CHECK(fit.candidates_singular_discarded == 84 - 27);
  }
  SUBCASE("n = p + 1 has p + 1 subsets") {
    robreg::RngStream rng(88, 0);
    for (int p : {1, 2, 4}) {
      const Problem pr = continuous_problem(p + 1, p, 0, rng);
      FitConfig cfg;
      const SFit fit = robreg::fit_exhaustive(pr.x, pr.y, cfg);
      CHECK(fit.candidates_evaluated == p + 1);
    }
  }
  SUBCASE("guard trips on large designs") {
    robreg::RngStream rng(88, 1);
    const Problem pr = continuous_problem(300, 5, 0, rng);
    CHECK_THROWS_AS(robreg::fit_exhaustive(pr.x, pr.y, FitConfig{}),
                    robreg::RankError);
  }
}

TEST_CASE("random subsampling attains the exhaustive scale on small data") {
  robreg::RngStream rng(9000, 0);
  const Problem pr = continuous_problem(10, 2, 2, rng);
  FitConfig cfg;
  cfg.nsamp = 500;
  cfg.seed = 21;
  const SFit random_fit = robreg::fit(pr.x, pr.y, cfg);
  const SFit exhaustive_fit = robreg::fit_exhaustive(pr.x, pr.y, cfg);
  CHECK(exhaustive_fit.candidates_evaluated == 45);
  CHECK(random_fit.sigma ==
        doctest::Approx(exhaustive_fit.sigma).epsilon(1e-8));
  CHECK(random_fit.sigma >= exhaustive_fit.sigma - 1e-10);
}

TEST_CASE("exhaustive sigma is a lower bound across methods and datasets") {
  robreg::RngStream rng(31415, 0);
  for (int trial = 0; trial < 50; ++trial) {
    const int n = 8 + rng.next_below(5);
    const Problem pr = continuous_problem(n, 2, rng.next_below(3), rng);
    FitConfig cfg;
    cfg.nsamp = 60;
    cfg.seed = 1000 + trial;
    const double exhaustive_sigma =
        robreg::fit_exhaustive(pr.x, pr.y, cfg).sigma;
    for (Method m : {Method::nonsingular, Method::rejection}) {
      cfg.method = m;
      const SFit f = robreg::fit(pr.x, pr.y, cfg);
      REQUIRE(f.sigma >= exhaustive_sigma - 1e-10);
    }
  }
}

TEST_CASE("reported sigma is the minimum over refined candidates") {
  robreg::RngStream rng(52, 0);
  const Problem pr = continuous_problem(25, 3, 5, rng);
  FitConfig cfg;
  cfg.nsamp = 100;
  cfg.seed = 5;
  cfg.collect_candidates = true;
  const SFit fit = robreg::fit(pr.x, pr.y, cfg);
  REQUIRE(fit.candidate_sigmas.size() ==
          static_cast<std::size_t>(fit.candidates_evaluated));
  double best = 1e300;
  long best_index = -1;
  for (const auto& [index, sigma] : fit.candidate_sigmas) {
    if (sigma < best) {
      best = sigma;
      best_index = index;
    }
  }
  CHECK(fit.sigma == best);
  CHECK(fit.best_candidate_index == best_index);
}

TEST_CASE("pipeline equivariance") {
  robreg::RngStream rng(7777, 0);
  const Problem pr = continuous_problem(30, 3, 4, rng);
  FitConfig cfg;
  cfg.nsamp = 150;
  cfg.seed = 4;
  const SFit base = robreg::fit(pr.x, pr.y, cfg);

  SUBCASE("regression shift") {
    const Vector delta{10.0, -4.0, 2.5};
    Vector y2 = pr.x.multiply(delta);
    for (int i = 0; i < 30; ++i) y2[i] += pr.y[i];
    const SFit shifted = robreg::fit(pr.x, y2, cfg);
    for (int j = 0; j < 3; ++j) {
      CHECK(shifted.beta[j] - delta[j] ==
            doctest::Approx(base.beta[j]).epsilon(1e-8));
    }
    CHECK(shifted.sigma == doctest::Approx(base.sigma).epsilon(1e-10));
  }
  SUBCASE("response scaling") {
    const double t = -3.25;
    Vector y2(30);
    for (int i = 0; i < 30; ++i) y2[i] = t * pr.y[i];
    const SFit scaled = robreg::fit(pr.x, y2, cfg);
    for (int j = 0; j < 3; ++j) {
      CHECK(scaled.beta[j] == doctest::Approx(t * base.beta[j]).epsilon(1e-8));
    }
    CHECK(scaled.sigma ==
          doctest::Approx(std::abs(t) * base.sigma).epsilon(1e-8));
  }
}

TEST_CASE("thread count does not change the result") {
  robreg::RngStream rng(2468, 0);
  const Problem pr = continuous_problem(40, 4, 6, rng);
  FitConfig cfg;
  cfg.nsamp = 120;
  cfg.seed = 9;
  cfg.threads = 1;
  const SFit one = robreg::fit(pr.x, pr.y, cfg);
  cfg.threads = 4;
  const SFit four = robreg::fit(pr.x, pr.y, cfg);
  CHECK(one.sigma == four.sigma);
  CHECK(one.beta == four.beta);
  CHECK(one.weights == four.weights);
  CHECK(one.best_candidate_index == four.best_candidate_index);
  CHECK(one.observations_examined_total == four.observations_examined_total);
}

TEST_CASE("methods agree on continuous designs") {
  // without skips both methods start from the same subsets, so the fits
  // coincide up to factorization round-off
  robreg::RngStream rng(1357, 0);
  const Problem pr = continuous_problem(35, 3, 5, rng);
  FitConfig cfg;
  cfg.nsamp = 80;
  cfg.seed = 13;
  cfg.method = Method::nonsingular;
  const SFit ns = robreg::fit(pr.x, pr.y, cfg);
  cfg.method = Method::rejection;
  const SFit rj = robreg::fit(pr.x, pr.y, cfg);
  CHECK(ns.candidates_evaluated == rj.candidates_evaluated);
  CHECK(ns.best_candidate_index == rj.best_candidate_index);
  CHECK(ns.sigma == doctest::Approx(rj.sigma).epsilon(1e-10));
  for (int j = 0; j < 3; ++j) {
    CHECK(ns.beta[j] == doctest::Approx(rj.beta[j]).epsilon(1e-8));
  }
}

TEST_CASE("error paths") {
  SUBCASE("more predictors than observations") {
    robreg::RngStream rng(1, 0);
    const Matrix x = oracle::random_matrix(3, 3, rng);
    CHECK_THROWS_AS(robreg::fit(x, {1, 2, 3}, FitConfig{}),
                    robreg::RankError);
  }
  SUBCASE("rank-deficient design") {
    Matrix x(10, 2);
    robreg::RngStream rng(2, 0);
    Vector y(10);
    for (int i = 0; i < 10; ++i) {
      x(i, 0) = x(i, 1) = rng.next_normal();
      y[i] = rng.next_normal();
    }
    FitConfig cfg;
    cfg.nsamp = 10;
    CHECK_THROWS_AS(robreg::fit(x, y, cfg), robreg::RankError);
  }
  SUBCASE("zero column cannot be equilibrated") {
    Matrix x(10, 2);
    Vector y(10);
    robreg::RngStream rng(3, 0);
    for (int i = 0; i < 10; ++i) {
      x(i, 0) = rng.next_normal();
      y[i] = rng.next_normal();
    }
    CHECK_THROWS_AS(robreg::fit(x, y, FitConfig{}), robreg::RankError);
  }
}
