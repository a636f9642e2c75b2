// robreg: S-estimates of linear regression with nonsingular subsampling.
//
// Subcommands: fit, enumerate, bench, simulate. Results go to stdout as
// JSON (or CSV for simulate); progress notes go to stderr. Exit codes:
// 0 ok, 2 input error, 3 rank/feasibility error, 4 internal error.

#include <chrono>
#include <cmath>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "robreg/model.hpp"
#include "robreg/sfit.hpp"
#include "robreg/subsample.hpp"

using json = nlohmann::ordered_json;

namespace {

struct CommonFitOptions {
  std::string data;
  std::string formula;
  std::vector<std::string> factors;
  std::string method = "nonsingular";
  long nsamp = 1000;
  std::uint64_t seed = 0;
  std::optional<double> kappa;
  double tuning_c = robreg::kDefaultTuningC;
  std::optional<double> sing_tol;
  double refine_tol = 1e-8;
  int refine_maxit = 200;
  int threads = 1;
};

bool g_quiet = false;

void note(const std::string& msg) {
  if (!g_quiet) std::cerr << "robreg: " << msg << "\n";
}

void add_fit_options(CLI::App* cmd, CommonFitOptions& o) {
  cmd->add_option("data", o.data, "input CSV file (first row is the header)")
      ->required();
  cmd->add_option("-f,--formula", o.formula,
                  "model formula, e.g. 'y ~ x1 + f1 + x1:f1'; intercept is "
                  "implicit, remove it with '-1'")
      ->required();
  cmd->add_option("--factors", o.factors,
                  "treat these numeric columns as factors")
      ->delimiter(',');
  cmd->add_option("--method", o.method,
                  "subsampling method: nonsingular, rejection or exhaustive "
                  "(default nonsingular)")
      ->check(CLI::IsMember({"nonsingular", "rejection", "exhaustive"}));
  cmd->add_option("--nsamp", o.nsamp,
                  "candidate budget: successful draws for nonsingular, "
                  "attempted draws for rejection (default 1000)");
  cmd->add_option("--seed", o.seed, "RNG seed (default 0)");
  cmd->add_option("--kappa", o.kappa,
                  "scale-equation constant; default (1 - p/n)/2, the "
                  "maximal-breakdown choice, clamped to [0.05, 0.5)");
  cmd->add_option("--cc", o.tuning_c,
                  "bisquare tuning constant (default 1.54764, which makes "
                  "the expected rho of a standard normal equal 0.5)");
  cmd->add_option("--sing-tol", o.sing_tol,
                  "pivot singularity threshold; default p * 2.22e-16 * m "
                  "where m is the max-abs entry of the equilibrated design "
                  "(the threshold is relative to the matrix after column "
                  "equilibration)");
  cmd->add_option("--refine-tol", o.refine_tol,
                  "IRLS stop: max coefficient change per iteration relative "
                  "to the scale (default 1e-8)");
  cmd->add_option("--refine-maxit", o.refine_maxit,
                  "IRLS iteration cap (default 200)");
  cmd->add_option("--threads", o.threads,
                  "worker threads for candidate evaluation; the result is "
                  "identical for any value (default 1)");
}

robreg::FitConfig to_config(const CommonFitOptions& o) {
  robreg::FitConfig cfg;
  cfg.nsamp = o.nsamp;
  cfg.kappa = o.kappa;
  cfg.tuning_c = o.tuning_c;
  cfg.method = robreg::method_from_string(o.method).value();
  cfg.seed = o.seed;
  cfg.refine_max_iter = o.refine_maxit;
  cfg.refine_tol = o.refine_tol;
  cfg.sing_tol = o.sing_tol;
  cfg.threads = o.threads;
  return cfg;
}

robreg::Design load_design(const CommonFitOptions& o) {
  const robreg::DataFrame df = robreg::read_csv_file(o.data, o.factors);
  const robreg::ModelSpec spec = robreg::parse_formula(o.formula);
  robreg::Design d = robreg::build_design(df, spec);
  note("loaded " + o.data + ": n = " + std::to_string(d.x.rows()) +
       ", p = " + std::to_string(d.x.cols()));
  return d;
}

json config_echo(const CommonFitOptions& o, const robreg::SFit& fit) {
  json cfg;
  cfg["data"] = o.data;
  cfg["formula"] = o.formula;
  cfg["factors"] = o.factors;
  cfg["method"] = o.method;
  cfg["nsamp"] = o.nsamp;
  cfg["seed"] = o.seed;
  cfg["kappa"] = fit.kappa;
  cfg["cc"] = o.tuning_c;
  cfg["sing_tol"] = fit.sing_tol;
  cfg["refine_tol"] = o.refine_tol;
  cfg["refine_maxit"] = o.refine_maxit;
  return cfg;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
      .count();
}

int cmd_fit(const CommonFitOptions& o) {
  const auto t0 = std::chrono::steady_clock::now();
  const robreg::Design d = load_design(o);
  const robreg::SFit fit = robreg::fit(d.x, d.y, to_config(o));

  json out;
  json beta;
  for (std::size_t j = 0; j < d.column_names.size(); ++j) {
    beta[d.column_names[j]] = fit.beta[j];
  }
  out["beta"] = beta;
  out["sigma"] = fit.sigma;
  out["weights"] = fit.weights;
  json diag;
  diag["n"] = d.x.rows();
  diag["p"] = d.x.cols();
  diag["candidates_evaluated"] = fit.candidates_evaluated;
  diag["candidates_singular_discarded"] = fit.candidates_singular_discarded;
  diag["observations_examined_total"] = fit.observations_examined_total;
  diag["elimination_steps_total"] = fit.elimination_steps_total;
  diag["columns_skipped_total"] = fit.columns_skipped_total;
  diag["best_candidate_index"] = fit.best_candidate_index;
  out["diagnostics"] = diag;
  out["config"] = config_echo(o, fit);
  // execution-environment details live with the timings so that output
  // comparisons across thread counts only need to drop this block
  out["timing"] = {{"total_s", seconds_since(t0)}, {"threads", o.threads}};

  std::cout << out.dump(2) << "\n";
  return 0;
}

int cmd_enumerate(const CommonFitOptions& o) {
  const robreg::Design d = load_design(o);
  const int p = d.x.cols();
  const auto [xe, eq] = robreg::equilibrate(d.x);
  const double tol =
      o.sing_tol.value_or(robreg::default_sing_tol(p, xe.max_abs()));
  const robreg::SubsampleCensus census =
      robreg::enumerate_subsamples(xe, tol);

  json out;
  out["data"] = o.data;
  out["formula"] = o.formula;
  out["n"] = d.x.rows();
  out["p"] = p;
  out["total"] = census.total;
  out["nonsingular"] = census.nonsingular;
  out["ratio"] =
      static_cast<double>(census.nonsingular) / static_cast<double>(census.total);
  std::cout << out.dump(2) << "\n";
  return 0;
}

struct BenchOptions {
  CommonFitOptions fit;
  std::string scenario;
  std::string count_mode = "success";
  long max_tries = 10'000'000;
  int repeats = 1;
};

robreg::Design bench_design(const BenchOptions& o, json& meta) {
  if (!o.scenario.empty()) {
    robreg::GenSpec spec;
    spec.seed = 1;
    spec.noise_sd = 1.0;
    if (o.scenario == "continuous") {
      spec.n = 1000;
      spec.continuous_count = 9;  // p = 10 with the intercept
    } else if (o.scenario == "anova") {
      spec.n = 9;
      spec.factor_frequencies = {{3, 3, 3}};
    } else {
      // rare-level: one singleton level among 10, p = 10
      spec.n = 50;
      spec.factor_frequencies = {{1, 6, 6, 6, 6, 6, 6, 6, 5, 2}};
    }
    meta["scenario"] = o.scenario;
    const robreg::DataFrame df = robreg::generate(spec);
    return robreg::build_design(df, robreg::implied_model(spec));
  }
  meta["data"] = o.fit.data;
  meta["formula"] = o.fit.formula;
  return load_design(o.fit);
}

int cmd_bench(const BenchOptions& o) {
  json meta;
  const robreg::Design d = bench_design(o, meta);
  meta["n"] = d.x.rows();
  meta["p"] = d.x.cols();
  meta["nsamp"] = o.fit.nsamp;
  meta["seed"] = o.fit.seed;
  meta["count_mode"] = o.count_mode;
  meta["repeats"] = o.repeats;

  json methods;
  for (const std::string name : {"nonsingular", "rejection"}) {
    robreg::FitConfig cfg = to_config(o.fit);
    cfg.method = robreg::method_from_string(name).value();
    if (name == "rejection" && o.count_mode == "success") {
      cfg.rejection_max_tries = o.max_tries;
    }
    std::vector<double> walls;
    robreg::SFit fit;
    for (int rep = 0; rep < o.repeats; ++rep) {
      const auto t0 = std::chrono::steady_clock::now();
      fit = robreg::fit(d.x, d.y, cfg);
      walls.push_back(seconds_since(t0));
    }
    std::sort(walls.begin(), walls.end());
    const double median = walls[walls.size() / 2];

    json m;
    m["requested"] = o.fit.nsamp;
    m["obtained"] = fit.candidates_evaluated;
    m["singular_discards"] = fit.candidates_singular_discarded;
    m["observations_examined"] = fit.observations_examined_total;
    m["elimination_steps"] = fit.elimination_steps_total;
    m["columns_skipped"] = fit.columns_skipped_total;
    m["sigma"] = fit.sigma;
    m["timing"] = {{"wall_s_median", median}, {"wall_s", walls}};
    methods[name] = m;
    note(name + ": obtained " + std::to_string(fit.candidates_evaluated) +
         " candidates, examined " +
         std::to_string(fit.observations_examined_total) +
         " observations in " + std::to_string(median) + " s");
  }
  json out = meta;
  out["methods"] = methods;
  std::cout << out.dump(2) << "\n";
  return 0;
}

struct SimulateOptions {
  int n = 100;
  std::vector<std::string> factors;  // frequency lists like "3,3,3"
  int continuous = 1;
  std::vector<double> beta;
  double noise_sd = 1.0;
  double outlier_fraction = 0.0;
  double outlier_shift = 0.0;
  std::uint64_t seed = 0;
  std::string out;
};

int cmd_simulate(const SimulateOptions& o) {
  robreg::GenSpec spec;
  spec.n = o.n;
  spec.continuous_count = o.continuous;
  spec.true_beta = o.beta;
  spec.noise_sd = o.noise_sd;
  spec.outlier_fraction = o.outlier_fraction;
  spec.outlier_shift = o.outlier_shift;
  spec.seed = o.seed;
  for (const auto& f : o.factors) {
    std::vector<int> freqs;
    std::stringstream ss(f);
    std::string part;
    while (std::getline(ss, part, ',')) {
      try {
        freqs.push_back(std::stoi(part));
      } catch (const std::exception&) {
        throw robreg::DataError("bad factor frequency list: " + f);
      }
    }
    spec.factor_frequencies.push_back(std::move(freqs));
  }

  const robreg::DataFrame df = robreg::generate(spec);
  if (o.out.empty() || o.out == "-") {
    robreg::write_csv(df, std::cout);
  } else {
    std::ofstream file(o.out, std::ios::binary);
    if (!file) throw robreg::DataError("cannot write to " + o.out);
    robreg::write_csv(df, file);
    note("wrote " + std::to_string(df.nrows()) + " rows to " + o.out);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "robreg: robust linear regression (S-estimates) whose initial "
      "candidates come from nonsingular subsampling, with rejection and "
      "exhaustive baselines"};
  app.require_subcommand(1);
  app.add_flag("-q,--quiet", g_quiet, "suppress progress notes on stderr");
  app.set_config("--config", "",
                 "read options from a config file (subcommand options go "
                 "under a [subcommand] section, e.g. [simulate])");

  CommonFitOptions fit_opts;
  CLI::App* fit_cmd = app.add_subcommand(
      "fit", "fit an S-estimate to a CSV dataset and print JSON");
  fit_cmd->fallthrough();
  add_fit_options(fit_cmd, fit_opts);

  CommonFitOptions enum_opts;
  CLI::App* enum_cmd = app.add_subcommand(
      "enumerate",
      "count the nonsingular size-p subsamples of a design exactly");
  enum_cmd->fallthrough();
  add_fit_options(enum_cmd, enum_opts);

  BenchOptions bench_opts;
  CLI::App* bench_cmd = app.add_subcommand(
      "bench",
      "run nonsingular and rejection subsampling on the same data with "
      "identical seeds and report counters and wall times");
  bench_cmd->fallthrough();
  bench_cmd
      ->add_option("--scenario", bench_opts.scenario,
                   "built-in dataset: continuous (n=1000, p=10), anova "
                   "(3 groups x 3), rare-level (n=50, p=10, a singleton "
                   "level)")
      ->check(CLI::IsMember({"continuous", "anova", "rare-level"}));
  bench_cmd->add_option("data", bench_opts.fit.data, "input CSV file");
  bench_cmd->add_option("-f,--formula", bench_opts.fit.formula,
                        "model formula for CSV input");
  bench_cmd->add_option("--factors", bench_opts.fit.factors,
                        "treat these numeric columns as factors")
      ->delimiter(',');
  bench_cmd->add_option("--nsamp", bench_opts.fit.nsamp,
                        "candidate budget per method (default 1000)");
  bench_cmd->add_option("--seed", bench_opts.fit.seed, "RNG seed");
  bench_cmd
      ->add_option("--count", bench_opts.count_mode,
                   "what nsamp counts for the rejection baseline: success "
                   "(keep drawing until nsamp candidates, default) or "
                   "attempts")
      ->check(CLI::IsMember({"success", "attempts"}));
  bench_cmd->add_option("--max-tries", bench_opts.max_tries,
                        "rejection try budget in success mode (default 1e7)");
  bench_cmd->add_option("--repeats", bench_opts.repeats,
                        "timing repetitions, median reported (default 1)");
  bench_cmd->add_option("--threads", bench_opts.fit.threads,
                        "worker threads (default 1)");
  bench_cmd->add_option("--kappa", bench_opts.fit.kappa,
                        "scale-equation constant (default (1 - p/n)/2)");
  bench_cmd->add_option("--cc", bench_opts.fit.tuning_c,
                        "bisquare tuning constant (default 1.54764)");

  SimulateOptions sim_opts;
  CLI::App* sim_cmd = app.add_subcommand(
      "simulate", "generate a synthetic CSV dataset for fitting/benchmarks");
  sim_cmd->fallthrough();
  sim_cmd->add_option("-n,--n", sim_opts.n, "observation count (default 100)");
  sim_cmd->add_option(
      "--factor", sim_opts.factors,
      "factor level frequencies, e.g. --factor 3,3,3 (repeatable; "
      "frequencies must sum to n)");
  sim_cmd->add_option("--continuous", sim_opts.continuous,
                      "number of continuous predictors (default 1)");
  sim_cmd->add_option("--beta", sim_opts.beta,
                      "true coefficients (default 1, 2, 3, ...)")
      ->delimiter(',');
  sim_cmd->add_option("--noise-sd", sim_opts.noise_sd,
                      "noise standard deviation (default 1)");
  sim_cmd->add_option("--outlier-fraction", sim_opts.outlier_fraction,
                      "fraction of responses to contaminate (default 0)");
  sim_cmd->add_option("--outlier-shift", sim_opts.outlier_shift,
                      "shift added to contaminated responses");
  sim_cmd->add_option("--seed", sim_opts.seed, "RNG seed (default 0)");
  sim_cmd->add_option("-o,--out", sim_opts.out,
                      "output CSV path (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (fit_cmd->parsed()) return cmd_fit(fit_opts);
    if (enum_cmd->parsed()) return cmd_enumerate(enum_opts);
    if (bench_cmd->parsed()) {
      if (bench_opts.scenario.empty() &&
          (bench_opts.fit.data.empty() || bench_opts.fit.formula.empty())) {
        std::cerr << "robreg: bench needs --scenario or data + --formula\n";
        return 2;
      }
      return cmd_bench(bench_opts);
    }
    if (sim_cmd->parsed()) return cmd_simulate(sim_opts);
    return 2;
  } catch (const robreg::DataError& e) {
    std::cerr << "robreg: data error: " << e.what() << "\n";
    return 2;
  } catch (const robreg::RankError& e) {
    std::cerr << "robreg: rank error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "robreg: internal error: " << e.what() << "\n";
    return 4;
  }
}
