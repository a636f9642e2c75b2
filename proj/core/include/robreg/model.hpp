#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "robreg/linalg.hpp"

namespace robreg {

// A parsed data table: every column is either continuous or a factor with
// string levels. No missing values (rejected at parse time).
struct Column {
  std::string name;
  bool is_factor = false;
  Vector values;                    // continuous
  std::vector<int> codes;           // factor: index into levels
  std::vector<std::string> levels;  // factor: first-appearance order
};

struct DataFrame {
  std::vector<Column> columns;

  int nrows() const;
  const Column* find(const std::string& name) const;
};

// Reads RFC-4180-style CSV: comma separated, first row is the header,
// quoted fields with doubled-quote escapes. Columns whose every value
// parses as a number become continuous unless their name is listed in
// force_factor. Empty fields, ragged rows and duplicate headers are
// DataErrors.
DataFrame read_csv(std::istream& in,
                   const std::vector<std::string>& force_factor = {});
DataFrame read_csv_file(const std::string& path,
                        const std::vector<std::string>& force_factor = {});
void write_csv(const DataFrame& df, std::ostream& out);

// One model term: a single column (main effect) or a pair (two-way
// interaction).
struct Term {
  std::vector<std::string> columns;
};

struct ModelSpec {
  std::string response;
  std::vector<Term> terms;
  bool intercept = true;
};

// Parses the mini formula grammar `y ~ x1 + f1 + x1:f1`; the intercept is
// implicit and `-1` (or `+ 0`-style is not supported, only `-1`) removes
// it. Duplicate terms are rejected.
ModelSpec parse_formula(const std::string& formula);

struct Design {
  Matrix x;
  Vector y;
  std::vector<std::string> column_names;
};

// Builds the design matrix with treatment contrasts: an intercept column
// of ones first, then one block per term. A factor with L observed levels
// contributes L-1 indicator columns (first level is the reference); a
// continuous-by-factor interaction contributes the continuous column gated
// by each non-reference level; factor-by-factor contributes the
// (L1-1)(L2-1) indicator products.
Design build_design(const DataFrame& df, const ModelSpec& spec);

// Synthetic-data spec for benchmarks and simulations.
struct GenSpec {
  int n = 0;
  std::vector<std::vector<int>> factor_frequencies;  // one vector per factor
  int continuous_count = 0;
  Vector true_beta;  // empty = auto (1, 2, 3, ...)
  double noise_sd = 1.0;
  double outlier_fraction = 0.0;  // in [0, 0.5)
  double outlier_shift = 0.0;
  std::uint64_t seed = 0;
};

// Deterministic generator: level frequencies are honored exactly (the
// first factor is laid out in blocks, further factors get a seeded
// shuffle of their block layout), continuous columns are standard normal,
// and y = X beta + noise with an outlier_fraction of responses shifted by
// outlier_shift. Columns are named f1, f2, ... and x1, x2, ...; the
// response is y.
DataFrame generate(const GenSpec& spec);

// The model implied by a GenSpec: y ~ f1 + ... + x1 + ... (intercept).
ModelSpec implied_model(const GenSpec& spec);

}  // namespace robreg
