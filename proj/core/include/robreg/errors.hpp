#pragma once

#include <stdexcept>
#include <string>

namespace robreg {

// Input problems: unparsable CSV, bad formula, unknown columns, infeasible
// generator specs. CLI maps these to exit code 2.
class DataError : public std::runtime_error {
 public:
  explicit DataError(const std::string& msg) : std::runtime_error(msg) {}
};

// Rank / feasibility problems: singular systems, rank-deficient designs,
// exhausted subsampling budgets, enumeration guards. CLI exit code 3.
class RankError : public std::runtime_error {
 public:
  explicit RankError(const std::string& msg) : std::runtime_error(msg) {}
};

// A pivot fell below the singularity threshold. Carries the failing
// column (0-based).
class SingularError : public RankError {
 public:
  SingularError(const std::string& msg, int column)
      : RankError(msg), column_(column) {}
  int column() const noexcept { return column_; }

 private:
  int column_;
};

}  // namespace robreg
