#pragma once

#include <cstddef>
#include <limits>
#include <span>
#include <vector>

#include "robreg/errors.hpp"

namespace robreg {

using Vector = std::vector<double>;

// Dense row-major matrix. Small and boring on purpose: the factorizations
// here only ever see p x p subproblems with modest p.
class Matrix {
 public:
  Matrix() = default;
  Matrix(int rows, int cols, double fill = 0.0)
      : rows_(rows),
        cols_(cols),
        data_(static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols),
              fill) {}

  static Matrix identity(int p) {
    Matrix m(p, p);
    for (int i = 0; i < p; ++i) m(i, i) = 1.0;
    return m;
  }

  int rows() const noexcept { return rows_; }
  int cols() const noexcept { return cols_; }

  double& operator()(int i, int j) noexcept {
    return data_[static_cast<std::size_t>(i) * cols_ + j];
  }
  double operator()(int i, int j) const noexcept {
    return data_[static_cast<std::size_t>(i) * cols_ + j];
  }

  std::span<double> row(int i) noexcept {
    return {data_.data() + static_cast<std::size_t>(i) * cols_,
            static_cast<std::size_t>(cols_)};
  }
  std::span<const double> row(int i) const noexcept {
    return {data_.data() + static_cast<std::size_t>(i) * cols_,
            static_cast<std::size_t>(cols_)};
  }

  double max_abs() const noexcept;

  // y = M x
  Vector multiply(const Vector& x) const;

 private:
  int rows_ = 0;
  int cols_ = 0;
  std::vector<double> data_;
};

// PLU factorization record: swapping rows j and pivots[j] of the original
// matrix, in order j = 0..p-1, then L*U reproduces it.
struct PluFactors {
  Matrix l;                 // unit lower-triangular
  Matrix u;                 // upper-triangular
  std::vector<int> pivots;  // swap target per elimination step, 0-based
};

// Per-column scale factors making each column of the scaled matrix have
// max-abs entry exactly 1. Coefficients fit on the scaled matrix map back
// as beta_original[j] = beta_scaled[j] * column_scales[j].
struct Equilibration {
  Vector column_scales;
};

// Singularity threshold: p * machine epsilon * max-abs entry. Relative to
// the (equilibrated) matrix scale; pass an explicit tolerance to override.
inline double default_sing_tol(int p, double max_abs_entry) noexcept {
  return static_cast<double>(p) * std::numeric_limits<double>::epsilon() *
         max_abs_entry;
}

// LU with partial pivoting: pivot is the max-abs element of the working
// column at or below the diagonal, ties broken by lowest row index.
// Throws SingularError (with the failing column) when a pivot magnitude
// falls below sing_tol.
PluFactors plu_decompose(const Matrix& a, double sing_tol);

// Non-throwing variant for hot paths (rejection sampling tries millions of
// factorizations and discards the singular ones). Returns false and sets
// failing_col instead of throwing.
bool try_plu_decompose(const Matrix& a, double sing_tol, PluFactors& out,
                       int& failing_col);

// Solve A x = b given the factorization of A (forward then backward
// substitution after applying the recorded swaps to b).
Vector solve_plu(const PluFactors& f, const Vector& b);

// Column equilibration of an n x p design matrix. Throws RankError if a
// column is entirely zero.
std::pair<Matrix, Equilibration> equilibrate(const Matrix& x);

}  // namespace robreg
