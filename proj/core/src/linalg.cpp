#include "robreg/linalg.hpp"

#include <cmath>
#include <string>
#include <utility>

namespace robreg {

double Matrix::max_abs() const noexcept {
  double m = 0.0;
  for (double v : data_) m = std::max(m, std::abs(v));
  return m;
}

Vector Matrix::multiply(const Vector& x) const {
  Vector y(rows_, 0.0);
  for (int i = 0; i < rows_; ++i) {
    const auto r = row(i);
    double acc = 0.0;
    for (int j = 0; j < cols_; ++j) acc += r[j] * x[j];
    y[i] = acc;
  }
  return y;
}

bool try_plu_decompose(const Matrix& a, double sing_tol, PluFactors& out,
                       int& failing_col) {
  const int p = a.rows();
  Matrix w = a;  // overwritten with L (strict lower part) and U
  std::vector<int> pivots(p);

  for (int j = 0; j < p; ++j) {
    // max-abs pivot at or below the diagonal, first occurrence wins
    int mu = j;
    double best = std::abs(w(j, j));
    for (int l = j + 1; l < p; ++l) {
      const double cand = std::abs(w(l, j));
      if (cand > best) {
        best = cand;
        mu = l;
      }
    }
    if (best < sing_tol) {
      failing_col = j;
      return false;
    }
    pivots[j] = mu;
    if (mu != j) {
      auto rj = w.row(j);
      auto rm = w.row(mu);
      for (int c = 0; c < p; ++c) std::swap(rj[c], rm[c]);
    }
    const double piv = w(j, j);
    for (int l = j + 1; l < p; ++l) {
      const double m = w(l, j) / piv;
      w(l, j) = m;
      if (m != 0.0) {
        for (int c = j + 1; c < p; ++c) w(l, c) -= m * w(j, c);
      }
    }
  }

  out.l = Matrix::identity(p);
  out.u = Matrix(p, p);
  for (int i = 0; i < p; ++i) {
    for (int j = 0; j < i; ++j) out.l(i, j) = w(i, j);
    for (int j = i; j < p; ++j) out.u(i, j) = w(i, j);
  }
  out.pivots = std::move(pivots);
  return true;
}

PluFactors plu_decompose(const Matrix& a, double sing_tol) {
  PluFactors f;
  int failing_col = -1;
  if (!try_plu_decompose(a, sing_tol, f, failing_col)) {
    throw SingularError("matrix is singular at column " +
                            std::to_string(failing_col) +
                            " (pivot below tolerance)",
                        failing_col);
  }
  return f;
}

Vector solve_plu(const PluFactors& f, const Vector& b) {
  const int p = f.l.rows();
  Vector x = b;
  for (int j = 0; j < p; ++j) {
    const int mu = f.pivots[j];
    if (mu != j) std::swap(x[j], x[mu]);
  }
  // forward: L z = Pb, unit diagonal
  for (int i = 1; i < p; ++i) {
    double acc = x[i];
    for (int j = 0; j < i; ++j) acc -= f.l(i, j) * x[j];
    x[i] = acc;
  }
  // backward: U x = z
  for (int i = p - 1; i >= 0; --i) {
    double acc = x[i];
    for (int j = i + 1; j < p; ++j) acc -= f.u(i, j) * x[j];
    x[i] = acc / f.u(i, i);
  }
  return x;
}

std::pair<Matrix, Equilibration> equilibrate(const Matrix& x) {
  const int n = x.rows();
  const int p = x.cols();
  Equilibration eq;
  eq.column_scales.assign(p, 1.0);
  for (int j = 0; j < p; ++j) {
    double m = 0.0;
    for (int i = 0; i < n; ++i) m = std::max(m, std::abs(x(i, j)));
    if (m == 0.0) {
      throw RankError("column " + std::to_string(j) +
                      " is entirely zero; cannot equilibrate");
    }
    eq.column_scales[j] = 1.0 / m;
  }
  Matrix scaled(n, p);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < p; ++j) {
      scaled(i, j) = x(i, j) * eq.column_scales[j];
    }
  }
  return {std::move(scaled), std::move(eq)};
}

}  // namespace robreg
