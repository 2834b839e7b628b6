#pragma once

// Small dense numerics for Gram-matrix work: a packed symmetric matrix,
// cyclic Jacobi eigen-decomposition, numerical rank, rank-truncated Gram
// factorization and the tetrahedral Cayley-Menger machinery.
//
// Every call site in this library works with matrices of dimension <= ~32,
// so nothing here tries to be clever about cache blocking.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "beltway/error.hpp"

namespace beltway {

/// Default relative tolerance used by exact-mode rank decisions.
inline constexpr double kRankTol = 1e-9;

/// Dense row-major matrix. Used for point configurations (n x m) and scratch.
class Matrix {
 public:
  Matrix() = default;
  Matrix(int rows, int cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(static_cast<std::size_t>(rows) * cols, fill) {
    if (rows < 0 || cols < 0) throw Error(ErrorKind::InvalidInput, "negative matrix shape");
  }

  int rows() const noexcept { return rows_; }
  int cols() const noexcept { return cols_; }

  double& operator()(int r, int c) { return data_[static_cast<std::size_t>(r) * cols_ + c]; }
  double operator()(int r, int c) const { return data_[static_cast<std::size_t>(r) * cols_ + c]; }

  std::span<const double> data() const noexcept { return data_; }

  Matrix transposed() const {
    Matrix t(cols_, rows_);
    for (int r = 0; r < rows_; ++r)
      for (int c = 0; c < cols_; ++c) t(c, r) = (*this)(r, c);
    return t;
  }

  friend Matrix operator*(const Matrix& a, const Matrix& b) {
    if (a.cols_ != b.rows_) throw Error(ErrorKind::InvalidInput, "matrix product shape mismatch");
    Matrix out(a.rows_, b.cols_);
    for (int i = 0; i < a.rows_; ++i)
      for (int k = 0; k < a.cols_; ++k) {
        const double aik = a(i, k);
        if (aik == 0.0) continue;
        for (int j = 0; j < b.cols_; ++j) out(i, j) += aik * b(k, j);
      }
    return out;
  }

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  int rows_ = 0;
  int cols_ = 0;
  std::vector<double> data_;
};

/// Real symmetric matrix with one storage cell per unordered index pair, so
/// entries(i,j) and entries(j,i) can never disagree.
class SymMatrix {
 public:
  SymMatrix() = default;
  explicit SymMatrix(int dim, double fill = 0.0) : dim_(dim) {
    if (dim < 1) throw Error(ErrorKind::InvalidInput, "SymMatrix dimension must be >= 1");
    cells_.assign(static_cast<std::size_t>(dim) * (dim + 1) / 2, fill);
  }

  static SymMatrix identity(int dim) {
    SymMatrix s(dim);
    for (int i = 0; i < dim; ++i) s(i, i) = 1.0;
    return s;
  }

  /// Builds from a full square row list; rejects asymmetric input.
  static SymMatrix from_rows(const std::vector<std::vector<double>>& rows, double sym_tol = 0.0) {
    const int dim = static_cast<int>(rows.size());
    SymMatrix s(dim);
    for (int i = 0; i < dim; ++i) {
      if (static_cast<int>(rows[i].size()) != dim)
        throw Error(ErrorKind::InvalidInput, "SymMatrix::from_rows needs a square matrix");
    }
    for (int i = 0; i < dim; ++i)
      for (int j = i; j < dim; ++j) {
        if (std::abs(rows[i][j] - rows[j][i]) > sym_tol)
          throw Error(ErrorKind::InvalidInput, "matrix is not symmetric");
        s(i, j) = rows[i][j];
      }
    return s;
  }

  int dim() const noexcept { return dim_; }

  double& operator()(int i, int j) { return cells_[index(i, j)]; }
  double operator()(int i, int j) const { return cells_[index(i, j)]; }

  /// Largest absolute entry.
  double max_abs() const {
    double m = 0.0;
    for (double v : cells_) m = std::max(m, std::abs(v));
    return m;
  }

  double frobenius() const {
    double s = 0.0;
    for (int i = 0; i < dim_; ++i)
      for (int j = i; j < dim_; ++j) {
        const double v = (*this)(i, j);
        s += (i == j ? 1.0 : 2.0) * v * v;
      }
    return std::sqrt(s);
  }

  bool all_finite() const {
    return std::all_of(cells_.begin(), cells_.end(), [](double v) { return std::isfinite(v); });
  }

  /// Principal submatrix on the given (ordered) indices.
  SymMatrix principal(std::span<const int> idx) const {
    SymMatrix s(static_cast<int>(idx.size()));
    for (std::size_t a = 0; a < idx.size(); ++a)
      for (std::size_t b = a; b < idx.size(); ++b) s(static_cast<int>(a), static_cast<int>(b)) = (*this)(idx[a], idx[b]);
    return s;
  }

  /// Simultaneous row/column permutation: result(i,j) = this(perm[i], perm[j]).
  SymMatrix permuted(std::span<const int> perm) const { return principal(perm); }

  std::vector<std::vector<double>> to_rows() const {
    std::vector<std::vector<double>> rows(dim_, std::vector<double>(dim_));
    for (int i = 0; i < dim_; ++i)
      for (int j = 0; j < dim_; ++j) rows[i][j] = (*this)(i, j);
    return rows;
  }

  friend bool operator==(const SymMatrix&, const SymMatrix&) = default;

 private:
  std::size_t index(int i, int j) const {
    if (i > j) std::swap(i, j);
    // Row-major upper triangle.
    return static_cast<std::size_t>(i) * static_cast<std::size_t>(2 * dim_ - i + 1) / 2 + static_cast<std::size_t>(j - i);
  }

  int dim_ = 0;
  std::vector<double> cells_;
};

struct EigenResult {
  std::vector<double> values;  ///< sorted non-increasing
  Matrix vectors;              ///< column k is the unit eigenvector for values[k]
};

/// Full spectral decomposition by cyclic Jacobi rotations.
///
/// Sweeps run in fixed (p, q) order, so the result is bit-reproducible for
/// identical input. Stops once the off-diagonal Frobenius norm drops below
/// 1e-14 * ||A||_F.
inline EigenResult eigen_sym(const SymMatrix& a) {
  if (!a.all_finite()) throw Error(ErrorKind::InvalidInput, "eigen_sym: non-finite entry");
  const int n = a.dim();
  Matrix w(n, n);
  Matrix v(n, n);
  for (int i = 0; i < n; ++i) {
    v(i, i) = 1.0;
    for (int j = 0; j < n; ++j) w(i, j) = a(i, j);
  }

  const double target = 1e-14 * a.frobenius();
  constexpr int kMaxSweeps = 100;
  for (int sweep = 0; sweep < kMaxSweeps; ++sweep) {
    double off = 0.0;
    for (int p = 0; p < n; ++p)
      for (int q = p + 1; q < n; ++q) off += w(p, q) * w(p, q);
    off = std::sqrt(2.0 * off);
    if (off <= target) break;

    for (int p = 0; p < n; ++p) {
      for (int q = p + 1; q < n; ++q) {
        const double apq = w(p, q);
        if (apq == 0.0) continue;
        const double theta = (w(q, q) - w(p, p)) / (2.0 * apq);
        const double t = (theta >= 0.0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (int k = 0; k < n; ++k) {
          const double wkp = w(k, p);
          const double wkq = w(k, q);
          w(k, p) = c * wkp - s * wkq;
          w(k, q) = s * wkp + c * wkq;
        }
        for (int k = 0; k < n; ++k) {
          const double wpk = w(p, k);
          const double wqk = w(q, k);
          w(p, k) = c * wpk - s * wqk;
          w(q, k) = s * wpk + c * wqk;
        }
        w(p, q) = 0.0;
        w(q, p) = 0.0;
        for (int k = 0; k < n; ++k) {
          const double vkp = v(k, p);
          const double vkq = v(k, q);
          v(k, p) = c * vkp - s * vkq;
          v(k, q) = s * vkp + c * vkq;
        }
      }
    }
  }

  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int x, int y) { return w(x, x) > w(y, y); });

  EigenResult out;
  out.values.resize(n);
  out.vectors = Matrix(n, n);
  for (int k = 0; k < n; ++k) {
    out.values[k] = w(order[k], order[k]);
    for (int i = 0; i < n; ++i) out.vectors(i, k) = v(i, order[k]);
  }
  return out;
}

namespace detail {

inline void check_rel_tol(double rel_tol) {
  if (!(rel_tol > 0.0 && rel_tol < 1.0)) throw Error(ErrorKind::InvalidInput, "rel_tol must lie in (0, 1)");
}

inline int rank_from_values(std::span<const double> values, double rel_tol) {
  double top = 0.0;
  for (double v : values) top = std::max(top, std::abs(v));
  const double cut = rel_tol * std::max(1.0, top);
  return static_cast<int>(std::count_if(values.begin(), values.end(), [&](double v) { return std::abs(v) > cut; }));
}

}  // namespace detail

/// Determinant of a dense row-major n x n matrix by LU with partial pivoting.
/// The buffer is overwritten.
inline double determinant_inplace(std::span<double> m, int n) {
  double det = 1.0;
  for (int col = 0; col < n; ++col) {
    int piv = col;
    double best = std::abs(m[col * n + col]);
    for (int r = col + 1; r < n; ++r) {
      const double cand = std::abs(m[r * n + col]);
      if (cand > best) {
        best = cand;
        piv = r;
      }
    }
    if (best == 0.0) return 0.0;
    if (piv != col) {
      for (int c = 0; c < n; ++c) std::swap(m[col * n + c], m[piv * n + c]);
      det = -det;
    }
    const double d = m[col * n + col];
    det *= d;
    for (int r = col + 1; r < n; ++r) {
      const double f = m[r * n + col] / d;
      if (f == 0.0) continue;
      for (int c = col + 1; c < n; ++c) m[r * n + c] -= f * m[col * n + c];
    }
  }
  return det;
}

inline double determinant(const SymMatrix& a) {
  const int n = a.dim();
  std::vector<double> buf(static_cast<std::size_t>(n) * n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) buf[static_cast<std::size_t>(i) * n + j] = a(i, j);
  return determinant_inplace(buf, n);
}

/// Number of eigenvalues with |lambda| > rel_tol * max(1, max |lambda|).
inline int numerical_rank(const SymMatrix& a, double rel_tol = kRankTol) {
  detail::check_rel_tol(rel_tol);
  const EigenResult e = eigen_sym(a);
  return detail::rank_from_values(e.values, rel_tol);
}

/// Same decision as `numerical_rank(a, rel_tol) <= n`.
///
/// When a is (n+1) x (n+1) a determinant bound settles most full-rank cases
/// without an eigen-decomposition: rank <= n forces
/// |det| <= rel_tol * max(1, ||a||_F)^(n+1).
inline bool rank_at_most(const SymMatrix& a, int n, double rel_tol = kRankTol) {
  detail::check_rel_tol(rel_tol);
  const int dim = a.dim();
  if (dim <= n) return true;
  if (dim == n + 1 && dim <= 8) {
    std::array<double, 64> buf{};
    for (int i = 0; i < dim; ++i)
      for (int j = 0; j < dim; ++j) buf[static_cast<std::size_t>(i * dim + j)] = a(i, j);
    const double det = std::abs(determinant_inplace(std::span<double>(buf.data(), static_cast<std::size_t>(dim * dim)), dim));
    const double s = std::max(1.0, a.frobenius());
    if (det > rel_tol * std::pow(s, dim)) return false;
  }
  return numerical_rank(a, rel_tol) <= n;
}

/// Smallest eigenvalue magnitude: the spectral-norm distance from a to the
/// set of symmetric matrices of rank <= dim - 1.
inline double smallest_abs_eigenvalue(const SymMatrix& a) {
  const EigenResult e = eigen_sym(a);
  double best = std::abs(e.values.front());
  for (double v : e.values) best = std::min(best, std::abs(v));
  return best;
}

/// X = diag(sqrt(max(lambda_k, 0))) * U^T over the top-n eigenpairs (n x dim).
inline Matrix factor_top_eigenpairs(const EigenResult& e, int n) {
  const int dim = static_cast<int>(e.values.size());
  Matrix x(n, dim);
  for (int k = 0; k < std::min(n, dim); ++k) {
    const double root = std::sqrt(std::max(e.values[k], 0.0));
    for (int j = 0; j < dim; ++j) x(k, j) = root * e.vectors(j, k);
  }
  return x;
}

/// Factor a psd matrix of numerical rank <= n as X^T X with X of shape n x dim.
/// Negative eigenvalues down to -rel_tol * max(1, max|a_ij|) are clamped to 0.
inline Matrix rank_truncated_factor(const SymMatrix& a, int n, double rel_tol = kRankTol) {
  detail::check_rel_tol(rel_tol);
  if (n < 1) throw Error(ErrorKind::InvalidInput, "factor rank must be >= 1");
  const EigenResult e = eigen_sym(a);
  const double floor = -rel_tol * std::max(1.0, a.max_abs());
  if (e.values.back() < floor)
    throw Error(ErrorKind::NotPsd, "eigenvalue " + std::to_string(e.values.back()) + " below psd tolerance");
  const int rank = detail::rank_from_values(e.values, rel_tol);
  if (rank > n)
    throw Error(ErrorKind::RankTooHigh, "numerical rank " + std::to_string(rank) + " exceeds " + std::to_string(n));
  return factor_top_eigenpairs(e, n);
}

/// Cayley-Menger determinant of a tetrahedron from squared edge lengths.
///
/// Faces are (a,b,z), (a,y,c), (x,b,c), (x,y,z): with vertices P0..P3,
/// a = |P0P1|, b = |P0P2|, c = |P0P3|, z = |P1P2|, y = |P1P3|, x = |P2P3|.
/// Equals 288 * volume^2 for a genuine tetrahedron.
inline double cayley_menger_det(double a2, double b2, double c2, double x2, double y2, double z2) {
  std::array<double, 25> m = {
      0.0, a2,  b2,  c2,  1.0,  //
      a2,  0.0, z2,  y2,  1.0,  //
      b2,  z2,  0.0, x2,  1.0,  //
      c2,  y2,  x2,  0.0, 1.0,  //
      1.0, 1.0, 1.0, 1.0, 0.0,
  };
  return determinant_inplace(m, 5);
}

/// p(t) = quartic * t^2 + quadratic * t + constant, with t = z^2.
struct Biquadratic {
  double quartic = 0.0;
  double quadratic = 0.0;
  double constant = 0.0;

  double operator()(double z) const {
    const double t = z * z;
    return (quartic * t + quadratic) * t + constant;
  }
};

/// Cayley-Menger determinant of {0, v_i, v_j, v_m} as a polynomial in the
/// unknown distance z = |v_i - v_j|, from squared norms and the two known
/// squared distances to v_m.
inline Biquadratic cayley_menger_biquadratic(double aii, double ajj, double amm, double dim2, double djm2) {
  const double p = dim2;
  const double q = djm2;
  Biquadratic f;
  f.quartic = -2.0 * amm;
  f.quadratic = 2.0 * (-aii * ajj + aii * amm + aii * q + ajj * amm + ajj * p - amm * amm + amm * p + amm * q - p * q);
  f.constant = 2.0 * (-aii * aii * q + aii * ajj * p + aii * ajj * q - aii * amm * p + aii * amm * q + aii * p * q -
                      aii * q * q - ajj * ajj * p + ajj * amm * p - ajj * amm * q - ajj * p * p + ajj * p * q);
  return f;
}

struct PositiveRoots {
  double lo = 0.0;
  double hi = 0.0;
};

/// The two positive real roots of alpha z^4 + beta z^2 + gamma (alpha < 0).
///
/// Solved as a quadratic in t = z^2 on coefficients normalised by their
/// largest magnitude; a t-discriminant in [-1e-12, 0) is treated as 0.
inline PositiveRoots biquadratic_positive_roots(double alpha, double beta, double gamma) {
  if (!(alpha < 0.0) || !std::isfinite(beta) || !std::isfinite(gamma))
    throw Error(ErrorKind::InvalidInput, "biquadratic needs a negative leading coefficient");
  const double scale = std::max({std::abs(alpha), std::abs(beta), std::abs(gamma)});
  const double a = alpha / scale;
  const double b = beta / scale;
  const double c = gamma / scale;
  double disc = b * b - 4.0 * a * c;
  if (disc < -1e-12) throw Error(ErrorKind::NoRealRoots, "negative discriminant in t = z^2");
  disc = std::max(disc, 0.0);

  // Numerically stable pair of roots.
  const double qv = -0.5 * (b + std::copysign(std::sqrt(disc), b));
  double t1 = 0.0;
  double t2 = 0.0;
  if (qv != 0.0) {
    t1 = qv / a;
    t2 = c / qv;
  }
  const double t_hi = std::max(t1, t2);
  const double t_lo = std::min(t1, t2);
  if (!(t_hi > 0.0)) throw Error(ErrorKind::NoRealRoots, "no positive root in t = z^2");
  return {std::sqrt(std::max(t_lo, 0.0)), std::sqrt(t_hi)};
}

}  // namespace beltway
