#pragma once

// Slow, independent reference implementations the tests compare against.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <numeric>
#include <vector>

#include "beltway/linalg.hpp"
#include "beltway/model.hpp"
#include "beltway/rng.hpp"

namespace oracle {

using Dense = std::vector<std::vector<double>>;

inline Dense dense(const beltway::SymMatrix& a) { return a.to_rows(); }

/// Laplace expansion along the first row.
inline double laplace_det(const Dense& a) {
  const std::size_t n = a.size();
  if (n == 1) return a[0][0];
  double det = 0.0;
  for (std::size_t c = 0; c < n; ++c) {
    Dense minor;
    for (std::size_t r = 1; r < n; ++r) {
      auto& row = minor.emplace_back();
      for (std::size_t k = 0; k < n; ++k)
        if (k != c) row.push_back(a[r][k]);
    }
    det += ((c % 2) ? -1.0 : 1.0) * a[0][c] * laplace_det(minor);
  }
  return det;
}

/// All complex roots of a monic-izable polynomial (coefficients highest
/// degree first) by Durand-Kerner iteration.
inline std::vector<std::complex<double>> poly_roots(std::vector<double> c) {
  const double lead = c.front();
  for (auto& v : c) v /= lead;
  const std::size_t deg = c.size() - 1;
  std::vector<std::complex<double>> z(deg);
  for (std::size_t k = 0; k < deg; ++k) z[k] = std::pow(std::complex<double>(0.4, 0.9), static_cast<double>(k));
  auto eval = [&](std::complex<double> x) {
    std::complex<double> s = 0.0;
    for (double v : c) s = s * x + v;
    return s;
  };
  for (int it = 0; it < 2000; ++it)
    for (std::size_t k = 0; k < deg; ++k) {
      std::complex<double> den = 1.0;
      for (std::size_t j = 0; j < deg; ++j)
        if (j != k) den *= z[k] - z[j];
      z[k] -= eval(z[k]) / den;
    }
  return z;
}

/// Random orthogonal matrix by Gram-Schmidt on gaussian columns.
inline beltway::Matrix random_orthogonal(int n, beltway::Rng& rng) {
  std::vector<std::vector<double>> q;
  while (static_cast<int>(q.size()) < n) {
    std::vector<double> v(n);
    for (auto& x : v) x = rng.gaussian();
    for (const auto& u : q) {
      const double d = std::inner_product(v.begin(), v.end(), u.begin(), 0.0);
      for (int k = 0; k < n; ++k) v[k] -= d * u[k];
    }
    const double nv = std::sqrt(std::inner_product(v.begin(), v.end(), v.begin(), 0.0));
    if (nv < 1e-6) continue;
    for (auto& x : v) x /= nv;
    q.push_back(v);
  }
  beltway::Matrix out(n, n);
  for (int r = 0; r < n; ++r)
    for (int c = 0; c < n; ++c) out(r, c) = q[c][r];
  return out;
}

inline beltway::Matrix multiply(const beltway::Matrix& a, const beltway::Matrix& b) {
  beltway::Matrix out(a.rows(), b.cols());
  for (int r = 0; r < a.rows(); ++r)
    for (int c = 0; c < b.cols(); ++c) {
      double s = 0.0;
      for (int k = 0; k < a.cols(); ++k) s += a(r, k) * b(k, c);
      out(r, c) = s;
    }
  return out;
}

/// Equivalence by trying every permutation.
inline bool brute_equivalent(const beltway::SymMatrix& a, const beltway::SymMatrix& b, double tol = 1e-7) {
  const int m = a.dim();
  if (b.dim() != m) return false;
  std::vector<int> p(m);
  std::iota(p.begin(), p.end(), 0);
  do {
    bool ok = true;
    for (int i = 0; i < m && ok; ++i)
      for (int j = i; j < m && ok; ++j) ok = std::abs(b(i, j) - a(p[i], p[j])) <= tol;
    if (ok) return true;
  } while (std::next_permutation(p.begin(), p.end()));
  return false;
}

/// Sorted multiset of oriented triples of a Gram matrix.
inline std::vector<std::array<double, 3>> triples(const beltway::SymMatrix& a) {
  std::vector<std::array<double, 3>> out;
  for (int i = 0; i < a.dim(); ++i)
    for (int j = i + 1; j < a.dim(); ++j) {
      // Rounded so last-bit norm differences inside a class do not reorder.
      const double d1 = std::round(std::min(a(i, i), a(j, j)) * 1e9) / 1e9;
      const double d2 = std::round(std::max(a(i, i), a(j, j)) * 1e9) / 1e9;
      out.push_back({d1, d2, a(i, j)});
    }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace oracle
