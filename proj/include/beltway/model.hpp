#pragma once

// Domain types shared by the forward model, the recovery engines and the
// brute-force oracle.

#include <algorithm>
#include <cmath>
#include <compare>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "beltway/error.hpp"
#include "beltway/linalg.hpp"

namespace beltway {

/// Absolute tolerance for grouping equal norms and equal triples.
inline constexpr double kClusterTol = 1e-7;

class GramMatrix {
 public:
  GramMatrix() = default;
  GramMatrix(SymMatrix sym, int target_rank) : sym_(std::move(sym)), target_rank_(target_rank) {
    for (int i = 0; i < sym_.dim(); ++i)
      if (!(sym_(i, i) >= 0.0)) throw Error(ErrorKind::InvalidInput, "Gram diagonal must be non-negative");
  }

  int m() const noexcept { return sym_.dim(); }
  int target_rank() const noexcept { return target_rank_; }
  const SymMatrix& sym() const noexcept { return sym_; }
  double operator()(int i, int j) const { return sym_(i, j); }

  friend bool operator==(const GramMatrix&, const GramMatrix&) = default;

 private:
  SymMatrix sym_;
  int target_rank_ = 0;
};

/// m points in R^n, stored as the columns of an n x m matrix.
class PointConfig {
 public:
  PointConfig() = default;
  explicit PointConfig(Matrix coords) : coords_(std::move(coords)) {
    if (coords_.rows() < 2) throw Error(ErrorKind::InvalidInput, "point configuration needs n >= 2");
    if (coords_.cols() < 1) throw Error(ErrorKind::InvalidInput, "point configuration needs m >= 1");
    for (double v : coords_.data())
      if (!std::isfinite(v)) throw Error(ErrorKind::InvalidInput, "non-finite coordinate");
  }

  /// One inner vector per point.
  static PointConfig from_points(const std::vector<std::vector<double>>& points) {
    if (points.empty()) throw Error(ErrorKind::InvalidInput, "no points");
    const int n = static_cast<int>(points.front().size());
    Matrix x(n, static_cast<int>(points.size()));
    for (std::size_t j = 0; j < points.size(); ++j) {
      if (static_cast<int>(points[j].size()) != n) throw Error(ErrorKind::InvalidInput, "ragged point list");
      for (int r = 0; r < n; ++r) x(r, static_cast<int>(j)) = points[j][r];
    }
    return PointConfig(std::move(x));
  }

  int n() const noexcept { return coords_.rows(); }
  int m() const noexcept { return coords_.cols(); }
  const Matrix& coords() const noexcept { return coords_; }

  std::vector<double> point(int j) const {
    std::vector<double> p(n());
    for (int r = 0; r < n(); ++r) p[r] = coords_(r, j);
    return p;
  }

  double inner(int i, int j) const {
    double s = 0.0;
    for (int r = 0; r < n(); ++r) s += coords_(r, i) * coords_(r, j);
    return s;
  }

  GramMatrix gram() const {
    SymMatrix g(m());
    for (int i = 0; i < m(); ++i)
      for (int j = i; j < m(); ++j) g(i, j) = inner(i, j);
    return GramMatrix(std::move(g), n());
  }

  friend bool operator==(const PointConfig&, const PointConfig&) = default;

 private:
  Matrix coords_;
};

/// (|v_i|^2, |v_j|^2, <v_i, v_j>) with the two norms ordered d1 <= d2.
struct Triple {
  double d1 = 0.0;
  double d2 = 0.0;
  double ip = 0.0;

  static Triple oriented(double a, double b, double ip) { return a <= b ? Triple{a, b, ip} : Triple{b, a, ip}; }

  friend auto operator<=>(const Triple&, const Triple&) = default;
};

/// The measurement: an unlabeled multiset of m(m-1)/2 triples together with
/// the multiset of m squared norms.
class SecondMoment {
 public:
  SecondMoment() = default;
  SecondMoment(int m, std::vector<Triple> triples, std::vector<double> norms)
      : m_(m), triples_(std::move(triples)), norms_(std::move(norms)) {
    if (m < 1) throw Error(ErrorKind::MalformedMoment, "m must be >= 1");
    if (triples_.size() != static_cast<std::size_t>(m) * (m - 1) / 2)
      throw Error(ErrorKind::MalformedMoment, "expected m(m-1)/2 triples");
    if (norms_.size() != static_cast<std::size_t>(m)) throw Error(ErrorKind::MalformedMoment, "expected m norms");
    std::sort(norms_.begin(), norms_.end());
  }

  /// Recovers m and the norm multiset from the triples alone. Each point of
  /// a norm class appears in exactly m-1 triples, so a class seen k(m-1)
  /// times among the d1/d2 fields has multiplicity k.
  static SecondMoment from_triples(std::vector<Triple> triples, double cluster_tol = kClusterTol);

  int m() const noexcept { return m_; }
  const std::vector<Triple>& triples() const noexcept { return triples_; }
  /// Squared norms, ascending.
  const std::vector<double>& norms() const noexcept { return norms_; }

  friend bool operator==(const SecondMoment&, const SecondMoment&) = default;

 private:
  int m_ = 0;
  std::vector<Triple> triples_;
  std::vector<double> norms_;
};

struct ValueClass {
  double value = 0.0;  ///< smallest member
  int multiplicity = 0;
};

/// Groups values that lie within `tol` of the first member of their group.
/// Result is ascending by value.
inline std::vector<ValueClass> cluster_values(std::vector<double> values, double tol = kClusterTol) {
  std::sort(values.begin(), values.end());
  std::vector<ValueClass> out;
  std::size_t start = 0;
  while (start < values.size()) {
    std::size_t end = start + 1;
    while (end < values.size() && values[end] - values[start] <= tol) ++end;
    out.push_back({values[start], static_cast<int>(end - start)});
    start = end;
  }
  return out;
}

inline SecondMoment SecondMoment::from_triples(std::vector<Triple> triples, double cluster_tol) {
  const std::size_t t = triples.size();
  if (t == 0) throw Error(ErrorKind::MalformedMoment, "empty moment");
  const auto m = static_cast<int>(std::llround((1.0 + std::sqrt(1.0 + 8.0 * static_cast<double>(t))) / 2.0));
  if (static_cast<std::size_t>(m) * (m - 1) / 2 != t)
    throw Error(ErrorKind::MalformedMoment, std::to_string(t) + " triples is not m(m-1)/2 for any m");

  std::vector<double> ends;
  ends.reserve(2 * t);
  for (auto& tr : triples) {
    if (!std::isfinite(tr.d1) || !std::isfinite(tr.d2) || !std::isfinite(tr.ip))
      throw Error(ErrorKind::MalformedMoment, "non-finite triple");
    if (tr.d1 < 0.0 || tr.d2 < 0.0) throw Error(ErrorKind::MalformedMoment, "negative squared norm");
    tr = Triple::oriented(tr.d1, tr.d2, tr.ip);
    ends.push_back(tr.d1);
    ends.push_back(tr.d2);
  }
  std::vector<double> norms;
  for (const auto& c : cluster_values(std::move(ends), cluster_tol)) {
    if (c.multiplicity % (m - 1) != 0)
      throw Error(ErrorKind::MalformedMoment, "norm value appears a number of times not divisible by m-1");
    norms.insert(norms.end(), static_cast<std::size_t>(c.multiplicity / (m - 1)), c.value);
  }
  if (static_cast<int>(norms.size()) != m) throw Error(ErrorKind::MalformedMoment, "norm multiset has wrong size");
  return SecondMoment(m, std::move(triples), std::move(norms));
}

struct NormProfile {
  std::vector<ValueClass> classes;  ///< descending by value

  int m() const {
    int s = 0;
    for (const auto& c : classes) s += c.multiplicity;
    return s;
  }
  int max_multiplicity() const {
    int best = 0;
    for (const auto& c : classes) best = std::max(best, c.multiplicity);
    return best;
  }
  /// Index of the class whose value is within tol of v, if any.
  std::optional<std::size_t> find(double v, double tol = kClusterTol) const {
    for (std::size_t k = 0; k < classes.size(); ++k)
      if (std::abs(classes[k].value - v) <= tol) return k;
    return std::nullopt;
  }
  std::string describe() const {
    std::string s = "[";
    for (std::size_t k = 0; k < classes.size(); ++k) {
      if (k) s += ", ";
      s += "(" + std::to_string(classes[k].value) + " x" + std::to_string(classes[k].multiplicity) + ")";
    }
    return s + "]";
  }
};

inline NormProfile norm_profile(const SecondMoment& sm, double cluster_tol = kClusterTol) {
  NormProfile p;
  p.classes = cluster_values(sm.norms(), cluster_tol);
  std::reverse(p.classes.begin(), p.classes.end());
  for (const auto& t : sm.triples())
    if (!p.find(t.d1, cluster_tol) || !p.find(t.d2, cluster_tol))
      throw Error(ErrorKind::MalformedMoment, "triple references a norm outside the norm multiset");
  return p;
}

struct GenericityReport {
  bool distinct = true;           ///< pairwise-distinct points
  bool independent = true;        ///< every min(3, n)-subset linearly independent
  bool collision_free = true;     ///< no two pairs share a triple
  bool cross_interior = true;     ///< isolated-point distances strictly inside their annulus

  bool ok() const { return distinct && independent && collision_free && cross_interior; }
};

/// Genericity flags for a configuration. Independence of each k-subset is
/// tested by its k x k Gram determinant exceeding 1e-10.
inline GenericityReport genericity_check(const PointConfig& cfg, double cluster_tol = kClusterTol) {
  GenericityReport r;
  const int m = cfg.m();
  const GramMatrix g = cfg.gram();

  for (int i = 0; i < m && r.distinct; ++i)
    for (int j = i + 1; j < m; ++j) {
      const double d2 = g(i, i) + g(j, j) - 2.0 * g(i, j);
      if (d2 <= 1e-20) {
        r.distinct = false;
        break;
      }
    }

  constexpr double kDetFloor = 1e-10;
  if (cfg.n() >= 3) {
    for (int i = 0; i < m && r.independent; ++i)
      for (int j = i + 1; j < m && r.independent; ++j)
        for (int k = j + 1; k < m; ++k) {
          const double a = g(i, i), b = g(j, j), c = g(k, k);
          const double x = g(i, j), y = g(i, k), z = g(j, k);
          const double det = a * (b * c - z * z) - x * (x * c - z * y) + y * (x * z - b * y);
          if (det <= kDetFloor) {
            r.independent = false;
            break;
          }
        }
  } else {
    for (int i = 0; i < m && r.independent; ++i)
      for (int j = i + 1; j < m; ++j)
        if (g(i, i) * g(j, j) - g(i, j) * g(i, j) <= kDetFloor) {
          r.independent = false;
          break;
        }
  }

  std::vector<Triple> triples;
  for (int i = 0; i < m; ++i)
    for (int j = i + 1; j < m; ++j) triples.push_back(Triple::oriented(g(i, i), g(j, j), g(i, j)));
  std::sort(triples.begin(), triples.end(), [](const Triple& a, const Triple& b) { return a.ip < b.ip; });
  for (std::size_t a = 0; a < triples.size() && r.collision_free; ++a)
    for (std::size_t b = a + 1; b < triples.size() && triples[b].ip - triples[a].ip <= cluster_tol; ++b)
      if (std::abs(triples[a].d1 - triples[b].d1) <= cluster_tol && std::abs(triples[a].d2 - triples[b].d2) <= cluster_tol) {
        r.collision_free = false;
        break;
      }

  // A single point whose norm differs from every other one plays the role of
  // the labeled anchor; its distances must sit strictly inside the annulus.
  std::vector<double> norms(m);
  for (int i = 0; i < m; ++i) norms[i] = g(i, i);
  int isolated = -1;
  int isolated_count = 0;
  for (int i = 0; i < m; ++i) {
    bool alone = true;
    for (int j = 0; j < m && alone; ++j)
      if (j != i && std::abs(norms[i] - norms[j]) <= cluster_tol) alone = false;
    if (alone) {
      isolated = i;
      ++isolated_count;
    }
  }
  if (isolated_count == 1 && m > 2) {
    const double rm = std::sqrt(norms[isolated]);
    for (int i = 0; i < m; ++i) {
      if (i == isolated) continue;
      const double ri = std::sqrt(norms[i]);
      const double d = std::sqrt(std::max(0.0, norms[i] + norms[isolated] - 2.0 * g(i, isolated)));
      if (d <= std::abs(rm - ri) + 1e-9 || d >= rm + ri - 1e-9) {
        r.cross_interior = false;
        break;
      }
    }
  }
  return r;
}

/// All t-subsets of {0, ..., k-1} in lexicographic order.
inline std::vector<std::vector<int>> index_combinations(int k, int t) {
  std::vector<std::vector<int>> out;
  if (t < 0 || t > k) return out;
  std::vector<int> cur(t);
  for (int i = 0; i < t; ++i) cur[i] = i;
  for (;;) {
    out.push_back(cur);
    int pos = t - 1;
    while (pos >= 0 && cur[pos] == k - t + pos) --pos;
    if (pos < 0) break;
    ++cur[pos];
    for (int i = pos + 1; i < t; ++i) cur[i] = cur[i - 1] + 1;
  }
  return out;
}

/// Candidate inner products for each unknown Gram entry among `points`
/// same-norm points, drawn from a shared pool of measured values.
///
/// Candidates are stored as indices into the ascending pool so that equal
/// values with multiplicity stay distinguishable. Fixing a pair consumes its
/// pool entry, which then disappears from every other list.
class AmbiguityTable {
 public:
  AmbiguityTable() = default;
  AmbiguityTable(int points, std::vector<double> pool) : points_(points), pool_(std::move(pool)) {
    if (points < 2) throw Error(ErrorKind::InvalidInput, "ambiguity table needs at least two points");
    if (!std::is_sorted(pool_.begin(), pool_.end())) throw Error(ErrorKind::InvalidInput, "pool must be ascending");
    const std::size_t pairs = static_cast<std::size_t>(points) * (points - 1) / 2;
    valid_.assign(pairs, {});
    fixed_.assign(pairs, -1);
    consumed_.assign(pool_.size(), false);
  }

  int points() const noexcept { return points_; }
  std::size_t pair_count() const noexcept { return valid_.size(); }
  const std::vector<double>& pool() const noexcept { return pool_; }

  std::size_t pair_index(int i, int j) const {
    if (i > j) std::swap(i, j);
    if (i < 0 || j >= points_ || i == j) throw Error(ErrorKind::InvalidInput, "bad pair index");
    return static_cast<std::size_t>(i) * static_cast<std::size_t>(2 * points_ - i - 1) / 2 + static_cast<std::size_t>(j - i - 1);
  }

  /// Initial candidate list (ascending pool indices). Only allowed before any
  /// pair has been fixed.
  void set_candidates(int i, int j, std::vector<int> pool_indices) {
    std::sort(pool_indices.begin(), pool_indices.end());
    for (int k : pool_indices)
      if (k < 0 || k >= static_cast<int>(pool_.size())) throw Error(ErrorKind::InvalidInput, "pool index out of range");
    valid_[pair_index(i, j)] = std::move(pool_indices);
  }

  std::span<const int> candidates(int i, int j) const { return valid_[pair_index(i, j)]; }
  std::size_t size(int i, int j) const { return valid_[pair_index(i, j)].size(); }
  bool is_fixed(int i, int j) const { return fixed_[pair_index(i, j)] >= 0; }

  std::optional<double> fixed_value(int i, int j) const {
    const int k = fixed_[pair_index(i, j)];
    if (k < 0) return std::nullopt;
    return pool_[static_cast<std::size_t>(k)];
  }

  bool is_consumed(int pool_index) const { return consumed_[static_cast<std::size_t>(pool_index)]; }

  void fix(int i, int j, int pool_index) {
    const std::size_t p = pair_index(i, j);
    if (fixed_[p] >= 0) throw Error(ErrorKind::InvalidInput, "pair already fixed");
    auto& list = valid_[p];
    if (!std::binary_search(list.begin(), list.end(), pool_index))
      throw Error(ErrorKind::InvalidInput, "value is not a candidate for this pair");
    if (consumed_[static_cast<std::size_t>(pool_index)]) throw Error(ErrorKind::InvalidInput, "value already consumed");
    consumed_[static_cast<std::size_t>(pool_index)] = true;
    fixed_[p] = pool_index;
    list.assign(1, pool_index);
    for (std::size_t q = 0; q < valid_.size(); ++q) {
      if (q == p || fixed_[q] >= 0) continue;
      auto& other = valid_[q];
      auto it = std::lower_bound(other.begin(), other.end(), pool_index);
      if (it != other.end() && *it == pool_index) other.erase(it);
    }
  }

  /// Replaces an unfixed pair's list with every unconsumed pool index.
  void widen(int i, int j) {
    const std::size_t p = pair_index(i, j);
    if (fixed_[p] >= 0) throw Error(ErrorKind::InvalidInput, "pair already fixed");
    auto& list = valid_[p];
    list.clear();
    for (std::size_t k = 0; k < pool_.size(); ++k)
      if (!consumed_[k]) list.push_back(static_cast<int>(k));
  }

  std::vector<double> remaining_pool() const {
    std::vector<double> out;
    for (std::size_t k = 0; k < pool_.size(); ++k)
      if (!consumed_[k]) out.push_back(pool_[k]);
    return out;
  }

  /// Smallest candidate list over all pairs.
  std::size_t min_list_size() const {
    std::size_t best = std::numeric_limits<std::size_t>::max();
    for (const auto& l : valid_) best = std::min(best, l.size());
    return valid_.empty() ? 0 : best;
  }

  std::size_t fixed_count() const {
    return static_cast<std::size_t>(std::count_if(fixed_.begin(), fixed_.end(), [](int k) { return k >= 0; }));
  }

 private:
  int points_ = 0;
  std::vector<double> pool_;
  std::vector<std::vector<int>> valid_;
  std::vector<int> fixed_;
  std::vector<bool> consumed_;
};

using IndexTuple = std::vector<int>;

/// c_iota for every unresolved tuple, keyed in lexicographic tuple order.
struct CountsTable {
  std::map<IndexTuple, std::uint64_t> counts;

  bool empty() const { return counts.empty(); }
  std::size_t size() const { return counts.size(); }

  /// Minimal count; ties go to the lexicographically smallest tuple.
  std::optional<std::pair<IndexTuple, std::uint64_t>> argmin() const {
    std::optional<std::pair<IndexTuple, std::uint64_t>> best;
    for (const auto& [tuple, c] : counts)
      if (!best || c < best->second) best = std::make_pair(tuple, c);
    return best;
  }
};

}  // namespace beltway
