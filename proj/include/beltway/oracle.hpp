#pragma once

// Brute-force ground truth: symmetric rearrangements of a Gram matrix,
// equivalence under simultaneous permutation, uniqueness certificates and
// the psd-rearrangement census.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <utility>
#include <vector>

#include "beltway/error.hpp"
#include "beltway/forward.hpp"
#include "beltway/linalg.hpp"
#include "beltway/model.hpp"
#include "beltway/parallel.hpp"
#include "beltway/rng.hpp"

namespace beltway {

inline constexpr double kEquivalenceTol = 1e-7;
inline constexpr std::uint64_t kMaxRearrangements = 50'000'000;

// ---------------------------------------------------------------------------
// Equivalence

namespace detail {

inline std::vector<double> sorted_row(const SymMatrix& a, int i) {
  std::vector<double> r;
  r.reserve(static_cast<std::size_t>(a.dim()));
  for (int j = 0; j < a.dim(); ++j)
    if (j != i) r.push_back(a(i, j));
  std::sort(r.begin(), r.end());
  return r;
}

inline bool close_all(const std::vector<double>& x, const std::vector<double>& y, double tol) {
  for (std::size_t k = 0; k < x.size(); ++k)
    if (std::abs(x[k] - y[k]) > tol) return false;
  return true;
}

}  // namespace detail

/// A permutation p with b(i, j) = a(p[i], p[j]) within tol, if one exists.
/// Backtracking over rows of b; candidates are pruned by diagonal value,
/// sorted-row signature and consistency with rows already placed.
inline std::optional<std::vector<int>> find_equivalence(const SymMatrix& a, const SymMatrix& b, double tol = kEquivalenceTol) {
  const int m = a.dim();
  if (b.dim() != m) return std::nullopt;
  std::vector<std::vector<double>> sa(m), sb(m);
  for (int i = 0; i < m; ++i) {
    sa[i] = detail::sorted_row(a, i);
    sb[i] = detail::sorted_row(b, i);
  }
  std::vector<std::vector<int>> options(m);
  for (int i = 0; i < m; ++i) {
    for (int k = 0; k < m; ++k)
      if (std::abs(a(k, k) - b(i, i)) <= tol && detail::close_all(sa[k], sb[i], tol)) options[i].push_back(k);
    if (options[i].empty()) return std::nullopt;
  }

  std::vector<int> p(m, -1);
  std::vector<bool> used(m, false);
  std::vector<std::size_t> next(m, 0);
  int i = 0;
  while (i >= 0) {
    if (i == m) return p;
    bool placed = false;
    while (next[i] < options[i].size()) {
      const int k = options[i][next[i]++];
      if (used[k]) continue;
      bool ok = true;
      for (int r = 0; r < i && ok; ++r) ok = std::abs(a(p[r], k) - b(r, i)) <= tol;
      if (!ok) continue;
      p[i] = k;
      used[k] = true;
      placed = true;
      break;
    }
    if (placed) {
      ++i;
      if (i < m) next[i] = 0;
    } else {
      next[i] = 0;
      --i;
      if (i >= 0) {
        used[p[i]] = false;
        p[i] = -1;
      }
    }
  }
  return std::nullopt;
}

inline bool are_equivalent(const SymMatrix& a, const SymMatrix& b, double tol = kEquivalenceTol) {
  return find_equivalence(a, b, tol).has_value();
}

inline bool are_equivalent(const GramMatrix& a, const GramMatrix& b, double tol = kEquivalenceTol) {
  return are_equivalent(a.sym(), b.sym(), tol);
}

// ---------------------------------------------------------------------------
// Rearrangements

/// Full: every within-class permutation of off-diagonal positions.
/// Reduced: positions touching one isolated point stay put. Any
/// rearrangement is equivalent to a reduced one (relabel the partner class).
enum class RearrangementScope { Full, Reduced };

/// Off-diagonal positions (i < j, row-major) grouped by the unordered pair of
/// diagonal classes of their endpoints.
struct PositionClasses {
  std::vector<std::pair<int, int>> positions;
  std::vector<std::vector<int>> groups;  ///< free groups, indices into positions
};

inline PositionClasses position_classes(const SymMatrix& a, RearrangementScope scope, double cluster_tol = kClusterTol) {
  const int m = a.dim();
  std::vector<double> diag(m);
  for (int i = 0; i < m; ++i) diag[i] = a(i, i);
  const auto classes = cluster_values(diag, cluster_tol);
  std::vector<int> cls(m);
  for (int i = 0; i < m; ++i)
    for (std::size_t c = 0; c < classes.size(); ++c)
      if (std::abs(classes[c].value - diag[i]) <= cluster_tol) {
        cls[i] = static_cast<int>(c);
        break;
      }

  int pinned_class = -1;
  if (scope == RearrangementScope::Reduced)
    for (int i = m - 1; i >= 0 && pinned_class < 0; --i)
      if (classes[static_cast<std::size_t>(cls[i])].multiplicity == 1) pinned_class = cls[i];

  PositionClasses out;
  std::map<std::pair<int, int>, std::vector<int>> by_key;
  for (int i = 0; i < m; ++i)
    for (int j = i + 1; j < m; ++j) {
      const int p = static_cast<int>(out.positions.size());
      out.positions.emplace_back(i, j);
      const auto key = std::minmax(cls[i], cls[j]);
      if (key.first == pinned_class || key.second == pinned_class) continue;
      by_key[{key.first, key.second}].push_back(p);
    }
  for (auto& [key, g] : by_key)
    if (g.size() > 1) out.groups.push_back(std::move(g));
  return out;
}

inline std::uint64_t count_rearrangements(const SymMatrix& a, RearrangementScope scope = RearrangementScope::Reduced) {
  std::uint64_t total = 1;
  for (const auto& g : position_classes(a, scope).groups)
    for (std::uint64_t k = 2; k <= g.size(); ++k) {
      if (total > std::numeric_limits<std::uint64_t>::max() / k) return std::numeric_limits<std::uint64_t>::max();
      total *= k;
    }
  return total;
}

/// Calls f(B, perm) for every symmetric rearrangement B of a, where
/// B(positions[p]) = a(positions[perm[p]]). The identity comes first.
inline void for_each_rearrangement(const SymMatrix& a, RearrangementScope scope,
                                   const std::function<void(const SymMatrix&, const std::vector<int>&)>& f) {
  const std::uint64_t count = count_rearrangements(a, scope);
  if (count > kMaxRearrangements)
    throw Error(ErrorKind::TooLarge, "rearrangement count exceeds " + std::to_string(kMaxRearrangements));
  const PositionClasses pc = position_classes(a, scope);
  std::vector<std::vector<int>> order(pc.groups.size());
  for (std::size_t g = 0; g < pc.groups.size(); ++g) {
    order[g].resize(pc.groups[g].size());
    for (std::size_t t = 0; t < order[g].size(); ++t) order[g][t] = static_cast<int>(t);
  }
  std::vector<int> perm(pc.positions.size());
  SymMatrix b = a;
  for (;;) {
    for (std::size_t p = 0; p < perm.size(); ++p) perm[p] = static_cast<int>(p);
    for (std::size_t g = 0; g < pc.groups.size(); ++g)
      for (std::size_t t = 0; t < order[g].size(); ++t) {
        const int dst = pc.groups[g][t];
        const int src = pc.groups[g][static_cast<std::size_t>(order[g][t])];
        perm[static_cast<std::size_t>(dst)] = src;
        const auto [si, sj] = pc.positions[static_cast<std::size_t>(src)];
        const auto [di, dj] = pc.positions[static_cast<std::size_t>(dst)];
        b(di, dj) = a(si, sj);
      }
    f(b, perm);
    std::size_t g = order.size();
    bool more = false;
    while (g > 0) {
      --g;
      if (std::next_permutation(order[g].begin(), order[g].end())) {
        more = true;
        break;
      }
    }
    if (!more) return;
  }
}

struct RearrangementReport {
  std::vector<int> perm;
  SymMatrix matrix;
  int rank = 0;
  bool psd = false;
  bool equivalent_to_source = false;
};

inline bool is_psd(const SymMatrix& b, double rel_tol = kRankTol) {
  const EigenResult e = eigen_sym(b);
  return e.values.back() >= -rel_tol * b.max_abs();
}

inline RearrangementReport classify_rearrangement(const SymMatrix& source, const SymMatrix& b, std::vector<int> perm,
                                                  double rank_tol = kRankTol) {
  RearrangementReport r;
  const EigenResult e = eigen_sym(b);
  r.rank = detail::rank_from_values(e.values, rank_tol);
  r.psd = e.values.back() >= -rank_tol * b.max_abs();
  r.equivalent_to_source = are_equivalent(source, b);
  r.perm = std::move(perm);
  r.matrix = b;
  return r;
}

inline void enumerate_rearrangements(const GramMatrix& a, RearrangementScope scope,
                                     const std::function<void(const RearrangementReport&)>& f) {
  for_each_rearrangement(a.sym(), scope, [&](const SymMatrix& b, const std::vector<int>& perm) {
    f(classify_rearrangement(a.sym(), b, perm));
  });
}

struct RearrangementSummary {
  std::uint64_t total = 0;
  std::uint64_t equivalent = 0;
  std::uint64_t non_equivalent = 0;
  std::uint64_t low_rank_non_equivalent = 0;  ///< rank <= n and not equivalent
  std::uint64_t psd_non_equivalent = 0;
  std::uint64_t psd_classes = 0;              ///< psd non-equivalent, up to mutual equivalence
};

inline RearrangementSummary summarize_rearrangements(const GramMatrix& a, RearrangementScope scope = RearrangementScope::Reduced) {
  RearrangementSummary s;
  std::vector<SymMatrix> reps;
  enumerate_rearrangements(a, scope, [&](const RearrangementReport& r) {
    ++s.total;
    if (r.equivalent_to_source) {
      ++s.equivalent;
      return;
    }
    ++s.non_equivalent;
    if (r.rank <= a.target_rank()) ++s.low_rank_non_equivalent;
    if (r.psd) {
      ++s.psd_non_equivalent;
      const bool seen = std::any_of(reps.begin(), reps.end(), [&](const SymMatrix& q) { return are_equivalent(q, r.matrix); });
      if (!seen) reps.push_back(r.matrix);
    }
  });
  s.psd_classes = reps.size();
  return s;
}

struct UniquenessCertificate {
  int m = 0;
  int n = 0;
  RearrangementSummary summary;
  bool unique = false;  ///< every rank <= n rearrangement is equivalent to the source
};

inline UniquenessCertificate uniqueness_certificate(const PointConfig& cfg, RearrangementScope scope = RearrangementScope::Reduced) {
  if (cfg.m() <= cfg.n()) throw Error(ErrorKind::InvalidInput, "certificate needs m > n");
  UniquenessCertificate c;
  c.m = cfg.m();
  c.n = cfg.n();
  c.summary = summarize_rearrangements(cfg.gram(), scope);
  c.unique = c.summary.low_rank_non_equivalent == 0;
  return c;
}

// ---------------------------------------------------------------------------
// Census

inline std::uint64_t trial_seed(std::uint64_t master, std::uint64_t group, std::uint64_t trial) {
  return Rng(master).split(group).split(trial).next();
}

struct CensusTrial {
  std::uint64_t seed = 0;
  RearrangementSummary summary;
};

struct CensusStats {
  int trials = 0;
  int trials_with_psd = 0;
  std::uint64_t rearrangements = 0;
  std::uint64_t non_equivalent = 0;
  std::uint64_t psd_non_equivalent = 0;
  std::uint64_t psd_classes = 0;
  std::vector<CensusTrial> per_trial;

  double trial_fraction() const { return trials ? static_cast<double>(trials_with_psd) / trials : 0.0; }
  double share_raw() const { return non_equivalent ? static_cast<double>(psd_non_equivalent) / static_cast<double>(non_equivalent) : 0.0; }
  double share_classes() const { return non_equivalent ? static_cast<double>(psd_classes) / static_cast<double>(non_equivalent) : 0.0; }
};

inline CensusStats census(int trials, int m, int n, const std::vector<NormSpec>& spec, std::uint64_t seed, int jobs = 1,
                          RearrangementScope scope = RearrangementScope::Reduced) {
  if (trials < 0) throw Error(ErrorKind::InvalidInput, "trials must be >= 0");
  CensusStats st;
  st.per_trial = parallel_map(static_cast<std::size_t>(trials), jobs, [&](std::size_t t) {
    CensusTrial r;
    r.seed = trial_seed(seed, static_cast<std::uint64_t>(m), t);
    const PointConfig cfg = sample_config(m, n, spec, r.seed);
    r.summary = summarize_rearrangements(cfg.gram(), scope);
    return r;
  });
  st.trials = trials;
  for (const auto& r : st.per_trial) {
    st.rearrangements += r.summary.total;
    st.non_equivalent += r.summary.non_equivalent;
    st.psd_non_equivalent += r.summary.psd_non_equivalent;
    st.psd_classes += r.summary.psd_classes;
    if (r.summary.psd_non_equivalent > 0) ++st.trials_with_psd;
  }
  return st;
}

// ---------------------------------------------------------------------------
// Procrustes

/// Max-entry residual |Q X_p - Y| after matching columns through the Gram
/// matrices (tolerance `match_tol`) and solving for the best orthogonal Q.
/// Infinity when the Gram matrices are not equivalent.
inline double procrustes_residual(const PointConfig& x, const PointConfig& y, double match_tol = 1e-5) {
  if (x.n() != y.n() || x.m() != y.m()) return std::numeric_limits<double>::infinity();
  const auto p = find_equivalence(x.gram().sym(), y.gram().sym(), match_tol);
  if (!p) return std::numeric_limits<double>::infinity();
  const int n = x.n();
  const int m = x.m();
  Matrix xp(n, m);
  for (int j = 0; j < m; ++j)
    for (int r = 0; r < n; ++r) xp(r, j) = x.coords()(r, (*p)[j]);

  // Q = H (H^T H)^{-1/2} with H = Y X_p^T.
  const Matrix h = y.coords() * xp.transposed();
  SymMatrix hth(n);
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j) {
      double s = 0.0;
      for (int k = 0; k < n; ++k) s += h(k, i) * h(k, j);
      hth(i, j) = s;
    }
  const EigenResult e = eigen_sym(hth);
  const double floor = 1e-24 * std::max(1.0, e.values.front());
  Matrix inv_sqrt(n, n);
  for (int k = 0; k < n; ++k) {
    const double w = 1.0 / std::sqrt(std::max(e.values[k], floor));
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) inv_sqrt(i, j) += w * e.vectors(i, k) * e.vectors(j, k);
  }
  const Matrix q = h * inv_sqrt;
  const Matrix aligned = q * xp;
  double res = 0.0;
  for (int r = 0; r < n; ++r)
    for (int j = 0; j < m; ++j) res = std::max(res, std::abs(aligned(r, j) - y.coords()(r, j)));
  return res;
}

}  // namespace beltway
