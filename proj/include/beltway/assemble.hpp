#pragma once

// Gram matrix assembly from an unlabeled second moment: the exact engine
// with an isolated anchor point, the common-sphere engine and the noisy
// engine that minimises the distance to the rank-n locus.

#include <algorithm>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "beltway/error.hpp"
#include "beltway/linalg.hpp"
#include "beltway/model.hpp"
#include "beltway/preprocess.hpp"

namespace beltway {

enum class Mode { Exact, Sphere, Noisy };

inline const char* to_string(Mode m) {
  switch (m) {
    case Mode::Exact: return "exact";
    case Mode::Sphere: return "sphere";
    case Mode::Noisy: return "noisy";
  }
  return "unknown";
}

inline Mode parse_mode(const std::string& s) {
  if (s == "exact") return Mode::Exact;
  if (s == "sphere") return Mode::Sphere;
  if (s == "noisy") return Mode::Noisy;
  throw Error(ErrorKind::InvalidInput, "unknown mode '" + s + "'");
}

struct AssembleOptions {
  double rank_tol = kRankTol;
  /// Noisy mode only: inner-product noise scale; 0 disables Cayley-Menger filtering.
  double sigma_hat = 0.0;
};

struct IterationTrace {
  IndexTuple tuple;
  std::uint64_t count = 0;        ///< c_iota when selected
  std::uint64_t rank_checks = 0;  ///< candidates evaluated
  int new_entries = 0;
  double score = 0.0;             ///< noisy: smallest |eigenvalue| of the chosen minor
};

struct RecoveryResult {
  Mode mode = Mode::Exact;
  int n = 0;
  GramMatrix gram;
  std::optional<PointConfig> config;
  int iterations = 0;
  std::uint64_t rank_checks = 0;
  /// exact/sphere: max |X^T X - G|; noisy: largest score among the fixed minors.
  double residual = 0.0;
  std::size_t min_ambiguity = 0;
  std::vector<IterationTrace> trace;
};

inline std::uint64_t saturating_mul(std::uint64_t a, std::uint64_t b) {
  if (a != 0 && b > std::numeric_limits<std::uint64_t>::max() / a) return std::numeric_limits<std::uint64_t>::max();
  return a * b;
}

/// c_iota = product of current list sizes over the pairs of iota, for every
/// tuple with at least one unfixed pair.
inline CountsTable update_counts(const AmbiguityTable& table, std::span<const IndexTuple> tuples) {
  CountsTable out;
  for (const auto& t : tuples) {
    std::uint64_t c = 1;
    bool open = false;
    for (std::size_t r = 0; r < t.size(); ++r)
      for (std::size_t s = r + 1; s < t.size(); ++s) {
        c = saturating_mul(c, table.size(t[r], t[s]));
        open = open || !table.is_fixed(t[r], t[s]);
      }
    if (open) out.counts.emplace(t, c);
  }
  return out;
}

/// One recovery run. Owns its tables; step() performs a single fix.
class AssemblyEngine {
 public:
  AssemblyEngine(const SecondMoment& sm, int n, Mode mode, AssembleOptions opt = {})
      : mode_(mode), n_(n), m_(sm.m()), opt_(opt) {
    if (n < 2) throw Error(ErrorKind::InvalidInput, "n must be >= 2");
    if (m_ <= n) throw Error(ErrorKind::InvalidInput, "need m > n (m = " + std::to_string(m_) + ", n = " + std::to_string(n) + ")");
    if (mode == Mode::Sphere)
      init_sphere(sm);
    else
      init_isolated(sm);
    tuples_ = index_combinations(table_.points(), tuple_size());
    refresh_counts();
  }

  Mode mode() const noexcept { return mode_; }
  int n() const noexcept { return n_; }
  int m() const noexcept { return m_; }
  bool done() const noexcept { return counts_.empty(); }
  const CountsTable& counts() const noexcept { return counts_; }
  const AmbiguityTable& table() const noexcept { return table_; }
  const SymMatrix& partial_gram() const noexcept { return gram_; }
  const std::vector<IterationTrace>& trace() const noexcept { return trace_; }
  std::uint64_t rank_checks() const noexcept { return rank_checks_; }
  std::size_t min_ambiguity() const noexcept { return min_ambiguity_; }

  void step() {
    if (done()) return;
    const auto [tuple, count] = *counts_.argmin();

    std::vector<std::pair<int, int>> free;
    for (std::size_t r = 0; r < tuple.size(); ++r)
      for (std::size_t s = r + 1; s < tuple.size(); ++s)
        if (!table_.is_fixed(tuple[r], tuple[s])) free.emplace_back(tuple[r], tuple[s]);

    // Minor on iota, bordered by the isolated point when there is one.
    std::vector<int> idx(tuple.begin(), tuple.end());
    if (bordered_) idx.push_back(m_ - 1);
    SymMatrix minor = gram_.principal(idx);
    std::vector<std::pair<int, int>> slot;  // position of each free pair inside the minor
    for (auto [i, j] : free) {
      const auto a = std::find(idx.begin(), idx.end(), i) - idx.begin();
      const auto b = std::find(idx.begin(), idx.end(), j) - idx.begin();
      slot.emplace_back(static_cast<int>(a), static_cast<int>(b));
    }

    const auto& pool = table_.pool();
    std::vector<int> chosen;
    double best = std::numeric_limits<double>::infinity();
    std::uint64_t checks = 0;

    auto search = [&] {
      std::vector<std::span<const int>> lists;
      for (auto [i, j] : free) lists.push_back(table_.candidates(i, j));
      std::vector<std::size_t> pos(free.size(), 0);
      bool empty = std::any_of(lists.begin(), lists.end(), [](auto l) { return l.empty(); });
      while (!empty) {
        bool distinct = true;
        for (std::size_t a = 0; a < pos.size() && distinct; ++a)
          for (std::size_t b = a + 1; b < pos.size(); ++b)
            if (lists[a][pos[a]] == lists[b][pos[b]]) {
              distinct = false;
              break;
            }
        if (distinct) {
          for (std::size_t k = 0; k < pos.size(); ++k) minor(slot[k].first, slot[k].second) = pool[lists[k][pos[k]]];
          ++checks;
          if (mode_ == Mode::Noisy) {
            const double score = smallest_abs_eigenvalue(minor);
            if (score < best) {
              best = score;
              chosen.clear();
              for (std::size_t k = 0; k < pos.size(); ++k) chosen.push_back(lists[k][pos[k]]);
            }
          } else if (rank_at_most(minor, n_, opt_.rank_tol)) {
            for (std::size_t k = 0; k < pos.size(); ++k) chosen.push_back(lists[k][pos[k]]);
            return;
          }
        }
        // Odometer, last pair fastest.
        std::size_t k = pos.size();
        while (k > 0) {
          --k;
          if (++pos[k] < lists[k].size()) break;
          pos[k] = 0;
          if (k == 0) empty = true;
        }
        if (pos.empty()) empty = true;
      }
    };
    search();
    // Noisy filtering is heuristic: when its lists run dry, fall back to
    // every unconsumed value for this tuple's free pairs.
    if (chosen.empty() && mode_ == Mode::Noisy) {
      for (auto [i, j] : free) table_.widen(i, j);
      search();
    }
    rank_checks_ += checks;

    if (chosen.empty())
      throw AssemblyFailed("no rank-" + std::to_string(n_) + " completion for tuple " + tuple_string(tuple), tuple,
                           table_.remaining_pool());

    for (std::size_t k = 0; k < free.size(); ++k) {
      table_.fix(free[k].first, free[k].second, chosen[k]);
      gram_(free[k].first, free[k].second) = pool[chosen[k]];
    }
    IterationTrace tr;
    tr.tuple = tuple;
    tr.count = count;
    tr.rank_checks = checks;
    tr.new_entries = static_cast<int>(free.size());
    tr.score = mode_ == Mode::Noisy ? best : 0.0;
    trace_.push_back(std::move(tr));
    refresh_counts();
  }

  RecoveryResult run() {
    while (!done()) step();
    return finish();
  }

  RecoveryResult finish() const {
    if (!done()) throw Error(ErrorKind::InvalidInput, "assembly not finished");
    RecoveryResult r;
    r.mode = mode_;
    r.n = n_;
    r.gram = GramMatrix(gram_, n_);
    r.iterations = static_cast<int>(trace_.size());
    r.rank_checks = rank_checks_;
    r.min_ambiguity = min_ambiguity_;
    r.trace = trace_;
    if (mode_ == Mode::Noisy) {
      r.config = PointConfig(factor_top_eigenpairs(eigen_sym(gram_), n_));
      for (const auto& t : trace_) r.residual = std::max(r.residual, t.score);
      return r;
    }
    Matrix x;
    try {
      x = rank_truncated_factor(gram_, n_, opt_.rank_tol);
    } catch (const Error& e) {
      throw AssemblyFailed(std::string("assembled Gram matrix is not a rank-n Gram matrix: ") + e.what(), {},
                           table_.remaining_pool());
    }
    const Matrix xtx = x.transposed() * x;
    for (int i = 0; i < m_; ++i)
      for (int j = 0; j < m_; ++j) r.residual = std::max(r.residual, std::abs(xtx(i, j) - gram_(i, j)));
    r.config = PointConfig(std::move(x));
    return r;
  }

 private:
  int tuple_size() const { return mode_ == Mode::Sphere ? n_ + 1 : n_; }

  static std::string tuple_string(const IndexTuple& t) {
    std::string s = "(";
    for (std::size_t k = 0; k < t.size(); ++k) s += (k ? "," : "") + std::to_string(t[k]);
    return s + ")";
  }

  void init_isolated(const SecondMoment& sm) {
    PreprocessOptions popt;
    if (mode_ == Mode::Noisy) {
      popt.sigma_hat = opt_.sigma_hat;
      popt.filter = opt_.sigma_hat > 0.0;
    }
    PreprocessResult pre = preprocess(sm, popt);
    if (pre.layout.m - 1 < n_) throw Error(ErrorKind::InvalidInput, "need at least n same-norm points");
    bordered_ = true;
    gram_ = SymMatrix(m_);
    for (int i = 0; i < m_ - 1; ++i) {
      gram_(i, i) = pre.layout.same_norm2;
      gram_(i, m_ - 1) = pre.layout.alpha[i];
    }
    gram_(m_ - 1, m_ - 1) = pre.layout.isolated_norm2;
    table_ = std::move(pre.table);
    min_ambiguity_ = pre.min_ambiguity;
  }

  void init_sphere(const SecondMoment& sm) {
    const NormProfile p = norm_profile(sm);
    if (p.classes.size() != 1) throw profile_mismatch(p, "a single norm class");
    std::vector<double> pool;
    for (const auto& t : sm.triples()) pool.push_back(t.ip);
    std::sort(pool.begin(), pool.end());
    table_ = AmbiguityTable(m_, std::move(pool));
    std::vector<int> all(table_.pool().size());
    for (std::size_t k = 0; k < all.size(); ++k) all[k] = static_cast<int>(k);
    for (int i = 0; i < m_; ++i)
      for (int j = i + 1; j < m_; ++j) table_.set_candidates(i, j, all);
    bordered_ = false;
    gram_ = SymMatrix(m_);
    for (int i = 0; i < m_; ++i) gram_(i, i) = p.classes.front().value;
    min_ambiguity_ = all.size();
  }

  void refresh_counts() {
    counts_ = update_counts(table_, tuples_);
    std::erase_if(tuples_, [&](const IndexTuple& t) { return !counts_.counts.contains(t); });
  }

  Mode mode_;
  int n_;
  int m_;
  AssembleOptions opt_;
  bool bordered_ = false;
  AmbiguityTable table_;
  SymMatrix gram_;
  std::vector<IndexTuple> tuples_;
  CountsTable counts_;
  std::vector<IterationTrace> trace_;
  std::uint64_t rank_checks_ = 0;
  std::size_t min_ambiguity_ = 0;
};

inline RecoveryResult assemble_exact(const SecondMoment& sm, int n, AssembleOptions opt = {}) {
  return AssemblyEngine(sm, n, Mode::Exact, opt).run();
}

inline RecoveryResult assemble_sphere(const SecondMoment& sm, int n, AssembleOptions opt = {}) {
  return AssemblyEngine(sm, n, Mode::Sphere, opt).run();
}

inline RecoveryResult assemble_noisy(const SecondMoment& sm, int n, AssembleOptions opt = {}) {
  return AssemblyEngine(sm, n, Mode::Noisy, opt).run();
}

inline RecoveryResult recover(const SecondMoment& sm, int n, Mode mode, AssembleOptions opt = {}) {
  return AssemblyEngine(sm, n, mode, opt).run();
}

}  // namespace beltway
