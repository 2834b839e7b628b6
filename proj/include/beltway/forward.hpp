#pragma once

// Forward model: second moments of point configurations, interpoint
// distances, Gram-space noise and random configurations.

#include <cmath>
#include <cstdint>
#include <map>
#include <utility>
#include <vector>

#include "beltway/error.hpp"
#include "beltway/linalg.hpp"
#include "beltway/model.hpp"
#include "beltway/rng.hpp"

namespace beltway {

/// Triples of a (possibly noisy) Gram matrix, shuffled with `shuffle_seed`
/// so no labeling leaks through the stored order.
inline SecondMoment moment_from_gram(const GramMatrix& g, std::uint64_t shuffle_seed = 0) {
  const int m = g.m();
  std::vector<Triple> triples;
  triples.reserve(static_cast<std::size_t>(m) * (m - 1) / 2);
  for (int i = 0; i < m; ++i)
    for (int j = i + 1; j < m; ++j) triples.push_back(Triple::oriented(g(i, i), g(j, j), g(i, j)));
  Rng rng(shuffle_seed);
  shuffle(triples, rng);
  std::vector<double> norms(m);
  for (int i = 0; i < m; ++i) norms[i] = g(i, i);
  return SecondMoment(m, std::move(triples), std::move(norms));
}

inline SecondMoment second_moment(const PointConfig& cfg, std::uint64_t shuffle_seed = 0) {
  return moment_from_gram(cfg.gram(), shuffle_seed);
}

/// Squared interpoint distances grouped by the unordered pair of norm
/// classes of the endpoints. Class indices refer to `profile.classes`
/// (descending norm); keys have first <= second. Each set is ascending.
struct DistanceSets {
  NormProfile profile;
  std::map<std::pair<std::size_t, std::size_t>, std::vector<double>> sets;

  const std::vector<double>& between(std::size_t a, std::size_t b) const {
    static const std::vector<double> empty;
    auto it = sets.find(a <= b ? std::make_pair(a, b) : std::make_pair(b, a));
    return it == sets.end() ? empty : it->second;
  }
};

inline DistanceSets distances_from_moment(const SecondMoment& sm, double cluster_tol = kClusterTol) {
  DistanceSets out;
  out.profile = norm_profile(sm, cluster_tol);
  for (const auto& t : sm.triples()) {
    double d2 = t.d1 + t.d2 - 2.0 * t.ip;
    if (d2 < -1e-9) throw Error(ErrorKind::MalformedMoment, "negative squared distance " + std::to_string(d2));
    d2 = std::max(d2, 0.0);
    auto a = *out.profile.find(t.d1, cluster_tol);
    auto b = *out.profile.find(t.d2, cluster_tol);
    if (a > b) std::swap(a, b);
    out.sets[{a, b}].push_back(d2);
  }
  for (auto& [key, v] : out.sets) std::sort(v.begin(), v.end());
  return out;
}

/// gram + M with M symmetric, zero diagonal and i.i.d. N(0, sigma2) entries
/// drawn for i < j in row-major order.
inline GramMatrix add_gram_noise(const GramMatrix& gram, double sigma2, std::uint64_t seed) {
  if (!(sigma2 >= 0.0) || !std::isfinite(sigma2)) throw Error(ErrorKind::InvalidInput, "sigma2 must be >= 0");
  if (sigma2 == 0.0) return gram;
  SymMatrix s = gram.sym();
  Rng rng(seed);
  const double sigma = std::sqrt(sigma2);
  for (int i = 0; i < s.dim(); ++i)
    for (int j = i + 1; j < s.dim(); ++j) s(i, j) += sigma * rng.gaussian();
  return GramMatrix(std::move(s), gram.target_rank());
}

struct NormSpec {
  double radius = 1.0;
  int count = 0;

  friend bool operator==(const NormSpec&, const NormSpec&) = default;
};

inline constexpr int kSampleRetries = 100;

/// Points uniform on spheres of the given radii, in the order listed. The
/// first class with count 1 is pinned at radius * e1.
inline PointConfig sample_config(int m, int n, const std::vector<NormSpec>& spec, std::uint64_t seed) {
  if (n < 2) throw Error(ErrorKind::InvalidInput, "n must be >= 2");
  int total = 0;
  for (const auto& s : spec) {
    if (!(s.radius > 0.0) || !std::isfinite(s.radius)) throw Error(ErrorKind::InvalidInput, "radius must be positive");
    if (s.count < 1) throw Error(ErrorKind::InvalidInput, "class count must be positive");
    total += s.count;
  }
  if (total != m) throw Error(ErrorKind::InvalidInput, "norm spec counts sum to " + std::to_string(total) + ", expected m = " + std::to_string(m));

  Rng rng(seed);
  for (int attempt = 0; attempt < kSampleRetries; ++attempt) {
    Matrix x(n, m);
    int col = 0;
    bool pinned = false;
    for (const auto& s : spec) {
      if (s.count == 1 && !pinned) {
        pinned = true;
        x(0, col++) = s.radius;
        continue;
      }
      for (int k = 0; k < s.count; ++k, ++col) {
        std::vector<double> g(n);
        double norm2 = 0.0;
        while (norm2 < 1e-24) {
          norm2 = 0.0;
          for (auto& v : g) {
            v = rng.gaussian();
            norm2 += v * v;
          }
        }
        const double scale = s.radius / std::sqrt(norm2);
        for (int r = 0; r < n; ++r) x(r, col) = g[r] * scale;
      }
    }
    PointConfig cfg(std::move(x));
    if (genericity_check(cfg).ok()) return cfg;
  }
  throw Error(ErrorKind::DegenerateSampling, "no generic configuration after " + std::to_string(kSampleRetries) + " attempts");
}

}  // namespace beltway
