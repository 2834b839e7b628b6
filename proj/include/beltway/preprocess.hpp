#pragma once

// Cayley-Menger pre-processing: bound every unknown inner product among the
// same-norm points using the labeled distances to the isolated point.

#include <algorithm>
#include <cmath>
#include <limits>
#include <utility>
#include <vector>

#include "beltway/error.hpp"
#include "beltway/linalg.hpp"
#include "beltway/model.hpp"

namespace beltway {

/// A moment with one isolated norm class and one class of size m - 1,
/// arranged with the isolated point last.
struct IsolatedLayout {
  int m = 0;
  double same_norm2 = 0.0;       ///< a_ii for i < m - 1
  double isolated_norm2 = 0.0;   ///< a_mm
  std::vector<double> alpha;     ///< a_im, descending, size m - 1
  std::vector<double> pool;      ///< same-class inner products, ascending
  NormProfile profile;
};

inline Error profile_mismatch(const NormProfile& p, const std::string& expected) {
  return Error(ErrorKind::ProfileMismatch, "expected " + expected + ", detected norm profile " + p.describe());
}

/// Splits a moment into cross and same-class inner products. Requires the
/// two-class profile {1, m - 1} with m >= 3.
inline IsolatedLayout split_isolated(const SecondMoment& sm, double cluster_tol = kClusterTol) {
  IsolatedLayout out;
  out.m = sm.m();
  out.profile = norm_profile(sm, cluster_tol);
  const auto& cls = out.profile.classes;
  const std::string expected = "one isolated norm plus one class of size m-1";
  if (out.m < 3 || cls.size() != 2) throw profile_mismatch(out.profile, expected);
  std::size_t iso = 0;
  if (cls[0].multiplicity == 1 && cls[1].multiplicity == out.m - 1)
    iso = 0;
  else if (cls[1].multiplicity == 1 && cls[0].multiplicity == out.m - 1)
    iso = 1;
  else
    throw profile_mismatch(out.profile, expected);
  out.isolated_norm2 = cls[iso].value;
  out.same_norm2 = cls[1 - iso].value;

  for (const auto& t : sm.triples()) {
    const std::size_t a = *out.profile.find(t.d1, cluster_tol);
    const std::size_t b = *out.profile.find(t.d2, cluster_tol);
    if (a == iso && b == iso) throw Error(ErrorKind::MalformedMoment, "isolated class paired with itself");
    if (a == iso || b == iso)
      out.alpha.push_back(t.ip);
    else
      out.pool.push_back(t.ip);
  }
  if (static_cast<int>(out.alpha.size()) != out.m - 1)
    throw Error(ErrorKind::MalformedMoment, "expected m-1 inner products with the isolated point");
  std::sort(out.alpha.begin(), out.alpha.end(), std::greater<>());
  std::sort(out.pool.begin(), out.pool.end());
  return out;
}

/// Interval of distances |v_i - v_j| compatible with a tetrahedron
/// {0, v_i, v_j, v_m} of the given squared norms and squared distances to v_m.
inline PositiveRoots cm_bounds(double aii, double ajj, double amm, double dim2, double djm2,
                               double annulus_slack = 1e-9, double cluster_tol = kClusterTol) {
  if (!(aii > 0.0) || !(ajj > 0.0) || !(amm > 0.0))
    throw Error(ErrorKind::InfeasibleGeometry, "squared norms must be positive");
  if (std::abs(amm - aii) <= cluster_tol || std::abs(amm - ajj) <= cluster_tol)
    throw Error(ErrorKind::InfeasibleGeometry, "isolated norm must differ from the others");

  auto clamp_annulus = [&](double ak, double d2) {
    const double lo = (std::sqrt(amm) - std::sqrt(ak)) * (std::sqrt(amm) - std::sqrt(ak));
    const double hi = (std::sqrt(amm) + std::sqrt(ak)) * (std::sqrt(amm) + std::sqrt(ak));
    if (d2 < lo - annulus_slack || d2 > hi + annulus_slack)
      throw Error(ErrorKind::InfeasibleGeometry, "distance to isolated point outside its annulus");
    return std::clamp(d2, lo, hi);
  };
  dim2 = clamp_annulus(aii, dim2);
  djm2 = clamp_annulus(ajj, djm2);

  const Biquadratic f = cayley_menger_biquadratic(aii, ajj, amm, dim2, djm2);
  try {
    return biquadratic_positive_roots(f.quartic, f.quadratic, f.constant);
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::NoRealRoots) throw Error(ErrorKind::InfeasibleGeometry, e.what());
    throw;
  }
}

struct PreprocessOptions {
  /// Noise scale of the inner products. Zero keeps the tight relative slack.
  double sigma_hat = 0.0;
  /// When false every list is the whole pool (no Cayley-Menger filtering).
  bool filter = true;
};

struct PreprocessResult {
  IsolatedLayout layout;
  AmbiguityTable table;  ///< over the m - 1 same-norm points
  std::size_t min_ambiguity = 0;
};

/// Noise half-width, in units of sigma_hat, tolerated by noisy filtering.
inline constexpr double kSigmaWidth = 6.0;

inline double preprocess_slack(double beta, double sigma_hat) {
  return std::max(1e-7 * (1.0 + beta), kSigmaWidth * sigma_hat);
}

/// Bounds for noisy cross distances: the union of the bounds obtained when
/// each squared cross distance moves by up to 2 * kSigmaWidth * sigma_hat.
inline PositiveRoots noisy_cm_bounds(double aii, double amm, double dim2, double djm2, double annulus_slack, double sigma_hat) {
  if (sigma_hat <= 0.0) return cm_bounds(aii, aii, amm, dim2, djm2, annulus_slack);
  const double delta = 2.0 * kSigmaWidth * sigma_hat;
  const double lo_ann = (std::sqrt(amm) - std::sqrt(aii)) * (std::sqrt(amm) - std::sqrt(aii));
  const double hi_ann = (std::sqrt(amm) + std::sqrt(aii)) * (std::sqrt(amm) + std::sqrt(aii));
  PositiveRoots out{std::numeric_limits<double>::infinity(), 0.0};
  constexpr int kSteps = 4;
  for (int a = -kSteps; a <= kSteps; ++a)
    for (int b = -kSteps; b <= kSteps; ++b) {
      const double p = std::clamp(dim2 + delta * a / kSteps, lo_ann, hi_ann);
      const double q = std::clamp(djm2 + delta * b / kSteps, lo_ann, hi_ann);
      try {
        const PositiveRoots r = cm_bounds(aii, aii, amm, p, q, annulus_slack);
        out.lo = std::min(out.lo, r.lo);
        out.hi = std::max(out.hi, r.hi);
      } catch (const Error& e) {
        if (e.kind() != ErrorKind::InfeasibleGeometry) throw;
      }
    }
  if (!(out.hi > 0.0)) throw Error(ErrorKind::InfeasibleGeometry, "no feasible perturbation of the cross distances");
  return out;
}

inline PreprocessResult preprocess(const SecondMoment& sm, const PreprocessOptions& opt = {}) {
  PreprocessResult out;
  out.layout = split_isolated(sm);
  const auto& L = out.layout;
  const int k = L.m - 1;
  out.table = AmbiguityTable(k, L.pool);
  const auto& pool = out.table.pool();
  const double aii = L.same_norm2;
  const double amm = L.isolated_norm2;

  std::vector<double> dm2(k);
  for (int i = 0; i < k; ++i) dm2[i] = aii + amm - 2.0 * L.alpha[i];
  // Noise on a_im enters d_im^2 doubled.
  const double annulus_slack = std::max(1e-9, 2.0 * kSigmaWidth * opt.sigma_hat);

  std::vector<int> all(pool.size());
  for (std::size_t t = 0; t < pool.size(); ++t) all[t] = static_cast<int>(t);

  std::size_t min_size = std::numeric_limits<std::size_t>::max();
  for (int i = 0; i < k; ++i)
    for (int j = i + 1; j < k; ++j) {
      std::vector<int> cand;
      if (!opt.filter) {
        cand = all;
      } else {
        const PositiveRoots r = noisy_cm_bounds(aii, amm, dm2[i], dm2[j], annulus_slack, opt.sigma_hat);
        const double s = preprocess_slack(r.hi, opt.sigma_hat);
        const double dhi = r.hi + s;
        const double dlo = std::max(r.lo - s, 0.0);
        // d(a)^2 = 2 a_ii - 2a is decreasing in a.
        const double a_lo = (2.0 * aii - dhi * dhi) / 2.0;
        const double a_hi = (2.0 * aii - dlo * dlo) / 2.0;
        auto first = std::lower_bound(pool.begin(), pool.end(), a_lo);
        auto last = std::upper_bound(pool.begin(), pool.end(), a_hi);
        for (auto it = first; it < last; ++it) cand.push_back(static_cast<int>(it - pool.begin()));
      }
      if (cand.empty())
        throw Error(ErrorKind::InfeasibleMoment,
                    "no inner product fits the Cayley-Menger bounds for pair (" + std::to_string(i) + "," + std::to_string(j) + ")");
      min_size = std::min(min_size, cand.size());
      out.table.set_candidates(i, j, std::move(cand));
    }
  out.min_ambiguity = k >= 2 ? min_size : 0;
  return out;
}

}  // namespace beltway
