#pragma once

// Monte Carlo harness for the recovery experiments. Each trial draws its
// configuration from a stream derived from (master seed, m, trial), so the
// tables do not depend on the worker count.

#include <chrono>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <iostream>
#include <numeric>
#include <string>
#include <vector>

#include "beltway/assemble.hpp"
#include "beltway/forward.hpp"
#include "beltway/io.hpp"
#include "beltway/model.hpp"
#include "beltway/oracle.hpp"
#include "beltway/parallel.hpp"
#include "beltway/svg.hpp"

namespace beltway {

/// Above this m the round-trip check uses Procrustes alignment instead of
/// the permutation search.
inline constexpr int kOracleMaxM = 8;
inline constexpr double kProcrustesTol = 1e-5;

struct RoundTrip {
  int m = 0;
  int n = 0;
  int trial = 0;
  std::uint64_t seed = 0;
  bool success = false;
  std::string failure;  ///< error kind when the engine threw
  double procrustes = 0.0;
  int iterations = 0;
  std::uint64_t rank_checks = 0;
  std::size_t min_ambiguity = 0;
  std::vector<std::uint64_t> per_iteration_checks;
};

inline std::vector<NormSpec> isolated_spec(int m) { return {{1.0, m - 1}, {2.0, 1}}; }
inline std::vector<NormSpec> sphere_spec(int m) { return {{1.0, m}}; }

/// Sample, measure, recover and verify one configuration.
inline RoundTrip round_trip(Mode mode, int m, int n, const std::vector<NormSpec>& spec, std::uint64_t master, int trial) {
  RoundTrip r;
  r.m = m;
  r.n = n;
  r.trial = trial;
  r.seed = trial_seed(master, static_cast<std::uint64_t>(m), static_cast<std::uint64_t>(trial));
  const PointConfig truth = sample_config(m, n, spec, r.seed);
  const SecondMoment sm = second_moment(truth, Rng(r.seed).split(2).next());
  try {
    const RecoveryResult rec = recover(sm, n, mode);
    r.iterations = rec.iterations;
    r.rank_checks = rec.rank_checks;
    r.min_ambiguity = rec.min_ambiguity;
    for (const auto& t : rec.trace) r.per_iteration_checks.push_back(t.rank_checks);
    r.procrustes = procrustes_residual(*rec.config, truth);
    r.success = m <= kOracleMaxM ? are_equivalent(rec.gram, truth.gram()) : r.procrustes <= kProcrustesTol;
  } catch (const Error& e) {
    r.failure = to_string(e.kind());
  }
  return r;
}

// Noisy recovery ---------------------------------------------------------

struct NoisyTrial {
  double sigma2 = 0.0;
  int trial = 0;
  std::uint64_t seed = 0;
  bool success = false;
  bool signature = false;  ///< some recovered minor beats the true one
  std::string failure;
  double residual = 0.0;
};

/// Target relabeled like the engine: isolated point last, the others by
/// descending inner product with it.
inline SymMatrix canonical_isolated_order(const SymMatrix& g) {
  const int m = g.dim();
  std::vector<double> norms(m);
  for (int i = 0; i < m; ++i) norms[i] = g(i, i);
  int iso = m - 1;
  for (int i = 0; i < m; ++i) {
    int same = 0;
    for (int j = 0; j < m; ++j) same += std::abs(norms[i] - norms[j]) <= kClusterTol;
    if (same == 1) iso = i;
  }
  std::vector<int> p;
  for (int i = 0; i < m; ++i)
    if (i != iso) p.push_back(i);
  std::stable_sort(p.begin(), p.end(), [&](int a, int b) { return g(a, iso) > g(b, iso); });
  p.push_back(iso);
  return g.permuted(p);
}

/// True when some (n+1)-point principal minor of `recovered` lies closer to
/// the rank-n locus than the same minor of `target`.
inline bool noisy_failure_signature(const SymMatrix& recovered, const SymMatrix& target, int n) {
  const SymMatrix t = canonical_isolated_order(target);
  for (const auto& s : index_combinations(recovered.dim(), n + 1))
    if (smallest_abs_eigenvalue(recovered.principal(s)) < smallest_abs_eigenvalue(t.principal(s))) return true;
  return false;
}

inline const std::vector<NormSpec>& noisy_spec() {
  static const std::vector<NormSpec> spec{{3.0, 5}, {4.0, 1}};
  return spec;
}

/// One noisy trial. sigma_hat < 0 means "use sqrt(sigma2)".
inline NoisyTrial noisy_trial(double sigma2, int m, int n, const std::vector<NormSpec>& spec, std::uint64_t master, int trial,
                              double sigma_hat = -1.0) {
  NoisyTrial r;
  r.sigma2 = sigma2;
  r.trial = trial;
  r.seed = trial_seed(master, static_cast<std::uint64_t>(m), static_cast<std::uint64_t>(trial));
  const PointConfig truth = sample_config(m, n, spec, r.seed);
  const GramMatrix target = add_gram_noise(truth.gram(), sigma2, Rng(r.seed).split(1).next());
  const SecondMoment sm = moment_from_gram(target, Rng(r.seed).split(2).next());
  AssembleOptions opt;
  opt.sigma_hat = sigma_hat < 0.0 ? std::sqrt(sigma2) : sigma_hat;
  try {
    const RecoveryResult rec = assemble_noisy(sm, n, opt);
    r.residual = rec.residual;
    r.success = are_equivalent(rec.gram, target);
    if (!r.success) r.signature = noisy_failure_signature(rec.gram.sym(), target.sym(), n);
  } catch (const Error& e) {
    r.failure = to_string(e.kind());
  }
  return r;
}

inline std::vector<double> log_grid(double lo, double hi, int points) {
  std::vector<double> g;
  if (points == 1) return {lo};
  for (int k = 0; k < points; ++k) g.push_back(std::pow(10.0, std::log10(lo) + (std::log10(hi) - std::log10(lo)) * k / (points - 1)));
  return g;
}

// Figure drivers ---------------------------------------------------------

struct ExperimentConfig {
  std::string figure;
  std::filesystem::path out_dir = ".";
  std::uint64_t seed = 42;
  int jobs = 0;
  int trials = -1;          ///< -1: figure default
  std::vector<int> ms;      ///< empty: figure default
  std::vector<int> ns;      ///< fig1 only
  int n = -1;               ///< fig2..fig5 dimension override
  int sigma_points = 30;    ///< fig5
  bool svg = false;
};

inline double binomial(int m, int k) {
  double r = 1.0;
  for (int i = 1; i <= k; ++i) r = r * (m - k + i) / i;
  return r;
}

/// n^2 m^(n(n-1)+2), the worst-case rank-check bound.
inline double rank_check_bound(int m, int n) { return static_cast<double>(n) * n * std::pow(static_cast<double>(m), n * (n - 1) + 2); }

inline std::string fmt(double v) { return format_double(v); }

inline std::vector<std::filesystem::path> write_outputs(const ExperimentConfig& cfg, const std::string& stem,
                                                        const std::vector<std::string>& header,
                                                        const std::vector<std::vector<std::string>>& rows) {
  const auto path = cfg.out_dir / (stem + ".csv");
  write_csv(path, header, rows);
  return {path};
}

inline void write_svg(const std::filesystem::path& path, const std::string& body) {
  auto out = open_output(path);
  out << body;
}

struct RoundTripSummary {
  int m = 0;
  int trials = 0;
  int successes = 0;
  double mean_min_ambiguity = 0.0;
  double mean_rank_checks = 0.0;
  double mean_iterations = 0.0;
};

inline RoundTripSummary summarize(const std::vector<RoundTrip>& rows) {
  RoundTripSummary s;
  if (rows.empty()) return s;
  s.m = rows.front().m;
  s.trials = static_cast<int>(rows.size());
  for (const auto& r : rows) {
    s.successes += r.success;
    s.mean_min_ambiguity += static_cast<double>(r.min_ambiguity);
    s.mean_rank_checks += static_cast<double>(r.rank_checks);
    s.mean_iterations += r.iterations;
  }
  s.mean_min_ambiguity /= s.trials;
  s.mean_rank_checks /= s.trials;
  s.mean_iterations /= s.trials;
  return s;
}

inline std::vector<RoundTrip> round_trip_grid(Mode mode, int m, int n, int trials, std::uint64_t seed, int jobs) {
  const auto spec = mode == Mode::Sphere ? sphere_spec(m) : isolated_spec(m);
  return parallel_map(static_cast<std::size_t>(trials), jobs,
                      [&](std::size_t t) { return round_trip(mode, m, n, spec, seed, static_cast<int>(t)); });
}

inline std::vector<std::filesystem::path> experiment_fig1(const ExperimentConfig& cfg) {
  const std::vector<int> ns = cfg.ns.empty() ? std::vector<int>{3, 5, 10, 20} : cfg.ns;
  const int points = cfg.trials > 0 ? cfg.trials : 100;
  constexpr double kBin = 0.05;
  std::vector<std::vector<std::string>> raw, hist;
  std::vector<std::filesystem::path> files;
  for (int n : ns) {
    const auto c = sample_config(points + 1, n, {{1.0, points}, {2.0, 1}}, trial_seed(cfg.seed, static_cast<std::uint64_t>(n), 0));
    const DistanceSets d = distances_from_moment(second_moment(c));
    // Classes are descending: 0 is the norm-2 isolate, 1 the unit sphere.
    for (const auto& [label, key] : {std::pair{std::string("D11"), std::pair<std::size_t, std::size_t>{1, 1}},
                                     std::pair{std::string("D12"), std::pair<std::size_t, std::size_t>{0, 1}}}) {
      const auto& sq = d.between(key.first, key.second);
      const double top = label == "D11" ? 2.0 : 3.0;
      std::vector<double> counts(static_cast<std::size_t>(std::lround(top / kBin)), 0.0);
      for (double d2 : sq) {
        const double dist = std::sqrt(d2);
        raw.push_back({std::to_string(n), label, fmt(dist)});
        const auto bin = std::min(counts.size() - 1, static_cast<std::size_t>(dist / kBin));
        counts[bin] += 1.0;
      }
      std::vector<double> edges;
      for (std::size_t b = 0; b <= counts.size(); ++b) edges.push_back(static_cast<double>(b) * kBin);
      for (std::size_t b = 0; b < counts.size(); ++b)
        hist.push_back({std::to_string(n), label, fmt(edges[b]), fmt(edges[b + 1]), fmt(counts[b])});
      if (cfg.svg && label == "D11") {
        const auto path = cfg.out_dir / ("fig1_n" + std::to_string(n) + ".svg");
        write_svg(path, svg::histogram({"unit-sphere distances, n = " + std::to_string(n), "distance", "count"}, edges, counts));
        files.push_back(path);
      }
    }
  }
  auto a = write_outputs(cfg, "fig1_distances", {"n", "set", "distance"}, raw);
  auto b = write_outputs(cfg, "fig1_histogram", {"n", "set", "bin_lo", "bin_hi", "count"}, hist);
  files.insert(files.end(), a.begin(), a.end());
  files.insert(files.end(), b.begin(), b.end());
  return files;
}

/// Shared by fig2 (n = 3) and fig3 (n = 4).
inline std::vector<std::filesystem::path> experiment_scaling(const ExperimentConfig& cfg, const std::string& stem, int n,
                                                             std::vector<int> ms, int trials) {
  std::vector<std::vector<std::string>> raw, summary;
  svg::Series amb{"min ambiguity", {}, {}}, amb_bound{"C(m,2)", {}, {}};
  svg::Series checks{"rank checks", {}, {}}, check_bound{"n^2 m^(n(n-1)+2)", {}, {}};
  svg::Series iters{"iterations", {}, {}}, iter_bound{"m^2/n", {}, {}};
  for (int m : ms) {
    const auto t0 = std::chrono::steady_clock::now();
    const auto rows = round_trip_grid(Mode::Exact, m, n, trials, cfg.seed, cfg.jobs);
    for (const auto& r : rows)
      raw.push_back({std::to_string(m), std::to_string(r.trial), std::to_string(r.seed), r.success ? "1" : "0", r.failure,
                     std::to_string(r.min_ambiguity), std::to_string(r.rank_checks), std::to_string(r.iterations), fmt(r.procrustes)});
    const auto s = summarize(rows);
    summary.push_back({std::to_string(m), std::to_string(s.trials), fmt(s.trials ? static_cast<double>(s.successes) / s.trials : 0.0),
                       fmt(s.mean_min_ambiguity), fmt(binomial(m, 2)), fmt(s.mean_rank_checks), fmt(rank_check_bound(m, n)),
                       fmt(s.mean_iterations), fmt(static_cast<double>(m) * m / n)});
    amb.x.push_back(m), amb.y.push_back(s.mean_min_ambiguity);
    amb_bound.x.push_back(m), amb_bound.y.push_back(binomial(m, 2));
    checks.x.push_back(m), checks.y.push_back(s.mean_rank_checks);
    check_bound.x.push_back(m), check_bound.y.push_back(rank_check_bound(m, n));
    iters.x.push_back(m), iters.y.push_back(s.mean_iterations);
    iter_bound.x.push_back(m), iter_bound.y.push_back(static_cast<double>(m) * m / n);
    std::clog << stem << " m=" << m << " done in " << std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count() << " s\n";
  }
  auto files = write_outputs(cfg, stem + "_trials",
                             {"m", "trial", "seed", "success", "failure", "min_ambiguity", "rank_checks", "iterations", "procrustes"}, raw);
  auto more = write_outputs(cfg, stem + "_summary",
                            {"m", "trials", "success_rate", "mean_min_ambiguity", "max_ambiguity", "mean_rank_checks",
                             "rank_check_bound", "mean_iterations", "expected_iterations"},
                            summary);
  files.insert(files.end(), more.begin(), more.end());
  if (cfg.svg) {
    const auto p1 = cfg.out_dir / (stem + "_ambiguity.svg");
    write_svg(p1, svg::line_chart({"smallest ambiguity list", "m", "size"}, {amb, amb_bound}));
    const auto p2 = cfg.out_dir / (stem + "_rank_checks.svg");
    write_svg(p2, svg::line_chart({"rank checks", "m", "checks", false, true}, {checks, check_bound}));
    const auto p3 = cfg.out_dir / (stem + "_iterations.svg");
    write_svg(p3, svg::line_chart({"iterations", "m", "iterations"}, {iters, iter_bound}));
    files.insert(files.end(), {p1, p2, p3});
  }
  return files;
}

inline std::vector<std::filesystem::path> experiment_fig4(const ExperimentConfig& cfg) {
  const int n = cfg.n > 0 ? cfg.n : 3;
  const std::vector<int> ms = cfg.ms.empty() ? std::vector<int>{6, 7, 8, 9, 10} : cfg.ms;
  const int trials = cfg.trials >= 0 ? cfg.trials : 20;
  std::vector<std::vector<std::string>> raw, summary;
  std::vector<svg::Series> lines;
  for (int m : ms) {
    const auto rows = round_trip_grid(Mode::Sphere, m, n, trials, cfg.seed, cfg.jobs);
    std::vector<double> sum, cnt;
    for (const auto& r : rows) {
      raw.push_back({std::to_string(m), std::to_string(r.trial), std::to_string(r.seed), r.success ? "1" : "0", r.failure,
                     std::to_string(r.rank_checks), std::to_string(r.iterations)});
      for (std::size_t it = 0; it < r.per_iteration_checks.size(); ++it) {
        if (sum.size() <= it) sum.resize(it + 1, 0.0), cnt.resize(it + 1, 0.0);
        sum[it] += static_cast<double>(r.per_iteration_checks[it]);
        cnt[it] += 1.0;
      }
    }
    svg::Series s{"m = " + std::to_string(m), {}, {}};
    for (std::size_t it = 0; it < sum.size(); ++it) {
      summary.push_back({std::to_string(m), std::to_string(it + 1), fmt(sum[it] / cnt[it]), fmt(cnt[it])});
      s.x.push_back(static_cast<double>(it + 1));
      s.y.push_back(sum[it] / cnt[it]);
    }
    lines.push_back(std::move(s));
  }
  auto files = write_outputs(cfg, "fig4_trials", {"m", "trial", "seed", "success", "failure", "rank_checks", "iterations"}, raw);
  auto more = write_outputs(cfg, "fig4_per_iteration", {"m", "iteration", "mean_rank_checks", "trials"}, summary);
  files.insert(files.end(), more.begin(), more.end());
  if (cfg.svg) {
    const auto p = cfg.out_dir / "fig4_rank_checks.svg";
    write_svg(p, svg::line_chart({"rank checks per iteration (sphere)", "iteration", "mean rank checks", false, true}, lines));
    files.push_back(p);
  }
  return files;
}

inline std::vector<std::filesystem::path> experiment_fig5(const ExperimentConfig& cfg) {
  const int n = cfg.n > 0 ? cfg.n : 3;
  const int m = cfg.ms.empty() ? 6 : cfg.ms.front();
  const int trials = cfg.trials >= 0 ? cfg.trials : 50;
  const auto sigmas = log_grid(1e-4, 1.0, cfg.sigma_points);
  const std::vector<NormSpec> spec = m == 6 ? noisy_spec() : std::vector<NormSpec>{{3.0, m - 1}, {4.0, 1}};
  std::vector<std::vector<std::string>> raw, summary;
  svg::Series curve{"success rate", {}, {}};
  for (double s2 : sigmas) {
    const auto rows = parallel_map(static_cast<std::size_t>(trials), cfg.jobs,
                                   [&](std::size_t t) { return noisy_trial(s2, m, n, spec, cfg.seed, static_cast<int>(t)); });
    int ok = 0, sig = 0;
    for (const auto& r : rows) {
      ok += r.success;
      sig += !r.success && r.signature;
      raw.push_back({fmt(s2), std::to_string(r.trial), std::to_string(r.seed), r.success ? "1" : "0", r.signature ? "1" : "0", r.failure,
                     fmt(r.residual)});
    }
    const double rate = trials ? static_cast<double>(ok) / trials : 0.0;
    summary.push_back({fmt(s2), std::to_string(trials), fmt(rate), std::to_string(trials - ok), std::to_string(sig)});
    curve.x.push_back(s2);
    curve.y.push_back(rate);
  }
  auto files = write_outputs(cfg, "fig5_trials", {"sigma2", "trial", "seed", "success", "signature", "failure", "residual"}, raw);
  auto more = write_outputs(cfg, "fig5_summary", {"sigma2", "trials", "success_rate", "failures", "failures_with_signature"}, summary);
  files.insert(files.end(), more.begin(), more.end());
  if (cfg.svg) {
    const auto p = cfg.out_dir / "fig5_success.svg";
    write_svg(p, svg::line_chart({"noisy recovery", "sigma^2", "success rate", true, false}, {curve}));
    files.push_back(p);
  }
  return files;
}

inline std::vector<std::filesystem::path> run_experiment(const ExperimentConfig& cfg) {
  auto check_ms = [&](const std::vector<int>& ms, int n) {
    for (int m : ms)
      if (m <= n) throw Error(ErrorKind::InvalidInput, "experiment needs m > n (m = " + std::to_string(m) + ", n = " + std::to_string(n) + ")");
  };
  if (cfg.figure == "fig1") return experiment_fig1(cfg);
  if (cfg.figure == "fig2" || cfg.figure == "fig3") {
    const bool two = cfg.figure == "fig2";
    const int n = cfg.n > 0 ? cfg.n : (two ? 3 : 4);
    std::vector<int> ms = cfg.ms;
    if (ms.empty()) {
      for (int m = two ? 4 : 5; m <= (two ? 10 : 8); ++m) ms.push_back(m);
    }
    check_ms(ms, n);
    return experiment_scaling(cfg, cfg.figure, n, ms, cfg.trials >= 0 ? cfg.trials : 100);
  }
  if (cfg.figure == "fig4") {
    check_ms(cfg.ms, cfg.n > 0 ? cfg.n : 3);
    return experiment_fig4(cfg);
  }
  if (cfg.figure == "fig5") {
    check_ms(cfg.ms, cfg.n > 0 ? cfg.n : 3);
    return experiment_fig5(cfg);
  }
  throw Error(ErrorKind::InvalidInput, "unknown figure '" + cfg.figure + "' (expected fig1..fig5)");
}

}  // namespace beltway
