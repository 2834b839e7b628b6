// beltway: simulate second moments, recover configurations, run the
// experiment harness, the rearrangement census and uniqueness certificates.

#include <chrono>
#include <cmath>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "beltway/beltway.hpp"

namespace fs = std::filesystem;
using namespace beltway;

namespace {

enum Exit { kOk = 0, kOther = 1, kUsage = 2, kRecovery = 3, kProfile = 4, kTooLarge = 5 };

int exit_code(ErrorKind k) {
  switch (k) {
    case ErrorKind::InvalidInput: return kUsage;
    case ErrorKind::AssemblyFailed:
    case ErrorKind::InfeasibleMoment: return kRecovery;
    case ErrorKind::ProfileMismatch: return kProfile;
    case ErrorKind::TooLarge: return kTooLarge;
    default: return kOther;
  }
}

struct Timer {
  std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();
  double seconds() const { return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count(); }
};

struct SimulateArgs {
  int m = 0;
  int n = 3;
  std::string norms;
  std::uint64_t seed = 42;
  double sigma2 = 0.0;
  fs::path out_dir = ".";
};

void cmd_simulate(const SimulateArgs& a) {
  const auto spec = parse_norm_spec(a.norms);
  const int total = norm_spec_total(spec);
  if (a.m != 0 && a.m != total)
    throw Error(ErrorKind::InvalidInput, "--m " + std::to_string(a.m) + " disagrees with --norms total " + std::to_string(total));
  if (a.sigma2 < 0.0) throw Error(ErrorKind::InvalidInput, "--sigma2 must be >= 0");
  Rng streams(a.seed);
  const PointConfig cfg = sample_config(total, a.n, spec, streams.split(0).next());
  write_config_csv(a.out_dir / "config.csv", cfg);
  write_moment_csv(a.out_dir / "moment.csv", second_moment(cfg, streams.split(1).next()));
  std::vector<fs::path> files{a.out_dir / "config.csv", a.out_dir / "moment.csv"};
  if (a.sigma2 > 0.0) {
    const GramMatrix noisy = add_gram_noise(cfg.gram(), a.sigma2, streams.split(2).next());
    write_moment_csv(a.out_dir / "moment_noisy.csv", moment_from_gram(noisy, streams.split(3).next()));
    write_json(a.out_dir / "gram_noisy.json", {{"sigma2", a.sigma2}, {"gram", sym_to_json(noisy.sym())}});
    files.push_back(a.out_dir / "moment_noisy.csv");
    files.push_back(a.out_dir / "gram_noisy.json");
  }
  for (const auto& f : files) std::cout << f.string() << '\n';
}

struct RecoverArgs {
  fs::path moment;
  int n = 3;
  std::string mode = "exact";
  double sigma_hat = 0.0;
  double rank_tol = kRankTol;
  std::uint64_t seed = 42;
  fs::path truth;   // config CSV
  fs::path target;  // gram JSON
  fs::path out_dir = ".";
};

void cmd_recover(const RecoverArgs& a) {
  const SecondMoment sm = read_moment_csv(a.moment);
  AssembleOptions opt;
  opt.sigma_hat = a.sigma_hat;
  opt.rank_tol = a.rank_tol;
  Timer timer;
  const RecoveryResult r = recover(sm, a.n, parse_mode(a.mode), opt);
  std::clog << "recovered m=" << sm.m() << " n=" << a.n << " mode=" << a.mode << " iterations=" << r.iterations
            << " rank_checks=" << r.rank_checks << " residual=" << r.residual << " (" << timer.seconds() << " s)\n";
  nlohmann::json j = result_to_json(r, a.seed);
  if (!a.truth.empty()) {
    const PointConfig truth = read_config_csv(a.truth);
    j["equivalent_to_truth"] = are_equivalent(r.gram, truth.gram());
    if (r.config) j["procrustes"] = procrustes_residual(*r.config, truth);
  }
  if (!a.target.empty()) {
    const auto t = read_json(a.target);
    const SymMatrix g = SymMatrix::from_rows(t.at("gram").get<std::vector<std::vector<double>>>());
    j["success"] = are_equivalent(r.gram.sym(), g);
  }
  write_json(a.out_dir / "result.json", j);
  std::cout << (a.out_dir / "result.json").string() << '\n';
}

struct CensusArgs {
  int trials = 1000;
  int m = 4;
  int n = 3;
  std::string norms;
  std::uint64_t seed = 1;
  int jobs = 0;
  bool full = false;
  fs::path out_dir = ".";
};

void cmd_census(const CensusArgs& a) {
  const auto spec = a.norms.empty() ? std::vector<NormSpec>{{1.0, a.m}} : parse_norm_spec(a.norms);
  if (norm_spec_total(spec) != a.m) throw Error(ErrorKind::InvalidInput, "--norms total must equal --m");
  Timer timer;
  const CensusStats st = census(a.trials, a.m, a.n, spec, a.seed, a.jobs, a.full ? RearrangementScope::Full : RearrangementScope::Reduced);
  write_census_csv(a.out_dir / "census.csv", st);
  write_census_summary_csv(a.out_dir / "census_summary.csv", st);
  std::clog << "census trials=" << st.trials << " fraction=" << st.trial_fraction() << " share_classes=" << st.share_classes() << " ("
            << timer.seconds() << " s)\n";
  std::cout << (a.out_dir / "census.csv").string() << '\n' << (a.out_dir / "census_summary.csv").string() << '\n';
}

struct CertifyArgs {
  fs::path config;
  bool full = false;
  fs::path out_dir = ".";
};

void cmd_certify(const CertifyArgs& a) {
  const PointConfig cfg = read_config_csv(a.config);
  const auto cert = uniqueness_certificate(cfg, a.full ? RearrangementScope::Full : RearrangementScope::Reduced);
  write_json(a.out_dir / "certificate.json", certificate_to_json(cert));
  std::clog << (cert.unique ? "unique" : "not unique") << " at rank " << cert.n << '\n';
  std::cout << (a.out_dir / "certificate.json").string() << '\n';
}

void cmd_experiment(ExperimentConfig cfg) {
  Timer timer;
  for (const auto& f : run_experiment(cfg)) std::cout << f.string() << '\n';
  std::clog << cfg.figure << " finished in " << timer.seconds() << " s\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Recover point configurations from unlabeled second-moment data"};
  app.require_subcommand(1);

  SimulateArgs sim;
  auto* s = app.add_subcommand("simulate", "sample a configuration and write its moment");
  s->add_option("--m", sim.m, "number of points (must equal the --norms total)");
  s->add_option("--n", sim.n, "dimension")->check(CLI::Range(2, 64));
  s->add_option("--norms", sim.norms, "radii as RADIUSxCOUNT,...")->required();
  s->add_option("--seed", sim.seed);
  s->add_option("--sigma2", sim.sigma2, "also write a noisy moment with this noise variance");
  s->add_option("--out-dir", sim.out_dir);

  RecoverArgs rec;
  auto* r = app.add_subcommand("recover", "recover a Gram matrix from a moment CSV");
  r->add_option("--moment", rec.moment, "moment CSV (d1,d2,ip)")->required()->check(CLI::ExistingFile);
  r->add_option("--n", rec.n, "dimension")->check(CLI::Range(2, 64));
  r->add_option("--mode", rec.mode)->check(CLI::IsMember({"exact", "sphere", "noisy"}));
  r->add_option("--sigma-hat", rec.sigma_hat, "noise scale for noisy-mode filtering (0 disables)");
  r->add_option("--rank-tol", rec.rank_tol, "relative eigenvalue cutoff for rank tests")->check(CLI::Range(1e-16, 0.5));
  r->add_option("--seed", rec.seed);
  r->add_option("--truth", rec.truth, "config CSV to compare against")->check(CLI::ExistingFile);
  r->add_option("--target", rec.target, "gram JSON to compare against")->check(CLI::ExistingFile);
  r->add_option("--out-dir", rec.out_dir);

  ExperimentConfig ex;
  auto* e = app.add_subcommand("experiment", "run one of the figure experiments");
  e->add_option("figure", ex.figure, "fig1..fig5")->required()->check(CLI::IsMember({"fig1", "fig2", "fig3", "fig4", "fig5"}));
  e->add_option("--trials", ex.trials, "trials per grid point (fig1: points per cloud)");
  e->add_option("--m", ex.ms, "point counts")->delimiter(',');
  e->add_option("--ns", ex.ns, "fig1 dimensions")->delimiter(',');
  e->add_option("--n", ex.n, "dimension override");
  e->add_option("--sigma-points", ex.sigma_points, "fig5 grid size")->check(CLI::PositiveNumber);
  e->add_option("--seed", ex.seed);
  e->add_option("--jobs", ex.jobs, "worker threads (0: all cores)");
  e->add_flag("--svg", ex.svg, "also render SVG charts");
  e->add_option("--out-dir", ex.out_dir);

  CensusArgs cen;
  auto* c = app.add_subcommand("census", "count psd non-equivalent rearrangements over random configurations");
  c->add_option("--trials", cen.trials)->check(CLI::NonNegativeNumber);
  c->add_option("--m", cen.m)->check(CLI::Range(2, 8));
  c->add_option("--n", cen.n)->check(CLI::Range(2, 64));
  c->add_option("--norms", cen.norms, "radii as RADIUSxCOUNT,... (default: unit norms)");
  c->add_option("--seed", cen.seed);
  c->add_option("--jobs", cen.jobs);
  c->add_flag("--full", cen.full, "enumerate without pinning the isolated positions");
  c->add_option("--out-dir", cen.out_dir);

  CertifyArgs cer;
  auto* v = app.add_subcommand("certify", "decide uniqueness of a configuration by exhaustive rearrangement");
  v->add_option("--config", cer.config, "config CSV")->required()->check(CLI::ExistingFile);
  v->add_flag("--full", cer.full);
  v->add_option("--out-dir", cer.out_dir);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& err) {
    const int code = app.exit(err);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (*s) cmd_simulate(sim);
    else if (*r) cmd_recover(rec);
    else if (*e) cmd_experiment(ex);
    else if (*c) cmd_census(cen);
    else if (*v) cmd_certify(cer);
  } catch (const Error& err) {
    std::cerr << "beltway: " << err.what() << '\n';
    return exit_code(err.kind());
  } catch (const std::exception& err) {
    std::cerr << "beltway: " << err.what() << '\n';
    return kOther;
  }
  return kOk;
}
