#include <catch2/catch_amalgamated.hpp>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "beltway/io.hpp"
#include "beltway/oracle.hpp"

using namespace beltway;
namespace fs = std::filesystem;

namespace {

const fs::path kWork = fs::temp_directory_path() / "beltway_test_cli";

int run(const std::string& args) {
  const std::string cmd = std::string(BELTWAY_CLI) + " " + args + " >/dev/null 2>" + (kWork / "stderr.txt").string();
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

std::string dir(const std::string& name) {
  const auto d = kWork / name;
  fs::remove_all(d);
  return d.string();
}

}  // namespace

TEST_CASE("usage errors exit with 2") {
  fs::create_directories(kWork);
  CHECK(run("") == 2);
  CHECK(run("simulate --m 6 --n 3") == 2);
  CHECK(run("frobnicate") == 2);
  CHECK(run("simulate --m 5 --norms 1x5,2x1") == 2);
  CHECK(run("experiment fig2 --m 3") == 2);
  CHECK(run("--help") == 0);
}

TEST_CASE("simulate then recover round trips") {
  const auto d = dir("exact");
  REQUIRE(run("simulate --m 6 --n 3 --norms 1x5,2x1 --seed 7 --out-dir " + d) == 0);
  CHECK(fs::exists(fs::path(d) / "config.csv"));
  REQUIRE(run("recover --moment " + d + "/moment.csv --n 3 --mode exact --truth " + d + "/config.csv --out-dir " + d) == 0);
  const auto j = read_json(fs::path(d) / "result.json");
  CHECK(j.at("equivalent_to_truth").get<bool>());
  CHECK(j.at("procrustes").get<double>() <= 1e-5);
  const auto r = result_from_json(j);
  CHECK(are_equivalent(r.gram, read_config_csv(fs::path(d) / "config.csv").gram()));
}

TEST_CASE("profile mismatch exits with 4 and names the profile") {
  const auto d = dir("sphere");
  REQUIRE(run("simulate --m 6 --n 3 --norms 1x6 --seed 7 --out-dir " + d) == 0);
  CHECK(run("recover --moment " + d + "/moment.csv --n 3 --mode exact --out-dir " + d) == 4);
  CHECK(slurp(kWork / "stderr.txt").find("x6") != std::string::npos);
  CHECK(run("recover --moment " + d + "/moment.csv --n 3 --mode sphere --out-dir " + d) == 0);
}

TEST_CASE("recovery failure exits with 3") {
  const auto d = dir("fail");
  REQUIRE(run("simulate --m 6 --n 4 --norms 1x5,2x1 --seed 7 --out-dir " + d) == 0);
  CHECK(run("recover --moment " + d + "/moment.csv --n 2 --mode exact --out-dir " + d) == 3);
}

TEST_CASE("noisy simulate and recover") {
  const auto d = dir("noisy");
  REQUIRE(run("simulate --m 6 --n 3 --norms 3x5,4x1 --sigma2 1e-8 --seed 7 --out-dir " + d) == 0);
  CHECK(fs::exists(fs::path(d) / "moment_noisy.csv"));
  REQUIRE(run("recover --moment " + d + "/moment_noisy.csv --n 3 --mode noisy --sigma-hat 1e-4 --target " + d +
              "/gram_noisy.json --out-dir " + d) == 0);
  CHECK(read_json(fs::path(d) / "result.json").at("success").get<bool>());
}

TEST_CASE("census and certify") {
  const auto d = dir("census");
  CHECK(run("census --trials 0 --m 4 --n 3 --out-dir " + d) == 0);
  CHECK(read_csv(fs::path(d) / "census_summary.csv").rows.at(0).at(0) == "0");
  CHECK(run("census --trials 5 --m 4 --n 3 --norms 1x4 --seed 1 --jobs 2 --out-dir " + d) == 0);
  CHECK(read_csv(fs::path(d) / "census.csv").rows.size() == 5);
  CHECK(run("census --trials 1 --m 8 --n 3 --norms 1x8 --out-dir " + d) == 5);
  CHECK(run("certify --config " + std::string(BELTWAY_TEST_DATA) + "/four_points.csv --out-dir " + d) == 0);
  CHECK(read_json(fs::path(d) / "certificate.json").at("unique").get<bool>());
}

TEST_CASE("commands are deterministic under a fixed seed") {
  const std::vector<std::pair<std::string, std::vector<std::string>>> cases{
      {"simulate --m 6 --n 3 --norms 3x5,4x1 --sigma2 1e-3 --seed 9", {"config.csv", "moment.csv", "moment_noisy.csv"}},
      {"census --trials 4 --m 4 --n 3 --seed 3", {"census.csv", "census_summary.csv"}},
      {"experiment fig2 --trials 2 --m 4,5 --seed 5", {"fig2_trials.csv", "fig2_summary.csv"}},
      {"experiment fig4 --trials 1 --m 6 --seed 5 --svg", {"fig4_trials.csv", "fig4_per_iteration.csv", "fig4_rank_checks.svg"}},
      {"experiment fig5 --trials 2 --sigma-points 2 --seed 5", {"fig5_trials.csv", "fig5_summary.csv"}},
      {"experiment fig1 --trials 20 --ns 3 --seed 5", {"fig1_distances.csv", "fig1_histogram.csv"}},
  };
  for (std::size_t k = 0; k < cases.size(); ++k) {
    const auto a = dir("det_a" + std::to_string(k));
    const auto b = dir("det_b" + std::to_string(k));
    REQUIRE(run(cases[k].first + " --out-dir " + a) == 0);
    REQUIRE(run(cases[k].first + " --out-dir " + b) == 0);
    for (const auto& f : cases[k].second) CHECK(slurp(fs::path(a) / f) == slurp(fs::path(b) / f));
  }
  const auto d = dir("det_rec");
  REQUIRE(run("simulate --m 7 --n 3 --norms 1x6,2x1 --seed 4 --out-dir " + d) == 0);
  REQUIRE(run("recover --moment " + d + "/moment.csv --n 3 --out-dir " + d + "/a") == 0);
  REQUIRE(run("recover --moment " + d + "/moment.csv --n 3 --out-dir " + d + "/b") == 0);
  CHECK(slurp(fs::path(d) / "a/result.json") == slurp(fs::path(d) / "b/result.json"));
}
