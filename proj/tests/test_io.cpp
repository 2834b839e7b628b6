#include <catch2/catch_amalgamated.hpp>

#include <filesystem>

#include "beltway/io.hpp"

using namespace beltway;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / "beltway_test_io";
  fs::create_directories(dir);
  return dir / name;
}

}  // namespace

TEST_CASE("doubles format to the shortest round-tripping decimal") {
  for (double v : {0.1, 1.0 / 3.0, -2.5e-300, 123456789.123, 0.0}) CHECK(parse_double(format_double(v)) == v);
  CHECK(format_double(0.5) == "0.5");
  CHECK_THROWS_AS(parse_double("1.5x"), Error);
  CHECK_THROWS_AS(parse_double(""), Error);
}

TEST_CASE("csv splitting") {
  CHECK(split_csv_line("a,b,,c") == std::vector<std::string>{"a", "b", "", "c"});
  CHECK(split_csv_line(" 1 , 2\r") == std::vector<std::string>{"1", "2"});
}

TEST_CASE("config csv round trips exactly") {
  const auto cfg = sample_config(6, 3, {{1.0, 5}, {2.0, 1}}, 3);
  const auto path = scratch("config.csv");
  write_config_csv(path, cfg);
  CHECK(read_config_csv(path).coords() == cfg.coords());
}

TEST_CASE("moment csv round trips exactly") {
  const auto sm = second_moment(sample_config(6, 3, {{1.0, 5}, {2.0, 1}}, 3), 8);
  const auto path = scratch("moment.csv");
  write_moment_csv(path, sm);
  const auto back = read_moment_csv(path);
  CHECK(back.triples() == sm.triples());
  for (int k = 0; k < 6; ++k) CHECK(back.norms()[k] == Catch::Approx(sm.norms()[k]).margin(1e-15));
  // A parsed moment writes back byte for byte.
  write_moment_csv(scratch("moment2.csv"), back);
  CHECK(read_moment_csv(scratch("moment2.csv")) == back);
}

TEST_CASE("bad files are reported as I/O errors") {
  CHECK_THROWS_AS(read_csv(scratch("missing.csv")), Error);
  const auto path = scratch("bad.csv");
  write_csv(path, {"d1", "d2"}, {{"1", "2"}});
  CHECK_THROWS_AS(read_moment_csv(path), Error);
  CHECK_THROWS_AS(read_config_csv(path), Error);
}

TEST_CASE("norm spec parsing") {
  const auto s = parse_norm_spec("1x5,2x1");
  REQUIRE(s.size() == 2);
  CHECK(s[0] == NormSpec{1.0, 5});
  CHECK(s[1] == NormSpec{2.0, 1});
  CHECK(norm_spec_total(s) == 6);
  CHECK(parse_norm_spec("0.5x3")[0].radius == 0.5);
  CHECK_THROWS_AS(parse_norm_spec(""), Error);
  CHECK_THROWS_AS(parse_norm_spec("1y5"), Error);
  CHECK_THROWS_AS(parse_norm_spec("1x0"), Error);
  CHECK_THROWS_AS(parse_norm_spec("-1x2"), Error);
}

TEST_CASE("result json round trips") {
  const auto sm = second_moment(sample_config(6, 3, {{1.0, 5}, {2.0, 1}}, 3));
  const auto r = assemble_exact(sm, 3);
  const auto path = scratch("result.json");
  write_json(path, result_to_json(r, 17));
  const auto back = result_from_json(read_json(path));
  CHECK(back.mode == r.mode);
  CHECK(back.gram.sym().to_rows() == r.gram.sym().to_rows());
  CHECK(back.config->coords() == r.config->coords());
  CHECK(back.iterations == r.iterations);
  CHECK(back.rank_checks == r.rank_checks);
  CHECK(back.trace.size() == r.trace.size());
  CHECK(back.trace.front().tuple == r.trace.front().tuple);
  CHECK_THROWS_AS(result_from_json(nlohmann::json::object()), Error);
}

TEST_CASE("census csv has one row per trial") {
  const auto st = census(3, 4, 3, {{1.0, 4}}, 1);
  const auto path = scratch("census.csv");
  write_census_csv(path, st);
  const auto t = read_csv(path);
  CHECK(t.rows.size() == 3);
  CHECK(t.header.front() == "trial");
  write_census_summary_csv(scratch("census_summary.csv"), st);
  CHECK(read_csv(scratch("census_summary.csv")).rows.size() == 1);
}
