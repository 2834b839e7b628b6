#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "beltway/forward.hpp"
#include "oracles.hpp"

using namespace beltway;
using Catch::Approx;

namespace {

std::vector<std::array<double, 3>> sorted_triples(const SecondMoment& sm) {
  std::vector<std::array<double, 3>> out;
  // Norms are compared after rounding so that last-bit differences do not
  // reorder the sort.
  auto r = [](double v) { return std::round(v * 1e9) / 1e9; };
  for (const auto& t : sm.triples()) out.push_back({r(t.d1), r(t.d2), t.ip});
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace

TEST_CASE("second moment of a small configuration") {
  const auto cfg = PointConfig::from_points({{1, 0}, {0, 1}, {2, 0}});
  const auto sm = second_moment(cfg, 3);
  CHECK(sm.m() == 3);
  CHECK(sm.norms() == std::vector<double>{1, 1, 4});
  CHECK(sorted_triples(sm) == oracle::triples(cfg.gram().sym()));
}

TEST_CASE("second moment is invariant under orthogonal maps and relabeling") {
  Rng rng(101);
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 2 + trial % 3;
    const auto cfg = sample_config(n + 3, n, {{1.0, n + 2}, {2.0, 1}}, 1000 + trial);
    const Matrix q = oracle::random_orthogonal(n, rng);
    const PointConfig rotated(q * cfg.coords());
    const auto a = sorted_triples(second_moment(cfg, 1));
    const auto b = sorted_triples(second_moment(rotated, 2));
    REQUIRE(a.size() == b.size());
    for (std::size_t k = 0; k < a.size(); ++k)
      for (int c = 0; c < 3; ++c) CHECK(a[k][c] == Approx(b[k][c]).margin(1e-12));
  }
}

TEST_CASE("shuffle seed changes order but not content") {
  const auto cfg = sample_config(6, 3, {{1.0, 5}, {2.0, 1}}, 4);
  const auto a = second_moment(cfg, 1);
  const auto b = second_moment(cfg, 2);
  CHECK(a.triples() != b.triples());
  CHECK(sorted_triples(a) == sorted_triples(b));
  CHECK(second_moment(cfg, 1) == a);
}

TEST_CASE("distance sets per norm-class pair") {
  const auto cfg = PointConfig::from_points({{1, 0}, {0, 1}, {2, 0}});
  const auto d = distances_from_moment(second_moment(cfg));
  // Class 0 is the norm-4 point, class 1 the unit points.
  CHECK(d.between(1, 1) == std::vector<double>{2.0});
  CHECK(d.between(1, 0) == std::vector<double>{1.0, 5.0});
  CHECK(d.between(0, 0).empty());
}

TEST_CASE("gram noise is symmetric, off-diagonal and reproducible") {
  const auto g = sample_config(6, 3, {{3.0, 5}, {4.0, 1}}, 9).gram();
  const auto a = add_gram_noise(g, 1e-2, 5);
  const auto b = add_gram_noise(g, 1e-2, 5);
  double sum2 = 0.0;
  for (int i = 0; i < 6; ++i) {
    CHECK(a(i, i) == g(i, i));
    for (int j = i + 1; j < 6; ++j) {
      CHECK(a(i, j) == b(i, j));
      sum2 += (a(i, j) - g(i, j)) * (a(i, j) - g(i, j));
    }
  }
  CHECK(sum2 > 0.0);
  CHECK(add_gram_noise(g, 0.0, 5).sym().to_rows() == g.sym().to_rows());
  CHECK_THROWS_AS(add_gram_noise(g, -1.0, 5), Error);
}

TEST_CASE("noise variance matches sigma2") {
  const auto g = sample_config(40, 3, {{1.0, 40}}, 2).gram();
  const auto a = add_gram_noise(g, 4e-2, 77);
  double s = 0.0;
  int k = 0;
  for (int i = 0; i < 40; ++i)
    for (int j = i + 1; j < 40; ++j, ++k) s += (a(i, j) - g(i, j)) * (a(i, j) - g(i, j));
  CHECK(s / k == Approx(4e-2).epsilon(0.15));
}

TEST_CASE("sampled configurations follow the norm spec") {
  const auto cfg = sample_config(6, 3, {{1.0, 5}, {2.0, 1}}, 12);
  const auto g = cfg.gram();
  for (int i = 0; i < 5; ++i) CHECK(g(i, i) == Approx(1.0).margin(1e-14));
  CHECK(g(5, 5) == 4.0);
  CHECK(cfg.coords()(0, 5) == 2.0);
  CHECK(sample_config(6, 3, {{1.0, 5}, {2.0, 1}}, 12).coords() == cfg.coords());
  CHECK_THROWS_AS(sample_config(5, 3, {{1.0, 5}, {2.0, 1}}, 1), Error);
  CHECK_THROWS_AS(sample_config(3, 1, {{1.0, 3}}, 1), Error);
}
