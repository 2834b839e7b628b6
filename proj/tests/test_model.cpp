#include <catch2/catch_amalgamated.hpp>

#include "beltway/forward.hpp"
#include "beltway/model.hpp"

using namespace beltway;

TEST_CASE("point configurations validate their input") {
  CHECK_THROWS_AS(PointConfig(Matrix(1, 3)), Error);
  CHECK_THROWS_AS(PointConfig(Matrix(3, 0)), Error);
  Matrix bad(2, 2);
  bad(0, 0) = std::nan("");
  CHECK_THROWS_AS(PointConfig(bad), Error);
  const auto cfg = PointConfig::from_points({{1, 0}, {0, 2}, {3, 4}});
  CHECK(cfg.n() == 2);
  CHECK(cfg.m() == 3);
  CHECK(cfg.inner(1, 2) == 8.0);
  CHECK(cfg.gram()(2, 2) == 25.0);
}

TEST_CASE("gram matrices reject negative diagonals") {
  CHECK_THROWS_AS(GramMatrix(SymMatrix::from_rows({{-1, 0}, {0, 1}}), 1), Error);
}

TEST_CASE("moment from triples recovers m and the norm multiset") {
  // Norms 1, 1, 4: each unit point appears in m-1 = 2 triples.
  const auto sm = SecondMoment::from_triples({{1, 1, 0.5}, {4, 1, 1.0}, {1, 4, -0.3}});
  CHECK(sm.m() == 3);
  CHECK(sm.norms() == std::vector<double>{1, 1, 4});
  CHECK(sm.triples()[1].d1 == 1.0);  // reoriented
  const auto p = norm_profile(sm);
  REQUIRE(p.classes.size() == 2);
  CHECK(p.classes[0].value == 4.0);
  CHECK(p.classes[0].multiplicity == 1);
  CHECK(p.max_multiplicity() == 2);
}

TEST_CASE("malformed moments are rejected") {
  CHECK_THROWS_AS(SecondMoment::from_triples({}), Error);
  CHECK_THROWS_AS(SecondMoment::from_triples({{1, 1, 0}, {1, 1, 0}}), Error);
  CHECK_THROWS_AS(SecondMoment::from_triples({{1, 2, 0}, {1, 3, 0}, {1, 1, 0}}), Error);
  CHECK_THROWS_AS(SecondMoment::from_triples({{-1, 1, 0}, {1, 1, 0}, {1, 1, 0}}), Error);
  CHECK_THROWS_AS(SecondMoment::from_triples({{1, 1, std::nan("")}, {1, 1, 0}, {1, 1, 0}}), Error);
}

TEST_CASE("cluster values group within tolerance and keep the smallest member") {
  const auto c = cluster_values({1.0, 1.0 + 5e-8, 2.0, 1.0 - 5e-8});
  REQUIRE(c.size() == 2);
  CHECK(c[0].value == 1.0 - 5e-8);
  CHECK(c[0].multiplicity == 3);
  CHECK(c[1].multiplicity == 1);
}

TEST_CASE("genericity flags") {
  CHECK(genericity_check(sample_config(6, 3, {{1.0, 5}, {2.0, 1}}, 1)).ok());
  const auto dup = PointConfig::from_points({{1, 0, 0}, {1, 0, 0}, {0, 1, 0}, {0, 0, 2}});
  CHECK_FALSE(genericity_check(dup).distinct);
  const auto dep = PointConfig::from_points({{1, 0, 0}, {0, 1, 0}, {0.6, 0.8, 0}, {0, 0, 2}});
  CHECK_FALSE(genericity_check(dep).independent);
  // Two pairs with the same inner product collide.
  const auto col = PointConfig::from_points({{1, 0, 0}, {0, 1, 0}, {0, 0, 1}, {0.3, 0.4, 0.5}});
  CHECK_FALSE(genericity_check(col).collision_free);
}

TEST_CASE("index combinations are lexicographic") {
  const auto c = index_combinations(4, 2);
  REQUIRE(c.size() == 6);
  CHECK(c.front() == std::vector<int>{0, 1});
  CHECK(c[2] == std::vector<int>{0, 3});
  CHECK(c.back() == std::vector<int>{2, 3});
  CHECK(index_combinations(5, 3).size() == 10);
}

TEST_CASE("ambiguity table consumes pool values globally") {
  AmbiguityTable t(3, {0.1, 0.2, 0.2});
  CHECK(t.pair_count() == 3);
  CHECK(t.pair_index(0, 1) == 0);
  CHECK(t.pair_index(2, 1) == 2);
  t.set_candidates(0, 1, {0, 1, 2});
  t.set_candidates(0, 2, {1, 2});
  t.set_candidates(1, 2, {0, 1});
  CHECK(t.min_list_size() == 2);
  t.fix(0, 2, 1);
  CHECK(t.is_fixed(0, 2));
  CHECK(*t.fixed_value(2, 0) == 0.2);
  CHECK(t.size(0, 1) == 2);
  CHECK(t.size(1, 2) == 1);
  CHECK(t.remaining_pool() == std::vector<double>{0.1, 0.2});
  CHECK_THROWS_AS(t.fix(1, 2, 1), Error);
  t.fix(1, 2, 0);
  t.fix(0, 1, 2);
  CHECK(t.fixed_count() == 3);
  CHECK(t.remaining_pool().empty());
  CHECK_THROWS_AS(AmbiguityTable(3, {0.2, 0.1}), Error);
}

TEST_CASE("widening restores every unconsumed value") {
  AmbiguityTable t(3, {0.1, 0.2, 0.3});
  t.set_candidates(0, 1, {0});
  t.set_candidates(0, 2, {0});
  t.set_candidates(1, 2, {1});
  t.fix(0, 1, 0);
  CHECK(t.size(0, 2) == 0);
  t.widen(0, 2);
  CHECK(std::vector<int>(t.candidates(0, 2).begin(), t.candidates(0, 2).end()) == std::vector<int>{1, 2});
  CHECK_THROWS_AS(t.widen(0, 1), Error);
}

TEST_CASE("counts argmin breaks ties lexicographically") {
  CountsTable c;
  c.counts[{1, 2}] = 4;
  c.counts[{0, 3}] = 4;
  c.counts[{0, 4}] = 7;
  const auto best = c.argmin();
  REQUIRE(best);
  CHECK(best->first == IndexTuple{0, 3});
  CHECK(CountsTable{}.argmin() == std::nullopt);
}
