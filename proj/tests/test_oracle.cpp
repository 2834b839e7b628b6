#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <numeric>

#include "beltway/forward.hpp"
#include "beltway/io.hpp"
#include "beltway/oracle.hpp"
#include "oracles.hpp"

using namespace beltway;
using Catch::Approx;

namespace {

const SymMatrix kA = SymMatrix::from_rows({{1., 0.356348, 0.720577, 0.57735},
                                           {0.356348, 1., 0.470757, -0.555492},
                                           {0.720577, 0.470757, 1., 0.194145},
                                           {0.57735, -0.555492, 0.194145, 1.}});
const SymMatrix kB = SymMatrix::from_rows({{1., 0.720577, 0.470757, 0.57735},
                                           {0.720577, 1., -0.555492, 0.194145},
                                           {0.470757, -0.555492, 1., 0.356348},
                                           {0.57735, 0.194145, 0.356348, 1.}});
const SymMatrix kC = SymMatrix::from_rows({{1., 0.470757, -0.555492, 0.356348},
                                           {0.470757, 1., 0.194145, 0.720577},
                                           {-0.555492, 0.194145, 1., 0.57735},
                                           {0.356348, 0.720577, 0.57735, 1.}});

SymMatrix permuted_copy(const SymMatrix& a, Rng& rng) {
  std::vector<int> p(a.dim());
  std::iota(p.begin(), p.end(), 0);
  shuffle(p, rng);
  return a.permuted(p);
}

}  // namespace

TEST_CASE("rearrangement examples on the four-point unit-sphere configuration") {
  CHECK(are_equivalent(kA, kC));
  CHECK_FALSE(are_equivalent(kA, kB));
  CHECK(oracle::brute_equivalent(kA, kC, 1e-7));
  CHECK_FALSE(oracle::brute_equivalent(kA, kB, 1e-7));
  const auto eb = eigen_sym(kB).values;
  CHECK(eb[0] == Approx(2.07115).margin(1e-4));
  CHECK(eb[3] == Approx(-0.172247).margin(1e-4));
  CHECK_FALSE(is_psd(kB));
  CHECK(is_psd(kA));
}

TEST_CASE("find_equivalence returns a witnessing permutation") {
  const auto p = find_equivalence(kA, kC);
  REQUIRE(p);
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) CHECK(std::abs(kC(i, j) - kA((*p)[i], (*p)[j])) <= 1e-7);
}

TEST_CASE("are_equivalent agrees with brute force on permuted and perturbed copies") {
  Rng rng(41);
  for (int t = 0; t < 40; ++t) {
    const int m = 4 + t % 3;
    const auto g = sample_config(m, 3, {{1.0, m}}, 900 + t).gram().sym();
    SymMatrix b = permuted_copy(g, rng);
    if (t % 2) b(0, 1) += 1e-3;
    CHECK(are_equivalent(g, b) == oracle::brute_equivalent(g, b));
  }
}

TEST_CASE("equivalence is reflexive, symmetric and transitive on samples") {
  Rng rng(43);
  for (int t = 0; t < 20; ++t) {
    const auto a = sample_config(6, 3, {{1.0, 5}, {2.0, 1}}, t).gram().sym();
    const auto b = permuted_copy(a, rng);
    const auto c = permuted_copy(b, rng);
    CHECK(are_equivalent(a, a));
    CHECK(are_equivalent(a, b) == are_equivalent(b, a));
    CHECK(are_equivalent(a, b));
    CHECK(are_equivalent(b, c));
    CHECK(are_equivalent(a, c));
  }
}

TEST_CASE("the 3x4 rearrangement example is positive definite") {
  const SymMatrix b = SymMatrix::from_rows({{1.0000, -0.6049, 0.0299, 0.5673},
                                            {-0.6049, 1.0000, -0.7902, -0.4593},
                                            {0.0299, -0.7902, 1.0000, 0.1548},
                                            {0.5673, -0.4593, 0.1548, 1.0000}});
  auto ev = eigen_sym(b).values;
  const std::vector<double> printed{2.3522, 1.1582, 0.4705, 0.0191};
  for (int k = 0; k < 4; ++k) CHECK(ev[k] == Approx(printed[k]).margin(2e-3));
  CHECK(is_psd(b));
  CHECK(numerical_rank(b) == 4);
}

TEST_CASE("rearrangement counts") {
  const auto unit4 = sample_config(4, 3, {{1.0, 4}}, 1).gram();
  CHECK(count_rearrangements(unit4.sym()) == 720);
  const auto s4 = summarize_rearrangements(unit4);
  CHECK(s4.total == 720);
  CHECK(s4.equivalent + s4.non_equivalent == 720);
  CHECK(s4.non_equivalent == 696);

  const auto iso5 = sample_config(5, 3, {{1.0, 4}, {2.0, 1}}, 1).gram();
  CHECK(count_rearrangements(iso5.sym()) == 720);
  CHECK(count_rearrangements(iso5.sym(), RearrangementScope::Full) == 720 * 24);
  CHECK(summarize_rearrangements(iso5).non_equivalent == 719);
}

TEST_CASE("every rearrangement preserves the triple multiset") {
  const auto g = sample_config(5, 3, {{1.0, 3}, {2.0, 2}}, 3).gram();
  std::uint64_t seen = 0;
  const auto ref = oracle::triples(g.sym());
  for_each_rearrangement(g.sym(), RearrangementScope::Full, [&](const SymMatrix& b, const std::vector<int>&) {
    const auto t = oracle::triples(b);
    bool same = t.size() == ref.size();
    for (std::size_t k = 0; k < t.size() && same; ++k)
      for (int c = 0; c < 3; ++c) same = same && std::abs(t[k][c] - ref[k][c]) <= 1e-9;
    CHECK(same);
    ++seen;
  });
  // Classes {1 x3, 2 x2}: 3 same-small pairs, 1 same-large pair, 6 cross pairs.
  CHECK(seen == 6 * 720);
  CHECK(seen == count_rearrangements(g.sym(), RearrangementScope::Full));
}

TEST_CASE("distinct norms admit only the identity") {
  const auto g = sample_config(4, 3, {{1.0, 1}, {2.0, 1}, {3.0, 1}, {4.0, 1}}, 2).gram();
  CHECK(count_rearrangements(g.sym(), RearrangementScope::Full) == 1);
}

TEST_CASE("rearrangement cap") {
  const auto g = sample_config(8, 3, {{1.0, 8}}, 1).gram();
  CHECK_THROWS_AS(summarize_rearrangements(g), Error);
}

TEST_CASE("certificate for the four-point example") {
  const auto cfg = read_config_csv(std::string(BELTWAY_TEST_DATA) + "/four_points.csv");
  const auto a = cfg.gram().sym();
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) CHECK(a(i, j) == Approx(kA(i, j)).margin(1e-6));
  const auto c = uniqueness_certificate(cfg);
  CHECK(c.unique);
  CHECK(c.summary.total == 720);
}

TEST_CASE("census on a handful of trials") {
  const auto st = census(6, 4, 3, {{1.0, 4}}, 1, 2);
  CHECK(st.trials == 6);
  CHECK(st.rearrangements == 6 * 720);
  CHECK(st.per_trial.size() == 6);
  CHECK(st.psd_classes <= st.psd_non_equivalent);
  const auto again = census(6, 4, 3, {{1.0, 4}}, 1, 1);
  CHECK(again.psd_non_equivalent == st.psd_non_equivalent);
  CHECK(census(0, 4, 3, {{1.0, 4}}, 1).trial_fraction() == 0.0);
}

TEST_CASE("procrustes residual of rotated copies") {
  Rng rng(47);
  const auto x = sample_config(7, 3, {{1.0, 6}, {2.0, 1}}, 5);
  const Matrix q = oracle::random_orthogonal(3, rng);
  const PointConfig y(q * x.coords());
  CHECK(procrustes_residual(x, y) < 1e-12);
  const auto other = sample_config(7, 3, {{1.0, 6}, {2.0, 1}}, 6);
  CHECK(std::isinf(procrustes_residual(x, other)));
}

TEST_CASE("trial seeds are distinct per trial and group") {
  CHECK(trial_seed(1, 4, 0) == trial_seed(1, 4, 0));
  CHECK(trial_seed(1, 4, 0) != trial_seed(1, 4, 1));
  CHECK(trial_seed(1, 4, 0) != trial_seed(1, 5, 0));
}
