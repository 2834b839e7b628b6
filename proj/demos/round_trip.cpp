// Sample six points in R^3 (five on the unit sphere, one at radius 2),
// throw away the labels, and recover the configuration.

#include <iostream>

#include "beltway/beltway.hpp"

int main() {
  using namespace beltway;
  const PointConfig truth = sample_config(6, 3, {{1.0, 5}, {2.0, 1}}, 7);
  const SecondMoment sm = second_moment(truth, 11);
  std::cout << "moment: " << sm.triples().size() << " unlabeled triples, norm profile " << norm_profile(sm).describe() << '\n';

  const RecoveryResult r = assemble_exact(sm, 3);
  std::cout << "iterations " << r.iterations << ", rank checks " << r.rank_checks << ", smallest ambiguity list "
            << r.min_ambiguity << '\n';
  std::cout << "equivalent to truth: " << (are_equivalent(r.gram, truth.gram()) ? "yes" : "no") << '\n';
  std::cout << "procrustes residual: " << procrustes_residual(*r.config, truth) << '\n';
}
