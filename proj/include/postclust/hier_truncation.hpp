#ifndef POSTCLUST_HIER_TRUNCATION_HPP
#define POSTCLUST_HIER_TRUNCATION_HPP

#include <vector>

#include "postclust/clustering.hpp"
#include "postclust/intervals.hpp"
#include "postclust/model.hpp"

namespace postclust {

// Squared distance between perturbed rows i and k as a quadratic in
// psi = phi - anchor:  |x'_i(phi) - x'_k(phi)|^2 = a psi^2 + b psi + c.
struct PairQuadratic {
    int i = 0;
    int k = 0;
    double a = 0.0;
    double b = 0.0;
    double c = 0.0;
};

PairQuadratic pairwise_quadratic(const DataMatrix& x, const PerturbationLine& line,
                                 int i, int k);

// How winner-vs-loser comparisons are enumerated when replaying a merge
// sequence. per_step emits, for every step, the winner against every alive
// pair; last_alive emits one constraint per pair ever alive, against the
// winner of the step at which the pair disappears (the binding comparison
// for monotone-height linkages). automatic picks last_alive for average and
// Ward, per_step for centroid. Single linkage always expands to original
// point-pair comparisons against the winner's observed attaining pair.
enum class ConstraintScheme { automatic, per_step, last_alive };

// Quadratic inequalities (in psi = phi - anchor) whose joint solution set is
// the range of psi over which replaying the first `steps` merges of m on
// x'(phi) reproduces them. steps < 0 means the whole sequence. Constraints
// that cannot involve psi are checked and dropped; a constant constraint
// violated at psi = 0 means m was not produced from x.
std::vector<QuadraticInequality> merge_constraints(const DataMatrix& x,
                                                   const PerturbationLine& line,
                                                   const MergeSequence& m, int steps = -1,
                                                   ConstraintScheme scheme = ConstraintScheme::automatic);

// Truncation set in phi coordinates for the K-cluster hierarchical
// clustering event: intersection of the solution sets of the first n-K
// steps' constraints, shifted by the anchor. Throws inconsistency_error if
// the anchor itself is excluded.
IntervalUnion truncation_set_hier(const DataMatrix& x, const PerturbationLine& line,
                                  const MergeSequence& m, int K,
                                  ConstraintScheme scheme = ConstraintScheme::automatic);

} // namespace postclust

#endif
