#ifndef POSTCLUST_KMEANS_TRUNCATION_HPP
#define POSTCLUST_KMEANS_TRUNCATION_HPP

#include <vector>

#include "postclust/clustering.hpp"
#include "postclust/intervals.hpp"
#include "postclust/model.hpp"

namespace postclust {

// Centroid of one cluster at one assignment step, as an affine function of
// psi = phi - anchor: m(psi) = intercept + (slope_scale * psi) * w.
// At the first step the centroids are the sampled rows themselves; later
// steps average the assigned rows; an empty cluster carries the previous
// form forward.
struct AffineCentroid {
    Eigen::VectorXd intercept;
    double slope_scale = 0.0;

    Eigen::VectorXd slope(const PerturbationLine& line) const {
        return slope_scale * line.col_direction();
    }
};

// Centroid used by assignment step t (1-based, t <= trace.steps()).
AffineCentroid centroid_affine(const DataMatrix& x, const KMeansTrace& trace,
                               const PerturbationLine& line, int t, int cluster);

// One quadratic (in psi) per (assignment step, observation, competitor):
// "the observed assignment is at least as close as cluster k". Exactly
// n * (K-1) * trace.steps() inequalities, in step-major order; constant
// (psi-free) comparisons are kept so the count is exact.
std::vector<QuadraticInequality> assignment_constraints(const DataMatrix& x,
                                                        const KMeansTrace& trace,
                                                        const PerturbationLine& line);

// Truncation set in phi coordinates for the event that every recorded
// assignment vector is reproduced when Lloyd's algorithm runs on x'(phi)
// with the same seed. Throws inconsistency_error if the anchor is excluded.
IntervalUnion truncation_set_kmeans(const DataMatrix& x, const KMeansTrace& trace,
                                    const PerturbationLine& line);

} // namespace postclust

#endif
