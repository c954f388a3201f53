#ifndef POSTCLUST_ORACLE_HPP
#define POSTCLUST_ORACLE_HPP

#include <cstdint>
#include <vector>

#include "postclust/clustering.hpp"
#include "postclust/intervals.hpp"
#include "postclust/model.hpp"

namespace postclust {

// Brute-force validators, independent of the analytic machinery they check.
// Test fixtures, not a supported inference path.

// Truncated normal CDF by adaptive Gauss-Legendre quadrature of the
// (unnormalized) density in extended precision; handles supports dozens of
// standard deviations into a tail. Relative error target 1e-12.
double quadrature_trunc_cdf(double t, double mean, double sd, const IntervalUnion& s);

struct McEstimate {
    double estimate = 0.0;
    double stderr_est = 0.0;
    std::uint64_t accepted = 0;
    bool stratified = false;
};

// Monte-Carlo two-sided selective p-value: draw N(0, sd^2), keep draws in s,
// count |draw| >= |statistic|. Falls back to per-interval stratified
// sampling (weights from extended-precision tail masses) when the plain
// acceptance probability is below 1e-3.
McEstimate mc_selective_p(double statistic, double sd, const IntervalUnion& s,
                          std::uint64_t draws, std::uint64_t seed);

struct GridScan {
    std::vector<double> phis;
    std::vector<char> member;

    std::size_t count_member() const;
};

std::vector<double> phi_grid(double center, double sd, int points = 4001, double span_sd = 6.0);

// Which event the hierarchical re-clustering check compares.
//   labels:       cut-at-K partition equals the reference partition
//   merge_prefix: first n-K merges happen identically and in order
enum class HierCompare { labels, merge_prefix };

// Reclusters x'(phi) at every grid point and records whether the reference
// output is reproduced.
GridScan grid_membership_hier(const PerturbationLine& line, const MergeSequence& reference,
                              int K, const std::vector<double>& grid,
                              HierCompare compare = HierCompare::labels);

// Reruns Lloyd's with the same seed and iteration cap on x'(phi) and compares
// every intermediate assignment vector.
GridScan grid_membership_kmeans(const PerturbationLine& line, const KMeansTrace& reference,
                                int t_max, const std::vector<double>& grid);

} // namespace postclust

#endif
