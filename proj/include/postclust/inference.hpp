#ifndef POSTCLUST_INFERENCE_HPP
#define POSTCLUST_INFERENCE_HPP

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "postclust/clustering.hpp"
#include "postclust/intervals.hpp"
#include "postclust/model.hpp"

namespace postclust {

// Scaled complementary error function exp(x^2) erfc(x) for x >= 0; direct
// for moderate x, Laplace continued fraction in the far tail.
double erfcx_nonneg(double x);

// log P(Z > z) for standard normal Z, finite for |z| up to a few hundred.
double log_normal_sf(double z);

// log P(a <= Z <= b) for standard normal Z, a < b, endpoints may be +-inf.
// Computed without cancellation in either tail.
double log_normal_mass(double a, double b);

// N(mean, sd^2) truncated to a support with positive (log-representable)
// Gaussian mass. Construction fails with degenerate_support_error when the
// total log-mass underflows to -inf.
class TruncatedGaussian {
public:
    TruncatedGaussian(double mean, double sd, IntervalUnion support);

    double mean() const { return mean_; }
    double sd() const { return sd_; }
    const IntervalUnion& support() const { return support_; }
    double log_total_mass() const { return log_total_; }

    // Standardized log-mass of support ∩ (-inf, t] and of support ∩ [t, inf).
    double log_mass_below(double t) const;
    double log_mass_above(double t) const;

private:
    double mean_;
    double sd_;
    IntervalUnion support_;
    double log_total_;
};

// F(t; mean, sd, S) = P(Z <= t | Z in S) for Z ~ N(mean, sd^2).
double trunc_cdf(double t, const TruncatedGaussian& g);

// Two-sided selective p-value: P(|Z| >= |statistic| | Z in s) under
// Z ~ N(0, sd^2). Requires the statistic to lie in s. Clamped to
// [1e-300, 1]; never exactly zero.
double selective_p(double statistic, double sd, const IntervalUnion& s);

// Two-sided Z-test p-value 2(1 - Phi(|statistic|/sd)), same code path as
// selective_p with an unrestricted support.
double naive_p(double statistic, double sd);

// Benjamini-Hochberg step-up adjustment, returned in input order.
std::vector<double> bh_adjust(const std::vector<double>& pvals);

// Residual covariance about the per-cluster means, divisor n - K,
// symmetrized, eigenvalues floored for positive definiteness.
FeatureCovariance estimate_covariance(const DataMatrix& x, const ClusterLabels& labels);

// Clustering recipe shared by run_test, the CLI and the simulation harness.
struct ClusterMethod {
    enum class Kind { kmeans, hierarchical };
    Kind kind = Kind::kmeans;
    Linkage linkage = Linkage::average; // hierarchical only
    int k = 3;
    std::uint64_t seed = 1; // kmeans only
    int t_max = 25;         // kmeans only

    // "kmeans" or a linkage name.
    static ClusterMethod from_name(const std::string& name, int k, std::uint64_t seed, int t_max);
    std::string describe() const;

    ClusterLabels cluster(const DataMatrix& x) const;
};

// Everything reported for one (cluster pair, feature) hypothesis.
struct TestReport {
    int feature = 0; // 0-based here; serialized 1-based
    std::vector<int> group_a;
    std::vector<int> group_b;
    double statistic = 0.0;
    double sd = 0.0;
    IntervalUnion truncation;
    double p_selective = 1.0;
    double p_naive = 1.0;
    std::string method;
    bool sigma_estimated = false;

    std::string to_json() const;
};

// Clusters x with the method, builds the contrast for the given pair of
// cluster labels (0-based), computes the truncation set along feature j and
// assembles both p-values.
TestReport run_test(const DataMatrix& x, const FeatureCovariance& sigma,
                    const ClusterMethod& method, std::pair<int, int> pair, int feature,
                    bool sigma_estimated = false);

} // namespace postclust

#endif
