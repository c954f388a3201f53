#ifndef POSTCLUST_SIM_HPP
#define POSTCLUST_SIM_HPP

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "postclust/inference.hpp"
#include "postclust/model.hpp"

namespace postclust {

enum class SimDesign { null_two_cluster, three_cluster_power };

// One simulation campaign. Every output is a deterministic function of this
// struct: per-replicate streams are derived from (seed, replicate).
struct SimConfig {
    SimDesign design = SimDesign::null_two_cluster;
    int n = 100;
    int q = 10;
    double rho = 0.0;   // equicorrelation of the feature covariance
    double delta = 6.0; // mean separation, power design only
    int K = 3;          // clusters to estimate
    std::string method = "kmeans"; // kmeans | single | average | centroid | ward
    int replicates = 800;
    double alpha = 0.05;
    std::uint64_t seed = 1;
    int t_max = 25; // kmeans iteration cap

    void validate() const;
    std::string to_json() const;
    static SimConfig from_json(const std::string& text);
};

// Equicorrelated covariance (1-rho) I + rho 11^T.
FeatureCovariance equicorrelated(int q, double rho);

// Two mean rows (1, 0..) / (0.., 1) split at n/2; the interior features
// 2..q-1 carry no signal for any contrast.
DataMatrix gen_null(const SimConfig& cfg, int replicate);

// Three nearest-third blocks with means (0.., -delta..), 0, (0.., +delta..).
// Returns the matrix and the true block labels.
std::pair<DataMatrix, std::vector<int>> gen_power(const SimConfig& cfg, int replicate);

struct Type1Row {
    int replicate = 0;
    int feature = 0; // 1-based, matches the CSV
    double p_selective = 1.0;
    double p_naive = 1.0;
};

// Per replicate: cluster, pick a uniform random cluster pair and a uniform
// random feature in {2..q-1}, and report both p-values with the true Sigma.
std::vector<Type1Row> run_type1(const SimConfig& cfg);

struct PowerRow {
    int replicate = 0;
    int feature = 0; // 1-based
    double effect = 0.0;
    int reject = 0;
    int clusters_correct = 0;
    double p_selective = 1.0;
};

struct PowerSummary {
    double conditional_power = 0.0;     // zero by convention when undefined
    double detection_probability = 0.0;
    long long rejections_among_correct = 0;
    long long correct_count = 0;
    int replicates = 0;
};

std::pair<PowerSummary, std::vector<PowerRow>> run_power(const SimConfig& cfg);

// Kolmogorov-Smirnov uniformity p-value (asymptotic with small-sample
// correction) for values in [0, 1].
double ks_uniform_pvalue(std::vector<double> values);

} // namespace postclust

#endif
