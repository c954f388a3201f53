#ifndef POSTCLUST_MODEL_HPP
#define POSTCLUST_MODEL_HPP

#include <Eigen/Dense>
#include <vector>

namespace postclust {

// n x q data matrix of the row-wise Gaussian model: each row is one
// observation of q features sharing a common feature covariance.
// Immutable after construction; all indices in the C++ API are 0-based
// (the CLI and file formats are 1-based and convert once).
class DataMatrix {
public:
    explicit DataMatrix(Eigen::MatrixXd values);

    int n() const { return static_cast<int>(values_.rows()); }
    int q() const { return static_cast<int>(values_.cols()); }
    const Eigen::MatrixXd& values() const { return values_; }
    double operator()(int i, int j) const { return values_(i, j); }

private:
    Eigen::MatrixXd values_;
};

// Known (or plug-in estimated) q x q positive-definite feature covariance.
class FeatureCovariance {
public:
    explicit FeatureCovariance(Eigen::MatrixXd sigma);

    int q() const { return static_cast<int>(sigma_.rows()); }
    const Eigen::MatrixXd& sigma() const { return sigma_; }
    double operator()(int i, int j) const { return sigma_(i, j); }

    static FeatureCovariance identity(int q);

private:
    Eigen::MatrixXd sigma_;
};

// Contrast vector for a pair of disjoint observation groups: entries
// 1/|A| on group A, -1/|B| on group B, zero elsewhere. Its inner product
// with a data column is the difference of that feature's group means.
struct Contrast {
    std::vector<int> group_a; // sorted, 0-based
    std::vector<int> group_b;
    Eigen::VectorXd nu;
    double nu_sq_norm = 0.0; // 1/|A| + 1/|B|
};

Contrast make_contrast(std::vector<int> group_a, std::vector<int> group_b, int n);

// Difference in the group means of feature j: [x^T nu]_j.
double test_statistic(const DataMatrix& x, const Contrast& c, int j);

// One-dimensional affine family of datasets through x for feature j:
//   x'(phi) = x + (phi - anchor) * u w^T,
// where u = nu/|nu|^2 moves only the tested groups and w = Sigma_j/Sigma_jj
// propagates the move to correlated features (w_j = 1 exactly). The anchor
// is the observed statistic, so x'(anchor) = x.
class PerturbationLine {
public:
    PerturbationLine(const DataMatrix& x, const Contrast& c,
                     const FeatureCovariance& sigma, int feature);

    int feature() const { return feature_; }
    const DataMatrix& base() const { return base_; }
    const Contrast& contrast() const { return contrast_; }
    const Eigen::VectorXd& row_direction() const { return u_; }
    const Eigen::VectorXd& col_direction() const { return w_; }
    double anchor() const { return anchor_; }

    // Cached once per line for constraint generation: <x_i, w> per row
    // and |w|^2.
    const Eigen::VectorXd& row_dots() const { return row_dots_; }
    double w_sq_norm() const { return w_sq_norm_; }

    // Null standard deviation of the statistic: |nu|_2 * sqrt(Sigma_jj).
    double null_sd() const { return null_sd_; }

private:
    DataMatrix base_; // owned copy: lines outlive the matrix they were built from
    Contrast contrast_;
    int feature_;
    Eigen::VectorXd u_;
    Eigen::VectorXd w_;
    double anchor_;
    Eigen::VectorXd row_dots_;
    double w_sq_norm_;
    double null_sd_;
};

// x'(phi): rows outside the tested groups are bit-identical to the base.
DataMatrix perturb(const PerturbationLine& line, double phi);

// U(x) = x - u w^T anchor, the component of the data held fixed when
// conditioning; its feature-j contrast is zero and it is constant along
// the line.
DataMatrix residual_component(const DataMatrix& x, const PerturbationLine& line);

// Mean difference and standard deviation of the statistic under the null.
struct GaussianNullSpec {
    double mean_diff = 0.0;
    double sd = 0.0;
};

GaussianNullSpec null_spec(const Contrast& c, const FeatureCovariance& sigma, int j);

} // namespace postclust

#endif
