#include "postclust/model.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "postclust/errors.hpp"

namespace postclust {

DataMatrix::DataMatrix(Eigen::MatrixXd values) : values_(std::move(values)) {
    if (values_.rows() < 2) throw invalid_input("DataMatrix: need at least 2 observations");
    if (values_.cols() < 1) throw invalid_input("DataMatrix: need at least 1 feature");
    if (!values_.allFinite()) throw numeric_error("DataMatrix: non-finite entry");
}

FeatureCovariance::FeatureCovariance(Eigen::MatrixXd sigma) : sigma_(std::move(sigma)) {
    if (sigma_.rows() != sigma_.cols() || sigma_.rows() < 1)
        throw invalid_input("FeatureCovariance: matrix must be square and nonempty");
    if (!sigma_.allFinite()) throw numeric_error("FeatureCovariance: non-finite entry");
    const double scale = sigma_.cwiseAbs().maxCoeff();
    if ((sigma_ - sigma_.transpose()).cwiseAbs().maxCoeff() > 1e-10 * std::max(scale, 1e-300))
        throw numeric_error("FeatureCovariance: not symmetric");
    for (int j = 0; j < sigma_.rows(); ++j)
        if (!(sigma_(j, j) > 0.0)) throw numeric_error("FeatureCovariance: nonpositive diagonal");
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sigma_, Eigen::EigenvaluesOnly);
    const double floor = 1e-12 * sigma_.trace() / static_cast<double>(sigma_.rows());
    if (!(es.eigenvalues().minCoeff() > floor))
        throw numeric_error("FeatureCovariance: not positive definite");
}

FeatureCovariance FeatureCovariance::identity(int q) {
    return FeatureCovariance(Eigen::MatrixXd::Identity(q, q));
}

namespace {

std::vector<int> sorted_group(std::vector<int> g, int n, const char* name) {
    if (g.empty()) throw invalid_input(std::string("make_contrast: empty group ") + name);
    std::sort(g.begin(), g.end());
    g.erase(std::unique(g.begin(), g.end()), g.end());
    if (g.front() < 0 || g.back() >= n)
        throw invalid_input(std::string("make_contrast: index out of range in group ") + name);
    return g;
}

} // namespace

Contrast make_contrast(std::vector<int> group_a, std::vector<int> group_b, int n) {
    Contrast c;
    c.group_a = sorted_group(std::move(group_a), n, "A");
    c.group_b = sorted_group(std::move(group_b), n, "B");
    std::vector<int> overlap;
    std::set_intersection(c.group_a.begin(), c.group_a.end(), c.group_b.begin(), c.group_b.end(),
                          std::back_inserter(overlap));
    if (!overlap.empty()) throw invalid_input("make_contrast: groups overlap");

    c.nu = Eigen::VectorXd::Zero(n);
    const double wa = 1.0 / static_cast<double>(c.group_a.size());
    const double wb = 1.0 / static_cast<double>(c.group_b.size());
    for (int i : c.group_a) c.nu(i) = wa;
    for (int i : c.group_b) c.nu(i) = -wb;
    c.nu_sq_norm = wa + wb;
    return c;
}

double test_statistic(const DataMatrix& x, const Contrast& c, int j) {
    if (j < 0 || j >= x.q()) throw invalid_input("test_statistic: feature index out of range");
    if (c.nu.size() != x.n()) throw invalid_input("test_statistic: contrast length mismatch");
    double sum_a = 0.0, sum_b = 0.0;
    for (int i : c.group_a) sum_a += x(i, j);
    for (int i : c.group_b) sum_b += x(i, j);
    return sum_a / static_cast<double>(c.group_a.size()) -
           sum_b / static_cast<double>(c.group_b.size());
}

PerturbationLine::PerturbationLine(const DataMatrix& x, const Contrast& c,
                                   const FeatureCovariance& sigma, int feature)
    : base_(x), contrast_(c), feature_(feature) {
    if (feature < 0 || feature >= x.q())
        throw invalid_input("PerturbationLine: feature index out of range");
    if (sigma.q() != x.q()) throw invalid_input("PerturbationLine: covariance size mismatch");
    if (c.nu.size() != x.n()) throw invalid_input("PerturbationLine: contrast length mismatch");

    u_ = contrast_.nu / contrast_.nu_sq_norm;
    w_ = sigma.sigma().col(feature) / sigma(feature, feature);
    anchor_ = test_statistic(x, c, feature);
    row_dots_ = x.values() * w_;
    w_sq_norm_ = w_.squaredNorm();
    null_sd_ = std::sqrt(contrast_.nu_sq_norm * sigma(feature, feature));
}

DataMatrix perturb(const PerturbationLine& line, double phi) {
    if (!std::isfinite(phi)) throw invalid_input("perturb: phi must be finite");
    Eigen::MatrixXd out = line.base().values();
    const double shift = phi - line.anchor();
    const Eigen::VectorXd& u = line.row_direction();
    for (int i : line.contrast().group_a) out.row(i) += shift * u(i) * line.col_direction().transpose();
    for (int i : line.contrast().group_b) out.row(i) += shift * u(i) * line.col_direction().transpose();
    return DataMatrix(std::move(out));
}

DataMatrix residual_component(const DataMatrix& x, const PerturbationLine& line) {
    if (x.values() != line.base().values())
        throw invalid_input("residual_component: line was built from a different matrix");
    Eigen::MatrixXd out = x.values();
    const Eigen::VectorXd& u = line.row_direction();
    for (int i : line.contrast().group_a) out.row(i) -= line.anchor() * u(i) * line.col_direction().transpose();
    for (int i : line.contrast().group_b) out.row(i) -= line.anchor() * u(i) * line.col_direction().transpose();
    return DataMatrix(std::move(out));
}

GaussianNullSpec null_spec(const Contrast& c, const FeatureCovariance& sigma, int j) {
    if (j < 0 || j >= sigma.q()) throw invalid_input("null_spec: feature index out of range");
    GaussianNullSpec spec;
    spec.mean_diff = 0.0;
    spec.sd = std::sqrt(c.nu_sq_norm * sigma(j, j));
    if (!(spec.sd > 0.0)) throw numeric_error("null_spec: nonpositive standard deviation");
    return spec;
}

} // namespace postclust
