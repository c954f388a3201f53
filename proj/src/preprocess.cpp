#include "postclust/preprocess.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "postclust/errors.hpp"

namespace postclust {

PreprocessResult preprocess_counts(const Eigen::MatrixXd& raw, double min_total, int top_k) {
    if (raw.size() == 0) throw invalid_input("preprocess_counts: empty matrix");
    if ((raw.array() < 0.0).any())
        throw invalid_input("preprocess_counts: negative entries are not counts");
    if (top_k < 1) throw invalid_input("preprocess_counts: need top_k >= 1");

    PreprocessResult out;
    for (Eigen::Index i = 0; i < raw.rows(); ++i)
        if (raw.row(i).sum() >= min_total) out.kept_rows.push_back(static_cast<int>(i));
    if (out.kept_rows.empty()) throw numeric_error("preprocess_counts: all rows filtered out");

    const auto n = static_cast<Eigen::Index>(out.kept_rows.size());
    Eigen::MatrixXd scaled(n, raw.cols());
    for (Eigen::Index r = 0; r < n; ++r) {
        const Eigen::RowVectorXd row = raw.row(out.kept_rows[static_cast<std::size_t>(r)]);
        scaled.row(r) = row * (10000.0 / row.sum());
    }
    const Eigen::MatrixXd logged =
        (scaled.array() + 1.0).log() / std::log(2.0);

    // Sample variance per column (divisor n-1; zero when a single row remains).
    const Eigen::Index q = logged.cols();
    Eigen::VectorXd variance = Eigen::VectorXd::Zero(q);
    if (n > 1) {
        const Eigen::RowVectorXd mean = logged.colwise().mean();
        variance = (logged.rowwise() - mean).array().square().colwise().sum() /
                   static_cast<double>(n - 1);
    }

    std::vector<int> order(static_cast<std::size_t>(q));
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](int a, int b) { return variance(a) > variance(b); });
    const auto keep = static_cast<std::size_t>(std::min<Eigen::Index>(top_k, q));
    out.kept_cols.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(keep));
    std::sort(out.kept_cols.begin(), out.kept_cols.end());

    out.matrix.resize(n, static_cast<Eigen::Index>(keep));
    for (std::size_t j = 0; j < keep; ++j) out.matrix.col(static_cast<Eigen::Index>(j)) = logged.col(out.kept_cols[j]);
    return out;
}

} // namespace postclust
