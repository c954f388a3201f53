#ifndef POSTCLUST_PREPROCESS_HPP
#define POSTCLUST_PREPROCESS_HPP

#include <Eigen/Dense>
#include <vector>

namespace postclust {

// Counts pipeline: drop rows whose total is below min_total, scale each
// surviving row to sum 10,000, apply log2(x + 1), keep the top_k columns by
// post-transform sample variance (ties to the lower column index, original
// column order preserved).
struct PreprocessResult {
    Eigen::MatrixXd matrix;
    std::vector<int> kept_rows; // original 0-based row indices
    std::vector<int> kept_cols; // original 0-based column indices, ascending
};

PreprocessResult preprocess_counts(const Eigen::MatrixXd& raw, double min_total, int top_k);

} // namespace postclust

#endif
