#include "postclust/kmeans_truncation.hpp"

#include <cmath>

#include "postclust/errors.hpp"

namespace postclust {

namespace {

struct StepCentroids {
    Eigen::MatrixXd intercepts; // K x q
    Eigen::VectorXd scales;     // K
};

// Affine centroids for every assignment step, in step order. Step 1 uses the
// sampled rows; step t >= 2 averages the rows assigned at step t-1; empty
// clusters inherit the previous affine form.
std::vector<StepCentroids> all_centroids(const DataMatrix& x, const KMeansTrace& trace,
                                         const PerturbationLine& line) {
    const int n = x.n();
    const int K = trace.K;
    const Eigen::VectorXd& u = line.row_direction();

    std::vector<StepCentroids> steps;
    steps.reserve(static_cast<std::size_t>(trace.steps()));

    StepCentroids first;
    first.intercepts.resize(K, x.q());
    first.scales.resize(K);
    if (static_cast<int>(trace.init_rows.size()) != K)
        throw invalid_input("centroid_affine: trace has wrong init row count");
    for (int k = 0; k < K; ++k) {
        const int row = trace.init_rows[static_cast<std::size_t>(k)];
        first.intercepts.row(k) = x.values().row(row);
        first.scales(k) = u(row);
    }
    steps.push_back(std::move(first));

    for (int t = 2; t <= trace.steps(); ++t) {
        const std::vector<int>& prev = trace.assignments[static_cast<std::size_t>(t - 2)];
        if (static_cast<int>(prev.size()) != n)
            throw invalid_input("centroid_affine: assignment vector length mismatch");
        StepCentroids cur;
        cur.intercepts.setZero(K, x.q());
        cur.scales.setZero(K);
        Eigen::VectorXi counts = Eigen::VectorXi::Zero(K);
        for (int i = 0; i < n; ++i) {
            const int k = prev[static_cast<std::size_t>(i)];
            cur.intercepts.row(k) += x.values().row(i);
            cur.scales(k) += u(i);
            ++counts(k);
        }
        for (int k = 0; k < K; ++k) {
            if (counts(k) > 0) {
                cur.intercepts.row(k) /= static_cast<double>(counts(k));
                cur.scales(k) /= static_cast<double>(counts(k));
            } else {
                cur.intercepts.row(k) = steps.back().intercepts.row(k);
                cur.scales(k) = steps.back().scales(k);
            }
        }
        steps.push_back(std::move(cur));
    }
    return steps;
}

} // namespace

AffineCentroid centroid_affine(const DataMatrix& x, const KMeansTrace& trace,
                               const PerturbationLine& line, int t, int cluster) {
    if (t < 1 || t > trace.steps()) throw invalid_input("centroid_affine: step out of range");
    if (cluster < 0 || cluster >= trace.K) throw invalid_input("centroid_affine: cluster out of range");
    const auto steps = all_centroids(x, trace, line);
    AffineCentroid out;
    out.intercept = steps[static_cast<std::size_t>(t - 1)].intercepts.row(cluster).transpose();
    out.slope_scale = steps[static_cast<std::size_t>(t - 1)].scales(cluster);
    return out;
}

std::vector<QuadraticInequality> assignment_constraints(const DataMatrix& x,
                                                        const KMeansTrace& trace,
                                                        const PerturbationLine& line) {
    const int n = x.n();
    const int K = trace.K;
    const double w_sq = line.w_sq_norm();
    const Eigen::VectorXd& u = line.row_direction();
    const Eigen::VectorXd& g = line.row_dots();

    const auto steps = all_centroids(x, trace, line);

    Eigen::VectorXd x_sq(n);
    for (int i = 0; i < n; ++i) x_sq(i) = x.values().row(i).squaredNorm();

    std::vector<QuadraticInequality> out;
    out.reserve(static_cast<std::size_t>(n) * static_cast<std::size_t>(K - 1) * steps.size());

    for (std::size_t t = 0; t < steps.size(); ++t) {
        const StepCentroids& sc = steps[t];
        // Per-cluster quantities reused across rows.
        Eigen::VectorXd c_dot_w(K), c_sq(K);
        for (int k = 0; k < K; ++k) {
            c_dot_w(k) = sc.intercepts.row(k).dot(line.col_direction());
            c_sq(k) = sc.intercepts.row(k).squaredNorm();
        }
        const std::vector<int>& assigned = trace.assignments[t];
        std::vector<double> A(static_cast<std::size_t>(K));
        std::vector<double> B(static_cast<std::size_t>(K));
        std::vector<double> C(static_cast<std::size_t>(K));
        for (int i = 0; i < n; ++i) {
            // |x'_i - m_k|^2 = A_k psi^2 + B_k psi + C_k with
            //   s = u_i - scale_k, r = x_i - intercept_k:
            //   A_k = s^2 |w|^2, B_k = 2 s <r, w>, C_k = |r|^2.
            for (int k = 0; k < K; ++k) {
                const double s = u(i) - sc.scales(k);
                const double r_dot_w = g(i) - c_dot_w(k);
                const auto ku = static_cast<std::size_t>(k);
                A[ku] = s * s * w_sq;
                B[ku] = 2.0 * s * r_dot_w;
                C[ku] = x_sq(i) - 2.0 * x.values().row(i).dot(sc.intercepts.row(k)) + c_sq(k);
            }
            const auto c = static_cast<std::size_t>(assigned[static_cast<std::size_t>(i)]);
            for (int k = 0; k < K; ++k) {
                const auto ku = static_cast<std::size_t>(k);
                if (ku == c) continue;
                out.push_back({A[c] - A[ku], B[c] - B[ku], C[c] - C[ku]});
            }
        }
    }
    return out;
}

IntervalUnion truncation_set_kmeans(const DataMatrix& x, const KMeansTrace& trace,
                                    const PerturbationLine& line) {
    const auto constraints = assignment_constraints(x, trace, line);
    std::vector<IntervalUnion> sets;
    sets.reserve(constraints.size());
    for (const auto& q : constraints) sets.push_back(solve_quadratic(q));
    const IntervalUnion in_phi = intersect_all(sets).shifted(line.anchor());
    if (!in_phi.contains(line.anchor()))
        throw inconsistency_error("truncation_set_kmeans: anchor excluded from truncation set");
    return in_phi;
}

} // namespace postclust
