#include "doctest.h"

#include <cmath>

#include "postclust/errors.hpp"
#include "postclust/kmeans_truncation.hpp"
#include "postclust/oracle.hpp"
#include "postclust/rng.hpp"

using namespace postclust;

namespace {

Eigen::MatrixXd random_matrix(Rng& rng, int n, int q) {
    Eigen::MatrixXd m(n, q);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < q; ++j) m(i, j) = rng.next_gaussian();
    return m;
}

FeatureCovariance random_covariance(Rng& rng, int q) {
    Eigen::MatrixXd a(q, q);
    for (int i = 0; i < q; ++i)
        for (int j = 0; j < q; ++j) a(i, j) = rng.next_gaussian();
    Eigen::MatrixXd s = a * a.transpose() / static_cast<double>(q);
    s += 0.3 * Eigen::MatrixXd::Identity(q, q);
    return FeatureCovariance(s);
}

struct Instance {
    DataMatrix x;
    KMeansTrace trace;
    PerturbationLine line;
};

Instance random_kmeans_instance(Rng& rng, int n, int q, int K, int t_max, int feature) {
    DataMatrix x(random_matrix(rng, n, q));
    const auto sigma = random_covariance(rng, q);
    KMeansTrace trace = kmeans_lloyd(x, K, t_max, rng.next_u64());
    ClusterLabels labels = kmeans_labels(trace);
    while (labels.K < 2) {
        trace = kmeans_lloyd(x, K, t_max, rng.next_u64());
        labels = kmeans_labels(trace);
    }
    const auto groups = labels.groups();
    const int a = static_cast<int>(rng.next_below(static_cast<std::uint64_t>(labels.K)));
    int b = static_cast<int>(rng.next_below(static_cast<std::uint64_t>(labels.K - 1)));
    if (b >= a) ++b;
    const Contrast c = make_contrast(groups[static_cast<std::size_t>(a)],
                                     groups[static_cast<std::size_t>(b)], n);
    PerturbationLine line(x, c, sigma, feature);
    return {std::move(x), std::move(trace), std::move(line)};
}

} // namespace

TEST_SUITE_BEGIN("kmeans-truncation");

TEST_CASE("centroid_affine closed forms") {
    Rng rng(555);
    auto inst = random_kmeans_instance(rng, 14, 3, 3, 8, 1);
    const auto& line = inst.line;
    const auto& x = inst.x;
    const auto& trace = inst.trace;

    // Step 1 centroids are the sampled rows.
    for (int k = 0; k < trace.K; ++k) {
        const auto ac = centroid_affine(x, trace, line, 1, k);
        const int row = trace.init_rows[static_cast<std::size_t>(k)];
        CHECK((ac.intercept.transpose() - x.values().row(row)).cwiseAbs().maxCoeff() == 0.0);
        CHECK(ac.slope_scale == line.row_direction()(row));
    }

    // A cluster with no tested-group members has slope zero; the affine form
    // evaluated at phi matches the recomputed centroid of the perturbed data.
    for (int t = 1; t <= trace.steps(); ++t) {
        for (int k = 0; k < trace.K; ++k) {
            const auto ac = centroid_affine(x, trace, line, t, k);
            if (t >= 2) {
                const auto& prev = trace.assignments[static_cast<std::size_t>(t - 2)];
                bool touches = false;
                bool empty = true;
                for (int i = 0; i < x.n(); ++i) {
                    if (prev[static_cast<std::size_t>(i)] != k) continue;
                    empty = false;
                    if (line.row_direction()(i) != 0.0) touches = true;
                }
                if (!touches && !empty) CHECK(ac.slope_scale == 0.0);
                if (!empty) {
                    for (double phi : {-1.0, 2.0}) {
                        const auto moved = perturb(line, phi);
                        Eigen::RowVectorXd mean = Eigen::RowVectorXd::Zero(x.q());
                        int count = 0;
                        for (int i = 0; i < x.n(); ++i)
                            if (prev[static_cast<std::size_t>(i)] == k) {
                                mean += moved.values().row(i);
                                ++count;
                            }
                        mean /= static_cast<double>(count);
                        const Eigen::VectorXd model =
                            ac.intercept + (phi - line.anchor()) * ac.slope(line);
                        CHECK((model.transpose() - mean).cwiseAbs().maxCoeff() < 1e-10);
                    }
                }
            }
        }
    }
}

TEST_CASE("centroid slope for a cluster equal to one tested group") {
    // Hand-built trace: cluster 0 is exactly group A after the first update.
    Eigen::MatrixXd m(6, 2);
    m << 0.0, 0.1, 0.2, -0.1, 0.1, 0.05, 5.0, 5.0, 5.2, 4.9, 4.8, 5.1;
    const DataMatrix x(m);
    const auto sigma = FeatureCovariance::identity(2);
    const Contrast c = make_contrast({0, 1, 2}, {3, 4, 5}, 6);
    const PerturbationLine line(x, c, sigma, 0);
    const KMeansTrace trace = kmeans_lloyd(x, 2, 10, 4);
    const auto labels = kmeans_labels(trace);
    REQUIRE(labels.K == 2);

    const int k_of_a = labels.labels[0];
    const auto ac = centroid_affine(x, trace, line, trace.steps(), k_of_a);
    // mean of u over group A = 1 / (|A| |nu|^2).
    const double expect = 1.0 / (3.0 * c.nu_sq_norm);
    CHECK(ac.slope_scale == doctest::Approx(expect).epsilon(1e-12));
}

TEST_CASE("assignment constraint count is exactly n (K-1) steps") {
    Rng rng(808);
    for (int rep = 0; rep < 6; ++rep) {
        const int n = 8 + static_cast<int>(rng.next_below(8));
        const int K = 2 + static_cast<int>(rng.next_below(2));
        auto inst = random_kmeans_instance(rng, n, 2, K, 6, 0);
        const auto constraints = assignment_constraints(inst.x, inst.trace, inst.line);
        const auto expected = static_cast<std::size_t>(n) * static_cast<std::size_t>(K - 1) *
                              static_cast<std::size_t>(inst.trace.steps());
        CHECK(constraints.size() == expected);
    }
}

TEST_CASE("constraints match hand expansion on the perturbation ray") {
    Rng rng(616);
    auto inst = random_kmeans_instance(rng, 10, 2, 2, 6, 1);
    const auto constraints = assignment_constraints(inst.x, inst.trace, inst.line);
    // Every constraint value at psi must equal the explicit distance
    // difference of the perturbed data.
    for (double phi : {-2.0, 0.5, 3.0}) {
        const double psi = phi - inst.line.anchor();
        const auto moved = perturb(inst.line, phi);
        std::size_t idx = 0;
        for (int t = 1; t <= inst.trace.steps(); ++t) {
            // Recompute centroids of the perturbed data for step t.
            Eigen::MatrixXd centroids(inst.trace.K, inst.x.q());
            if (t == 1) {
                for (int k = 0; k < inst.trace.K; ++k)
                    centroids.row(k) =
                        moved.values().row(inst.trace.init_rows[static_cast<std::size_t>(k)]);
            } else {
                const auto& prev = inst.trace.assignments[static_cast<std::size_t>(t - 2)];
                for (int k = 0; k < inst.trace.K; ++k) {
                    Eigen::RowVectorXd mean = Eigen::RowVectorXd::Zero(inst.x.q());
                    int count = 0;
                    for (int i = 0; i < inst.x.n(); ++i)
                        if (prev[static_cast<std::size_t>(i)] == k) {
                            mean += moved.values().row(i);
                            ++count;
                        }
                    REQUIRE(count > 0);
                    centroids.row(k) = mean / static_cast<double>(count);
                }
            }
            const auto& assigned = inst.trace.assignments[static_cast<std::size_t>(t - 1)];
            for (int i = 0; i < inst.x.n(); ++i) {
                const int c = assigned[static_cast<std::size_t>(i)];
                for (int k = 0; k < inst.trace.K; ++k) {
                    if (k == c) continue;
                    const double direct =
                        (moved.values().row(i) - centroids.row(c)).squaredNorm() -
                        (moved.values().row(i) - centroids.row(k)).squaredNorm();
                    const auto& q = constraints[idx++];
                    const double model = (q.a * psi + q.b) * psi + q.c;
                    CHECK(model == doctest::Approx(direct).epsilon(1e-9).scale(1.0));
                }
            }
        }
    }
}

TEST_CASE("truncation set contains the anchor and matches the grid oracle") {
    Rng rng(1213);
    for (int rep = 0; rep < 8; ++rep) {
        const int n = 8 + static_cast<int>(rng.next_below(7));
        const int q = 1 + static_cast<int>(rng.next_below(3));
        const int K = 2 + static_cast<int>(rng.next_below(2));
        const int feature = static_cast<int>(rng.next_below(static_cast<std::uint64_t>(q)));
        auto inst = random_kmeans_instance(rng, n, q, K, 5, feature);
        const auto set = truncation_set_kmeans(inst.x, inst.trace, inst.line);
        CHECK(set.contains(inst.line.anchor()));

        const auto grid = phi_grid(inst.line.anchor(), inst.line.null_sd(), 801, 6.0);
        const auto scan = grid_membership_kmeans(inst.line, inst.trace, 5, grid);
        const double step = grid[1] - grid[0];
        int far_disagreements = 0;
        for (std::size_t g = 0; g < grid.size(); ++g) {
            const bool analytic = set.contains(grid[g]);
            const bool oracle = scan.member[g] != 0;
            if (analytic == oracle) continue;
            bool near = false;
            for (const auto& piece : set.intervals())
                if (std::fabs(grid[g] - piece.lo) <= step || std::fabs(grid[g] - piece.hi) <= step)
                    near = true;
            if (!near) ++far_disagreements;
        }
        CHECK(far_disagreements == 0);
    }
}

TEST_CASE("two separated blobs exclude a neighborhood of zero") {
    Eigen::MatrixXd m(10, 1);
    m << -5.2, -4.9, -5.1, -5.0, -4.8, 4.8, 5.0, 5.1, 4.9, 5.2;
    const DataMatrix x(m);
    const auto sigma = FeatureCovariance::identity(1);
    const KMeansTrace trace = kmeans_lloyd(x, 2, 10, 11);
    const auto labels = kmeans_labels(trace);
    REQUIRE(labels.K == 2);
    const auto groups = labels.groups();
    const Contrast c = make_contrast(groups[0], groups[1], 10);
    const PerturbationLine line(x, c, sigma, 0);
    const auto set = truncation_set_kmeans(x, trace, line);
    CHECK(set.contains(line.anchor()));
    CHECK_FALSE(set.contains(0.0));
}

TEST_CASE("adding iterations never enlarges the set") {
    Rng rng(1415);
    for (int rep = 0; rep < 6; ++rep) {
        auto inst = random_kmeans_instance(rng, 12, 2, 3, 8, 0);
        if (inst.trace.steps() < 2) continue;
        KMeansTrace shorter = inst.trace;
        shorter.assignments.resize(static_cast<std::size_t>(inst.trace.steps() - 1));
        const auto shorter_set = truncation_set_kmeans(inst.x, shorter, inst.line);
        const auto full = truncation_set_kmeans(inst.x, inst.trace, inst.line);
        CHECK(full.intersect(shorter_set).approx_equal(full, 1e-9));
    }
}

TEST_SUITE_END();
