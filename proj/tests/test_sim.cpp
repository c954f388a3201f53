#include "doctest.h"

#include <cmath>
#include <numeric>

#include "postclust/errors.hpp"
#include "postclust/preprocess.hpp"
#include "postclust/rng.hpp"
#include "postclust/sim.hpp"

using namespace postclust;

TEST_SUITE_BEGIN("sim");

TEST_CASE("gen_null design shape and determinism") {
    SimConfig cfg;
    cfg.design = SimDesign::null_two_cluster;
    cfg.n = 150;
    cfg.q = 10;
    cfg.rho = 0.4;
    cfg.seed = 99;

    const auto a = gen_null(cfg, 3);
    const auto b = gen_null(cfg, 3);
    CHECK(a.values() == b.values()); // bit-identical
    const auto other = gen_null(cfg, 4);
    CHECK(a.values() != other.values());

    // Empirical block means reflect the design: feature 1 high in the first
    // half, feature q high in the second half, interior features centered.
    SimConfig big = cfg;
    big.rho = 0.0;
    big.n = 2000;
    const auto x = gen_null(big, 0);
    const int half = big.n / 2;
    double f1_first = 0.0, f1_second = 0.0, mid = 0.0;
    for (int i = 0; i < big.n; ++i) {
        if (i < half) f1_first += x(i, 0);
        else f1_second += x(i, 0);
        mid += x(i, 4);
    }
    CHECK(f1_first / half == doctest::Approx(1.0).epsilon(0.1));
    CHECK(f1_second / half == doctest::Approx(0.0).scale(1.0).epsilon(0.1));
    CHECK(mid / big.n == doctest::Approx(0.0).scale(1.0).epsilon(0.1));

    // Sample correlation close to rho under the equicorrelated design.
    SimConfig corr = cfg;
    corr.n = 4000;
    const auto xc = gen_null(corr, 1);
    double c12 = 0.0, v1 = 0.0, v2 = 0.0, m1 = 0.0, m2 = 0.0;
    for (int i = 0; i < corr.n; ++i) {
        m1 += xc(i, 2);
        m2 += xc(i, 3);
    }
    m1 /= corr.n;
    m2 /= corr.n;
    for (int i = 0; i < corr.n; ++i) {
        c12 += (xc(i, 2) - m1) * (xc(i, 3) - m2);
        v1 += (xc(i, 2) - m1) * (xc(i, 2) - m1);
        v2 += (xc(i, 3) - m2) * (xc(i, 3) - m2);
    }
    CHECK(c12 / std::sqrt(v1 * v2) == doctest::Approx(0.4).epsilon(0.15));
}

TEST_CASE("gen_power blocks and degenerate delta") {
    SimConfig cfg;
    cfg.design = SimDesign::three_cluster_power;
    cfg.n = 150;
    cfg.q = 10;
    cfg.delta = 6.0;
    cfg.seed = 5;

    const auto [x, truth] = gen_power(cfg, 0);
    CHECK(truth.size() == 150);
    CHECK(std::count(truth.begin(), truth.end(), 0) == 50);
    CHECK(std::count(truth.begin(), truth.end(), 1) == 50);
    CHECK(std::count(truth.begin(), truth.end(), 2) == 50);

    // Leading floor(q/2) features carry no signal; trailing ones separate
    // blocks 0 and 2 by about 2 delta.
    double lead0 = 0.0, lead2 = 0.0, tail0 = 0.0, tail2 = 0.0;
    for (int i = 0; i < 50; ++i) {
        lead0 += x(i, 1);
        tail0 += x(i, 9);
    }
    for (int i = 100; i < 150; ++i) {
        lead2 += x(i, 1);
        tail2 += x(i, 9);
    }
    CHECK(std::fabs(lead2 / 50 - lead0 / 50) < 1.0);
    CHECK(tail2 / 50 - tail0 / 50 == doctest::Approx(2.0 * cfg.delta).epsilon(0.15));

    SimConfig zero = cfg;
    zero.delta = 0.0;
    const auto [xz, tz] = gen_power(zero, 0);
    double any = 0.0;
    for (int j = 0; j < zero.q; ++j) {
        double block0 = 0.0, block2 = 0.0;
        for (int i = 0; i < 50; ++i) block0 += xz(i, j);
        for (int i = 100; i < 150; ++i) block2 += xz(i, j);
        any = std::max(any, std::fabs(block2 - block0) / 50.0);
    }
    CHECK(any < 1.0);

    // Nearest-thirds split when n is not divisible by 3.
    SimConfig odd = cfg;
    odd.n = 10;
    const auto [xo, to] = gen_power(odd, 0);
    CHECK(std::count(to.begin(), to.end(), 0) == 4);
    CHECK(std::count(to.begin(), to.end(), 1) == 3);
    CHECK(std::count(to.begin(), to.end(), 2) == 3);
}

TEST_CASE("run_type1 produces one row per replicate, deterministically") {
    SimConfig cfg;
    cfg.design = SimDesign::null_two_cluster;
    cfg.n = 40;
    cfg.q = 6;
    cfg.rho = 0.0;
    cfg.K = 3;
    cfg.method = "average";
    cfg.replicates = 24;
    cfg.seed = 7;

    const auto rows = run_type1(cfg);
    CHECK(rows.size() == 24);
    const auto rows2 = run_type1(cfg);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        CHECK(rows[i].replicate == static_cast<int>(i));
        CHECK(rows[i].feature >= 2);
        CHECK(rows[i].feature <= cfg.q - 1);
        CHECK(rows[i].p_selective == rows2[i].p_selective); // bit-identical rerun
        CHECK(rows[i].p_selective > 0.0);
        CHECK(rows[i].p_selective <= 1.0);
        CHECK(rows[i].p_naive > 0.0);
        CHECK(rows[i].p_naive <= 1.0);
    }
}

TEST_CASE("run_power counts satisfy numerator <= denominator <= replicates") {
    SimConfig cfg;
    cfg.design = SimDesign::three_cluster_power;
    cfg.n = 30;
    cfg.q = 6;
    cfg.rho = 0.0;
    cfg.delta = 7.0;
    cfg.K = 3;
    cfg.method = "ward";
    cfg.replicates = 16;
    cfg.seed = 3;

    const auto [summary, rows] = run_power(cfg);
    CHECK(rows.size() == 16);
    CHECK(summary.rejections_among_correct <= summary.correct_count);
    CHECK(summary.correct_count <= summary.replicates);
    CHECK(summary.detection_probability >= 0.0);
    CHECK(summary.detection_probability <= 1.0);
    // Strong separation: the true blocks should be recovered often.
    CHECK(summary.detection_probability > 0.5);
    for (const auto& r : rows) {
        CHECK((r.reject == 0 || r.reject == 1));
        CHECK(r.effect >= 0.0);
        if (r.clusters_correct && r.feature > cfg.q / 2)
            CHECK((std::fabs(r.effect - cfg.delta) < 1e-12 ||
                   std::fabs(r.effect - 2.0 * cfg.delta) < 1e-12));
        if (r.feature <= cfg.q / 2) CHECK(r.effect == 0.0);
    }
}

TEST_CASE("sim config json round trip") {
    SimConfig cfg;
    cfg.design = SimDesign::three_cluster_power;
    cfg.n = 99;
    cfg.q = 8;
    cfg.rho = 0.25;
    cfg.delta = 4.5;
    cfg.K = 4;
    cfg.method = "centroid";
    cfg.replicates = 10;
    cfg.alpha = 0.1;
    cfg.seed = 123456789ULL;
    cfg.t_max = 9;
    const auto back = SimConfig::from_json(cfg.to_json());
    CHECK(back.design == cfg.design);
    CHECK(back.n == cfg.n);
    CHECK(back.q == cfg.q);
    CHECK(back.rho == cfg.rho);
    CHECK(back.delta == cfg.delta);
    CHECK(back.K == cfg.K);
    CHECK(back.method == cfg.method);
    CHECK(back.replicates == cfg.replicates);
    CHECK(back.alpha == cfg.alpha);
    CHECK(back.seed == cfg.seed);
    CHECK(back.t_max == cfg.t_max);

    SimConfig bad = cfg;
    bad.rho = 1.0;
    CHECK_THROWS_AS(bad.validate(), invalid_input);
}

TEST_CASE("ks uniformity statistic behaves") {
    Rng rng(321);
    std::vector<double> uniform(800);
    for (auto& v : uniform) v = rng.next_double();
    CHECK(ks_uniform_pvalue(uniform) > 0.01);

    std::vector<double> squashed(800);
    for (std::size_t i = 0; i < squashed.size(); ++i) squashed[i] = uniform[i] * uniform[i];
    CHECK(ks_uniform_pvalue(squashed) < 1e-6);
}

TEST_CASE("preprocess_counts pipeline") {
    Eigen::MatrixXd raw(4, 3);
    raw << 0, 0, 0,
           10, 20, 70,
           5, 5, 0,
           100, 200, 700;
    // Zero row dropped at any positive threshold.
    const auto result = preprocess_counts(raw, 1.0, 3);
    CHECK(result.kept_rows == std::vector<int>{1, 2, 3});

    // Rows scale to 10,000 before the log transform.
    const auto one = preprocess_counts(raw.row(1), 1.0, 3);
    double total = 0.0;
    for (int j = 0; j < 3; ++j) total += std::exp2(one.matrix(0, j)) - 1.0;
    CHECK(total == doctest::Approx(10000.0).epsilon(1e-10));

    // Proportional rows become identical after normalization.
    const auto both = preprocess_counts(raw, 50.0, 3);
    CHECK(both.kept_rows == std::vector<int>{1, 3});
    CHECK((both.matrix.row(0) - both.matrix.row(1)).cwiseAbs().maxCoeff() < 1e-12);

    CHECK_THROWS_AS(preprocess_counts(raw, 1e9, 3), numeric_error);
    Eigen::MatrixXd neg(2, 2);
    neg << 1, -2, 3, 4;
    CHECK_THROWS_AS(preprocess_counts(neg, 1.0, 2), invalid_input);
}

TEST_CASE("preprocess_counts top-k selection matches an independent recompute") {
    Rng rng(654);
    const int n = 40, q = 25, keep = 10;
    Eigen::MatrixXd raw(n, q);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < q; ++j)
            raw(i, j) = std::floor(rng.next_double() * (5.0 + 40.0 * j / q));
    const auto result = preprocess_counts(raw, 1.0, keep);
    CHECK(result.matrix.cols() == keep);

    // Independent recompute of the post-transform variances.
    Eigen::MatrixXd logged(n, q);
    for (int i = 0; i < n; ++i) {
        const double total = raw.row(i).sum();
        for (int j = 0; j < q; ++j)
            logged(i, j) = std::log2(raw(i, j) * 10000.0 / total + 1.0);
    }
    std::vector<double> variance(q);
    for (int j = 0; j < q; ++j) {
        double mean = logged.col(j).mean();
        double acc = 0.0;
        for (int i = 0; i < n; ++i) acc += (logged(i, j) - mean) * (logged(i, j) - mean);
        variance[static_cast<std::size_t>(j)] = acc / (n - 1);
    }
    double kept_min = 1e300, dropped_max = -1e300;
    for (int j = 0; j < q; ++j) {
        const bool kept = std::find(result.kept_cols.begin(), result.kept_cols.end(), j) !=
                          result.kept_cols.end();
        if (kept) kept_min = std::min(kept_min, variance[static_cast<std::size_t>(j)]);
        else dropped_max = std::max(dropped_max, variance[static_cast<std::size_t>(j)]);
    }
    CHECK(kept_min >= dropped_max);

    // Selecting again from the already-selected columns is a fixed point.
    Eigen::MatrixXd counts_again(n, keep);
    for (int j = 0; j < keep; ++j) counts_again.col(j) = raw.col(result.kept_cols[static_cast<std::size_t>(j)]);
    const auto again = preprocess_counts(counts_again, 1.0, keep);
    std::vector<int> identity(keep);
    std::iota(identity.begin(), identity.end(), 0);
    CHECK(again.kept_cols == identity);
}

TEST_SUITE_END();
