#include "doctest.h"

#include <cmath>

#include "postclust/errors.hpp"
#include "postclust/model.hpp"
#include "postclust/rng.hpp"

using namespace postclust;

namespace {

Eigen::MatrixXd random_matrix(Rng& rng, int n, int q) {
    Eigen::MatrixXd m(n, q);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < q; ++j) m(i, j) = rng.next_gaussian();
    return m;
}

// Independent recomputation of the statistic with plain loops.
double naive_statistic(const Eigen::MatrixXd& values, const std::vector<int>& a,
                       const std::vector<int>& b, int j) {
    double ma = 0.0, mb = 0.0;
    for (int i : a) ma += values(i, j);
    for (int i : b) mb += values(i, j);
    return ma / static_cast<double>(a.size()) - mb / static_cast<double>(b.size());
}

} // namespace

TEST_SUITE_BEGIN("model");

TEST_CASE("make_contrast worked examples") {
    {
        const auto c = make_contrast({0, 1}, {2}, 5);
        CHECK(c.nu(0) == doctest::Approx(0.5));
        CHECK(c.nu(1) == doctest::Approx(0.5));
        CHECK(c.nu(2) == doctest::Approx(-1.0));
        CHECK(c.nu(3) == 0.0);
        CHECK(c.nu(4) == 0.0);
        CHECK(c.nu_sq_norm == doctest::Approx(1.5));
    }
    {
        const auto c = make_contrast({0}, {1}, 2);
        CHECK(c.nu(0) == doctest::Approx(1.0));
        CHECK(c.nu(1) == doctest::Approx(-1.0));
        CHECK(c.nu_sq_norm == doctest::Approx(2.0));
    }
    {
        std::vector<int> a, b;
        for (int i = 0; i < 50; ++i) a.push_back(i);
        for (int i = 50; i < 100; ++i) b.push_back(i);
        const auto c = make_contrast(a, b, 150);
        int zeros = 0;
        for (int i = 0; i < 150; ++i) {
            if (c.nu(i) == 0.0) ++zeros;
            else CHECK(std::fabs(c.nu(i)) == doctest::Approx(0.02));
        }
        CHECK(zeros == 50);
        CHECK(c.nu_sq_norm == doctest::Approx(0.04));
        CHECK(c.nu.squaredNorm() == doctest::Approx(c.nu_sq_norm).epsilon(1e-12));
    }
}

TEST_CASE("make_contrast rejects bad groups") {
    CHECK_THROWS_AS(make_contrast({0, 1}, {1, 2}, 5), invalid_input);
    CHECK_THROWS_AS(make_contrast({}, {1}, 5), invalid_input);
    CHECK_THROWS_AS(make_contrast({0}, {7}, 5), invalid_input);
}

TEST_CASE("contrast is mean-zero and supported on its groups") {
    Rng rng(11);
    for (int rep = 0; rep < 50; ++rep) {
        const int n = 4 + static_cast<int>(rng.next_below(20));
        auto perm = rng.sample_without_replacement(n, n);
        const int na = 1 + static_cast<int>(rng.next_below(static_cast<std::uint64_t>(n - 2)));
        const int nb = 1 + static_cast<int>(rng.next_below(static_cast<std::uint64_t>(n - na - 1)));
        std::vector<int> a(perm.begin(), perm.begin() + na);
        std::vector<int> b(perm.begin() + na, perm.begin() + na + nb);
        const auto c = make_contrast(a, b, n);
        CHECK(std::fabs(c.nu.sum()) < 1e-12);
        for (int i = na + nb; i < n; ++i) CHECK(c.nu(perm[static_cast<std::size_t>(i)]) == 0.0);
    }
}

TEST_CASE("test_statistic worked examples") {
    Eigen::MatrixXd m(3, 1);
    m << 4.0, 6.0, 1.0;
    const DataMatrix x(m);
    const auto c = make_contrast({0, 1}, {2}, 3);
    CHECK(test_statistic(x, c, 0) == doctest::Approx(4.0));

    Eigen::MatrixXd same(4, 2);
    same << 1.0, 2.0, 1.0, 3.0, 1.0, 4.0, 1.0, 5.0;
    const DataMatrix xs(same);
    const auto cs = make_contrast({0, 1}, {2, 3}, 4);
    CHECK(test_statistic(xs, cs, 0) == doctest::Approx(0.0));

    Rng rng(23);
    const DataMatrix xr(random_matrix(rng, 10, 3));
    const auto cr = make_contrast({0, 3, 5}, {1, 8}, 10);
    for (int j = 0; j < 3; ++j)
        CHECK(test_statistic(xr, cr, j) ==
              doctest::Approx(naive_statistic(xr.values(), cr.group_a, cr.group_b, j)).epsilon(1e-12));
}

TEST_CASE("perturbation line anchors and statistics") {
    Rng rng(31);
    const DataMatrix x(random_matrix(rng, 8, 4));
    const auto c = make_contrast({0, 1, 2}, {5, 6}, 8);
    Eigen::MatrixXd s(4, 4);
    s << 2.0, 0.3, 0.1, 0.0,
         0.3, 1.5, 0.2, 0.1,
         0.1, 0.2, 1.0, 0.4,
         0.0, 0.1, 0.4, 2.5;
    const FeatureCovariance sigma(s);
    const PerturbationLine line(x, c, sigma, 2);

    CHECK(line.col_direction()(2) == 1.0); // w_j == 1 exactly
    for (int i = 0; i < 8; ++i) {
        const bool in_groups = (i <= 2) || (i == 5) || (i == 6);
        if (!in_groups) CHECK(line.row_direction()(i) == 0.0);
    }
    CHECK(line.anchor() == doctest::Approx(test_statistic(x, c, 2)).epsilon(1e-12));

    // Anchor point reproduces the base matrix exactly.
    const auto at_anchor = perturb(line, line.anchor());
    CHECK((at_anchor.values() - x.values()).cwiseAbs().maxCoeff() == 0.0);

    // The statistic is phi everywhere on the line.
    for (double phi : {-5.0, -3.0, 0.0, 2.5, 11.0}) {
        const auto moved = perturb(line, phi);
        CHECK(test_statistic(moved, c, 2) == doctest::Approx(phi).epsilon(1e-10));
        // Rows outside the groups are untouched.
        CHECK(moved.values().row(3) == x.values().row(3));
        CHECK(moved.values().row(4) == x.values().row(4));
        CHECK(moved.values().row(7) == x.values().row(7));
    }
}

TEST_CASE("perturb moves correlated features at slope sigma_jk/sigma_jj") {
    Rng rng(37);
    const DataMatrix x(random_matrix(rng, 30, 2));
    std::vector<int> a, b;
    for (int i = 0; i < 10; ++i) a.push_back(i);
    for (int i = 10; i < 20; ++i) b.push_back(i);
    const auto c = make_contrast(a, b, 30);
    Eigen::MatrixXd s(2, 2);
    s << 0.2, 0.08, 0.08, 0.2; // 0.2 * [1, 0.4; 0.4, 1]
    const FeatureCovariance sigma(s);
    const PerturbationLine line(x, c, sigma, 0);

    const double base_diff_f2 = test_statistic(x, c, 1);
    for (double phi : {-5.0, -3.0, 0.0, 6.0}) {
        const auto moved = perturb(line, phi);
        // Tested feature moves with slope 1.
        CHECK(test_statistic(moved, c, 0) == doctest::Approx(phi).epsilon(1e-10));
        // Correlated feature moves with slope sigma_12/sigma_11 = 0.4.
        const double expect = base_diff_f2 + (phi - line.anchor()) * 0.4;
        CHECK(test_statistic(moved, c, 1) == doctest::Approx(expect).epsilon(1e-10));
    }
}

TEST_CASE("residual component is orthogonal to the statistic and line-invariant") {
    Rng rng(41);
    const DataMatrix x(random_matrix(rng, 8, 4));
    const auto c = make_contrast({0, 2}, {4, 5, 7}, 8);
    Eigen::MatrixXd s = Eigen::MatrixXd::Identity(4, 4);
    s(0, 1) = s(1, 0) = 0.3;
    const FeatureCovariance sigma(s);
    const PerturbationLine line(x, c, sigma, 1);

    const auto resid = residual_component(x, line);
    CHECK(std::fabs(test_statistic(resid, c, 1)) <=
          1e-10 * std::max(1.0, std::fabs(line.anchor())));

    // Constant along the line.
    for (double phi : {-3.0, 0.0, 7.0}) {
        const auto moved = perturb(line, phi);
        const PerturbationLine moved_line(moved, c, sigma, 1);
        const auto resid2 = residual_component(moved, moved_line);
        CHECK((resid2.values() - resid.values()).cwiseAbs().maxCoeff() < 1e-10);
    }

    // Reconstruction: U(x) + u w^T anchor == x.
    const Eigen::MatrixXd rebuilt =
        resid.values() + line.anchor() * line.row_direction() * line.col_direction().transpose();
    CHECK((rebuilt - x.values()).cwiseAbs().maxCoeff() < 1e-12);

    // Zero statistic leaves the matrix unchanged.
    const auto centered = perturb(line, 0.0);
    const PerturbationLine zero_line(centered, c, sigma, 1);
    CHECK(std::fabs(zero_line.anchor()) < 1e-12);
    const auto resid_zero = residual_component(centered, zero_line);
    CHECK((resid_zero.values() - centered.values()).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("covariance validation") {
    Eigen::MatrixXd bad(2, 2);
    bad << 1.0, 2.0, 2.0, 1.0; // eigenvalues 3, -1
    CHECK_THROWS_AS(FeatureCovariance{bad}, numeric_error);

    Eigen::MatrixXd asym(2, 2);
    asym << 1.0, 0.5, 0.2, 1.0;
    CHECK_THROWS_AS(FeatureCovariance{asym}, numeric_error);

    const auto spec = null_spec(make_contrast({0}, {1}, 4), FeatureCovariance::identity(3), 2);
    CHECK(spec.mean_diff == 0.0);
    CHECK(spec.sd == doctest::Approx(std::sqrt(2.0)));
}

TEST_CASE("data matrix validation") {
    CHECK_THROWS_AS(DataMatrix{Eigen::MatrixXd::Zero(1, 3)}, invalid_input);
    Eigen::MatrixXd nan_mat = Eigen::MatrixXd::Zero(3, 2);
    nan_mat(1, 1) = std::nan("");
    CHECK_THROWS_AS(DataMatrix{nan_mat}, numeric_error);
}

TEST_SUITE_END();
