#include "postclust/inference.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include "postclust/errors.hpp"
#include "postclust/hier_truncation.hpp"
#include "postclust/kmeans_truncation.hpp"
#include "json.hpp"

namespace postclust {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
const double kInvSqrt2 = 1.0 / std::numbers::sqrt2;
const double kInvSqrtPi = 1.0 / std::sqrt(std::numbers::pi);

// log(1 - e^d) for d <= 0.
double log1mexp(double d) {
    if (d >= 0.0) return -kInf;
    if (d > -std::numbers::ln2) return std::log(-std::expm1(d));
    return std::log1p(-std::exp(d));
}

double logsumexp2(double a, double b) {
    if (a == -kInf) return b;
    if (b == -kInf) return a;
    const double hi = std::max(a, b);
    const double lo = std::min(a, b);
    return hi + std::log1p(std::exp(lo - hi));
}

} // namespace

double erfcx_nonneg(double x) {
    if (x < 0.0) throw invalid_input("erfcx_nonneg: negative argument");
    if (x < 20.0) return std::exp(x * x) * std::erfc(x);
    // Laplace continued fraction erfcx(x) = (1/sqrt(pi)) / (x + (1/2)/(x + 1/(x + (3/2)/(x + ...))))
    // evaluated with modified Lentz; converges in a few dozen terms for x >= 20.
    const double tiny = 1e-300;
    double f = x; // b0
    double c = x;
    double d = 0.0;
    for (int k = 1; k <= 200; ++k) {
        const double coeff = 0.5 * static_cast<double>(k);
        d = x + coeff * d;
        if (d == 0.0) d = tiny;
        c = x + coeff / c;
        if (c == 0.0) c = tiny;
        d = 1.0 / d;
        const double delta = c * d;
        f *= delta;
        if (std::fabs(delta - 1.0) < 1e-17) break;
    }
    return kInvSqrtPi / f;
}

double log_normal_sf(double z) {
    if (z == kInf) return -kInf;
    if (z == -kInf) return 0.0;
    if (z < 0.0) {
        // 1 - Q(-z); Q(-z) <= 1/2 so log1p is safe.
        const double q = 0.5 * std::erfc(-z * kInvSqrt2);
        return std::log1p(-q);
    }
    const double x = z * kInvSqrt2;
    if (x < 20.0) return std::log(0.5 * std::erfc(x));
    return -0.5 * z * z + std::log(0.5 * erfcx_nonneg(x));
}

namespace {

// log(Q(a) - Q(b)) for 0 <= a < b.
double log_tail_diff(double a, double b) {
    const double la = log_normal_sf(a);
    if (b == kInf) return la;
    const double lb = log_normal_sf(b);
    return la + log1mexp(lb - la);
}

} // namespace

double log_normal_mass(double a, double b) {
    if (std::isnan(a) || std::isnan(b)) throw numeric_error("log_normal_mass: NaN endpoint");
    if (!(a < b)) return -kInf;
    if (a == -kInf && b == kInf) return 0.0;
    if (a >= 0.0) return log_tail_diff(a, b);
    if (b <= 0.0) return log_tail_diff(-b, -a);
    // Straddles zero: both erf terms are nonnegative, so no cancellation.
    const double m = 0.5 * (std::erf(b * kInvSqrt2) + std::erf(-a * kInvSqrt2));
    return std::log(m);
}

TruncatedGaussian::TruncatedGaussian(double mean, double sd, IntervalUnion support)
    : mean_(mean), sd_(sd), support_(std::move(support)) {
    if (!(sd_ > 0.0) || !std::isfinite(sd_) || !std::isfinite(mean_))
        throw invalid_input("TruncatedGaussian: need finite mean and sd > 0");
    log_total_ = log_mass_below(kInf);
    if (log_total_ == -kInf || std::isnan(log_total_))
        throw degenerate_support_error("TruncatedGaussian: numerically degenerate support");
}

double TruncatedGaussian::log_mass_below(double t) const {
    double acc = -kInf;
    for (const auto& p : support_.intervals()) {
        if (p.lo >= t) break;
        const double lo = (p.lo - mean_) / sd_;
        const double hi = (std::min(p.hi, t) - mean_) / sd_;
        acc = logsumexp2(acc, log_normal_mass(lo, hi));
    }
    return acc;
}

double TruncatedGaussian::log_mass_above(double t) const {
    double acc = -kInf;
    for (const auto& p : support_.intervals()) {
        if (p.hi <= t) continue;
        const double lo = (std::max(p.lo, t) - mean_) / sd_;
        const double hi = (p.hi - mean_) / sd_;
        acc = logsumexp2(acc, log_normal_mass(lo, hi));
    }
    return acc;
}

double trunc_cdf(double t, const TruncatedGaussian& g) {
    if (std::isnan(t)) throw invalid_input("trunc_cdf: NaN threshold");
    const double num = g.log_mass_below(t);
    if (num == -kInf) return 0.0;
    return std::min(1.0, std::exp(num - g.log_total_mass()));
}

double selective_p(double statistic, double sd, const IntervalUnion& s) {
    if (!s.contains(statistic))
        throw invalid_input("selective_p: statistic outside the truncation set");
    const TruncatedGaussian g(0.0, sd, s);
    const double t = std::fabs(statistic);
    const double log_num = logsumexp2(g.log_mass_above(t), g.log_mass_below(-t));
    const double p = std::exp(log_num - g.log_total_mass());
    return std::clamp(p, 1e-300, 1.0);
}

double naive_p(double statistic, double sd) {
    if (!(sd > 0.0)) throw invalid_input("naive_p: need sd > 0");
    return selective_p(statistic, sd, IntervalUnion::all());
}

std::vector<double> bh_adjust(const std::vector<double>& pvals) {
    const std::size_t m = pvals.size();
    for (double p : pvals)
        if (std::isnan(p) || p < 0.0 || p > 1.0)
            throw invalid_input("bh_adjust: p-values must lie in [0, 1]");
    std::vector<std::size_t> order(m);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return pvals[a] < pvals[b]; });
    std::vector<double> adjusted(m);
    double running = 1.0;
    for (std::size_t r = m; r-- > 0;) {
        const double q = static_cast<double>(m) * pvals[order[r]] / static_cast<double>(r + 1);
        running = std::min(running, std::min(1.0, q));
        adjusted[order[r]] = running;
    }
    return adjusted;
}

FeatureCovariance estimate_covariance(const DataMatrix& x, const ClusterLabels& labels) {
    const int n = x.n();
    const int K = labels.K;
    if (static_cast<int>(labels.labels.size()) != n)
        throw invalid_input("estimate_covariance: label length mismatch");
    if (n <= K) throw invalid_input("estimate_covariance: need n > K");

    Eigen::MatrixXd means = Eigen::MatrixXd::Zero(K, x.q());
    Eigen::VectorXi counts = Eigen::VectorXi::Zero(K);
    for (int i = 0; i < n; ++i) {
        means.row(labels.labels[static_cast<std::size_t>(i)]) += x.values().row(i);
        ++counts(labels.labels[static_cast<std::size_t>(i)]);
    }
    for (int k = 0; k < K; ++k) means.row(k) /= static_cast<double>(counts(k));

    Eigen::MatrixXd scatter = Eigen::MatrixXd::Zero(x.q(), x.q());
    for (int i = 0; i < n; ++i) {
        const Eigen::RowVectorXd r =
            x.values().row(i) - means.row(labels.labels[static_cast<std::size_t>(i)]);
        scatter.noalias() += r.transpose() * r;
    }
    Eigen::MatrixXd sigma = scatter / static_cast<double>(n - K);
    sigma = 0.5 * (sigma + sigma.transpose()).eval();

    const double mean_diag = sigma.trace() / static_cast<double>(x.q());
    const double floor = mean_diag > 0.0 ? 1e-8 * mean_diag : 1e-8;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sigma);
    Eigen::VectorXd evals = es.eigenvalues().cwiseMax(floor);
    sigma = es.eigenvectors() * evals.asDiagonal() * es.eigenvectors().transpose();
    sigma = 0.5 * (sigma + sigma.transpose()).eval();
    return FeatureCovariance(sigma);
}

ClusterMethod ClusterMethod::from_name(const std::string& name, int k, std::uint64_t seed,
                                       int t_max) {
    ClusterMethod m;
    m.k = k;
    m.seed = seed;
    m.t_max = t_max;
    if (name == "kmeans") {
        m.kind = Kind::kmeans;
    } else {
        m.kind = Kind::hierarchical;
        m.linkage = linkage_from_string(name);
    }
    return m;
}

std::string ClusterMethod::describe() const {
    if (kind == Kind::kmeans)
        return "kmeans(K=" + std::to_string(k) + ",seed=" + std::to_string(seed) +
               ",t_max=" + std::to_string(t_max) + ")";
    return "hierarchical-" + to_string(linkage) + "(K=" + std::to_string(k) + ")";
}

ClusterLabels ClusterMethod::cluster(const DataMatrix& x) const {
    if (kind == Kind::kmeans) return kmeans_labels(kmeans_lloyd(x, k, t_max, seed));
    return cut_dendrogram(hierarchical(x, linkage), k);
}

std::string TestReport::to_json() const {
    nlohmann::json j;
    j["feature"] = feature + 1;
    nlohmann::json ga = nlohmann::json::array(), gb = nlohmann::json::array();
    for (int i : group_a) ga.push_back(i + 1);
    for (int i : group_b) gb.push_back(i + 1);
    j["group_a"] = ga;
    j["group_b"] = gb;
    j["statistic"] = statistic;
    j["sd"] = sd;
    j["truncation"] = nlohmann::json::parse(truncation.to_json());
    j["p_selective"] = p_selective;
    j["p_naive"] = p_naive;
    j["method"] = method;
    j["sigma_source"] = sigma_estimated ? "estimated" : "supplied";
    return j.dump();
}

TestReport run_test(const DataMatrix& x, const FeatureCovariance& sigma,
                    const ClusterMethod& method, std::pair<int, int> pair, int feature,
                    bool sigma_estimated) {
    if (pair.first == pair.second) throw invalid_input("run_test: need two distinct clusters");

    TestReport report;
    report.feature = feature;
    report.method = method.describe();
    report.sigma_estimated = sigma_estimated;

    if (method.kind == ClusterMethod::Kind::kmeans) {
        const KMeansTrace trace = kmeans_lloyd(x, method.k, method.t_max, method.seed);
        const ClusterLabels labels = kmeans_labels(trace);
        if (pair.first < 0 || pair.second < 0 || pair.first >= labels.K || pair.second >= labels.K)
            throw invalid_input("run_test: cluster index out of range");
        const auto groups = labels.groups();
        const Contrast c = make_contrast(groups[static_cast<std::size_t>(pair.first)],
                                         groups[static_cast<std::size_t>(pair.second)], x.n());
        const PerturbationLine line(x, c, sigma, feature);
        report.truncation = truncation_set_kmeans(x, trace, line);
        report.group_a = c.group_a;
        report.group_b = c.group_b;
        report.statistic = line.anchor();
        report.sd = line.null_sd();
    } else {
        const MergeSequence seq = hierarchical(x, method.linkage);
        const ClusterLabels labels = cut_dendrogram(seq, method.k);
        if (pair.first < 0 || pair.second < 0 || pair.first >= labels.K || pair.second >= labels.K)
            throw invalid_input("run_test: cluster index out of range");
        const auto groups = labels.groups();
        const Contrast c = make_contrast(groups[static_cast<std::size_t>(pair.first)],
                                         groups[static_cast<std::size_t>(pair.second)], x.n());
        const PerturbationLine line(x, c, sigma, feature);
        report.truncation = truncation_set_hier(x, line, seq, method.k);
        report.group_a = c.group_a;
        report.group_b = c.group_b;
        report.statistic = line.anchor();
        report.sd = line.null_sd();
    }

    report.p_selective = selective_p(report.statistic, report.sd, report.truncation);
    report.p_naive = naive_p(report.statistic, report.sd);
    return report;
}

} // namespace postclust
