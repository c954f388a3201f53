#include "postclust/sim.hpp"

#include <algorithm>
#include <cmath>

#include "postclust/errors.hpp"
#include "postclust/parallel.hpp"
#include "postclust/rng.hpp"
#include "json.hpp"

namespace postclust {

namespace {

// Stream tags for per-replicate substreams.
constexpr std::uint64_t kDataStream = 0;
constexpr std::uint64_t kMethodStream = 1;
constexpr std::uint64_t kChoiceStream = 2;

std::string design_name(SimDesign d) {
    return d == SimDesign::null_two_cluster ? "null_two_cluster" : "three_cluster_power";
}

SimDesign design_from_name(const std::string& s) {
    if (s == "null_two_cluster") return SimDesign::null_two_cluster;
    if (s == "three_cluster_power") return SimDesign::three_cluster_power;
    throw invalid_input("unknown design '" + s + "'");
}

Eigen::MatrixXd sample_rows(const Eigen::MatrixXd& means, const Eigen::MatrixXd& chol_lower,
                            std::uint64_t stream_seed) {
    Rng rng(stream_seed);
    const auto n = means.rows();
    const auto q = means.cols();
    Eigen::MatrixXd x(n, q);
    Eigen::VectorXd z(q);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < q; ++j) z(j) = rng.next_gaussian();
        x.row(i) = means.row(i) + (chol_lower * z).transpose();
    }
    return x;
}

} // namespace

void SimConfig::validate() const {
    if (n < 4) throw invalid_input("SimConfig: need n >= 4");
    if (q < 3) throw invalid_input("SimConfig: need q >= 3");
    if (!(rho >= 0.0 && rho < 1.0)) throw invalid_input("SimConfig: need 0 <= rho < 1");
    if (K < 2 || K > n) throw invalid_input("SimConfig: need 2 <= K <= n");
    if (replicates < 1) throw invalid_input("SimConfig: need replicates >= 1");
    if (!(alpha > 0.0 && alpha < 1.0)) throw invalid_input("SimConfig: need 0 < alpha < 1");
    if (t_max < 1) throw invalid_input("SimConfig: need t_max >= 1");
    ClusterMethod::from_name(method, K, 0, t_max); // validates the name
}

std::string SimConfig::to_json() const {
    nlohmann::json j;
    j["design"] = design_name(design);
    j["n"] = n;
    j["q"] = q;
    j["rho"] = rho;
    j["delta"] = delta;
    j["k"] = K;
    j["method"] = method;
    j["replicates"] = replicates;
    j["alpha"] = alpha;
    j["seed"] = seed;
    j["t_max"] = t_max;
    return j.dump(2);
}

SimConfig SimConfig::from_json(const std::string& text) {
    const auto j = nlohmann::json::parse(text);
    SimConfig cfg;
    cfg.design = design_from_name(j.value("design", design_name(cfg.design)));
    cfg.n = j.value("n", cfg.n);
    cfg.q = j.value("q", cfg.q);
    cfg.rho = j.value("rho", cfg.rho);
    cfg.delta = j.value("delta", cfg.delta);
    cfg.K = j.value("k", cfg.K);
    cfg.method = j.value("method", cfg.method);
    cfg.replicates = j.value("replicates", cfg.replicates);
    cfg.alpha = j.value("alpha", cfg.alpha);
    cfg.seed = j.value("seed", cfg.seed);
    cfg.t_max = j.value("t_max", cfg.t_max);
    cfg.validate();
    return cfg;
}

FeatureCovariance equicorrelated(int q, double rho) {
    Eigen::MatrixXd sigma = Eigen::MatrixXd::Constant(q, q, rho);
    sigma.diagonal().setOnes();
    return FeatureCovariance(sigma);
}

DataMatrix gen_null(const SimConfig& cfg, int replicate) {
    if (cfg.design != SimDesign::null_two_cluster)
        throw invalid_input("gen_null: config is not the null design");
    cfg.validate();
    Eigen::MatrixXd means = Eigen::MatrixXd::Zero(cfg.n, cfg.q);
    for (int i = 0; i < cfg.n; ++i) {
        if (i < cfg.n / 2) means(i, 0) = 1.0;
        else means(i, cfg.q - 1) = 1.0;
    }
    const Eigen::MatrixXd chol = Eigen::LLT<Eigen::MatrixXd>(equicorrelated(cfg.q, cfg.rho).sigma()).matrixL();
    return DataMatrix(sample_rows(means, chol, derive_seed(cfg.seed, static_cast<std::uint64_t>(replicate), kDataStream)));
}

std::pair<DataMatrix, std::vector<int>> gen_power(const SimConfig& cfg, int replicate) {
    if (cfg.design != SimDesign::three_cluster_power)
        throw invalid_input("gen_power: config is not the power design");
    cfg.validate();
    const int third = cfg.n / 3;
    const int rem = cfg.n - 3 * third; // nearest-thirds split when n % 3 != 0
    const int b1 = third + (rem > 0 ? 1 : 0);
    const int b2 = third + (rem > 1 ? 1 : 0);
    const int half = cfg.q / 2; // leading floor(q/2) features carry no signal

    std::vector<int> truth(static_cast<std::size_t>(cfg.n));
    Eigen::MatrixXd means = Eigen::MatrixXd::Zero(cfg.n, cfg.q);
    for (int i = 0; i < cfg.n; ++i) {
        const int block = i < b1 ? 0 : (i < b1 + b2 ? 1 : 2);
        truth[static_cast<std::size_t>(i)] = block;
        const double sign = block == 0 ? -1.0 : (block == 2 ? 1.0 : 0.0);
        for (int j = half; j < cfg.q; ++j) means(i, j) = sign * cfg.delta;
    }
    const Eigen::MatrixXd chol = Eigen::LLT<Eigen::MatrixXd>(equicorrelated(cfg.q, cfg.rho).sigma()).matrixL();
    DataMatrix x(sample_rows(means, chol, derive_seed(cfg.seed, static_cast<std::uint64_t>(replicate), kDataStream)));
    return {std::move(x), std::move(truth)};
}

namespace {

std::pair<int, int> pick_pair(Rng& rng, int k_eff) {
    const auto pairs = static_cast<std::uint64_t>(k_eff) * static_cast<std::uint64_t>(k_eff - 1) / 2;
    auto r = rng.next_below(pairs);
    for (int a = 0; a < k_eff; ++a) {
        const auto row = static_cast<std::uint64_t>(k_eff - 1 - a);
        if (r < row) return {a, a + 1 + static_cast<int>(r)};
        r -= row;
    }
    throw numeric_error("pick_pair: unreachable");
}

ClusterMethod replicate_method(const SimConfig& cfg, int replicate) {
    ClusterMethod m = ClusterMethod::from_name(cfg.method, cfg.K, 0, cfg.t_max);
    m.seed = derive_seed(cfg.seed, static_cast<std::uint64_t>(replicate), kMethodStream);
    return m;
}

} // namespace

std::vector<Type1Row> run_type1(const SimConfig& cfg) {
    cfg.validate();
    if (cfg.design != SimDesign::null_two_cluster)
        throw invalid_input("run_type1: config is not the null design");
    if (cfg.q < 4) throw invalid_input("run_type1: need q >= 4 for a feature in {2..q-1}");

    const FeatureCovariance sigma = equicorrelated(cfg.q, cfg.rho);
    std::vector<Type1Row> rows(static_cast<std::size_t>(cfg.replicates));
    parallel_for(cfg.replicates, [&](int rep) {
        const DataMatrix x = gen_null(cfg, rep);
        const ClusterMethod method = replicate_method(cfg, rep);
        const ClusterLabels labels = method.cluster(x);
        if (labels.K < 2) throw numeric_error("run_type1: clustering produced fewer than 2 clusters");

        Rng choice(derive_seed(cfg.seed, static_cast<std::uint64_t>(rep), kChoiceStream));
        const auto pair = pick_pair(choice, labels.K);
        // Uniform feature between 2 and q-1, stated 1-based; 0-based j in [1, q-2].
        const int j = 1 + static_cast<int>(choice.next_below(static_cast<std::uint64_t>(cfg.q - 2)));

        const TestReport report = run_test(x, sigma, method, pair, j, false);
        rows[static_cast<std::size_t>(rep)] =
            Type1Row{rep, j + 1, report.p_selective, report.p_naive};
    });
    return rows;
}

std::pair<PowerSummary, std::vector<PowerRow>> run_power(const SimConfig& cfg) {
    cfg.validate();
    if (cfg.design != SimDesign::three_cluster_power)
        throw invalid_input("run_power: config is not the power design");

    const FeatureCovariance sigma = equicorrelated(cfg.q, cfg.rho);
    const int half = cfg.q / 2;
    std::vector<PowerRow> rows(static_cast<std::size_t>(cfg.replicates));
    parallel_for(cfg.replicates, [&](int rep) {
        auto [x, truth] = gen_power(cfg, rep);
        const ClusterMethod method = replicate_method(cfg, rep);
        const ClusterLabels labels = method.cluster(x);
        if (labels.K < 2) throw numeric_error("run_power: clustering produced fewer than 2 clusters");

        Rng choice(derive_seed(cfg.seed, static_cast<std::uint64_t>(rep), kChoiceStream));
        const auto pair = pick_pair(choice, labels.K);
        const int j = static_cast<int>(choice.next_below(static_cast<std::uint64_t>(cfg.q)));

        const TestReport report = run_test(x, sigma, method, pair, j, false);

        // True-cluster match: both estimated groups equal some true block as sets.
        std::vector<std::vector<int>> blocks(3);
        for (int i = 0; i < cfg.n; ++i) blocks[static_cast<std::size_t>(truth[static_cast<std::size_t>(i)])].push_back(i);
        auto is_block = [&](const std::vector<int>& g) {
            return std::any_of(blocks.begin(), blocks.end(),
                               [&](const std::vector<int>& b) { return b == g; });
        };
        const bool correct = is_block(report.group_a) && is_block(report.group_b);

        // Effect size under the true means: block means differ only in the
        // trailing features, by delta per unit of block-sign difference.
        auto block_sign = [&](const std::vector<int>& g) {
            const int b = truth[static_cast<std::size_t>(g.front())];
            return b == 0 ? -1.0 : (b == 2 ? 1.0 : 0.0);
        };
        double effect = 0.0;
        if (j >= half && correct)
            effect = std::fabs(block_sign(report.group_a) - block_sign(report.group_b)) * cfg.delta;
        else if (j >= half) {
            // Mean of mu over arbitrary index sets.
            auto mean_mu = [&](const std::vector<int>& g) {
                double acc = 0.0;
                for (int i : g) {
                    const int b = truth[static_cast<std::size_t>(i)];
                    acc += (b == 0 ? -1.0 : (b == 2 ? 1.0 : 0.0)) * cfg.delta;
                }
                return acc / static_cast<double>(g.size());
            };
            effect = std::fabs(mean_mu(report.group_a) - mean_mu(report.group_b));
        }

        rows[static_cast<std::size_t>(rep)] = PowerRow{rep, j + 1, effect,
                                                       report.p_selective <= cfg.alpha ? 1 : 0,
                                                       correct ? 1 : 0, report.p_selective};
    });

    PowerSummary summary;
    summary.replicates = cfg.replicates;
    for (const auto& r : rows) {
        summary.correct_count += r.clusters_correct;
        if (r.clusters_correct && r.reject) ++summary.rejections_among_correct;
    }
    summary.detection_probability =
        static_cast<double>(summary.correct_count) / static_cast<double>(cfg.replicates);
    summary.conditional_power =
        summary.correct_count > 0
            ? static_cast<double>(summary.rejections_among_correct) /
                  static_cast<double>(summary.correct_count)
            : 0.0; // convention when no replicate recovers the true clusters
    return {summary, std::move(rows)};
}

double ks_uniform_pvalue(std::vector<double> values) {
    if (values.empty()) throw invalid_input("ks_uniform_pvalue: empty sample");
    std::sort(values.begin(), values.end());
    const auto n = static_cast<double>(values.size());
    double d = 0.0;
    for (std::size_t i = 0; i < values.size(); ++i) {
        const double lo = static_cast<double>(i) / n;
        const double hi = static_cast<double>(i + 1) / n;
        d = std::max({d, std::fabs(values[i] - lo), std::fabs(values[i] - hi)});
    }
    const double lambda = (std::sqrt(n) + 0.12 + 0.11 / std::sqrt(n)) * d;
    double p = 0.0;
    for (int k = 1; k <= 100; ++k) {
        const double term = 2.0 * (k % 2 == 1 ? 1.0 : -1.0) *
                            std::exp(-2.0 * static_cast<double>(k) * static_cast<double>(k) *
                                     lambda * lambda);
        p += term;
        if (std::fabs(term) < 1e-12) break;
    }
    return std::clamp(p, 0.0, 1.0);
}

} // namespace postclust
