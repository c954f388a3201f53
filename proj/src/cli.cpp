#include "postclust/cli.hpp"

#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"

#include "postclust/csv.hpp"
#include "postclust/errors.hpp"
#include "postclust/hier_truncation.hpp"
#include "postclust/inference.hpp"
#include "postclust/kmeans_truncation.hpp"
#include "postclust/oracle.hpp"
#include "postclust/preprocess.hpp"
#include "postclust/rng.hpp"
#include "postclust/sim.hpp"

namespace postclust {

namespace {

void write_text(const std::string& path, const std::string& text) {
    if (path == "-") {
        std::cout << text << "\n";
        return;
    }
    std::ofstream out(path);
    if (!out) throw numeric_error("cannot write '" + path + "'");
    out << text << "\n";
}

std::string read_text(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw numeric_error("cannot open '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

struct TestOptions {
    std::string data_path;
    std::string method = "average";
    int k = 3;
    std::string feature = "all"; // 1-based index or "all"
    std::string pair = "1,2";    // 1-based cluster labels
    std::string sigma = "estimate";
    std::uint64_t seed = 1;
    int t_max = 25;
    std::string out = "-";
    std::string pvals_out;
};

std::pair<int, int> parse_pair(const std::string& text) {
    const auto comma = text.find(',');
    if (comma == std::string::npos)
        throw invalid_input("--pair expects 'a,b' with 1-based cluster labels");
    const int a = std::stoi(text.substr(0, comma));
    const int b = std::stoi(text.substr(comma + 1));
    if (a < 1 || b < 1 || a == b) throw invalid_input("--pair expects two distinct labels >= 1");
    return {a - 1, b - 1};
}

int run_test_command(const TestOptions& opt) {
    const CsvTable table = read_csv(opt.data_path);
    const DataMatrix x(table.values);
    const ClusterMethod method = ClusterMethod::from_name(opt.method, opt.k, opt.seed, opt.t_max);

    bool estimated = false;
    FeatureCovariance sigma = FeatureCovariance::identity(x.q());
    if (opt.sigma == "estimate") {
        estimated = true;
        sigma = estimate_covariance(x, method.cluster(x));
    } else {
        const CsvTable stab = read_csv(opt.sigma);
        if (stab.values.rows() != x.q() || stab.values.cols() != x.q())
            throw numeric_error("--sigma file must be a " + std::to_string(x.q()) + "x" +
                                std::to_string(x.q()) + " matrix");
        sigma = FeatureCovariance(stab.values);
    }

    const auto pair = parse_pair(opt.pair);
    std::vector<int> features;
    if (opt.feature == "all") {
        for (int j = 0; j < x.q(); ++j) features.push_back(j);
    } else {
        const int j = std::stoi(opt.feature);
        if (j < 1 || j > x.q()) throw invalid_input("--feature out of range");
        features.push_back(j - 1);
    }

    nlohmann::json reports = nlohmann::json::array();
    Eigen::MatrixXd pvals(static_cast<Eigen::Index>(features.size()), 3);
    for (std::size_t idx = 0; idx < features.size(); ++idx) {
        const TestReport report = run_test(x, sigma, method, pair, features[idx], estimated);
        reports.push_back(nlohmann::json::parse(report.to_json()));
        pvals(static_cast<Eigen::Index>(idx), 0) = features[idx] + 1;
        pvals(static_cast<Eigen::Index>(idx), 1) = report.p_selective;
        pvals(static_cast<Eigen::Index>(idx), 2) = report.p_naive;
    }
    write_text(opt.out, features.size() == 1 ? reports[0].dump(2) : reports.dump(2));
    if (!opt.pvals_out.empty())
        write_csv(opt.pvals_out, {"feature", "p_selective", "p_naive"}, pvals);
    return 0;
}

struct SimOptions {
    std::string config_path;
    SimConfig cfg;
    std::string out = "-";
    std::string summary_out;
};

void apply_sim_flags(CLI::App* cmd, SimOptions& opt) {
    cmd->add_option("--config", opt.config_path, "JSON config; explicit flags override");
    cmd->add_option("--n", opt.cfg.n, "observations");
    cmd->add_option("--q", opt.cfg.q, "features");
    cmd->add_option("--rho", opt.cfg.rho, "feature equicorrelation");
    cmd->add_option("--k", opt.cfg.K, "clusters to estimate");
    cmd->add_option("--method", opt.cfg.method, "kmeans|single|average|centroid|ward");
    cmd->add_option("--replicates", opt.cfg.replicates, "replicate count");
    cmd->add_option("--alpha", opt.cfg.alpha, "test level");
    cmd->add_option("--seed", opt.cfg.seed, "campaign seed");
    cmd->add_option("--tmax", opt.cfg.t_max, "k-means iteration cap");
    cmd->add_option("--out", opt.out, "output CSV ('-' for stdout)");
    cmd->add_option("--summary-out", opt.summary_out, "summary JSON path");
}

void load_config_then_flags(const CLI::App* cmd, SimOptions& opt, SimDesign design) {
    SimConfig flags = opt.cfg; // values after CLI11 parsing
    if (!opt.config_path.empty()) opt.cfg = SimConfig::from_json(read_text(opt.config_path));
    opt.cfg.design = design;
    auto given = [&](const std::string& name) {
        const auto* option = cmd->get_option_no_throw(name);
        return option != nullptr && option->count() > 0;
    };
    if (given("--n")) opt.cfg.n = flags.n;
    if (given("--q")) opt.cfg.q = flags.q;
    if (given("--rho")) opt.cfg.rho = flags.rho;
    if (given("--delta")) opt.cfg.delta = flags.delta;
    if (given("--k")) opt.cfg.K = flags.K;
    if (given("--method")) opt.cfg.method = flags.method;
    if (given("--replicates")) opt.cfg.replicates = flags.replicates;
    if (given("--alpha")) opt.cfg.alpha = flags.alpha;
    if (given("--seed")) opt.cfg.seed = flags.seed;
    if (given("--tmax")) opt.cfg.t_max = flags.t_max;
    opt.cfg.validate();
}

int run_simulate_null(const CLI::App* cmd, SimOptions& opt) {
    load_config_then_flags(cmd, opt, SimDesign::null_two_cluster);
    const auto rows = run_type1(opt.cfg);
    Eigen::MatrixXd table(static_cast<Eigen::Index>(rows.size()), 4);
    int selective_rejects = 0, naive_rejects = 0;
    std::vector<double> selective;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        table(static_cast<Eigen::Index>(i), 0) = rows[i].replicate;
        table(static_cast<Eigen::Index>(i), 1) = rows[i].feature;
        table(static_cast<Eigen::Index>(i), 2) = rows[i].p_selective;
        table(static_cast<Eigen::Index>(i), 3) = rows[i].p_naive;
        selective.push_back(rows[i].p_selective);
        if (rows[i].p_selective <= opt.cfg.alpha) ++selective_rejects;
        if (rows[i].p_naive <= opt.cfg.alpha) ++naive_rejects;
    }
    if (opt.out == "-") {
        std::cout << "replicate,feature,p_selective,p_naive\n";
        for (const auto& r : rows)
            std::cout << r.replicate << "," << r.feature << "," << r.p_selective << ","
                      << r.p_naive << "\n";
    } else {
        write_csv(opt.out, {"replicate", "feature", "p_selective", "p_naive"}, table);
    }
    nlohmann::json summary;
    summary["config"] = nlohmann::json::parse(opt.cfg.to_json());
    summary["selective_rejection_rate"] =
        static_cast<double>(selective_rejects) / static_cast<double>(rows.size());
    summary["naive_rejection_rate"] =
        static_cast<double>(naive_rejects) / static_cast<double>(rows.size());
    summary["ks_uniform_p"] = ks_uniform_pvalue(selective);
    const std::string text = summary.dump(2);
    if (!opt.summary_out.empty()) write_text(opt.summary_out, text);
    else std::cerr << text << "\n";
    return 0;
}

int run_simulate_power(const CLI::App* cmd, SimOptions& opt) {
    load_config_then_flags(cmd, opt, SimDesign::three_cluster_power);
    const auto [summary, rows] = run_power(opt.cfg);
    Eigen::MatrixXd table(static_cast<Eigen::Index>(rows.size()), 6);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        table(static_cast<Eigen::Index>(i), 0) = rows[i].replicate;
        table(static_cast<Eigen::Index>(i), 1) = rows[i].feature;
        table(static_cast<Eigen::Index>(i), 2) = rows[i].effect;
        table(static_cast<Eigen::Index>(i), 3) = rows[i].reject;
        table(static_cast<Eigen::Index>(i), 4) = rows[i].clusters_correct;
        table(static_cast<Eigen::Index>(i), 5) = rows[i].p_selective;
    }
    const std::vector<std::string> header = {"replicate", "feature",          "effect",
                                             "reject",    "clusters_correct", "p_selective"};
    if (opt.out == "-") {
        std::cout << "replicate,feature,effect,reject,clusters_correct,p_selective\n";
        for (const auto& r : rows)
            std::cout << r.replicate << "," << r.feature << "," << r.effect << "," << r.reject
                      << "," << r.clusters_correct << "," << r.p_selective << "\n";
    } else {
        write_csv(opt.out, header, table);
    }
    nlohmann::json js;
    js["config"] = nlohmann::json::parse(opt.cfg.to_json());
    js["conditional_power"] = summary.conditional_power;
    js["detection_probability"] = summary.detection_probability;
    js["rejections_among_correct"] = summary.rejections_among_correct;
    js["correct_count"] = summary.correct_count;
    js["replicates"] = summary.replicates;
    const std::string text = js.dump(2);
    if (!opt.summary_out.empty()) write_text(opt.summary_out, text);
    else std::cout << text << "\n";
    return 0;
}

struct AdjustOptions {
    std::string in_path;
    std::string column = "p";
    std::string out = "-";
};

int run_adjust(const AdjustOptions& opt) {
    const CsvTable table = read_csv(opt.in_path);
    int col = table.column(opt.column);
    if (col < 0 && table.header.size() == 1) col = 0;
    if (col < 0) throw numeric_error("adjust: no column '" + opt.column + "' in input");
    std::vector<double> p(static_cast<std::size_t>(table.values.rows()));
    for (Eigen::Index i = 0; i < table.values.rows(); ++i) p[static_cast<std::size_t>(i)] = table.values(i, col);
    const auto adjusted = bh_adjust(p);

    Eigen::MatrixXd out(table.values.rows(), table.values.cols() + 1);
    out.leftCols(table.values.cols()) = table.values;
    for (Eigen::Index i = 0; i < out.rows(); ++i)
        out(i, table.values.cols()) = adjusted[static_cast<std::size_t>(i)];
    auto header = table.header;
    header.push_back(opt.column + "_bh");
    if (opt.out == "-") {
        for (std::size_t j = 0; j < header.size(); ++j)
            std::cout << header[j] << (j + 1 < header.size() ? "," : "\n");
        for (Eigen::Index i = 0; i < out.rows(); ++i)
            for (Eigen::Index j = 0; j < out.cols(); ++j)
                std::cout << out(i, j) << (j + 1 < out.cols() ? "," : "\n");
    } else {
        write_csv(opt.out, header, out);
    }
    return 0;
}

struct OracleOptions {
    int n = 12;
    int q = 2;
    std::string method = "average";
    int k = 2;
    std::uint64_t seed = 1;
    int points = 4001;
    double span = 6.0;
    int t_max = 6;
    std::string out = "-";
};

int run_oracle_check(const OracleOptions& opt) {
    Rng rng(derive_seed(opt.seed, 0));
    Eigen::MatrixXd m(opt.n, opt.q);
    for (int i = 0; i < opt.n; ++i)
        for (int j = 0; j < opt.q; ++j) m(i, j) = rng.next_gaussian();
    const DataMatrix x(m);
    const FeatureCovariance sigma = FeatureCovariance::identity(opt.q);
    const ClusterMethod method = ClusterMethod::from_name(opt.method, opt.k, opt.seed, opt.t_max);
    const int feature = static_cast<int>(rng.next_below(static_cast<std::uint64_t>(opt.q)));

    IntervalUnion analytic;
    GridScan scan;
    if (method.kind == ClusterMethod::Kind::kmeans) {
        const KMeansTrace trace = kmeans_lloyd(x, opt.k, opt.t_max, method.seed);
        const ClusterLabels labels = kmeans_labels(trace);
        if (labels.K < 2) throw numeric_error("oracle-check: fewer than 2 clusters");
        const auto groups = labels.groups();
        const Contrast c = make_contrast(groups[0], groups[1], opt.n);
        const PerturbationLine line(x, c, sigma, feature);
        analytic = truncation_set_kmeans(x, trace, line);
        scan = grid_membership_kmeans(line, trace, opt.t_max,
                                      phi_grid(line.anchor(), line.null_sd(), opt.points, opt.span));
    } else {
        const MergeSequence seq = hierarchical(x, method.linkage);
        const ClusterLabels labels = cut_dendrogram(seq, opt.k);
        const auto groups = labels.groups();
        const Contrast c = make_contrast(groups[0], groups[1], opt.n);
        const PerturbationLine line(x, c, sigma, feature);
        analytic = truncation_set_hier(x, line, seq, opt.k);
        scan = grid_membership_hier(line, seq, opt.k,
                                    phi_grid(line.anchor(), line.null_sd(), opt.points, opt.span));
    }

    std::size_t agree = 0;
    std::ostringstream csv;
    csv << "phi,member_analytic,member_grid\n";
    for (std::size_t g = 0; g < scan.phis.size(); ++g) {
        const bool analytic_member = analytic.contains(scan.phis[g]);
        const bool grid_member = scan.member[g] != 0;
        if (analytic_member == grid_member) ++agree;
        csv << scan.phis[g] << "," << (analytic_member ? 1 : 0) << "," << (grid_member ? 1 : 0)
            << "\n";
    }
    if (opt.out == "-") std::cout << csv.str();
    else write_text(opt.out, csv.str());
    std::cerr << "agreement " << agree << "/" << scan.phis.size() << " ("
              << 100.0 * static_cast<double>(agree) / static_cast<double>(scan.phis.size())
              << "%)\n";
    return 0;
}

struct PreprocessOptions {
    std::string in_path;
    double min_total = 1.0;
    int top_k = 500;
    std::string out = "-";
};

int run_preprocess(const PreprocessOptions& opt) {
    const CsvTable table = read_csv(opt.in_path);
    const PreprocessResult result = preprocess_counts(table.values, opt.min_total, opt.top_k);
    std::vector<std::string> header;
    for (int col : result.kept_cols) header.push_back(table.header[static_cast<std::size_t>(col)]);
    if (opt.out == "-") {
        for (std::size_t j = 0; j < header.size(); ++j)
            std::cout << header[j] << (j + 1 < header.size() ? "," : "\n");
        std::cout.precision(17);
        for (Eigen::Index i = 0; i < result.matrix.rows(); ++i)
            for (Eigen::Index j = 0; j < result.matrix.cols(); ++j)
                std::cout << result.matrix(i, j) << (j + 1 < result.matrix.cols() ? "," : "\n");
    } else {
        write_csv(opt.out, header, result.matrix);
    }
    return 0;
}

} // namespace

int cli_main(const std::vector<std::string>& args) {
    CLI::App app{"selective tests for feature mean differences between estimated clusters"};
    app.require_subcommand(1);

    TestOptions test_opt;
    auto* test_cmd = app.add_subcommand("test", "test one cluster pair on a data CSV");
    test_cmd->add_option("--data", test_opt.data_path, "data CSV (header row)")->required();
    test_cmd->add_option("--method", test_opt.method, "kmeans|single|average|centroid|ward");
    test_cmd->add_option("--k", test_opt.k, "clusters to estimate");
    test_cmd->add_option("--feature", test_opt.feature, "1-based feature index or 'all'");
    test_cmd->add_option("--pair", test_opt.pair, "1-based cluster labels, e.g. 1,2");
    test_cmd->add_option("--sigma", test_opt.sigma, "covariance CSV path or 'estimate'");
    test_cmd->add_option("--seed", test_opt.seed, "k-means seed");
    test_cmd->add_option("--tmax", test_opt.t_max, "k-means iteration cap");
    test_cmd->add_option("--out", test_opt.out, "report JSON ('-' for stdout)");
    test_cmd->add_option("--pvals-out", test_opt.pvals_out, "optional p-value CSV");

    SimOptions null_opt;
    auto* null_cmd = app.add_subcommand("simulate-null", "calibration campaign (two-block null)");
    apply_sim_flags(null_cmd, null_opt);

    SimOptions power_opt;
    power_opt.cfg.design = SimDesign::three_cluster_power;
    power_opt.cfg.n = 150;
    power_opt.cfg.replicates = 500;
    power_opt.cfg.method = "average";
    auto* power_cmd = app.add_subcommand("simulate-power", "power campaign (three true blocks)");
    apply_sim_flags(power_cmd, power_opt);
    power_cmd->add_option("--delta", power_opt.cfg.delta, "mean separation");

    AdjustOptions adjust_opt;
    auto* adjust_cmd = app.add_subcommand("adjust", "Benjamini-Hochberg adjustment of a p-value CSV");
    adjust_cmd->add_option("--in", adjust_opt.in_path, "input CSV")->required();
    adjust_cmd->add_option("--column", adjust_opt.column, "p-value column name (default 'p')");
    adjust_cmd->add_option("--out", adjust_opt.out, "output CSV ('-' for stdout)");

    OracleOptions oracle_opt;
    auto* oracle_cmd = app.add_subcommand("oracle-check", "grid-oracle agreement on a random instance");
    oracle_cmd->add_option("--n", oracle_opt.n, "observations");
    oracle_cmd->add_option("--q", oracle_opt.q, "features");
    oracle_cmd->add_option("--method", oracle_opt.method, "kmeans|single|average|centroid|ward");
    oracle_cmd->add_option("--k", oracle_opt.k, "clusters");
    oracle_cmd->add_option("--seed", oracle_opt.seed, "instance seed");
    oracle_cmd->add_option("--points", oracle_opt.points, "grid points");
    oracle_cmd->add_option("--span", oracle_opt.span, "grid half-width in null sds");
    oracle_cmd->add_option("--tmax", oracle_opt.t_max, "k-means iteration cap");
    oracle_cmd->add_option("--out", oracle_opt.out, "scan CSV ('-' for stdout)");

    PreprocessOptions pre_opt;
    auto* pre_cmd = app.add_subcommand("preprocess", "counts CSV -> normalized log2 matrix");
    pre_cmd->add_option("--in", pre_opt.in_path, "counts CSV")->required();
    pre_cmd->add_option("--min-total", pre_opt.min_total, "minimum row total to keep");
    pre_cmd->add_option("--top-k", pre_opt.top_k, "columns kept by sample variance");
    pre_cmd->add_option("--out", pre_opt.out, "output CSV ('-' for stdout)");

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 1;
    }

    try {
        if (test_cmd->parsed()) return run_test_command(test_opt);
        if (null_cmd->parsed()) return run_simulate_null(null_cmd, null_opt);
        if (power_cmd->parsed()) return run_simulate_power(power_cmd, power_opt);
        if (adjust_cmd->parsed()) return run_adjust(adjust_opt);
        if (oracle_cmd->parsed()) return run_oracle_check(oracle_opt);
        if (pre_cmd->parsed()) return run_preprocess(pre_opt);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 1;
}

int cli_main(int argc, char** argv) {
    std::vector<std::string> args;
    for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
    return cli_main(args);
}

} // namespace postclust
