#include "postclust/clustering.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include "postclust/errors.hpp"
#include "postclust/rng.hpp"

namespace postclust {

Linkage linkage_from_string(const std::string& name) {
    if (name == "single") return Linkage::single;
    if (name == "average") return Linkage::average;
    if (name == "centroid") return Linkage::centroid;
    if (name == "ward") return Linkage::ward;
    throw invalid_input("unknown linkage '" + name + "'");
}

std::string to_string(Linkage l) {
    switch (l) {
        case Linkage::single: return "single";
        case Linkage::average: return "average";
        case Linkage::centroid: return "centroid";
        case Linkage::ward: return "ward";
    }
    return "?";
}

std::vector<std::vector<int>> ClusterLabels::groups() const {
    std::vector<std::vector<int>> g(static_cast<std::size_t>(K));
    for (std::size_t i = 0; i < labels.size(); ++i)
        g[static_cast<std::size_t>(labels[i])].push_back(static_cast<int>(i));
    return g;
}

namespace {

// Triangular storage over cluster ids 0..2n-2.
inline std::size_t tri_index(int lo, int hi) {
    return static_cast<std::size_t>(hi) * (static_cast<std::size_t>(hi) - 1) / 2 +
           static_cast<std::size_t>(lo);
}

} // namespace

// Lance-Williams coefficients for linkage distance over squared Euclidean
// base distances:
//   d(A+B, C) = alpha_a d(A,C) + alpha_b d(B,C) + beta d(A,B) + gamma |d(A,C) - d(B,C)|
double lance_williams(Linkage linkage, double d_ac, double d_bc, double d_ab,
                      double size_a, double size_b, double size_c) {
    switch (linkage) {
        case Linkage::single:
            return 0.5 * d_ac + 0.5 * d_bc - 0.5 * std::fabs(d_ac - d_bc);
        case Linkage::average: {
            const double total = size_a + size_b;
            return (size_a * d_ac + size_b * d_bc) / total;
        }
        case Linkage::centroid: {
            const double total = size_a + size_b;
            return (size_a * d_ac + size_b * d_bc) / total -
                   (size_a * size_b) * d_ab / (total * total);
        }
        case Linkage::ward: {
            const double total = size_a + size_b + size_c;
            return ((size_a + size_c) * d_ac + (size_b + size_c) * d_bc - size_c * d_ab) / total;
        }
    }
    return 0.0;
}

MergeSequence hierarchical(const DataMatrix& x, Linkage linkage) {
    const int n = x.n();
    MergeSequence seq;
    seq.n = n;
    seq.linkage = linkage;
    seq.merges.reserve(static_cast<std::size_t>(n - 1));

    const int max_id = 2 * n - 1;
    std::vector<double> dist(tri_index(0, max_id), 0.0);
    std::vector<double> size(static_cast<std::size_t>(max_id), 0.0);

    for (int i = 0; i < n; ++i) size[static_cast<std::size_t>(i)] = 1.0;
    for (int k = 1; k < n; ++k)
        for (int i = 0; i < k; ++i)
            dist[tri_index(i, k)] = (x.values().row(i) - x.values().row(k)).squaredNorm();

    std::vector<int> alive(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) alive[static_cast<std::size_t>(i)] = i;

    for (int step = 0; step < n - 1; ++step) {
        // Full scan in lexicographic (id_lo, id_hi) order; strict < keeps the
        // first (lexicographically smallest) pair among ties.
        double best = std::numeric_limits<double>::infinity();
        std::size_t bi = 0, bj = 0;
        for (std::size_t i = 0; i + 1 < alive.size(); ++i) {
            for (std::size_t j = i + 1; j < alive.size(); ++j) {
                const double d = dist[tri_index(alive[i], alive[j])];
                if (d < best) {
                    best = d;
                    bi = i;
                    bj = j;
                }
            }
        }
        if (!std::isfinite(best)) throw numeric_error("hierarchical: non-finite linkage distance");

        const int a = alive[bi];
        const int b = alive[bj];
        const int merged = n + step;
        seq.merges.push_back({a, b, best});

        const double d_ab = best;
        for (std::size_t t = 0; t < alive.size(); ++t) {
            if (t == bi || t == bj) continue;
            const int c = alive[t];
            const double d_ac = dist[tri_index(std::min(a, c), std::max(a, c))];
            const double d_bc = dist[tri_index(std::min(b, c), std::max(b, c))];
            dist[tri_index(c, merged)] = lance_williams(linkage, d_ac, d_bc, d_ab,
                                                        size[static_cast<std::size_t>(a)],
                                                        size[static_cast<std::size_t>(b)],
                                                        size[static_cast<std::size_t>(c)]);
        }
        size[static_cast<std::size_t>(merged)] =
            size[static_cast<std::size_t>(a)] + size[static_cast<std::size_t>(b)];

        alive.erase(alive.begin() + static_cast<std::ptrdiff_t>(bj));
        alive.erase(alive.begin() + static_cast<std::ptrdiff_t>(bi));
        alive.push_back(merged); // largest id so far: list stays sorted
    }
    return seq;
}

ClusterLabels cut_dendrogram(const MergeSequence& m, int K) {
    const int n = m.n;
    if (K < 1 || K > n) throw invalid_input("cut_dendrogram: K out of range");
    std::vector<int> comp(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) comp[static_cast<std::size_t>(i)] = i;
    for (int l = 0; l < n - K; ++l) {
        const Merge& mg = m.merges[static_cast<std::size_t>(l)];
        const int fresh = n + l;
        for (auto& c : comp)
            if (c == mg.left || c == mg.right) c = fresh;
    }
    // Number components by smallest member index.
    std::map<int, int> relabel; // component id -> label
    ClusterLabels out;
    out.labels.resize(static_cast<std::size_t>(n));
    int next = 0;
    for (int i = 0; i < n; ++i) {
        auto [it, inserted] = relabel.try_emplace(comp[static_cast<std::size_t>(i)], next);
        if (inserted) ++next;
        out.labels[static_cast<std::size_t>(i)] = it->second;
    }
    out.K = next;
    return out;
}

namespace {

std::vector<int> assign_to_centroids(const Eigen::MatrixXd& values, const Eigen::MatrixXd& centroids) {
    const int n = static_cast<int>(values.rows());
    const int K = static_cast<int>(centroids.rows());
    std::vector<int> c(static_cast<std::size_t>(n), 0);
    for (int i = 0; i < n; ++i) {
        double best = std::numeric_limits<double>::infinity();
        int arg = 0;
        for (int k = 0; k < K; ++k) {
            const double d = (values.row(i) - centroids.row(k)).squaredNorm();
            if (d < best) { // strict: ties keep the lowest cluster index
                best = d;
                arg = k;
            }
        }
        c[static_cast<std::size_t>(i)] = arg;
    }
    return c;
}

} // namespace

KMeansTrace kmeans_lloyd(const DataMatrix& x, int K, int t_max, std::uint64_t seed) {
    const int n = x.n();
    if (K < 2 || K > n) throw invalid_input("kmeans_lloyd: need 2 <= K <= n");
    if (t_max < 1) throw invalid_input("kmeans_lloyd: need t_max >= 1");

    KMeansTrace trace;
    trace.K = K;
    trace.seed = seed;
    Rng rng(seed);
    trace.init_rows = rng.sample_without_replacement(n, K);

    Eigen::MatrixXd centroids(K, x.q());
    for (int k = 0; k < K; ++k) centroids.row(k) = x.values().row(trace.init_rows[static_cast<std::size_t>(k)]);

    trace.assignments.push_back(assign_to_centroids(x.values(), centroids));

    for (int t = 1; t <= t_max; ++t) {
        const std::vector<int> prev = trace.assignments.back(); // copy: push_back below reallocates
        Eigen::MatrixXd sums = Eigen::MatrixXd::Zero(K, x.q());
        std::vector<int> counts(static_cast<std::size_t>(K), 0);
        for (int i = 0; i < n; ++i) {
            sums.row(prev[static_cast<std::size_t>(i)]) += x.values().row(i);
            ++counts[static_cast<std::size_t>(prev[static_cast<std::size_t>(i)])];
        }
        for (int k = 0; k < K; ++k) {
            if (counts[static_cast<std::size_t>(k)] > 0) {
                centroids.row(k) = sums.row(k) / static_cast<double>(counts[static_cast<std::size_t>(k)]);
            } else {
                trace.carried.emplace_back(t, k); // keeps centroids.row(k) as-is
            }
        }
        trace.assignments.push_back(assign_to_centroids(x.values(), centroids));
        if (trace.assignments.back() == prev) {
            trace.converged = true;
            break;
        }
    }
    return trace;
}

ClusterLabels kmeans_labels(const KMeansTrace& trace) {
    if (trace.assignments.empty()) throw invalid_input("kmeans_labels: empty trace");
    const std::vector<int>& final = trace.assignments.back();
    std::vector<int> remap(static_cast<std::size_t>(trace.K), -1);
    ClusterLabels out;
    out.labels.resize(final.size());
    int next = 0;
    for (int k = 0; k < trace.K; ++k) {
        const bool used = std::find(final.begin(), final.end(), k) != final.end();
        if (used) remap[static_cast<std::size_t>(k)] = next++;
    }
    for (std::size_t i = 0; i < final.size(); ++i)
        out.labels[i] = remap[static_cast<std::size_t>(final[i])];
    out.K = next;
    return out;
}

double within_cluster_ss(const DataMatrix& x, const std::vector<int>& labels) {
    if (labels.size() != static_cast<std::size_t>(x.n()))
        throw invalid_input("within_cluster_ss: label length mismatch");
    const int K = 1 + *std::max_element(labels.begin(), labels.end());
    Eigen::MatrixXd sums = Eigen::MatrixXd::Zero(K, x.q());
    std::vector<int> counts(static_cast<std::size_t>(K), 0);
    for (int i = 0; i < x.n(); ++i) {
        sums.row(labels[static_cast<std::size_t>(i)]) += x.values().row(i);
        ++counts[static_cast<std::size_t>(labels[static_cast<std::size_t>(i)])];
    }
    double total = 0.0;
    for (int i = 0; i < x.n(); ++i) {
        const int k = labels[static_cast<std::size_t>(i)];
        const Eigen::RowVectorXd mean = sums.row(k) / static_cast<double>(counts[static_cast<std::size_t>(k)]);
        total += (x.values().row(i) - mean).squaredNorm();
    }
    return total;
}

} // namespace postclust
