#include "postclust/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "postclust/errors.hpp"
#include "postclust/rng.hpp"

namespace postclust {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// ---- extended-precision Gauss-Legendre quadrature -------------------------

struct GaussLegendre {
    std::vector<long double> nodes;   // on (-1, 1)
    std::vector<long double> weights;
};

// Nodes and weights by Newton iteration on the Legendre recurrence.
GaussLegendre gl_rule(int order) {
    GaussLegendre rule;
    rule.nodes.resize(static_cast<std::size_t>(order));
    rule.weights.resize(static_cast<std::size_t>(order));
    const long double pi = 3.14159265358979323846264338327950288L;
    for (int i = 0; i < order; ++i) {
        long double x = std::cos(static_cast<double>(pi * (i + 0.75L) / (order + 0.5L)));
        long double dp = 0.0L;
        for (int iter = 0; iter < 100; ++iter) {
            long double p0 = 1.0L, p1 = x;
            for (int k = 2; k <= order; ++k) {
                const long double p2 = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            dp = order * (x * p1 - p0) / (x * x - 1.0L);
            const long double step = p1 / dp;
            x -= step;
            if (fabsl(step) < 1e-19L) break;
        }
        rule.nodes[static_cast<std::size_t>(i)] = x;
        rule.weights[static_cast<std::size_t>(i)] = 2.0L / ((1.0L - x * x) * dp * dp);
    }
    return rule;
}

const GaussLegendre& gl20() {
    static const GaussLegendre rule = gl_rule(20);
    return rule;
}

template <typename F>
long double gl_panel(const F& f, long double a, long double b) {
    const auto& rule = gl20();
    const long double mid = 0.5L * (a + b);
    const long double half = 0.5L * (b - a);
    long double acc = 0.0L;
    for (std::size_t i = 0; i < rule.nodes.size(); ++i)
        acc += rule.weights[i] * f(mid + half * rule.nodes[i]);
    return acc * half;
}

template <typename F>
long double adaptive_gl(const F& f, long double a, long double b, int& budget, int depth) {
    const long double whole = gl_panel(f, a, b);
    const long double mid = 0.5L * (a + b);
    const long double halves = gl_panel(f, a, mid) + gl_panel(f, mid, b);
    // Comparisons stay in long double: panel values this far into a tail
    // underflow double entirely.
    const long double diff = fabsl(whole - halves);
    const long double scale = std::max(fabsl(halves), 1e-4300L);
    if (diff <= 1e-16L * scale || depth >= 40) return halves;
    if (--budget <= 0) throw numeric_error("quadrature_trunc_cdf: refinement budget exhausted");
    return adaptive_gl(f, a, mid, budget, depth + 1) + adaptive_gl(f, mid, b, budget, depth + 1);
}

// Integral of exp(-z^2/2) over the standardized interval [a, b] (finite).
long double gauss_piece(long double a, long double b, int& budget) {
    if (!(a < b)) return 0.0L;
    const auto density = [](long double z) { return std::exp(static_cast<long double>(-0.5L * z * z)); };
    return adaptive_gl(density, a, b, budget, 0);
}

// Clips an infinite standardized endpoint to where the remaining tail is
// negligible relative to the piece.
long double clip_hi(long double lo) { return lo >= 0.0L ? lo + 24.0L : 48.0L; }
long double clip_lo(long double hi) { return hi <= 0.0L ? hi - 24.0L : -48.0L; }

} // namespace

double quadrature_trunc_cdf(double t, double mean, double sd, const IntervalUnion& s) {
    if (!(sd > 0.0)) throw invalid_input("quadrature_trunc_cdf: need sd > 0");
    if (s.is_empty()) throw invalid_input("quadrature_trunc_cdf: empty support");
    int budget = 200000;
    long double total = 0.0L;
    long double below = 0.0L;
    const long double ts = (static_cast<long double>(t) - mean) / sd;
    for (const auto& p : s.intervals()) {
        long double lo = (static_cast<long double>(p.lo) - mean) / sd;
        long double hi = (static_cast<long double>(p.hi) - mean) / sd;
        if (p.lo == -kInf) lo = clip_lo(hi);
        if (p.hi == kInf) hi = clip_hi(lo);
        total += gauss_piece(lo, hi, budget);
        below += gauss_piece(lo, std::min(hi, ts), budget);
    }
    if (!(total > 0.0L))
        throw numeric_error("quadrature_trunc_cdf: support mass vanished even in extended precision");
    const long double ratio = below / total;
    return static_cast<double>(std::min(ratio, 1.0L));
}

// ---- Monte-Carlo selective p-value ----------------------------------------

namespace {

// Survival function in extended precision; good to ~1e-18 relative for
// z below ~100, which covers every support the harness generates.
long double normal_sf_ld(long double z) {
    const long double inv_sqrt2 = 0.70710678118654752440084436210484904L;
    return 0.5L * std::erfc(z * inv_sqrt2);
}

long double interval_mass_ld(double lo, double hi, double sd) {
    const long double a = static_cast<long double>(lo) / sd;
    const long double b = static_cast<long double>(hi) / sd;
    if (!(a < b)) return 0.0L;
    if (a >= 0.0L) return normal_sf_ld(a) - (b == kInf ? 0.0L : normal_sf_ld(b));
    if (b <= 0.0L) return normal_sf_ld(-b) - (a == -kInf ? 0.0L : normal_sf_ld(-a));
    long double left = (a == -kInf) ? 0.0L : normal_sf_ld(-a);
    long double right = (b == kInf) ? 0.0L : normal_sf_ld(b);
    return 1.0L - left - right;
}

// Conditional standard normal draw on [a, b] with 0 <= a < b. Exponential
// proposal in the tail (Robert's sampler), uniform proposal for short
// intervals near the mode.
double sample_right_interval(Rng& rng, double a, double b) {
    if (a >= 0.75 && (b - a) > 0.5 / std::max(a, 1.0)) {
        const double lambda = 0.5 * (a + std::sqrt(a * a + 4.0));
        for (int tries = 0; tries < 100000; ++tries) {
            double u = rng.next_double();
            while (u <= 0.0) u = rng.next_double();
            const double z = a - std::log(u) / lambda;
            const double d = z - lambda;
            if (rng.next_double() <= std::exp(-0.5 * d * d) && z <= b) return z;
        }
        throw numeric_error("mc_selective_p: tail sampler starved");
    }
    const double mode = std::clamp(0.0, a, b);
    const double fmax = std::exp(-0.5 * mode * mode);
    for (int tries = 0; tries < 1000000; ++tries) {
        const double z = a + (b - a) * rng.next_double();
        if (rng.next_double() * fmax <= std::exp(-0.5 * z * z)) return z;
    }
    throw numeric_error("mc_selective_p: interval sampler starved");
}

double sample_std_interval(Rng& rng, double a, double b) {
    if (a >= 0.0) return sample_right_interval(rng, a, std::isinf(b) ? kInf : b);
    if (b <= 0.0) return -sample_right_interval(rng, -b, std::isinf(a) ? kInf : -a);
    // Straddles the mode: plain rejection against the full normal.
    for (int tries = 0; tries < 1000000; ++tries) {
        const double z = rng.next_gaussian();
        if (z >= a && z <= b) return z;
    }
    throw numeric_error("mc_selective_p: bulk sampler starved");
}

} // namespace

McEstimate mc_selective_p(double statistic, double sd, const IntervalUnion& s,
                          std::uint64_t draws, std::uint64_t seed) {
    if (draws < 10000) throw invalid_input("mc_selective_p: need at least 1e4 draws");
    if (!(sd > 0.0)) throw invalid_input("mc_selective_p: need sd > 0");
    if (s.is_empty()) throw invalid_input("mc_selective_p: empty support");

    const double z_stat = std::fabs(statistic) / sd;

    std::vector<long double> masses;
    long double total = 0.0L;
    for (const auto& p : s.intervals()) {
        const long double m = interval_mass_ld(p.lo, p.hi, sd);
        masses.push_back(m);
        total += m;
    }
    if (!(total > 0.0L)) throw numeric_error("mc_selective_p: support mass underflows");

    Rng rng(seed);
    McEstimate out;

    if (static_cast<double>(total) >= 1e-3) {
        std::uint64_t accepted = 0, extreme = 0;
        for (std::uint64_t d = 0; d < draws; ++d) {
            const double z = rng.next_gaussian();
            if (!s.contains(z * sd, 0.0)) continue;
            ++accepted;
            if (std::fabs(z) >= z_stat) ++extreme;
        }
        if (accepted == 0) throw numeric_error("mc_selective_p: zero accepted draws");
        const double p = static_cast<double>(extreme) / static_cast<double>(accepted);
        out.estimate = p;
        out.stderr_est = std::sqrt(p * (1.0 - p) / static_cast<double>(accepted));
        out.accepted = accepted;
        return out;
    }

    // Starved: reweight by interval, sampling each conditional piece directly.
    out.stratified = true;
    double estimate = 0.0;
    double variance = 0.0;
    std::uint64_t accepted_total = 0;
    for (std::size_t idx = 0; idx < masses.size(); ++idx) {
        const double w = static_cast<double>(masses[idx] / total);
        if (!(w > 0.0)) continue;
        const auto n_i = std::max<std::uint64_t>(
            64, static_cast<std::uint64_t>(w * static_cast<double>(draws)));
        const double a = s.intervals()[idx].lo / sd;
        const double b = s.intervals()[idx].hi / sd;
        std::uint64_t extreme = 0;
        for (std::uint64_t d = 0; d < n_i; ++d) {
            const double z = sample_std_interval(rng, a, b);
            if (std::fabs(z) >= z_stat) ++extreme;
        }
        const double p_i = static_cast<double>(extreme) / static_cast<double>(n_i);
        estimate += w * p_i;
        variance += w * w * p_i * (1.0 - p_i) / static_cast<double>(n_i);
        accepted_total += n_i;
    }
    out.estimate = estimate;
    out.stderr_est = std::sqrt(variance);
    out.accepted = accepted_total;
    return out;
}

// ---- grid re-clustering scans ---------------------------------------------

std::size_t GridScan::count_member() const {
    return static_cast<std::size_t>(std::count(member.begin(), member.end(), char(1)));
}

std::vector<double> phi_grid(double center, double sd, int points, double span_sd) {
    if (points < 2) throw invalid_input("phi_grid: need at least 2 points");
    std::vector<double> grid(static_cast<std::size_t>(points));
    const double lo = center - span_sd * sd;
    const double hi = center + span_sd * sd;
    for (int i = 0; i < points; ++i)
        grid[static_cast<std::size_t>(i)] =
            lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(points - 1);
    return grid;
}

GridScan grid_membership_hier(const PerturbationLine& line, const MergeSequence& reference,
                              int K, const std::vector<double>& grid, HierCompare compare) {
    const ClusterLabels ref_labels = cut_dendrogram(reference, K);
    const int prefix = reference.n - K;
    GridScan scan;
    scan.phis = grid;
    scan.member.resize(grid.size(), 0);
    for (std::size_t g = 0; g < grid.size(); ++g) {
        const DataMatrix moved = perturb(line, grid[g]);
        const MergeSequence seq = hierarchical(moved, reference.linkage);
        bool same = true;
        if (compare == HierCompare::merge_prefix) {
            for (int l = 0; l < prefix && same; ++l)
                same = seq.merges[static_cast<std::size_t>(l)].left ==
                           reference.merges[static_cast<std::size_t>(l)].left &&
                       seq.merges[static_cast<std::size_t>(l)].right ==
                           reference.merges[static_cast<std::size_t>(l)].right;
        } else {
            same = cut_dendrogram(seq, K).labels == ref_labels.labels;
        }
        scan.member[g] = same ? 1 : 0;
    }
    return scan;
}

GridScan grid_membership_kmeans(const PerturbationLine& line, const KMeansTrace& reference,
                                int t_max, const std::vector<double>& grid) {
    GridScan scan;
    scan.phis = grid;
    scan.member.resize(grid.size(), 0);
    for (std::size_t g = 0; g < grid.size(); ++g) {
        const DataMatrix moved = perturb(line, grid[g]);
        const KMeansTrace rerun = kmeans_lloyd(moved, reference.K, t_max, reference.seed);
        scan.member[g] = rerun.assignments == reference.assignments ? 1 : 0;
    }
    return scan;
}

} // namespace postclust
