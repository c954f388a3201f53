#include "postclust/hier_truncation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <unordered_set>

#include "postclust/errors.hpp"

namespace postclust {

PairQuadratic pairwise_quadratic(const DataMatrix& x, const PerturbationLine& line,
                                 int i, int k) {
    if (i == k) throw invalid_input("pairwise_quadratic: need i != k");
    PairQuadratic pq;
    pq.i = i;
    pq.k = k;
    const double d = line.row_direction()(i) - line.row_direction()(k);
    pq.a = d * d * line.w_sq_norm();
    pq.b = 2.0 * d * (line.row_dots()(i) - line.row_dots()(k));
    pq.c = (x.values().row(i) - x.values().row(k)).squaredNorm();
    return pq;
}

namespace {

constexpr double kConstWinTol = 1e-8;

inline std::size_t tri_index(int lo, int hi) {
    return static_cast<std::size_t>(hi) * (static_cast<std::size_t>(hi) - 1) / 2 +
           static_cast<std::size_t>(lo);
}

struct Triple {
    double a, b, c;
};

// Replays m on Lance-Williams-updated coefficient triples (average, Ward and
// centroid linkage are linear in the distances, so the quadratic coefficients
// propagate exactly).
class TripleReplay {
public:
    TripleReplay(const DataMatrix& x, const PerturbationLine& line, const MergeSequence& m)
        : linkage_(m.linkage), n_(m.n) {
        const int max_id = 2 * n_ - 1;
        a_.assign(tri_index(0, max_id), 0.0);
        b_.assign(tri_index(0, max_id), 0.0);
        c_.assign(tri_index(0, max_id), 0.0);
        size_.assign(static_cast<std::size_t>(max_id), 0.0);
        alive_.resize(static_cast<std::size_t>(n_));
        for (int i = 0; i < n_; ++i) {
            alive_[static_cast<std::size_t>(i)] = i;
            size_[static_cast<std::size_t>(i)] = 1.0;
        }
        for (int k = 1; k < n_; ++k) {
            for (int i = 0; i < k; ++i) {
                const auto pq = pairwise_quadratic(x, line, i, k);
                const auto idx = tri_index(i, k);
                a_[idx] = pq.a;
                b_[idx] = pq.b;
                c_[idx] = pq.c;
            }
        }
    }

    Triple triple(int p, int q) const {
        const auto idx = tri_index(std::min(p, q), std::max(p, q));
        return {a_[idx], b_[idx], c_[idx]};
    }

    const std::vector<int>& alive() const { return alive_; }

    bool is_alive(int id) const {
        return std::find(alive_.begin(), alive_.end(), id) != alive_.end();
    }

    // Merges the recorded pair of step l and returns the id it creates.
    int apply_merge(const Merge& mg, int step) {
        const int a = mg.left, b = mg.right;
        if (!is_alive(a) || !is_alive(b) || a == b)
            throw inconsistency_error("merge_constraints: merge references a cluster that is not alive");
        const int merged = n_ + step;
        const double sa = size_[static_cast<std::size_t>(a)];
        const double sb = size_[static_cast<std::size_t>(b)];
        const Triple ab = triple(a, b);
        for (int c : alive_) {
            if (c == a || c == b) continue;
            const double sc = size_[static_cast<std::size_t>(c)];
            const Triple ac = triple(a, c);
            const Triple bc = triple(b, c);
            const auto idx = tri_index(c, merged);
            a_[idx] = lance_williams(linkage_, ac.a, bc.a, ab.a, sa, sb, sc);
            b_[idx] = lance_williams(linkage_, ac.b, bc.b, ab.b, sa, sb, sc);
            c_[idx] = lance_williams(linkage_, ac.c, bc.c, ab.c, sa, sb, sc);
        }
        size_[static_cast<std::size_t>(merged)] = sa + sb;
        drop_alive(a);
        drop_alive(b);
        alive_.push_back(merged);
        return merged;
    }

private:
    void drop_alive(int id) {
        alive_.erase(std::find(alive_.begin(), alive_.end(), id));
    }

    Linkage linkage_;
    int n_;
    std::vector<double> a_, b_, c_;
    std::vector<double> size_;
    std::vector<int> alive_;
};

void emit(std::vector<QuadraticInequality>& out, const Triple& winner, const Triple& loser) {
    const double da = winner.a - loser.a;
    const double db = winner.b - loser.b;
    const double dc = winner.c - loser.c;
    if (da == 0.0 && db == 0.0) {
        // psi-free comparison: true by construction at the observed data.
        const double scale = std::max({std::fabs(winner.c), std::fabs(loser.c), 1.0});
        if (dc > kConstWinTol * scale)
            throw inconsistency_error("merge_constraints: winner loses a psi-free comparison; "
                                      "merge sequence inconsistent with the data");
        return;
    }
    out.push_back({da, db, dc});
}

std::vector<QuadraticInequality> lw_constraints(const DataMatrix& x, const PerturbationLine& line,
                                                const MergeSequence& m, int steps, bool last_alive) {
    TripleReplay replay(x, line, m);
    std::vector<QuadraticInequality> out;
    for (int l = 0; l < steps; ++l) {
        const Merge& mg = m.merges[static_cast<std::size_t>(l)];
        if (!replay.is_alive(mg.left) || !replay.is_alive(mg.right))
            throw inconsistency_error("merge_constraints: merge references a cluster that is not alive");
        const Triple winner = replay.triple(mg.left, mg.right);
        const auto& alive = replay.alive();
        if (!last_alive || l == steps - 1) {
            // Winner against every other alive pair.
            for (std::size_t s = 0; s + 1 < alive.size(); ++s) {
                for (std::size_t t = s + 1; t < alive.size(); ++t) {
                    const int p = alive[s], q = alive[t];
                    if (p == mg.left && q == mg.right) continue;
                    emit(out, winner, replay.triple(p, q));
                }
            }
        } else {
            // Winner against every pair this merge removes from the alive set:
            // for monotone-height linkages that is each pair's binding step.
            for (int c : alive) {
                if (c == mg.left || c == mg.right) continue;
                emit(out, winner, replay.triple(mg.left, c));
                emit(out, winner, replay.triple(mg.right, c));
            }
        }
        replay.apply_merge(mg, l);
    }
    return out;
}

std::vector<QuadraticInequality> single_constraints(const DataMatrix& x,
                                                    const PerturbationLine& line,
                                                    const MergeSequence& m, int steps) {
    const int n = m.n;
    // Point-pair quadratics, cached.
    std::vector<double> pa(tri_index(0, n), 0.0), pb(tri_index(0, n), 0.0), pc(tri_index(0, n), 0.0);
    for (int k = 1; k < n; ++k) {
        for (int i = 0; i < k; ++i) {
            const auto pq = pairwise_quadratic(x, line, i, k);
            const auto idx = tri_index(i, k);
            pa[idx] = pq.a;
            pb[idx] = pq.b;
            pc[idx] = pq.c;
        }
    }

    std::vector<std::vector<int>> members(static_cast<std::size_t>(2 * n - 1));
    std::vector<int> alive(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        members[static_cast<std::size_t>(i)] = {i};
        alive[static_cast<std::size_t>(i)] = i;
    }

    std::vector<QuadraticInequality> out;
    std::unordered_set<std::uint64_t> seen; // dedup on (attaining pair, target pair)
    auto key_of = [](int i, int k, int p, int r) {
        const auto lo1 = static_cast<std::uint64_t>(std::min(i, k));
        const auto hi1 = static_cast<std::uint64_t>(std::max(i, k));
        const auto lo2 = static_cast<std::uint64_t>(std::min(p, r));
        const auto hi2 = static_cast<std::uint64_t>(std::max(p, r));
        return (((lo1 << 16 | hi1) << 16 | lo2) << 16) | hi2;
    };

    for (int l = 0; l < steps; ++l) {
        const Merge& mg = m.merges[static_cast<std::size_t>(l)];
        if (std::find(alive.begin(), alive.end(), mg.left) == alive.end() ||
            std::find(alive.begin(), alive.end(), mg.right) == alive.end())
            throw inconsistency_error("merge_constraints: merge references a cluster that is not alive");
        // Observed attaining pair of the winning cluster pair; ties go to the
        // lexicographically smallest (i, k).
        int wi = -1, wk = -1;
        double wbest = std::numeric_limits<double>::infinity();
        for (int i : members[static_cast<std::size_t>(mg.left)]) {
            for (int k : members[static_cast<std::size_t>(mg.right)]) {
                const int lo = std::min(i, k), hi = std::max(i, k);
                const double d = pc[tri_index(lo, hi)];
                if (d < wbest) {
                    wbest = d;
                    wi = lo;
                    wk = hi;
                }
            }
        }
        const auto widx = tri_index(wi, wk);
        const Triple winner{pa[widx], pb[widx], pc[widx]};

        // Attaining pair against every original pair spanning two alive
        // clusters (the winning pair's own spanning pairs included).
        for (std::size_t s = 0; s + 1 < alive.size(); ++s) {
            for (std::size_t t = s + 1; t < alive.size(); ++t) {
                for (int p : members[static_cast<std::size_t>(alive[s])]) {
                    for (int r : members[static_cast<std::size_t>(alive[t])]) {
                        const int lo = std::min(p, r), hi = std::max(p, r);
                        if (lo == wi && hi == wk) continue;
                        if (!seen.insert(key_of(wi, wk, lo, hi)).second) continue;
                        const auto idx = tri_index(lo, hi);
                        emit(out, winner, Triple{pa[idx], pb[idx], pc[idx]});
                    }
                }
            }
        }

        const int merged = n + l;
        auto& into = members[static_cast<std::size_t>(merged)];
        into = members[static_cast<std::size_t>(mg.left)];
        into.insert(into.end(), members[static_cast<std::size_t>(mg.right)].begin(),
                    members[static_cast<std::size_t>(mg.right)].end());
        alive.erase(std::find(alive.begin(), alive.end(), mg.left));
        alive.erase(std::find(alive.begin(), alive.end(), mg.right));
        alive.push_back(merged);
    }
    return out;
}

void dedup_triples(std::vector<QuadraticInequality>& qs) {
    auto close = [](double x, double y) {
        return x == y || std::fabs(x - y) <= 1e-12 * std::max(std::fabs(x), std::fabs(y));
    };
    std::sort(qs.begin(), qs.end(), [](const QuadraticInequality& l, const QuadraticInequality& r) {
        if (l.a != r.a) return l.a < r.a;
        if (l.b != r.b) return l.b < r.b;
        return l.c < r.c;
    });
    qs.erase(std::unique(qs.begin(), qs.end(),
                         [&](const QuadraticInequality& l, const QuadraticInequality& r) {
                             return close(l.a, r.a) && close(l.b, r.b) && close(l.c, r.c);
                         }),
             qs.end());
}

} // namespace

std::vector<QuadraticInequality> merge_constraints(const DataMatrix& x,
                                                   const PerturbationLine& line,
                                                   const MergeSequence& m, int steps,
                                                   ConstraintScheme scheme) {
    if (m.n != x.n()) throw invalid_input("merge_constraints: sequence/data size mismatch");
    if (steps < 0) steps = static_cast<int>(m.merges.size());
    if (steps > static_cast<int>(m.merges.size()))
        throw invalid_input("merge_constraints: step budget exceeds sequence length");

    std::vector<QuadraticInequality> out;
    if (m.linkage == Linkage::single) {
        out = single_constraints(x, line, m, steps);
    } else {
        bool last_alive = scheme == ConstraintScheme::last_alive;
        if (scheme == ConstraintScheme::automatic)
            last_alive = m.linkage == Linkage::average || m.linkage == Linkage::ward;
        out = lw_constraints(x, line, m, steps, last_alive);
    }
    dedup_triples(out);
    return out;
}

IntervalUnion truncation_set_hier(const DataMatrix& x, const PerturbationLine& line,
                                  const MergeSequence& m, int K, ConstraintScheme scheme) {
    if (K < 1 || K > m.n) throw invalid_input("truncation_set_hier: K out of range");
    const auto constraints = merge_constraints(x, line, m, m.n - K, scheme);
    std::vector<IntervalUnion> sets;
    sets.reserve(constraints.size());
    for (const auto& q : constraints) sets.push_back(solve_quadratic(q));
    const IntervalUnion in_psi = intersect_all(sets);
    const IntervalUnion in_phi = in_psi.shifted(line.anchor());
    if (!in_phi.contains(line.anchor()))
        throw inconsistency_error("truncation_set_hier: anchor excluded from truncation set");
    return in_phi;
}

} // namespace postclust
