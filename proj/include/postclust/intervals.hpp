#ifndef POSTCLUST_INTERVALS_HPP
#define POSTCLUST_INTERVALS_HPP

#include <limits>
#include <string>
#include <vector>

namespace postclust {

// One inequality a*t^2 + b*t + c <= 0 in a scalar variable t.
struct QuadraticInequality {
    double a = 0.0;
    double b = 0.0;
    double c = 0.0;
};

struct Interval {
    double lo;
    double hi;
};

// Sorted disjoint union of closed intervals; endpoints may be +-infinity.
// Canonical form: strictly increasing, gaps wider than kMergeTol, every
// interval has lo < hi (width-zero intervals carry no Gaussian mass and
// are dropped).
class IntervalUnion {
public:
    static constexpr double kMergeTol = 1e-12;
    static constexpr double kContainTol = 1e-10;

    IntervalUnion() = default;

    // Canonicalizes: sorts, merges overlaps and near-touching neighbours,
    // drops degenerate pieces.
    static IntervalUnion from_intervals(std::vector<Interval> parts);

    static IntervalUnion empty_set() { return IntervalUnion(); }
    static IntervalUnion all();
    static IntervalUnion segment(double lo, double hi);

    const std::vector<Interval>& intervals() const { return parts_; }
    bool is_empty() const { return parts_.empty(); }
    bool is_all() const;
    std::size_t size() const { return parts_.size(); }

    // Closed-endpoint membership with absolute tolerance kContainTol.
    bool contains(double t, double tol = kContainTol) const;

    IntervalUnion intersect(const IntervalUnion& other) const;

    // Keeps the part of the union at or above t / at or below t.
    IntervalUnion clip_below(double t) const;
    IntervalUnion clip_above(double t) const;

    // Adds a constant to every endpoint.
    IntervalUnion shifted(double delta) const;

    bool approx_equal(const IntervalUnion& other, double tol = 1e-9) const;

    // JSON array of [lo, hi] pairs with "-inf"/"inf" sentinels.
    std::string to_json() const;
    static IntervalUnion from_json(const std::string& text);

private:
    std::vector<Interval> parts_;
};

// Solution set of {t : a t^2 + b t + c <= 0}. Near-zero leading
// coefficients fall back to the linear / constant branches; tangency is
// treated as measure zero (see solve_quadratic in intervals.cpp).
IntervalUnion solve_quadratic(const QuadraticInequality& q);

// Exact intersection of all inputs via a single endpoint sweep,
// O(M log M) in the total endpoint count M. Empty input list gives R.
IntervalUnion intersect_all(const std::vector<IntervalUnion>& sets);

inline bool contains(const IntervalUnion& s, double t) { return s.contains(t); }

} // namespace postclust

#endif
