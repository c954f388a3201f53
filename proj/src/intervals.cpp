#include "postclust/intervals.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>

#include "postclust/errors.hpp"
#include "json.hpp"

namespace postclust {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

IntervalUnion IntervalUnion::all() {
    IntervalUnion u;
    u.parts_.push_back({-kInf, kInf});
    return u;
}

IntervalUnion IntervalUnion::segment(double lo, double hi) {
    return from_intervals({{lo, hi}});
}

IntervalUnion IntervalUnion::from_intervals(std::vector<Interval> parts) {
    for (const auto& p : parts) {
        if (std::isnan(p.lo) || std::isnan(p.hi))
            throw numeric_error("IntervalUnion: NaN endpoint");
    }
    std::erase_if(parts, [](const Interval& p) { return !(p.lo < p.hi); });
    std::sort(parts.begin(), parts.end(),
              [](const Interval& x, const Interval& y) { return x.lo < y.lo; });
    IntervalUnion u;
    for (const auto& p : parts) {
        if (!u.parts_.empty() && p.lo <= u.parts_.back().hi + kMergeTol) {
            u.parts_.back().hi = std::max(u.parts_.back().hi, p.hi);
        } else {
            u.parts_.push_back(p);
        }
    }
    // A merge can still leave a degenerate piece if inputs were touching points.
    std::erase_if(u.parts_, [](const Interval& p) { return !(p.lo < p.hi); });
    return u;
}

bool IntervalUnion::is_all() const {
    return parts_.size() == 1 && parts_[0].lo == -kInf && parts_[0].hi == kInf;
}

bool IntervalUnion::contains(double t, double tol) const {
    // First interval with hi >= t - tol is the only candidate.
    auto it = std::lower_bound(parts_.begin(), parts_.end(), t - tol,
                               [](const Interval& p, double v) { return p.hi < v; });
    return it != parts_.end() && it->lo <= t + tol;
}

IntervalUnion IntervalUnion::intersect(const IntervalUnion& other) const {
    std::vector<Interval> out;
    std::size_t i = 0, j = 0;
    while (i < parts_.size() && j < other.parts_.size()) {
        const Interval& a = parts_[i];
        const Interval& b = other.parts_[j];
        const double lo = std::max(a.lo, b.lo);
        const double hi = std::min(a.hi, b.hi);
        if (lo < hi) out.push_back({lo, hi});
        if (a.hi < b.hi) ++i; else ++j;
    }
    return from_intervals(std::move(out));
}

IntervalUnion IntervalUnion::clip_below(double t) const {
    std::vector<Interval> out;
    for (const auto& p : parts_) {
        if (p.hi <= t) continue;
        out.push_back({std::max(p.lo, t), p.hi});
    }
    return from_intervals(std::move(out));
}

IntervalUnion IntervalUnion::clip_above(double t) const {
    std::vector<Interval> out;
    for (const auto& p : parts_) {
        if (p.lo >= t) break;
        out.push_back({p.lo, std::min(p.hi, t)});
    }
    return from_intervals(std::move(out));
}

IntervalUnion IntervalUnion::shifted(double delta) const {
    IntervalUnion u;
    u.parts_ = parts_;
    for (auto& p : u.parts_) {
        if (std::isfinite(p.lo)) p.lo += delta;
        if (std::isfinite(p.hi)) p.hi += delta;
    }
    return u;
}

bool IntervalUnion::approx_equal(const IntervalUnion& other, double tol) const {
    if (parts_.size() != other.parts_.size()) return false;
    for (std::size_t i = 0; i < parts_.size(); ++i) {
        const Interval& a = parts_[i];
        const Interval& b = other.parts_[i];
        const bool lo_ok = (a.lo == b.lo) || std::fabs(a.lo - b.lo) <= tol;
        const bool hi_ok = (a.hi == b.hi) || std::fabs(a.hi - b.hi) <= tol;
        if (!lo_ok || !hi_ok) return false;
    }
    return true;
}

std::string IntervalUnion::to_json() const {
    nlohmann::json arr = nlohmann::json::array();
    auto encode = [](double v) -> nlohmann::json {
        if (v == kInf) return "inf";
        if (v == -kInf) return "-inf";
        return v;
    };
    for (const auto& p : parts_) arr.push_back({encode(p.lo), encode(p.hi)});
    return arr.dump();
}

IntervalUnion IntervalUnion::from_json(const std::string& text) {
    const auto arr = nlohmann::json::parse(text);
    auto decode = [](const nlohmann::json& v) -> double {
        if (v.is_string()) {
            const auto s = v.get<std::string>();
            if (s == "inf") return kInf;
            if (s == "-inf") return -kInf;
            throw numeric_error("IntervalUnion::from_json: bad sentinel '" + s + "'");
        }
        return v.get<double>();
    };
    std::vector<Interval> parts;
    for (const auto& pair : arr) {
        if (!pair.is_array() || pair.size() != 2)
            throw numeric_error("IntervalUnion::from_json: expected [lo, hi] pairs");
        parts.push_back({decode(pair[0]), decode(pair[1])});
    }
    return from_intervals(std::move(parts));
}

IntervalUnion solve_quadratic(const QuadraticInequality& q) {
    const double a = q.a, b = q.b, c = q.c;
    if (!std::isfinite(a) || !std::isfinite(b) || !std::isfinite(c))
        throw numeric_error("solve_quadratic: non-finite coefficient");

    const double scale = std::max({std::fabs(b), std::fabs(c), 1.0});
    if (std::fabs(a) <= 1e-12 * scale) {
        // Linear branch b*t + c <= 0.
        if (std::fabs(b) <= 1e-12 * std::max(std::fabs(c), 1.0)) {
            return c <= 0.0 ? IntervalUnion::all() : IntervalUnion::empty_set();
        }
        const double root = -c / b;
        return b > 0.0 ? IntervalUnion::segment(-kInf, root)
                       : IntervalUnion::segment(root, kInf);
    }

    const double disc = b * b - 4.0 * a * c;
    const double disc_tol = 1e-12 * (b * b + std::fabs(4.0 * a * c));
    if (disc <= disc_tol) {
        // Tangent or empty: the solution is at most a single point, which has
        // Gaussian mass zero and is dropped in canonical form.
        return a > 0.0 ? IntervalUnion::empty_set() : IntervalUnion::all();
    }

    const double sqrt_disc = std::sqrt(disc);
    const double qterm = -0.5 * (b + std::copysign(sqrt_disc, b));
    double r1, r2;
    if (qterm != 0.0) {
        r1 = qterm / a;
        r2 = c / qterm;
    } else { // b == 0
        r1 = -sqrt_disc / (2.0 * a);
        r2 = -r1;
    }
    if (r1 > r2) std::swap(r1, r2);
    if (a > 0.0) return IntervalUnion::segment(r1, r2);
    return IntervalUnion::from_intervals({{-kInf, r1}, {r2, kInf}});
}

IntervalUnion intersect_all(const std::vector<IntervalUnion>& sets) {
    if (sets.empty()) return IntervalUnion::all();
    for (const auto& s : sets)
        if (s.is_empty()) return IntervalUnion::empty_set();

    // Sweep: a point belongs to the intersection iff it is covered by all N
    // inputs. Starts sort before ends at equal coordinates; the transient
    // full-coverage point that produces is width-zero and canonicalizes away.
    struct Event {
        double pos;
        int delta; // +1 open, -1 close
    };
    std::vector<Event> events;
    std::size_t total = 0;
    for (const auto& s : sets) total += s.size();
    events.reserve(2 * total);
    for (const auto& s : sets) {
        for (const auto& p : s.intervals()) {
            events.push_back({p.lo, +1});
            events.push_back({p.hi, -1});
        }
    }
    std::sort(events.begin(), events.end(), [](const Event& x, const Event& y) {
        if (x.pos != y.pos) return x.pos < y.pos;
        return x.delta > y.delta;
    });

    const int need = static_cast<int>(sets.size());
    int coverage = 0;
    double open_at = 0.0;
    std::vector<Interval> out;
    for (const auto& e : events) {
        const int before = coverage;
        coverage += e.delta;
        if (before < need && coverage == need) {
            open_at = e.pos;
        } else if (before == need && coverage < need) {
            if (open_at < e.pos) out.push_back({open_at, e.pos});
        }
    }
    return IntervalUnion::from_intervals(std::move(out));
}

} // namespace postclust
