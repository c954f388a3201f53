#ifndef POSTCLUST_ERRORS_HPP
#define POSTCLUST_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace postclust {

// Precondition violations: bad indices, malformed groups, invalid shapes.
class invalid_input : public std::invalid_argument {
public:
    explicit invalid_input(const std::string& what) : std::invalid_argument(what) {}
};

// Numerical or data failures detected at runtime (bad CSV payloads,
// non-finite values, degenerate supports).
class numeric_error : public std::runtime_error {
public:
    explicit numeric_error(const std::string& what) : std::runtime_error(what) {}
};

// A truncated support whose total Gaussian mass underflows even in log
// space. Callers must never see NaN instead of this.
class degenerate_support_error : public numeric_error {
public:
    explicit degenerate_support_error(const std::string& what) : numeric_error(what) {}
};

// The anchor statistic fell outside a computed truncation set, or a replayed
// trace contradicts the data it was allegedly produced from. This is an
// internal consistency failure (e.g. tie-break mismatch) and is never
// silently corrected.
class inconsistency_error : public numeric_error {
public:
    explicit inconsistency_error(const std::string& what) : numeric_error(what) {}
};

} // namespace postclust

#endif
