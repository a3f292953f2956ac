#pragma once

#include <string>

#include "nmmix/errors.hpp"

namespace nmmix {

// Channel family of an evolution. A depolarizing evolution in dimension d is
// fully described by a scalar characteristic function with values in
// [-1/(d^2-1), 1]; a qubit dephasing evolution by one with values in [-1, 1].
class ChannelFamily {
public:
    enum class Kind { Depolarizing, Dephasing };

    static ChannelFamily depolarizing(int d);
    static ChannelFamily dephasing();

    Kind kind() const { return kind_; }
    int dim() const { return dim_; }

    // Lower and upper end of the admissible value interval.
    double lo() const { return lo_; }
    double hi() const { return 1.0; }

    bool operator==(const ChannelFamily& other) const {
        return kind_ == other.kind_ && dim_ == other.dim_;
    }

    std::string name() const;

    // True iff the intermediate map between values f_s (earlier) and f_t
    // (later) is a physical channel: f_t/f_s must lie in the admissible
    // interval, and f_s = 0 forces f_t = 0.
    bool intermediate_cptp(double f_s, double f_t) const;

    // Signed violation of the two-time divisibility inequality; <= 0 exactly
    // when intermediate_cptp holds. Depolarizing:
    //   |2(d^2-1) f_t - (d^2-2) f_s| - d^2 |f_s|
    // Dephasing: |f_t| - |f_s|.
    double divisibility_residual(double f_s, double f_t) const;

private:
    ChannelFamily(Kind kind, int dim, double lo) : kind_(kind), dim_(dim), lo_(lo) {}

    Kind kind_;
    int dim_;
    double lo_;
};

// |f_s| at or below this threshold triggers the zero-trap rule.
inline constexpr double kZeroTrapTol = 1e-12;

}  // namespace nmmix
