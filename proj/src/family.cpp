#include "nmmix/family.hpp"

#include <cmath>

namespace nmmix {

ChannelFamily ChannelFamily::depolarizing(int d) {
    if (d < 2) throw ValidationError("depolarizing dimension must be >= 2");
    return ChannelFamily(Kind::Depolarizing, d, -1.0 / (static_cast<double>(d) * d - 1.0));
}

ChannelFamily ChannelFamily::dephasing() {
    return ChannelFamily(Kind::Dephasing, 2, -1.0);
}

std::string ChannelFamily::name() const {
    if (kind_ == Kind::Dephasing) return "dephasing";
    return "depolarizing(d=" + std::to_string(dim_) + ")";
}

bool ChannelFamily::intermediate_cptp(double f_s, double f_t) const {
    if (std::fabs(f_s) <= kZeroTrapTol) return std::fabs(f_t) <= kZeroTrapTol;
    double ratio = f_t / f_s;
    return ratio >= lo_ && ratio <= 1.0;
}

double ChannelFamily::divisibility_residual(double f_s, double f_t) const {
    if (kind_ == Kind::Dephasing) return std::fabs(f_t) - std::fabs(f_s);
    double d2 = static_cast<double>(dim_) * dim_;
    return std::fabs(2.0 * (d2 - 1.0) * f_t - (d2 - 2.0) * f_s) - d2 * std::fabs(f_s);
}

}  // namespace nmmix
