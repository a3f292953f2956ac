#include "nmmix/gaps.hpp"

#include <cmath>

namespace nmmix {

GapReport extract_gaps(const CharacteristicFunction& cf, const std::vector<MonotoneRun>& runs) {
    GapReport rep;
    double drop = cf.tol().drop;
    for (const MonotoneRun& r : runs) {
        double inc = r.increment();
        if (std::fabs(inc) <= drop || r.t_fin - r.t_in <= cf.tol().time) continue;
        if (r.sign == RunSign::Positive && inc > 0.0) {
            rep.positive_gaps.push_back({r.t_in, r.t_fin, inc});
            rep.delta_nm += inc;
        } else if (r.sign == RunSign::Negative && inc < 0.0) {
            rep.negative_gaps.push_back({r.t_in, r.t_fin, inc});
            rep.theta_nm += inc;
        } else if (r.sign == RunSign::Negative && inc > 0.0) {
            rep.rebound_gaps.push_back({r.t_in, r.t_fin, inc});
            rep.rebound_nm += inc;
        }
    }
    double ztol = cf.tol().value;
    for (const JumpEvent& j : cf.jumps()) {
        bool admissible = std::isfinite(j.xi) && j.xi >= cf.family().lo() && j.xi <= 1.0;
        if (!admissible && j.left >= -ztol && j.right >= -ztol) {
            double pi = j.right - j.left;
            if (pi > drop) {
                rep.jump_gaps.push_back({j.time, j.time, pi});
                rep.pi_nm += pi;
            }
        }
    }
    rep.gamma_nm = rep.delta_nm + std::fabs(rep.theta_nm);
    return rep;
}

GapReport extract_gaps(const CharacteristicFunction& cf) {
    return extract_gaps(cf, decompose_runs(cf));
}

}  // namespace nmmix
