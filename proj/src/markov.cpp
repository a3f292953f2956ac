#include "nmmix/markov.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "nmmix/oracle.hpp"

namespace nmmix {

namespace {

// One-sided slope of |f| at tau. At a zero of f the right slope is |f'| (any
// motion grows the modulus) while the left slope is -|f'|.
double mod_slope(double f, double df, bool right_side, double ztol) {
    if (std::fabs(f) > ztol) return (f > 0.0 ? df : -df);
    return right_side ? std::fabs(df) : -std::fabs(df);
}

bool xi_markovian(double xi, const ChannelFamily& fam) {
    return std::isfinite(xi) && xi >= fam.lo() && xi <= fam.hi() && xi != 1.0;
}

}  // namespace

LocalVerdict classify_local(const CharacteristicFunction& cf, double tau) {
    LocalVerdict v;
    v.time = tau;
    const JumpEvent* j = cf.jump_at(tau);
    if (j != nullptr) {
        v.at_jump = true;
        v.xi = j->xi;
        v.status = xi_markovian(j->xi, cf.family()) ? LocalStatus::AdmissibleJump
                                                    : LocalStatus::Violated;
        return v;
    }
    double ztol = cf.tol().value;
    double stol = cf.tol().slope;
    double f = tau >= cf.horizon() ? cf.value_left(tau) : cf.value_right(tau);
    bool has_left = tau > cf.tol().time;
    bool has_right = tau < cf.horizon() - cf.tol().time;
    v.mod_slope_left = has_left ? mod_slope(f, cf.deriv_left(tau), false, ztol) : 0.0;
    v.mod_slope_right = has_right ? mod_slope(f, cf.deriv_right(tau), true, ztol) : 0.0;
    bool ok = v.mod_slope_left <= stol && v.mod_slope_right <= stol;
    v.status = ok ? LocalStatus::ModulusNonIncreasing : LocalStatus::Violated;
    return v;
}

MarkovVerdict is_markovian(const CharacteristicFunction& cf, int grid_resolution) {
    std::vector<MonotoneRun> runs = decompose_runs(cf);

    // Local sweep: every run must keep |f| non-increasing, every jump ratio
    // must stay admissible.
    double local_nm_scale = 0.0;
    for (const MonotoneRun& r : runs) {
        if (r.non_markovian()) local_nm_scale = std::max(local_nm_scale, std::fabs(r.increment()));
    }
    bool local_jump_nm = false;
    for (const JumpEvent& j : cf.jumps()) {
        if (!xi_markovian(j.xi, cf.family())) local_jump_nm = true;
    }
    bool local_ok = local_nm_scale == 0.0 && !local_jump_nm;

    // Pairwise divisibility residual over a dense grid.
    std::vector<Sample> samples = sample(cf, verification_times(cf, runs, grid_resolution));
    ResidualScan scan = scan_residual(cf.family(), samples);
    bool pair_ok = scan.worst <= kMarkovResidualTol;

    // The sweeps test the same property through different routes; a clear
    // disagreement means a bug or a grid far too coarse for the input.
    if (pair_ok && (local_jump_nm || local_nm_scale > 1e-7))
        throw std::logic_error("local sweep found non-Markovian behaviour the pairwise check missed");
    if (!pair_ok && local_ok && scan.worst > 1e-7)
        throw std::logic_error("pairwise check found a violation the local sweep missed");

    MarkovVerdict verdict;
    verdict.markovian = pair_ok;
    verdict.worst_residual = std::max(scan.worst, 0.0);
    if (!pair_ok) {
        // Keep a handful of the worst pairs as witnesses.
        std::vector<Witness> all;
        for (std::size_t i = 0; i < samples.size(); ++i) {
            for (std::size_t j = i; j < samples.size(); ++j) {
                double r = cf.family().divisibility_residual(samples[i].value, samples[j].value);
                if (r > kMarkovResidualTol)
                    all.push_back({samples[i].t, samples[j].t, r});
            }
        }
        std::sort(all.begin(), all.end(),
                  [](const Witness& a, const Witness& b) { return a.residual > b.residual; });
        if (all.size() > 8) all.resize(8);
        verdict.witnesses = std::move(all);
    }
    return verdict;
}

PStarBound lower_bound_pstar(const CharacteristicFunction& cf, int grid_resolution) {
    if (cf.family().kind() == ChannelFamily::Kind::Dephasing) return {0.0, false};
    std::vector<MonotoneRun> runs = decompose_runs(cf);
    std::vector<Sample> samples = sample(cf, verification_times(cf, runs, grid_resolution));
    ResidualScan scan = scan_residual(cf.family(), samples);
    if (scan.worst <= kMarkovResidualTol) return {0.0, true};
    double d2 = static_cast<double>(cf.family().dim()) * cf.family().dim();
    return {scan.worst / (scan.worst + 4.0 * (d2 - 1.0)), true};
}

const char* to_string(TractabilityClass c) {
    switch (c) {
        case TractabilityClass::ContinuousClosedForm: return "continuous_closed_form";
        case TractabilityClass::PositiveClosedForm: return "positive_closed_form";
        case TractabilityClass::ExtendedContinuous: return "extended_continuous";
        case TractabilityClass::GeneralEnumeration: return "general_enumeration";
    }
    return "unknown";
}

TractabilityClass classify_tractable(const CharacteristicFunction& cf,
                                     const std::vector<MonotoneRun>& runs) {
    double ztol = cf.tol().value;
    if (cf.jumps().empty()) return TractabilityClass::ContinuousClosedForm;

    bool all_nonnegative = true;
    for (const MonotoneRun& r : runs) {
        if (r.sign == RunSign::Negative) all_nonnegative = false;
    }
    for (const JumpEvent& j : cf.jumps()) {
        if (j.left < -ztol || j.right < -ztol) all_nonnegative = false;
    }
    if (all_nonnegative) return TractabilityClass::PositiveClosedForm;

    // Extended pattern: every jump is a Markovian drop of a positive value,
    // so non-Markovian behaviour lives only on continuity intervals.
    bool extended = true;
    for (const JumpEvent& j : cf.jumps()) {
        if (!(j.left > ztol && j.xi >= -ztol && j.xi < 1.0)) extended = false;
    }
    if (extended) return TractabilityClass::ExtendedContinuous;
    return TractabilityClass::GeneralEnumeration;
}

TractabilityClass classify_tractable(const CharacteristicFunction& cf) {
    return classify_tractable(cf, decompose_runs(cf));
}

}  // namespace nmmix
