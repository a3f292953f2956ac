#include "nmmix/companion.hpp"

#include <algorithm>
#include <cmath>

#include "nmmix/errors.hpp"

namespace nmmix {

const char* to_string(CompanionProvenance p) {
    switch (p) {
        case CompanionProvenance::HContinuous: return "h_continuous";
        case CompanionProvenance::GPositive: return "g_positive";
        case CompanionProvenance::SolverGenerated: return "solver_generated";
    }
    return "unknown";
}

namespace {

// Appends a companion piece on [a,b]: either the constant c, or
// c - (f(t) - f(a))/normalizer following the cf piece expression. Returns
// the companion value at b.
double append_piece(std::vector<Piece>& out, const RunSegment& seg, double c, bool active,
                    double normalizer) {
    Piece p;
    p.t_start = seg.a;
    p.t_end = seg.b;
    if (!active) {
        p.expr = Expr::constant(c);
        out.push_back(std::move(p));
        return c;
    }
    double fa = seg.piece->expr.eval(seg.a);
    double fb = seg.piece->expr.eval(seg.b);
    double c_next = c - (fb - fa) / normalizer;
    if (std::fabs(c_next) <= 1e-9 && std::fabs(fb - fa) > 1e-9) {
        // Run boundaries are refined to ~1e-9 in time, so the telescoped
        // value can undershoot zero by that order. Rescale the segment
        // minutely to land exactly on zero instead of carrying a spurious
        // sign change into the tail.
        double scale = c / (fa - fb);
        p.expr = Expr::sum(Expr::constant(-scale * fb),
                           Expr::product(Expr::constant(scale), seg.piece->expr));
        out.push_back(std::move(p));
        return 0.0;
    }
    p.expr = Expr::sum(Expr::constant(c + fa / normalizer),
                       Expr::product(Expr::constant(-1.0 / normalizer), seg.piece->expr));
    out.push_back(std::move(p));
    return c_next;
}

}  // namespace

Companion build_continuous_companion(const CharacteristicFunction& cf,
                                     const std::vector<MonotoneRun>& runs, double gamma) {
    if (!(gamma > 0.0)) throw ValidationError("companion normalizer must be positive");
    std::vector<Piece> pieces;
    double c = 1.0;
    for (const RunSegment& seg : run_piece_segments(cf, runs)) {
        bool active = seg.run->increment() > cf.tol().drop;
        c = append_piece(pieces, seg, c, active, gamma);
        if (c < -cf.tol().value)
            throw ValidationError("normalizer too small: companion leaves [0,1]");
    }
    Companion comp;
    comp.fn = build(cf.family(), std::move(pieces), {}, cf.horizon(), cf.tol());
    comp.provenance = CompanionProvenance::HContinuous;
    comp.normalizer = gamma;
    return comp;
}

Companion build_continuous_companion(const CharacteristicFunction& cf, double gamma) {
    return build_continuous_companion(cf, decompose_runs(cf), gamma);
}

Companion build_positive_companion(const CharacteristicFunction& cf,
                                   const std::vector<MonotoneRun>& runs, const GapReport& gaps) {
    double total = gaps.delta_nm + gaps.pi_nm;
    if (!(total > 0.0))
        throw ValidationError("positive companion needs a non-Markovian gap total > 0");
    std::vector<Piece> pieces;
    double c = 1.0;
    std::vector<RunSegment> segs = run_piece_segments(cf, runs);
    for (std::size_t k = 0; k < segs.size(); ++k) {
        const RunSegment& seg = segs[k];
        if (k > 0 && cf.jump_at(seg.a) != nullptr) {
            // Drop by pi_i/total at non-Markovian jump times, nothing else.
            for (const Gap& g : gaps.jump_gaps) {
                if (std::fabs(g.t_in - seg.a) <= cf.tol().time) c -= g.amount / total;
            }
        }
        bool active = seg.run->sign == RunSign::Positive && seg.run->increment() > cf.tol().drop;
        c = append_piece(pieces, seg, c, active, total);
        if (c < -cf.tol().value)
            throw ValidationError("positive companion left [0,1]; class mismatch");
    }
    Companion comp;
    comp.fn = build(cf.family(), std::move(pieces), {}, cf.horizon(), cf.tol());
    comp.provenance = CompanionProvenance::GPositive;
    comp.normalizer = total;
    return comp;
}

Companion build_positive_companion(const CharacteristicFunction& cf) {
    std::vector<MonotoneRun> runs = decompose_runs(cf);
    GapReport gaps = extract_gaps(cf, runs);
    return build_positive_companion(cf, runs, gaps);
}

double closed_form_total(const GapReport& gaps, TractabilityClass tclass) {
    switch (tclass) {
        case TractabilityClass::ContinuousClosedForm:
        case TractabilityClass::ExtendedContinuous: return gaps.gamma_nm;
        case TractabilityClass::PositiveClosedForm: return gaps.delta_nm + gaps.pi_nm;
        case TractabilityClass::GeneralEnumeration: break;
    }
    throw ValidationError("no closed form for the enumeration class");
}

double measure_closed_form(const GapReport& gaps, TractabilityClass tclass, double gamma_cap) {
    double total = closed_form_total(gaps, tclass);
    if (total > gamma_cap) return 1.0;
    return total / (1.0 + total);
}

}  // namespace nmmix
