#include "nmmix/charfun.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace nmmix {

namespace {

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.9g", v);
    return buf;
}

}  // namespace

double jump_ratio_value(double left, double right, double ztol) {
    if (std::fabs(left) <= ztol) {
        if (std::fabs(right) <= ztol) return 1.0;
        return right > 0.0 ? std::numeric_limits<double>::infinity()
                           : -std::numeric_limits<double>::infinity();
    }
    return right / left;
}

std::size_t CharacteristicFunction::piece_index_left(double t) const {
    // Piece whose closure contains t from the left: t in (start, end].
    for (std::size_t i = pieces_.size(); i-- > 0;) {
        if (t > pieces_[i].t_start + tol_.time || i == 0) return i;
    }
    return 0;
}

std::size_t CharacteristicFunction::piece_index_right(double t) const {
    for (std::size_t i = 0; i < pieces_.size(); ++i) {
        if (t < pieces_[i].t_end - tol_.time || i + 1 == pieces_.size()) return i;
    }
    return pieces_.size() - 1;
}

double CharacteristicFunction::value_left(double t) const {
    return pieces_[piece_index_left(t)].expr.eval(t);
}

double CharacteristicFunction::value_right(double t) const {
    return pieces_[piece_index_right(t)].expr.eval(t);
}

double CharacteristicFunction::deriv_left(double t) const {
    return pieces_[piece_index_left(t)].deriv.eval(t);
}

double CharacteristicFunction::deriv_right(double t) const {
    return pieces_[piece_index_right(t)].deriv.eval(t);
}

const JumpEvent* CharacteristicFunction::jump_at(double tau) const {
    for (const JumpEvent& j : jumps_) {
        if (std::fabs(j.time - tau) <= tol_.time) return &j;
    }
    return nullptr;
}

double jump_ratio(const CharacteristicFunction& cf, double tau) {
    const JumpEvent* j = cf.jump_at(tau);
    return j ? j->xi : 1.0;
}

namespace {

// Bisection for a sign change of g inside [a, b], assuming g(a) and g(b)
// already straddle the target sign change.
double bisect_sign_change(const Expr& g, double a, double b, double time_tol) {
    double ga = g.eval(a);
    while (b - a > time_tol) {
        double m = 0.5 * (a + b);
        double gm = g.eval(m);
        if ((ga <= 0.0) == (gm <= 0.0)) {
            a = m;
            ga = gm;
        } else {
            b = m;
        }
    }
    return 0.5 * (a + b);
}

int slope_sign(double v, double tol) {
    if (v > tol) return 1;
    if (v < -tol) return -1;
    return 0;
}

// Breakpoints of one piece: derivative sign changes (extrema) and zero
// crossings of the value, refined by bisection.
std::vector<double> piece_breakpoints(const Piece& piece, const Tolerances& tol) {
    std::vector<double> out;
    double a = piece.t_start, b = piece.t_end;
    double width = b - a;
    if (width <= tol.time) return out;
    // 64 scan points per time unit brackets any oscillation the expression
    // grammar produces at physical rates; bisection then sharpens to tol.
    // Samples landing exactly on an extremum or zero read as sign 0, so the
    // straddle test compares against the last sample of definite sign.
    int n = static_cast<int>(std::min(200000.0, std::max(64.0, width * 64.0)));
    int last_d_sign = 0, last_f_sign = 0;
    double last_d_t = a, last_f_t = a;
    for (int i = 0; i <= n; ++i) {
        double t = a + width * i / n;
        int ds = slope_sign(piece.deriv.eval(t), tol.slope);
        int fs = slope_sign(piece.expr.eval(t), tol.value);
        if (ds != 0) {
            if (last_d_sign != 0 && ds != last_d_sign)
                out.push_back(bisect_sign_change(piece.deriv, last_d_t, t, tol.time));
            last_d_sign = ds;
            last_d_t = t;
        }
        if (fs != 0) {
            if (last_f_sign != 0 && fs != last_f_sign)
                out.push_back(bisect_sign_change(piece.expr, last_f_t, t, tol.time));
            last_f_sign = fs;
            last_f_t = t;
        }
    }
    std::sort(out.begin(), out.end());
    return out;
}

enum class Trend { Down, Flat, Up };

struct RawRun {
    MonotoneRun run;
    Trend trend;
};

RawRun classify_segment(const Piece& piece, double a, double b, const Tolerances& tol) {
    RawRun r;
    r.run.t_in = a;
    r.run.t_fin = b;
    r.run.start_value = piece.expr.eval(a);
    r.run.end_value = piece.expr.eval(b);

    // Sign from the interior point of largest magnitude.
    double best = 0.0;
    for (int i = 1; i <= 7; ++i) {
        double v = piece.expr.eval(a + (b - a) * i / 8.0);
        if (std::fabs(v) > std::fabs(best)) best = v;
    }
    if (std::fabs(r.run.start_value) > std::fabs(best)) best = r.run.start_value;
    if (std::fabs(r.run.end_value) > std::fabs(best)) best = r.run.end_value;
    if (std::fabs(best) <= tol.value)
        r.run.sign = RunSign::Zero;
    else
        r.run.sign = best > 0.0 ? RunSign::Positive : RunSign::Negative;

    double inc = r.run.increment();
    r.trend = inc > tol.drop ? Trend::Up : inc < -tol.drop ? Trend::Down : Trend::Flat;
    switch (r.run.sign) {
        case RunSign::Zero: r.run.mod_nonincreasing = true; break;
        case RunSign::Positive: r.run.mod_nonincreasing = r.trend != Trend::Up; break;
        case RunSign::Negative: r.run.mod_nonincreasing = r.trend != Trend::Down; break;
    }
    return r;
}

}  // namespace

std::vector<MonotoneRun> decompose_runs(const CharacteristicFunction& cf) {
    const Tolerances& tol = cf.tol();
    std::vector<RawRun> raw;
    for (const Piece& piece : cf.pieces()) {
        std::vector<double> cuts = piece_breakpoints(piece, tol);
        double a = piece.t_start;
        cuts.push_back(piece.t_end);
        for (double c : cuts) {
            if (c - a <= tol.time) continue;
            raw.push_back(classify_segment(piece, a, c, tol));
            a = c;
        }
    }

    // Merge equal classifications across kinks, but never across a jump.
    std::vector<RawRun> merged;
    for (const RawRun& r : raw) {
        if (!merged.empty()) {
            RawRun& back = merged.back();
            bool continuous = std::fabs(back.run.t_fin - r.run.t_in) <= tol.time &&
                              cf.jump_at(r.run.t_in) == nullptr;
            if (continuous && back.trend == r.trend && back.run.sign == r.run.sign) {
                back.run.t_fin = r.run.t_fin;
                back.run.end_value = r.run.end_value;
                continue;
            }
        }
        merged.push_back(r);
    }
    std::vector<MonotoneRun> runs;
    runs.reserve(merged.size());
    for (const RawRun& r : merged) runs.push_back(r.run);
    return runs;
}

namespace {

void check_range(const CharacteristicFunction& cf, const std::vector<MonotoneRun>& runs) {
    const ChannelFamily& fam = cf.family();
    double slack = cf.tol().value;
    auto fail = [&](double t, double v) {
        throw ValidationError("value " + fmt(v) + " at t=" + fmt(t) + " outside " + fam.name() +
                              " interval [" + fmt(fam.lo()) + ", " + fmt(fam.hi()) + "]");
    };
    for (const MonotoneRun& r : runs) {
        // Monotone within a run, so the endpoints are the extrema.
        if (r.start_value < fam.lo() - slack || r.start_value > fam.hi() + slack)
            fail(r.t_in, r.start_value);
        if (r.end_value < fam.lo() - slack || r.end_value > fam.hi() + slack)
            fail(r.t_fin, r.end_value);
    }
    for (const JumpEvent& j : cf.jumps()) {
        if (j.left < fam.lo() - slack || j.left > fam.hi() + slack) fail(j.time, j.left);
        if (j.right < fam.lo() - slack || j.right > fam.hi() + slack) fail(j.time, j.right);
    }
}

}  // namespace

CharacteristicFunction build(const ChannelFamily& family, std::vector<Piece> pieces,
                             const std::vector<double>& declared_jumps, double horizon,
                             const Tolerances& tol) {
    if (pieces.empty()) throw ValidationError("no pieces given");
    if (!(horizon > 0.0)) throw ValidationError("horizon must be positive");
    std::sort(pieces.begin(), pieces.end(),
              [](const Piece& a, const Piece& b) { return a.t_start < b.t_start; });
    if (std::fabs(pieces.front().t_start) > tol.time)
        throw ValidationError("pieces must start at t=0, first starts at t=" +
                              fmt(pieces.front().t_start));
    if (std::fabs(pieces.back().t_end - horizon) > tol.time)
        throw ValidationError("pieces must end at the horizon " + fmt(horizon) + ", last ends at " +
                              fmt(pieces.back().t_end));
    for (std::size_t i = 0; i < pieces.size(); ++i) {
        Piece& p = pieces[i];
        if (!(p.t_end > p.t_start + tol.time))
            throw ValidationError("piece " + std::to_string(i) + " is empty or reversed");
        if (i > 0 && std::fabs(p.t_start - pieces[i - 1].t_end) > tol.time)
            throw ValidationError("tiling gap or overlap between t=" + fmt(pieces[i - 1].t_end) +
                                  " and t=" + fmt(p.t_start));
        p.deriv = p.expr.derivative();
    }

    CharacteristicFunction cf;
    cf.family_ = family;
    cf.horizon_ = horizon;
    cf.tol_ = tol;

    try {
        for (std::size_t i = 0; i + 1 < pieces.size(); ++i) {
            double t = pieces[i].t_end;
            double left = pieces[i].expr.eval(t);
            double right = pieces[i + 1].expr.eval(pieces[i + 1].t_start);
            if (std::fabs(left - right) > tol.value) {
                JumpEvent j;
                j.time = t;
                j.left = left;
                j.right = right;
                j.xi = jump_ratio_value(left, right, tol.value);
                cf.jumps_.push_back(j);
            }
        }

        for (double tau : declared_jumps) {
            if (cf.jump_at(tau) == nullptr && [&] {
                    for (const JumpEvent& j : cf.jumps_)
                        if (std::fabs(j.time - tau) <= tol.time) return false;
                    return true;
                }())
                throw ValidationError("declared jump at t=" + fmt(tau) +
                                      " does not match any discontinuity");
        }

        cf.pieces_ = std::move(pieces);
        check_range(cf, decompose_runs(cf));

        double f0 = cf.pieces_.front().expr.eval(cf.pieces_.front().t_start);
        if (std::fabs(f0 - 1.0) > tol.value)
            throw ValidationError("initial condition violated: f(0)=" + fmt(f0) + ", expected 1");
    } catch (const std::domain_error& e) {
        throw ValidationError(std::string("piece evaluation failed: ") + e.what());
    }
    return cf;
}

CharacteristicFunction build_single(const ChannelFamily& family, const Expr& expr, double horizon,
                                    const Tolerances& tol) {
    Piece p;
    p.t_start = 0.0;
    p.t_end = horizon;
    p.expr = expr;
    return build(family, {p}, {}, horizon, tol);
}

CharacteristicFunction mix(const CharacteristicFunction& a, const CharacteristicFunction& b,
                           double p) {
    if (!(a.family() == b.family())) throw ValidationError("family mismatch in mix");
    if (std::fabs(a.horizon() - b.horizon()) > a.tol().time)
        throw ValidationError("horizon mismatch in mix");
    if (p < 0.0 || p > 1.0) throw ValidationError("mixing probability outside [0,1]");

    std::vector<double> cuts;
    for (const Piece& pc : a.pieces()) {
        cuts.push_back(pc.t_start);
        cuts.push_back(pc.t_end);
    }
    for (const Piece& pc : b.pieces()) {
        cuts.push_back(pc.t_start);
        cuts.push_back(pc.t_end);
    }
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end(),
                           [&](double x, double y) { return std::fabs(x - y) <= a.tol().time; }),
               cuts.end());

    std::vector<Piece> pieces;
    Expr wa = Expr::constant(1.0 - p);
    Expr wb = Expr::constant(p);
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
        double mid = 0.5 * (cuts[i] + cuts[i + 1]);
        Piece pc;
        pc.t_start = cuts[i];
        pc.t_end = cuts[i + 1];
        pc.expr = Expr::sum(Expr::product(wa, a.pieces()[a.piece_index_right(mid)].expr),
                            Expr::product(wb, b.pieces()[b.piece_index_right(mid)].expr));
        pieces.push_back(std::move(pc));
    }
    return build(a.family(), std::move(pieces), {}, a.horizon(), a.tol());
}

std::vector<RunSegment> run_piece_segments(const CharacteristicFunction& cf,
                                           const std::vector<MonotoneRun>& runs) {
    std::vector<RunSegment> segs;
    double ttol = cf.tol().time;
    for (const MonotoneRun& r : runs) {
        for (const Piece& p : cf.pieces()) {
            double a = std::max(r.t_in, p.t_start);
            double b = std::min(r.t_fin, p.t_end);
            if (b - a > ttol) segs.push_back({a, b, &p, &r});
        }
    }
    std::sort(segs.begin(), segs.end(),
              [](const RunSegment& x, const RunSegment& y) { return x.a < y.a; });
    return segs;
}

std::vector<Sample> sample(const CharacteristicFunction& cf, const std::vector<double>& grid) {
    std::vector<Sample> out;
    out.reserve(grid.size() + cf.jumps().size());
    for (double t : grid) {
        const JumpEvent* j = cf.jump_at(t);
        if (j != nullptr) {
            out.push_back({t, j->left});
            out.push_back({t, j->right});
        } else {
            out.push_back({t, cf.value_right(t)});
        }
    }
    return out;
}

}  // namespace nmmix
