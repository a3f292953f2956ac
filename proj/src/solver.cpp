#include "nmmix/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "nmmix/errors.hpp"

namespace nmmix {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kZTol = 1e-12;
}  // namespace

std::string to_string(const SignVector& sv) {
    std::string out = "(";
    for (std::size_t i = 0; i < sv.s.size(); ++i) {
        if (i) out += ",";
        out += sv.s[i] > 0 ? "+1" : "-1";
    }
    return out + ")";
}

std::vector<SignVector> enumerate_sign_vectors(const CharacteristicFunction& cf,
                                               const SolveOptions& opts) {
    int n = static_cast<int>(cf.jumps().size());
    if (n > opts.max_jumps)
        throw CapExceeded("sign-vector enumeration: " + std::to_string(n) +
                          " jumps exceed the cap of " + std::to_string(opts.max_jumps));
    std::vector<SignVector> out;
    int count = 1 << n;
    out.reserve(static_cast<std::size_t>(count));
    for (int a = 0; a < count; ++a) {
        SignVector sv;
        sv.s.assign(static_cast<std::size_t>(n) + 1, 1);
        for (int bit = 0; bit < n; ++bit) {
            if (a & (1 << bit)) sv.s[static_cast<std::size_t>(bit) + 1] = -1;
        }
        out.push_back(std::move(sv));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Interval topology and candidate structure
// ---------------------------------------------------------------------------

namespace {

struct Topology {
    std::vector<MonotoneRun> runs;
    std::vector<RunSegment> segments;
    std::vector<double> jump_times;
    std::vector<int> seg_interval;
    std::vector<bool> interval_nm;       // has non-Markovian continuous behaviour
    std::vector<int> interval_run_sign;  // uniform sign of non-zero runs, 0 if none, 2 if mixed
};

int interval_of(const std::vector<double>& jump_times, double t) {
    int i = 0;
    for (double tau : jump_times) {
        if (tau < t) ++i;
    }
    return i;
}

Topology analyze(const CharacteristicFunction& cf) {
    Topology topo;
    topo.runs = decompose_runs(cf);
    topo.segments = run_piece_segments(cf, topo.runs);
    for (const JumpEvent& j : cf.jumps()) topo.jump_times.push_back(j.time);
    std::size_t n_int = cf.jumps().size() + 1;
    topo.interval_nm.assign(n_int, false);
    topo.interval_run_sign.assign(n_int, 0);
    for (const RunSegment& seg : topo.segments)
        topo.seg_interval.push_back(interval_of(topo.jump_times, 0.5 * (seg.a + seg.b)));
    for (const MonotoneRun& r : topo.runs) {
        int i = interval_of(topo.jump_times, 0.5 * (r.t_in + r.t_fin));
        if (r.non_markovian()) topo.interval_nm[static_cast<std::size_t>(i)] = true;
        if (r.sign != RunSign::Zero) {
            int s = r.sign == RunSign::Positive ? 1 : -1;
            int& slot = topo.interval_run_sign[static_cast<std::size_t>(i)];
            slot = (slot == 0 || slot == s) ? s : 2;
        }
    }
    return topo;
}

// Within an interval of matching sign vectors, a run drives the companion
// slope -f'/Delta exactly when it is non-Markovian on the companion's side
// of zero, or Markovian on the opposite side.
bool run_active_same(const MonotoneRun& r, int s_a) {
    if (r.sign == RunSign::Zero) return false;
    int srun = r.sign == RunSign::Positive ? 1 : -1;
    return (srun == s_a) == r.non_markovian();
}

int value_sign(double v) { return v > kZTol ? 1 : v < -kZTol ? -1 : 0; }

struct JumpRule {
    bool fixed = true;
    double xi = 1.0;
    int param = -1;  // index into the parameter list when free
};

struct ParamSpec {
    enum class Kind { Delta, Xi, XiBar, DeltaM };
    Kind kind = Kind::Delta;
    int site = -1;
    double lo = 0.0;
    double hi = 1.0;
    std::string name;
};

struct CandidateFamily {
    std::vector<ParamSpec> params;
    int delta_param = -1;
    std::vector<JumpRule> jump_rules;    // one per jump
    std::vector<int> dm_param;           // per interval, -1 when absent
    std::vector<double> cross_fdrop;     // |f| drop over each cross interval
    bool feasible_structure = true;
    std::string diagnostic;
};

CandidateFamily plan_candidate(const CharacteristicFunction& cf, const Topology& topo,
                               const SignVector& sa, const SignVector& sb) {
    CandidateFamily fam;
    const ChannelFamily& ch = cf.family();
    double lo = ch.lo();
    std::size_t n_int = sa.s.size();
    fam.dm_param.assign(n_int, -1);
    fam.cross_fdrop.assign(n_int, 0.0);

    // Condition (A): intervals with non-Markovian continuous behaviour must
    // carry equal signs in both vectors.
    for (std::size_t i = 0; i < n_int; ++i) {
        if (topo.interval_nm[i] && sa.s[i] != sb.s[i]) {
            fam.feasible_structure = false;
            fam.diagnostic = "sign vectors differ on a non-Markovian interval";
            return fam;
        }
    }

    // Cross intervals need f (and the mixture) on the sb side while the
    // companion sits opposite; f of the other sign leaves nothing to mix to.
    for (std::size_t i = 0; i < n_int; ++i) {
        if (sa.s[i] == sb.s[i]) continue;
        int fs = topo.interval_run_sign[i];
        if (fs == 2 || (fs != 0 && fs != sb.s[i])) {
            fam.feasible_structure = false;
            fam.diagnostic = "cross-sign interval where f does not match the mixture sign";
            return fam;
        }
    }

    bool needs_delta = false;
    for (std::size_t k = 0; k < topo.segments.size(); ++k) {
        const RunSegment& seg = topo.segments[k];
        std::size_t i = static_cast<std::size_t>(topo.seg_interval[k]);
        if (sa.s[i] != sb.s[i]) continue;
        if (run_active_same(*seg.run, sa.s[i]) &&
            std::fabs(seg.run->increment()) > cf.tol().drop)
            needs_delta = true;
    }
    if (needs_delta) {
        fam.delta_param = static_cast<int>(fam.params.size());
        fam.params.push_back({ParamSpec::Kind::Delta, -1, 1e-4, 1e4, "delta"});
    }

    for (std::size_t i = 0; i < n_int; ++i) {
        if (sa.s[i] == sb.s[i]) continue;
        double t0 = i == 0 ? 0.0 : topo.jump_times[i - 1];
        double t1 = i == n_int - 1 ? cf.horizon() : topo.jump_times[i];
        double m0 = std::fabs(cf.value_right(t0));
        double m1 = std::fabs(cf.value_left(t1));
        fam.cross_fdrop[i] = m0 - m1;
        if (fam.cross_fdrop[i] > cf.tol().drop) {
            fam.dm_param[i] = static_cast<int>(fam.params.size());
            fam.params.push_back({ParamSpec::Kind::DeltaM, static_cast<int>(i), 0.0, 1.0,
                                  "delta_m[" + std::to_string(i) + "]"});
        }
    }

    for (std::size_t j = 0; j < cf.jumps().size(); ++j) {
        const JumpEvent& ev = cf.jumps()[j];
        int s_i = sa.s[j], s_i1 = sa.s[j + 1];
        bool same = s_i1 == s_i;
        bool mismatch = sa.s[j] != sb.s[j] || sa.s[j + 1] != sb.s[j + 1];
        JumpRule rule;
        auto free_param = [&](ParamSpec::Kind kind, const char* tag) {
            rule.fixed = false;
            rule.param = static_cast<int>(fam.params.size());
            double plo = same ? 0.0 : lo * (1.0 - 1e-9);
            double phi = same ? 1.0 - 1e-9 : 0.0;
            fam.params.push_back({kind, static_cast<int>(j), plo, phi,
                                  std::string(tag) + "[" + std::to_string(j) + "]"});
        };
        if (mismatch) {
            free_param(ParamSpec::Kind::XiBar, "xi_bar");
        } else {
            bool markov_jump = std::isfinite(ev.xi) && ev.xi >= lo && ev.xi <= ch.hi();
            int ref = markov_jump ? value_sign(ev.left) : value_sign(ev.right);
            if (ref == 0) {
                free_param(ParamSpec::Kind::Xi, "xi");
            } else if (markov_jump) {
                if (ref == s_i)
                    rule.xi = same ? 1.0 : lo;
                else
                    free_param(ParamSpec::Kind::Xi, "xi");
            } else {
                if (ref == s_i) {
                    if (same)
                        free_param(ParamSpec::Kind::Xi, "xi");
                    else
                        rule.xi = lo;
                } else {
                    if (same)
                        rule.xi = 1.0;
                    else
                        free_param(ParamSpec::Kind::Xi, "xi");
                }
            }
        }
        fam.jump_rules.push_back(rule);
    }
    return fam;
}

// Assembles the companion for one parameter assignment. Returns nothing when
// the construction violates the companion's own Markovian constraints.
std::optional<CharacteristicFunction> build_candidate(const CharacteristicFunction& cf,
                                                      const Topology& topo, const SignVector& sa,
                                                      const SignVector& sb,
                                                      const CandidateFamily& fam,
                                                      const std::vector<double>& values) {
    double delta = fam.delta_param >= 0 ? values[static_cast<std::size_t>(fam.delta_param)] : 1.0;
    if (!(delta > 0.0)) return std::nullopt;
    double drop = cf.tol().drop;

    std::vector<Piece> pieces;
    double c = 1.0;
    bool dead = false;
    std::size_t jnext = 0;
    for (std::size_t k = 0; k < topo.segments.size(); ++k) {
        const RunSegment& seg = topo.segments[k];
        std::size_t i = static_cast<std::size_t>(topo.seg_interval[k]);

        if (jnext < topo.jump_times.size() &&
            std::fabs(seg.a - topo.jump_times[jnext]) <= cf.tol().time) {
            const JumpRule& rule = fam.jump_rules[jnext];
            double xi = rule.fixed ? rule.xi : values[static_cast<std::size_t>(rule.param)];
            c = xi * c;
            if (std::fabs(c) <= kZTol) {
                c = 0.0;
                dead = true;
            }
            if (sa.s[i] * c < -cf.tol().value) return std::nullopt;
            ++jnext;
        }

        double fa = seg.piece->expr.eval(seg.a);
        double fb = seg.piece->expr.eval(seg.b);
        Piece out;
        out.t_start = seg.a;
        out.t_end = seg.b;
        if (sa.s[i] == sb.s[i]) {
            bool active = run_active_same(*seg.run, sa.s[i]);
            if (active && std::fabs(fb - fa) > drop) {
                if (dead) return std::nullopt;
                out.expr = Expr::sum(Expr::constant(c + fa / delta),
                                     Expr::product(Expr::constant(-1.0 / delta), seg.piece->expr));
                c -= (fb - fa) / delta;
            } else {
                out.expr = Expr::constant(c);
            }
        } else {
            double dm = fam.dm_param[i] >= 0 ? values[static_cast<std::size_t>(fam.dm_param[i])]
                                             : 0.0;
            double fdrop = fam.cross_fdrop[i];
            if (dm > drop && fdrop > drop) {
                if (dead) return std::nullopt;
                double s_a = sa.s[i], s_f = sb.s[i];
                double cmod = s_a * c;
                if (dm > cmod + cf.tol().value) return std::nullopt;
                double famod = s_f * fa, fbmod = s_f * fb;
                out.expr = Expr::sum(
                    Expr::constant(s_a * (cmod - dm * famod / fdrop)),
                    Expr::product(Expr::constant(s_a * s_f * dm / fdrop), seg.piece->expr));
                c = s_a * (cmod - dm * (famod - fbmod) / fdrop);
            } else {
                out.expr = Expr::constant(c);
            }
        }
        if (sa.s[i] * c < -cf.tol().value) return std::nullopt;
        if (std::fabs(c) <= kZTol) dead = true;
        pieces.push_back(std::move(out));
    }

    try {
        return build(cf.family(), std::move(pieces), {}, cf.horizon(), cf.tol());
    } catch (const ValidationError&) {
        return std::nullopt;
    }
}

// ---------------------------------------------------------------------------
// Feasibility along sampled paths
// ---------------------------------------------------------------------------

struct SearchPath {
    std::vector<double> t;
    std::vector<double> f;
    std::vector<bool> left_side;   // entry is the left limit of a jump time
    std::vector<bool> jump_next;   // entry k and k+1 share a jump time
    std::vector<int> interval;
    double slack = 0.0;            // modulus slack matching the residual tol
};

SearchPath make_search_path(const CharacteristicFunction& cf, const Topology& topo, int grid,
                            double residual_tol) {
    SearchPath sp;
    std::vector<Sample> samples = sample(cf, verification_times(cf, topo.runs, grid));
    double ttol = cf.tol().time;
    for (std::size_t k = 0; k < samples.size(); ++k) {
        bool jmp = k + 1 < samples.size() && samples[k + 1].t - samples[k].t <= ttol;
        sp.t.push_back(samples[k].t);
        sp.f.push_back(samples[k].value);
        sp.jump_next.push_back(jmp);
        sp.left_side.push_back(jmp);
    }
    int idx = 0;
    for (std::size_t k = 0; k < sp.t.size(); ++k) {
        sp.interval.push_back(idx);
        if (sp.jump_next[k]) ++idx;
    }
    double d2 = static_cast<double>(cf.family().dim()) * cf.family().dim();
    sp.slack = cf.family().kind() == ChannelFamily::Kind::Dephasing
                   ? residual_tol
                   : residual_tol / (2.0 * (d2 - 1.0));
    return sp;
}

std::vector<double> path_values(const SearchPath& sp, const CharacteristicFunction& g) {
    std::vector<double> out(sp.t.size());
    for (std::size_t k = 0; k < sp.t.size(); ++k)
        out[k] = sp.left_side[k] ? g.value_left(sp.t[k]) : g.value_right(sp.t[k]);
    return out;
}

// Local Markovianity of a sampled path, optionally pinned to a sign pattern.
bool path_admissible(const ChannelFamily& ch, const SearchPath& sp, const std::vector<double>& v,
                     const std::vector<int>* signs, double residual_tol) {
    double slack = sp.slack;
    double ztol = 1e-10;
    for (std::size_t k = 0; k < v.size(); ++k) {
        if (signs != nullptr &&
            (*signs)[static_cast<std::size_t>(sp.interval[k])] * v[k] < -10.0 * slack)
            return false;
        if (k + 1 == v.size()) break;
        if (sp.jump_next[k]) {
            if (ch.divisibility_residual(v[k], v[k + 1]) > residual_tol) return false;
        } else {
            if (std::fabs(v[k]) <= ztol) {
                if (std::fabs(v[k + 1]) > ztol + slack) return false;
            } else {
                if (std::fabs(v[k + 1]) > std::fabs(v[k]) + slack) return false;
                if ((v[k] > 0.0 ? v[k + 1] : -v[k + 1]) < -ztol - slack) return false;
            }
        }
    }
    return true;
}

// Smallest p making the mixture admissible for the target sign pattern,
// +inf when none exists up to p=1.
double min_feasible_p(const ChannelFamily& ch, const SearchPath& sp, const std::vector<double>& f,
                      const std::vector<double>& g, const std::vector<int>& sb,
                      const SolveOptions& opts) {
    std::vector<double> m(f.size());
    auto feasible = [&](double p) {
        for (std::size_t k = 0; k < f.size(); ++k) m[k] = (1.0 - p) * f[k] + p * g[k];
        return path_admissible(ch, sp, m, &sb, opts.residual_tol);
    };
    int scan = std::max(opts.p_scan_points, 4);
    double lo = 0.0, hi = kInf;
    if (feasible(0.0)) return 0.0;
    for (int k = 1; k <= scan; ++k) {
        double p = static_cast<double>(k) / scan;
        if (feasible(p)) {
            hi = p;
            lo = static_cast<double>(k - 1) / scan;
            break;
        }
    }
    if (!std::isfinite(hi)) return kInf;
    while (hi - lo > opts.tol_p) {
        double mid = 0.5 * (lo + hi);
        if (feasible(mid))
            hi = mid;
        else
            lo = mid;
    }
    return hi;
}

// ---------------------------------------------------------------------------
// Parameter search
// ---------------------------------------------------------------------------

struct Evaluation {
    double p = kInf;
    std::optional<CharacteristicFunction> companion;
};

struct SearchContext {
    const CharacteristicFunction* cf = nullptr;
    const Topology* topo = nullptr;
    const SignVector* sa = nullptr;
    const SignVector* sb = nullptr;
    const CandidateFamily* fam = nullptr;
    const SearchPath* sp = nullptr;
    const std::vector<double>* f_vals = nullptr;
    const SolveOptions* opts = nullptr;
};

Evaluation evaluate(const SearchContext& ctx, const std::vector<double>& values) {
    Evaluation ev;
    std::optional<CharacteristicFunction> g =
        build_candidate(*ctx.cf, *ctx.topo, *ctx.sa, *ctx.sb, *ctx.fam, values);
    if (!g) return ev;
    std::vector<double> gv = path_values(*ctx.sp, *g);
    if (!path_admissible(ctx.cf->family(), *ctx.sp, gv, &ctx.sa->s, ctx.opts->residual_tol))
        return ev;
    ev.p = min_feasible_p(ctx.cf->family(), *ctx.sp, *ctx.f_vals, gv, ctx.sb->s, *ctx.opts);
    if (std::isfinite(ev.p)) ev.companion = std::move(g);
    return ev;
}

std::vector<double> param_grid_points(const ParamSpec& spec, double lo, double hi, int n) {
    std::vector<double> pts;
    if (spec.kind == ParamSpec::Kind::Delta) {
        double llo = std::log(lo), lhi = std::log(hi);
        for (int k = 0; k < n; ++k) pts.push_back(std::exp(llo + (lhi - llo) * k / (n - 1)));
    } else {
        for (int k = 0; k < n; ++k) pts.push_back(lo + (hi - lo) * k / (n - 1));
    }
    return pts;
}

}  // namespace

bool compatible(const SignVector& sa, const SignVector& sb, const CharacteristicFunction& cf) {
    Topology topo = analyze(cf);
    if (sa.s.size() != sb.s.size() || sa.s.size() != topo.interval_nm.size()) return false;
    for (std::size_t i = 0; i < sa.s.size(); ++i) {
        if (topo.interval_nm[i] && sa.s[i] != sb.s[i]) return false;
    }
    return true;
}

PabResult solve_pab(const CharacteristicFunction& cf, const SignVector& sa, const SignVector& sb,
                    const SolveOptions& opts) {
    PabResult result;
    Topology topo = analyze(cf);
    CandidateFamily fam = plan_candidate(cf, topo, sa, sb);
    if (!fam.feasible_structure) {
        result.diagnostic = fam.diagnostic;
        return result;
    }

    SearchPath sp = make_search_path(cf, topo, opts.search_grid, opts.residual_tol);
    std::vector<double> f_vals = sp.f;
    SearchContext ctx{&cf, &topo, &sa, &sb, &fam, &sp, &f_vals, &opts};

    std::size_t np = fam.params.size();
    std::vector<double> best_values(np);
    std::vector<std::pair<double, double>> ranges(np);
    for (std::size_t q = 0; q < np; ++q) {
        ranges[q] = {fam.params[q].lo, fam.params[q].hi};
        best_values[q] = fam.params[q].kind == ParamSpec::Kind::Delta
                             ? 1.0
                             : 0.5 * (fam.params[q].lo + fam.params[q].hi);
    }

    Evaluation best = evaluate(ctx, best_values);

    // Coordinate descent: a grid pass per parameter, then ternary refinement
    // of the bracket around the grid optimum. p(x) along one coordinate is
    // quasiconvex here (a max of monotone constraint curves with infeasible
    // flanks), so the ternary step also converges onto feasibility edges.
    int rounds = 1 + std::max(opts.refine_rounds, 0);
    for (int round = 0; round < rounds; ++round) {
        for (std::size_t q = 0; q < np; ++q) {
            const ParamSpec& spec = fam.params[q];
            bool logscale = spec.kind == ParamSpec::Kind::Delta;
            int grid_n = round == 0 ? opts.param_grid : std::min(opts.param_grid, 9);
            std::vector<double> pts =
                param_grid_points(spec, ranges[q].first, ranges[q].second, grid_n);
            std::vector<double> trial = best_values;
            int best_idx = -1;
            for (std::size_t i = 0; i < pts.size(); ++i) {
                trial[q] = pts[i];
                Evaluation ev = evaluate(ctx, trial);
                if (ev.p < best.p - 1e-12) {
                    best_idx = static_cast<int>(i);
                    best_values[q] = pts[i];
                    best = std::move(ev);
                }
            }
            // Bracket around the incumbent (whole range if the grid pass
            // found nothing new this round).
            double a = ranges[q].first, b = ranges[q].second;
            if (best_idx >= 0) {
                a = pts[static_cast<std::size_t>(std::max(best_idx - 1, 0))];
                b = pts[std::min(static_cast<std::size_t>(best_idx) + 1, pts.size() - 1)];
            } else if (std::isfinite(best.p)) {
                a = std::max(spec.lo, logscale ? best_values[q] / 3.0 : best_values[q] - 0.1);
                b = std::min(spec.hi, logscale ? best_values[q] * 3.0 : best_values[q] + 0.1);
            }
            for (int iter = 0; iter < 48 && b - a > 1e-12; ++iter) {
                double m1 = logscale ? std::exp(std::log(a) + (std::log(b) - std::log(a)) / 3.0)
                                     : a + (b - a) / 3.0;
                double m2 = logscale ? std::exp(std::log(b) - (std::log(b) - std::log(a)) / 3.0)
                                     : b - (b - a) / 3.0;
                trial[q] = m1;
                Evaluation e1 = evaluate(ctx, trial);
                double p1 = e1.p;
                if (p1 < best.p - 1e-12) {
                    best_values[q] = m1;
                    best = std::move(e1);
                }
                trial[q] = m2;
                Evaluation e2 = evaluate(ctx, trial);
                double p2 = e2.p;
                if (p2 < best.p - 1e-12) {
                    best_values[q] = m2;
                    best = std::move(e2);
                }
                if (p1 <= p2)
                    b = m2;
                else
                    a = m1;
            }
            ranges[q] = {std::max(spec.lo, a), std::min(spec.hi, b)};
        }
    }

    // The active-slope construction is tight when delta equals p/(1-p); probe
    // that value directly once the search has settled.
    if (fam.delta_param >= 0 && std::isfinite(best.p) && best.p < 1.0 && best.p > 0.0) {
        std::vector<double> trial = best_values;
        trial[static_cast<std::size_t>(fam.delta_param)] = best.p / (1.0 - best.p);
        Evaluation ev = evaluate(ctx, trial);
        if (ev.p <= best.p + opts.tol_p) {
            best_values = trial;
            best = std::move(ev);
        }
    }

    if (!best.companion) {
        result.diagnostic = "no feasible companion parameters";
        return result;
    }

    Companion comp;
    comp.fn = *best.companion;
    comp.provenance = CompanionProvenance::SolverGenerated;
    comp.normalizer =
        fam.delta_param >= 0 ? best_values[static_cast<std::size_t>(fam.delta_param)] : 0.0;

    // Oracle-verified minimal p for the companion the search settled on.
    BisectionResult oracle =
        minimal_p_bisection(cf, comp.fn, opts.tol_p, opts.final_grid, opts.residual_tol);
    result.p = oracle.p;
    result.feasible = true;
    result.companion = std::move(comp);
    for (std::size_t q = 0; q < np; ++q)
        result.params.push_back(
            {fam.params[q].name, best_values[q], fam.params[q].lo, fam.params[q].hi});
    return result;
}

namespace {

MeasureResult measure_enumerate(const CharacteristicFunction& cf, const SolveOptions& opts,
                                MeasureResult base) {
    std::vector<SignVector> vectors = enumerate_sign_vectors(cf, opts);
    base.p = 1.0;
    base.diagnostic = "no feasible sign-vector pair";
    for (const SignVector& sa : vectors) {
        for (const SignVector& sb : vectors) {
            if (!compatible(sa, sb, cf)) continue;
            PabResult pab = solve_pab(cf, sa, sb, opts);
            if (pab.feasible && pab.p < base.p - 1e-12) {
                base.p = pab.p;
                base.companion = pab.companion;
                base.winning_signs = std::make_pair(sa, sb);
                base.params = pab.params;
                base.diagnostic.clear();
            }
        }
    }
    if (base.companion) {
        base.oracle_check =
            minimal_p_bisection(cf, base.companion->fn, opts.tol_p, opts.final_grid,
                                opts.residual_tol);
    }
    return base;
}

}  // namespace

namespace {

// For Markovian input the identity companion h = 1 realizes p = 0.
Companion trivial_companion(const CharacteristicFunction& cf) {
    Companion comp;
    comp.fn = build_single(cf.family(), Expr::constant(1.0), cf.horizon(), cf.tol());
    comp.provenance = CompanionProvenance::HContinuous;
    comp.normalizer = 0.0;
    return comp;
}

}  // namespace

MeasureResult measure_general(const CharacteristicFunction& cf, const SolveOptions& opts) {
    MeasureResult res;
    res.verdict = is_markovian(cf, opts.final_grid);
    std::vector<MonotoneRun> runs = decompose_runs(cf);
    res.gaps = extract_gaps(cf, runs);
    res.tclass = classify_tractable(cf, runs);
    res.pstar = lower_bound_pstar(cf, opts.final_grid);

    if (res.verdict.markovian) {
        res.p = 0.0;
        res.companion = trivial_companion(cf);
        res.oracle_check = minimal_p_bisection(cf, res.companion->fn, opts.tol_p,
                                               opts.final_grid, opts.residual_tol);
        return res;
    }

    if (res.tclass != TractabilityClass::GeneralEnumeration) {
        double total = closed_form_total(res.gaps, res.tclass);
        res.divergent = total > opts.gamma_cap;
        res.p = res.divergent ? 1.0 : total / (1.0 + total);
        Companion comp = res.tclass == TractabilityClass::PositiveClosedForm
                             ? build_positive_companion(cf, runs, res.gaps)
                             : build_continuous_companion(cf, runs, res.gaps.gamma_nm);
        res.companion = std::move(comp);
        if (!res.divergent) {
            res.oracle_check = minimal_p_bisection(cf, res.companion->fn, opts.tol_p,
                                                   opts.final_grid, opts.residual_tol);
        }
        return res;
    }
    return measure_enumerate(cf, opts, std::move(res));
}

MeasureResult measure_via_enumeration(const CharacteristicFunction& cf, const SolveOptions& opts) {
    MeasureResult res;
    res.verdict = is_markovian(cf, opts.final_grid);
    std::vector<MonotoneRun> runs = decompose_runs(cf);
    res.gaps = extract_gaps(cf, runs);
    res.tclass = classify_tractable(cf, runs);
    res.pstar = lower_bound_pstar(cf, opts.final_grid);
    if (res.verdict.markovian) {
        res.p = 0.0;
        res.companion = trivial_companion(cf);
        return res;
    }
    return measure_enumerate(cf, opts, std::move(res));
}

}  // namespace nmmix
