#include "nmmix/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "nmmix/errors.hpp"

namespace nmmix {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Modulus slack equivalent to a residual tolerance: a rise of eps in |f|
// produces a residual of about 2(d^2-1)*eps for depolarizing and eps for
// dephasing.
double value_slack(const ChannelFamily& fam, double residual_tol) {
    if (fam.kind() == ChannelFamily::Kind::Dephasing) return residual_tol;
    double d2 = static_cast<double>(fam.dim()) * fam.dim();
    return residual_tol / (2.0 * (d2 - 1.0));
}

}  // namespace

ResidualScan scan_residual(const ChannelFamily& family, const std::vector<Sample>& samples) {
    ResidualScan out;
    out.worst = -kInf;
    std::size_t n = samples.size();
    if (family.kind() == ChannelFamily::Kind::Dephasing) {
        for (std::size_t i = 0; i < n; ++i) {
            double vs = std::fabs(samples[i].value);
            for (std::size_t j = i; j < n; ++j) {
                double r = std::fabs(samples[j].value) - vs;
                if (r > out.worst) {
                    out.worst = r;
                    out.i = i;
                    out.j = j;
                }
            }
        }
        return out;
    }
    double d2 = static_cast<double>(family.dim()) * family.dim();
    double c1 = 2.0 * (d2 - 1.0), c2 = d2 - 2.0;
    for (std::size_t i = 0; i < n; ++i) {
        double vi = samples[i].value;
        double base = c2 * vi;
        double sub = d2 * std::fabs(vi);
        for (std::size_t j = i; j < n; ++j) {
            double r = std::fabs(c1 * samples[j].value - base) - sub;
            if (r > out.worst) {
                out.worst = r;
                out.i = i;
                out.j = j;
            }
        }
    }
    return out;
}

std::vector<double> verification_times(const CharacteristicFunction& cf,
                                       const std::vector<MonotoneRun>& runs, int n_points) {
    std::vector<double> times;
    times.reserve(static_cast<std::size_t>(n_points) + 2 * runs.size() + cf.jumps().size());
    double h = cf.horizon();
    int n = std::max(n_points, 2);
    for (int i = 0; i < n; ++i) times.push_back(h * i / (n - 1));
    for (const MonotoneRun& r : runs) {
        times.push_back(r.t_in);
        times.push_back(r.t_fin);
    }
    for (const JumpEvent& j : cf.jumps()) times.push_back(j.time);
    std::sort(times.begin(), times.end());
    double ttol = cf.tol().time;
    times.erase(std::unique(times.begin(), times.end(),
                            [&](double a, double b) { return std::fabs(a - b) <= ttol; }),
                times.end());
    if (times.back() > h) times.back() = h;
    return times;
}

GridVerdict verify_markovian_grid(const CharacteristicFunction& cf, int n_points, double tol) {
    std::vector<Sample> samples = sample(cf, verification_times(cf, decompose_runs(cf), n_points));
    ResidualScan scan = scan_residual(cf.family(), samples);
    GridVerdict v;
    v.markovian = scan.worst <= tol;
    v.worst_residual = scan.worst;
    v.worst_s = samples[scan.i].t;
    v.worst_t = samples[scan.j].t;
    v.grid_size = static_cast<int>(samples.size());
    return v;
}

namespace {

// cf and companion evaluated on one shared grid, jump sides duplicated
// consistently so mixtures can be formed index by index.
struct AlignedPaths {
    std::vector<double> t;
    std::vector<double> f;
    std::vector<double> g;
};

AlignedPaths align_paths(const CharacteristicFunction& a, const CharacteristicFunction& b,
                         int n_points) {
    std::vector<double> ta = verification_times(a, decompose_runs(a), n_points);
    std::vector<double> tb = verification_times(b, decompose_runs(b), 2);
    ta.insert(ta.end(), tb.begin(), tb.end());
    std::sort(ta.begin(), ta.end());
    double ttol = a.tol().time;
    ta.erase(std::unique(ta.begin(), ta.end(),
                         [&](double x, double y) { return std::fabs(x - y) <= ttol; }),
             ta.end());

    AlignedPaths out;
    for (double t : ta) {
        bool jump = a.jump_at(t) != nullptr || b.jump_at(t) != nullptr;
        if (jump) {
            out.t.push_back(t);
            out.f.push_back(a.value_left(t));
            out.g.push_back(b.value_left(t));
        }
        out.t.push_back(t);
        out.f.push_back(a.value_right(t));
        out.g.push_back(b.value_right(t));
    }
    return out;
}

double scan_mixture_worst(const ChannelFamily& fam, const AlignedPaths& paths, double p) {
    std::size_t n = paths.t.size();
    std::vector<Sample> mixed(n);
    for (std::size_t k = 0; k < n; ++k)
        mixed[k] = {paths.t[k], (1.0 - p) * paths.f[k] + p * paths.g[k]};
    return scan_residual(fam, mixed).worst;
}

}  // namespace

BisectionResult minimal_p_bisection(const CharacteristicFunction& cf,
                                    const CharacteristicFunction& companion, double tol_p,
                                    int n_points, double residual_tol) {
    AlignedPaths paths = align_paths(cf, companion, n_points);
    auto feasible = [&](double p) {
        return scan_mixture_worst(cf.family(), paths, p) <= residual_tol;
    };
    if (!feasible(1.0))
        throw ValidationError("companion invalid: mixture at p=1 fails the divisibility check");
    if (feasible(0.0)) return {0.0, true};

    double lo = 0.0, hi = 1.0;
    while (hi - lo > tol_p) {
        double mid = 0.5 * (lo + hi);
        if (feasible(mid))
            hi = mid;
        else
            lo = mid;
    }
    BisectionResult res;
    res.p = hi;
    for (int k = 1; k <= 5; ++k) {
        if (!feasible(hi + (1.0 - hi) * k / 6.0)) res.monotone_ok = false;
    }
    return res;
}

// ---------------------------------------------------------------------------
// Brute-force measure: greedy search over piecewise-linear companions
// ---------------------------------------------------------------------------

namespace {

// Interval bounds lo <= x <= hi assembled from signed linear constraints.
// Constraints are exact; emptiness is judged with a small absolute slack and
// the picked value is the exact extreme (or the pinch midpoint), so greedy
// paths do not accumulate tolerance drift.
struct Bounds {
    double lo = -kInf;
    double hi = kInf;

    void upper(double s, double b) {  // s*x <= b, s != 0
        if (s > 0.0)
            hi = std::min(hi, b / s);
        else
            lo = std::max(lo, b / s);
    }
    void lower(double s, double b) {  // s*x >= b, s != 0
        if (s > 0.0)
            lo = std::max(lo, b / s);
        else
            hi = std::min(hi, b / s);
    }
    bool ok(double slack) const { return lo <= hi + slack; }
    double pick_max(double s) const {
        if (lo > hi) return 0.5 * (lo + hi);
        return s > 0.0 ? hi : lo;
    }
};

struct BrutePath {
    std::vector<double> t;
    std::vector<double> f;
    std::vector<int> interval;  // continuity-interval index of each entry
    std::vector<bool> jump_to_next;
    std::vector<bool> interval_nm;  // interval contains non-Markovian runs
};

BrutePath prepare_path(const CharacteristicFunction& cf, const std::vector<MonotoneRun>& runs,
                       int node_points) {
    BrutePath bp;
    std::vector<Sample> samples = sample(cf, verification_times(cf, runs, node_points));
    double ttol = cf.tol().time;
    int idx = 0;
    for (std::size_t k = 0; k < samples.size(); ++k) {
        bp.t.push_back(samples[k].t);
        bp.f.push_back(samples[k].value);
        bp.interval.push_back(idx);
        bool jmp = k + 1 < samples.size() && samples[k + 1].t - samples[k].t <= ttol;
        bp.jump_to_next.push_back(jmp);
        if (jmp) ++idx;
    }
    bp.interval_nm.assign(static_cast<std::size_t>(idx) + 1, false);
    for (const MonotoneRun& r : runs) {
        if (!r.non_markovian()) continue;
        double mid = 0.5 * (r.t_in + r.t_fin);
        int i = 0;
        for (const JumpEvent& j : cf.jumps()) {
            if (j.time < mid) ++i;
        }
        bp.interval_nm[static_cast<std::size_t>(i)] = true;
    }
    return bp;
}

// Sign patterns over N+1 continuity intervals, first entry +1, in the
// labeling where the second interval is the fastest-flipping position.
std::vector<std::vector<int>> sign_patterns(int n_jumps) {
    std::vector<std::vector<int>> out;
    int count = 1 << n_jumps;
    for (int a = 0; a < count; ++a) {
        std::vector<int> s(static_cast<std::size_t>(n_jumps) + 1, 1);
        for (int bit = 0; bit < n_jumps; ++bit) {
            if (a & (1 << bit)) s[static_cast<std::size_t>(bit) + 1] = -1;
        }
        out.push_back(std::move(s));
    }
    return out;
}

// Constructs the companion greedily along the grid: keep |g| as large as the
// companion rules, the mixture sign pattern, and the mixture's divisibility
// permit. Returns the node values or failure.
bool greedy_walk(const ChannelFamily& fam, const BrutePath& bp, const std::vector<int>& sa,
                 const std::vector<int>& sb, double p, double slack, std::vector<double>& g) {
    double ztol = 1e-10;
    double lo_fam = fam.lo();
    std::size_t n = bp.t.size();
    g.assign(n, 0.0);
    g[0] = 1.0;
    for (std::size_t k = 0; k + 1 < n; ++k) {
        int i = bp.interval[k];
        int i2 = bp.interval[k + 1];
        double s_a = sa[static_cast<std::size_t>(i)];
        double s_a2 = sa[static_cast<std::size_t>(i2)];
        double s_b2 = sb[static_cast<std::size_t>(i2)];
        Bounds bounds;
        if (bp.jump_to_next[k]) {
            // Companion jump rule: same sign keeps xi_g in [0,1], a flip
            // needs xi_g in [lo_fam, 0].
            double mag = s_a * g[k];
            bounds.lower(s_a2, 0.0);
            bounds.upper(s_a2, s_a2 == s_a ? mag : -lo_fam * mag);
            // Mixture jump must stay admissible (zero-trap included).
            double m_minus = (1.0 - p) * bp.f[k] + p * g[k];
            if (std::fabs(m_minus) <= ztol) {
                bounds.upper(p, -(1.0 - p) * bp.f[k + 1]);
                bounds.lower(p, -(1.0 - p) * bp.f[k + 1]);
            } else {
                double e1 = m_minus, e2 = lo_fam * m_minus;
                bounds.upper(p, std::max(e1, e2) - (1.0 - p) * bp.f[k + 1]);
                bounds.lower(p, std::min(e1, e2) - (1.0 - p) * bp.f[k + 1]);
            }
        } else {
            double df = bp.f[k + 1] - bp.f[k];
            bounds.upper(s_a, s_a * g[k]);                               // |g| non-increasing
            bounds.upper(s_b2 * p, s_b2 * (p * g[k] - (1.0 - p) * df));  // |m| non-increasing
        }
        bounds.lower(s_a2, 0.0);                                  // companion sign
        bounds.lower(s_b2 * p, -s_b2 * (1.0 - p) * bp.f[k + 1]);  // mixture sign
        if (!bounds.ok(slack)) return false;
        g[k + 1] = bounds.pick_max(s_a2);
    }
    return true;
}

bool path_markovian(const ChannelFamily& fam, const BrutePath& bp, const std::vector<double>& v,
                    double slack, double residual_tol) {
    double ztol = 1e-10;
    for (std::size_t k = 0; k + 1 < v.size(); ++k) {
        if (bp.jump_to_next[k]) {
            if (fam.divisibility_residual(v[k], v[k + 1]) > residual_tol) return false;
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

}  // namespace

double brute_force_measure(const CharacteristicFunction& cf, const CompanionSpace& space,
                           const BruteForceOptions& opts) {
    std::vector<MonotoneRun> runs = decompose_runs(cf);
    int n_jumps = static_cast<int>(cf.jumps().size());
    if (n_jumps > opts.max_jumps)
        throw CapExceeded("brute force: " + std::to_string(n_jumps) + " jumps exceed cap " +
                          std::to_string(opts.max_jumps));

    BrutePath bp = prepare_path(cf, runs, space.node_points);
    double slack = value_slack(cf.family(), opts.residual_tol);
    std::vector<std::vector<int>> patterns = sign_patterns(n_jumps);

    // p = 0 works exactly when cf itself is Markovian.
    {
        std::vector<Sample> samples;
        for (std::size_t k = 0; k < bp.t.size(); ++k) samples.push_back({bp.t[k], bp.f[k]});
        if (scan_residual(cf.family(), samples).worst <= opts.residual_tol) return 0.0;
    }

    std::vector<double> g;
    auto feasible = [&](double p) {
        for (const std::vector<int>& sa : patterns) {
            for (const std::vector<int>& sb : patterns) {
                bool compat = true;
                for (std::size_t i = 0; i < sa.size(); ++i) {
                    if (bp.interval_nm[i] && sa[i] != sb[i]) compat = false;
                }
                if (!compat) continue;
                if (!greedy_walk(cf.family(), bp, sa, sb, p, slack, g)) continue;
                if (!path_markovian(cf.family(), bp, g, slack, opts.residual_tol)) continue;
                std::vector<double> m(g.size());
                for (std::size_t k = 0; k < g.size(); ++k)
                    m[k] = (1.0 - p) * bp.f[k] + p * g[k];
                if (!path_markovian(cf.family(), bp, m, slack, opts.residual_tol)) continue;
                return true;
            }
        }
        return false;
    };

    // Coarse scan locates the feasible region, bisection sharpens its edge.
    int scan = std::max(opts.p_scan_points, 4);
    double lo = 0.0, hi = 1.0;
    bool found = false;
    for (int k = 1; k <= scan; ++k) {
        double p = static_cast<double>(k) / scan;
        if (feasible(p)) {
            hi = p;
            lo = static_cast<double>(k - 1) / scan;
            found = true;
            break;
        }
    }
    if (!found) return 1.0;
    while (hi - lo > opts.tol_p) {
        double mid = 0.5 * (lo + hi);
        if (feasible(mid))
            hi = mid;
        else
            lo = mid;
    }

    // Back the result with the full pairwise check of the winning mixture.
    for (double p = hi; p <= 1.0; p += opts.tol_p) {
        for (const std::vector<int>& sa : patterns) {
            for (const std::vector<int>& sb : patterns) {
                if (!greedy_walk(cf.family(), bp, sa, sb, p, slack, g)) continue;
                std::vector<Sample> mixed(g.size());
                for (std::size_t k = 0; k < g.size(); ++k)
                    mixed[k] = {bp.t[k], (1.0 - p) * bp.f[k] + p * g[k]};
                if (scan_residual(cf.family(), mixed).worst <= opts.residual_tol) return p;
            }
        }
    }
    return 1.0;
}

}  // namespace nmmix
