#pragma once

#include <vector>

#include "nmmix/expr.hpp"
#include "nmmix/family.hpp"

namespace nmmix {

// One smooth piece of a characteristic function.
struct Piece {
    double t_start = 0.0;
    double t_end = 0.0;
    Expr expr;
    Expr deriv;  // cached symbolic derivative of expr
};

// A discontinuity with the jump-ratio conventions: xi = f(tau+)/f(tau-);
// +-inf when the left value vanishes and the right one does not; 1 when both
// vanish (in which case the boundary is not recorded as a jump at all).
struct JumpEvent {
    double time = 0.0;
    double left = 0.0;
    double right = 0.0;
    double xi = 1.0;
};

enum class RunSign { Positive, Negative, Zero };

// Maximal stretch on which f is continuous, keeps one sign, and |f| is
// monotone. Runs tile every continuity interval.
struct MonotoneRun {
    double t_in = 0.0;
    double t_fin = 0.0;
    RunSign sign = RunSign::Zero;
    bool mod_nonincreasing = true;  // |f| non-increasing on the run
    double start_value = 0.0;
    double end_value = 0.0;

    double increment() const { return end_value - start_value; }
    bool non_markovian() const { return !mod_nonincreasing; }
};

// Tolerances shared across the pipeline.
struct Tolerances {
    double time = 1e-9;    // extremum refinement / jump time matching
    double value = 1e-9;   // jump detection, f(0)=1, range slack
    double slope = 1e-12;  // derivative magnitudes below this count as zero
    double drop = 1e-10;   // run increments below this are discarded
};

// Piecewise characteristic function f(t) on [0, horizon] with f(0) = 1,
// values inside the family's admissible interval, and explicit jumps at
// interior piece boundaries. Immutable once built.
class CharacteristicFunction {
public:
    // Default instance is empty; only build() produces usable functions.
    CharacteristicFunction() = default;

    const ChannelFamily& family() const { return family_; }
    const std::vector<Piece>& pieces() const { return pieces_; }
    const std::vector<JumpEvent>& jumps() const { return jumps_; }
    double horizon() const { return horizon_; }
    const Tolerances& tol() const { return tol_; }

    // One-sided values and derivatives. Both sides agree except at jumps.
    double value_left(double t) const;
    double value_right(double t) const;
    double deriv_left(double t) const;
    double deriv_right(double t) const;

    // Recorded jump at time tau, if any (matched within the time tolerance).
    const JumpEvent* jump_at(double tau) const;

private:
    ChannelFamily family_ = ChannelFamily::depolarizing(2);
    std::vector<Piece> pieces_;
    std::vector<JumpEvent> jumps_;
    double horizon_ = 0.0;
    Tolerances tol_;

    std::size_t piece_index_left(double t) const;
    std::size_t piece_index_right(double t) const;

    friend CharacteristicFunction build(const ChannelFamily&, std::vector<Piece>,
                                        const std::vector<double>&, double, const Tolerances&);
    friend CharacteristicFunction mix(const CharacteristicFunction&, const CharacteristicFunction&,
                                      double);
};

// Validates and assembles a characteristic function. Pieces must tile
// [0, horizon]; mismatched piece boundaries become jumps; f(0) must be 1 and
// every value must stay inside the family interval. declared_jumps, when
// given, must each coincide with a detected discontinuity.
CharacteristicFunction build(const ChannelFamily& family, std::vector<Piece> pieces,
                             const std::vector<double>& declared_jumps, double horizon,
                             const Tolerances& tol = {});

// Convenience: one expression covering [0, horizon].
CharacteristicFunction build_single(const ChannelFamily& family, const Expr& expr, double horizon,
                                    const Tolerances& tol = {});

// Jump ratio at tau per the xi conventions; exactly 1 at continuity points.
double jump_ratio(const CharacteristicFunction& cf, double tau);

// xi value from one-sided values (shared conventions, usable on raw numbers).
double jump_ratio_value(double left, double right, double ztol = 1e-12);

// Splits every continuity interval into sign- and monotonicity-uniform runs.
// Interior extrema and zero crossings are refined by bisection to the time
// tolerance.
std::vector<MonotoneRun> decompose_runs(const CharacteristicFunction& cf);

// Pointwise convex combination (1-p)*a + p*b. Families and horizons must
// match; jumps are recomputed from the mixed one-sided values.
CharacteristicFunction mix(const CharacteristicFunction& a, const CharacteristicFunction& b,
                           double p);

// A run clipped to a single piece, so the stretch carries one expression.
struct RunSegment {
    double a = 0.0;
    double b = 0.0;
    const Piece* piece = nullptr;
    const MonotoneRun* run = nullptr;
};

// Time-ordered run/piece intersections covering [0, horizon].
std::vector<RunSegment> run_piece_segments(const CharacteristicFunction& cf,
                                           const std::vector<MonotoneRun>& runs);

struct Sample {
    double t = 0.0;
    double value = 0.0;
};

// Evaluates cf on an ordered grid. A grid time that hits a jump yields two
// rows, left value then right value.
std::vector<Sample> sample(const CharacteristicFunction& cf, const std::vector<double>& grid);

}  // namespace nmmix
