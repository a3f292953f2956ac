#pragma once

// Shared builders for the evolutions exercised across the test suites, plus
// small numeric helpers (finite differences, random expression trees).

#include <cmath>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "nmmix/charfun.hpp"
#include "nmmix/expr.hpp"

namespace fixtures {

using namespace nmmix;

inline constexpr double kPi = std::numbers::pi;

inline Piece make_piece(double a, double b, const std::string& expr) {
    Piece p;
    p.t_start = a;
    p.t_end = b;
    p.expr = parse_expr(expr);
    return p;
}

inline CharacteristicFunction from_pieces(const ChannelFamily& fam,
                                          const std::vector<Piece>& pieces, double horizon) {
    return build(fam, pieces, {}, horizon);
}

// Damped oscillation, qubit depolarizing, horizon 7*pi/2.
inline CharacteristicFunction damped_cosine(double horizon = 3.5 * kPi) {
    return build_single(ChannelFamily::depolarizing(2), parse_expr("exp(-2*t/5)*cos(t)"),
                        horizon);
}

// Single positive bump: drops 1 -> 0.5, rises back to 0.7, then flat.
inline CharacteristicFunction single_bump(double rise = 0.2, double horizon = 3.0) {
    std::vector<Piece> pieces = {
        make_piece(0.0, 1.0, "1-0.5*t"),
        make_piece(1.0, 2.0, "0.5+" + std::to_string(rise) + "*(t-1)"),
        make_piece(2.0, horizon, std::to_string(0.5 + rise)),
    };
    return from_pieces(ChannelFamily::depolarizing(2), pieces, horizon);
}

// Markovian staircase with jump ratios 0.83, -0.33, -0.27, 0.
inline CharacteristicFunction markovian_staircase() {
    double v1 = 0.83;
    double v2 = v1 * -0.33;
    double v3 = v2 * -0.27;
    std::vector<Piece> pieces = {
        make_piece(0.0, 1.0, "1"),
        make_piece(1.0, 2.0, std::to_string(v1)),
        make_piece(2.0, 5.0, std::to_string(v2)),
        make_piece(5.0, 8.0, std::to_string(v3)),
        make_piece(8.0, 10.0, "0"),
    };
    return from_pieces(ChannelFamily::depolarizing(2), pieces, 10.0);
}

// Single-discontinuity family: flat at 1, Markovian jump to the interval
// floor, rebound up by theta, non-Markovian dip back down, flat tail.
inline CharacteristicFunction theta_family(double theta, int d = 2, double horizon = 4.0) {
    double floor = -1.0 / (static_cast<double>(d) * d - 1.0);
    std::string f = std::to_string(floor);
    std::string th = std::to_string(theta);
    std::vector<Piece> pieces = {
        make_piece(0.0, 1.0, "1"),
        make_piece(1.0, 2.0, f + "+" + th + "*(t-1)"),
        make_piece(2.0, 3.0, f + "+" + th + "-" + th + "*(t-2)"),
        make_piece(3.0, horizon, f),
    };
    return from_pieces(ChannelFamily::depolarizing(d), pieces, horizon);
}

// Positive evolution whose only non-Markovian feature is one upward jump of
// size pi_gap at t=2 (from the level a).
inline CharacteristicFunction positive_jump(double pi_gap, double a = 0.3, double horizon = 3.0) {
    std::vector<Piece> pieces = {
        make_piece(0.0, 1.0, "1-" + std::to_string(1.0 - a) + "*t"),
        make_piece(1.0, 2.0, std::to_string(a)),
        make_piece(2.0, horizon, std::to_string(a + pi_gap)),
    };
    return from_pieces(ChannelFamily::depolarizing(2), pieces, horizon);
}

// Non-convexity pair: 1 until t=1, then cos^2 / sin^2 oscillations.
inline CharacteristicFunction cos2_oscillation(double horizon) {
    std::vector<Piece> pieces = {
        make_piece(0.0, 1.0, "1"),
        make_piece(1.0, horizon, "cos(t-1)^2"),
    };
    return from_pieces(ChannelFamily::depolarizing(2), pieces, horizon);
}

inline CharacteristicFunction sin2_oscillation(double horizon) {
    std::vector<Piece> pieces = {
        make_piece(0.0, 1.0, "1"),
        make_piece(1.0, horizon, "sin(t-1)^2"),
    };
    return from_pieces(ChannelFamily::depolarizing(2), pieces, horizon);
}

// Markovian staircase pair whose every non-trivial mixture is non-Markovian:
// the identity evolution and two sign-flipping drops to the interval floor.
inline CharacteristicFunction identity_evolution(double horizon = 4.0) {
    return build_single(ChannelFamily::depolarizing(2), parse_expr("1"), horizon);
}

inline CharacteristicFunction double_flip_staircase(double horizon = 4.0) {
    std::vector<Piece> pieces = {
        make_piece(0.0, 1.0, "1"),
        make_piece(1.0, 2.0, "-1/3"),
        make_piece(2.0, horizon, "1/9"),
    };
    return from_pieces(ChannelFamily::depolarizing(2), pieces, horizon);
}

// Central finite difference used against the symbolic derivative.
inline double finite_difference(const Expr& e, double t, double h = 1e-6) {
    return (e.eval(t + h) - e.eval(t - h)) / (2.0 * h);
}

// Random expression trees over the full grammar, depth-bounded.
inline Expr random_expr(std::mt19937& rng, int depth) {
    std::uniform_int_distribution<int> leaf(0, 2);
    std::uniform_real_distribution<double> val(-3.0, 3.0);
    if (depth <= 0) {
        switch (leaf(rng)) {
            case 0: return Expr::constant(val(rng));
            default: return Expr::variable();
        }
    }
    std::uniform_int_distribution<int> node(0, 9);
    switch (node(rng)) {
        case 0: return Expr::sum(random_expr(rng, depth - 1), random_expr(rng, depth - 1));
        case 1: return Expr::difference(random_expr(rng, depth - 1), random_expr(rng, depth - 1));
        case 2: return Expr::product(random_expr(rng, depth - 1), random_expr(rng, depth - 1));
        case 3:
            return Expr::quotient(random_expr(rng, depth - 1),
                                  Expr::sum(Expr::product(random_expr(rng, depth - 1),
                                                          random_expr(rng, depth - 1)),
                                            Expr::constant(4.0)));
        case 4: return Expr::negate(random_expr(rng, depth - 1));
        case 5: {
            std::uniform_int_distribution<int> expo(0, 3);
            return Expr::power(random_expr(rng, depth - 1), expo(rng));
        }
        case 6: return Expr::sin(random_expr(rng, depth - 1));
        case 7: return Expr::cos(random_expr(rng, depth - 1));
        case 8: {
            // Keep exponents tame so evaluation stays finite.
            return Expr::exp(Expr::product(Expr::constant(0.3), random_expr(rng, depth - 1)));
        }
        default: return Expr::constant(val(rng));
    }
}

// Random continuous depolarizing fixtures: damped oscillations with
// parameters resampled until every value stays inside the admissible
// interval.
inline CharacteristicFunction random_continuous_fixture(std::mt19937& rng) {
    std::uniform_real_distribution<double> amp(0.45, 0.95);
    std::uniform_real_distribution<double> rate(0.35, 0.9);
    std::uniform_real_distribution<double> freq(0.7, 1.6);
    std::uniform_real_distribution<double> horizon_u(6.0, 11.0);
    for (;;) {
        double a = amp(rng), r = rate(rng), w = freq(rng);
        // f(t) = exp(-r t) (a cos(w t) + 1 - a): f(0) = 1, |f| <= exp(-r t).
        std::string expr = "exp(-" + std::to_string(r) + "*t)*(" + std::to_string(a) + "*cos(" +
                           std::to_string(w) + "*t)+" + std::to_string(1.0 - a) + ")";
        try {
            return build_single(ChannelFamily::depolarizing(2), parse_expr(expr),
                                horizon_u(rng));
        } catch (const ValidationError&) {
            // dips below the interval floor; draw again
        }
    }
}

}  // namespace fixtures
