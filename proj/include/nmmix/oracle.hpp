#pragma once

#include <vector>

#include "nmmix/charfun.hpp"

namespace nmmix {

// Verdict of the exhaustive two-time grid check.
struct GridVerdict {
    bool markovian = true;
    double worst_residual = 0.0;
    double worst_s = 0.0;
    double worst_t = 0.0;
    int grid_size = 0;
};

// Worst divisibility residual over ordered sample pairs (s <= t), jump sides
// included as adjacent entries.
struct ResidualScan {
    double worst = 0.0;
    std::size_t i = 0;
    std::size_t j = 0;
};

ResidualScan scan_residual(const ChannelFamily& family, const std::vector<Sample>& samples);

// Times for a verification grid: n uniform points plus every run boundary
// and jump time (sample() then duplicates the jump sides).
std::vector<double> verification_times(const CharacteristicFunction& cf,
                                       const std::vector<MonotoneRun>& runs, int n_points);

// Brute-force divisibility check of cf over all ordered grid pairs.
GridVerdict verify_markovian_grid(const CharacteristicFunction& cf, int n_points = 2000,
                                  double tol = 1e-9);

struct BisectionResult {
    double p = 0.0;
    bool monotone_ok = true;  // spot-check of feasibility monotonicity in p
};

// Smallest p (within tol_p) making mix(cf, companion, p) pass the grid check.
// Requires the mixture at p=1 (the companion itself) to pass; throws
// ValidationError otherwise.
BisectionResult minimal_p_bisection(const CharacteristicFunction& cf,
                                    const CharacteristicFunction& companion, double tol_p = 1e-4,
                                    int n_points = 2000, double residual_tol = 1e-9);

// Companion family searched by the brute-force oracle: piecewise-linear
// functions with nodes at run boundaries, jump sides, and a uniform fill,
// with sign changes allowed only at cf's jump times.
struct CompanionSpace {
    int node_points = 801;
};

struct BruteForceOptions {
    double tol_p = 1e-4;
    int max_jumps = 4;          // cap on 4^N sign-pattern enumeration
    double residual_tol = 1e-8;
    int p_scan_points = 64;     // coarse feasibility scan before bisection
};

// Independent upper bound on the mixing measure: minimizes the feasible p
// over the piecewise-linear companion family, exploring each sign pattern
// with a greedy maximal-resource construction. The returned value is backed
// by a full grid check of the winning mixture.
double brute_force_measure(const CharacteristicFunction& cf, const CompanionSpace& space = {},
                           const BruteForceOptions& opts = {});

}  // namespace nmmix
