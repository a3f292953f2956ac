#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "nmmix/companion.hpp"
#include "nmmix/gaps.hpp"
#include "nmmix/markov.hpp"
#include "nmmix/oracle.hpp"

namespace nmmix {

// One sign per continuity interval; the first entry is always +1. The
// companion keeps this sign pattern and may change sign only at the
// evolution's jump times.
struct SignVector {
    std::vector<int> s;

    bool operator==(const SignVector& other) const { return s == other.s; }
};

std::string to_string(const SignVector& sv);

struct SolveOptions {
    int max_jumps = 10;       // enumeration cap (cost grows as 4^N)
    double tol_p = 1e-4;      // bisection tolerance on p
    int param_grid = 33;      // coarse grid points per free parameter
    int refine_rounds = 2;    // 10x local refinement rounds
    int search_grid = 600;    // grid density during the parameter search
    int final_grid = 2000;    // grid density for the returned value
    double residual_tol = 1e-8;
    double gamma_cap = 1e6;   // gap total above which p saturates to 1
    int p_scan_points = 48;   // coarse feasibility scan in p
};

// A solved free parameter of the winning companion.
struct SolvedParam {
    std::string name;
    double value = 0.0;
    double lo = 0.0;
    double hi = 0.0;
};

// All 2^N sign vectors over the N+1 continuity intervals, first entry +1,
// in the labeling where the second interval flips fastest.
std::vector<SignVector> enumerate_sign_vectors(const CharacteristicFunction& cf,
                                               const SolveOptions& opts = {});

// False when some continuity interval carries non-Markovian continuous
// behaviour while the two vectors disagree there; such pairs get p = 1
// without any search.
bool compatible(const SignVector& sa, const SignVector& sb, const CharacteristicFunction& cf);

struct PabResult {
    double p = 1.0;
    bool feasible = false;
    std::string diagnostic;
    std::optional<Companion> companion;
    std::vector<SolvedParam> params;
};

// Minimal p over the parametric companion family prescribed by the two sign
// vectors: slopes 0 or -f'/Delta per interval case, jump ratios fixed or
// free per jump case, modulus drops on mixed-sign intervals. Feasibility of
// every (p, params) candidate is decided on the mixture; the returned p is
// oracle-verified for the returned companion.
PabResult solve_pab(const CharacteristicFunction& cf, const SignVector& sa, const SignVector& sb,
                    const SolveOptions& opts = {});

struct MeasureResult {
    double p = 0.0;
    PStarBound pstar;
    TractabilityClass tclass = TractabilityClass::ContinuousClosedForm;
    MarkovVerdict verdict;
    GapReport gaps;
    bool divergent = false;
    std::optional<Companion> companion;
    std::optional<std::pair<SignVector, SignVector>> winning_signs;
    std::vector<SolvedParam> params;
    std::optional<BisectionResult> oracle_check;
    std::string diagnostic;
};

// Full pipeline: classify, use the closed form when one applies, otherwise
// enumerate sign-vector pairs and minimize. Ties break toward the
// lexicographically smallest pair.
MeasureResult measure_general(const CharacteristicFunction& cf, const SolveOptions& opts = {});

// Enumeration pathway regardless of tractability class (cross-checks the
// closed forms; used by tests and the consistency suite).
MeasureResult measure_via_enumeration(const CharacteristicFunction& cf,
                                      const SolveOptions& opts = {});

}  // namespace nmmix
