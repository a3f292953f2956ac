#pragma once

#include "nmmix/charfun.hpp"
#include "nmmix/gaps.hpp"
#include "nmmix/markov.hpp"

namespace nmmix {

enum class CompanionProvenance { HContinuous, GPositive, SolverGenerated };

const char* to_string(CompanionProvenance p);

// A Markovian characteristic function meant to be mixed with a non-Markovian
// one, together with the normalizer its slopes were scaled by.
struct Companion {
    CharacteristicFunction fn;
    CompanionProvenance provenance = CompanionProvenance::HContinuous;
    double normalizer = 0.0;
};

// Continuous companion: starts at 1, loses -f'(t)/gamma wherever f rises
// (non-Markovian positive stretches and negative rebounds), stays constant
// elsewhere. Throws when gamma is too small to keep it inside [0,1].
Companion build_continuous_companion(const CharacteristicFunction& cf,
                                     const std::vector<MonotoneRun>& runs, double gamma);
Companion build_continuous_companion(const CharacteristicFunction& cf, double gamma);

// Companion for non-negative evolutions with non-Markovian jumps: slope
// -f'/(Delta+pi) on the rising runs plus a drop of pi_i/(Delta+pi) at every
// non-Markovian jump time. Ends at zero.
Companion build_positive_companion(const CharacteristicFunction& cf,
                                   const std::vector<MonotoneRun>& runs, const GapReport& gaps);
Companion build_positive_companion(const CharacteristicFunction& cf);

// Gap total the closed form for the given class is built from:
// gamma for the continuous routes, delta+pi for the positive route.
double closed_form_total(const GapReport& gaps, TractabilityClass tclass);

// Closed-form measure total/(1+total), saturating to exactly 1 once the
// total exceeds gamma_cap (the divergent-gap regime). Not defined for the
// enumeration class.
double measure_closed_form(const GapReport& gaps, TractabilityClass tclass,
                           double gamma_cap = 1e6);

}  // namespace nmmix
