#pragma once

#include <vector>

#include "nmmix/charfun.hpp"

namespace nmmix {

enum class LocalStatus { ModulusNonIncreasing, AdmissibleJump, Violated };

// Outcome of the local Markovianity conditions at one time: at continuity
// points |f| must not increase (one-sided derivatives), at jumps the ratio
// must lie in the admissible interval.
struct LocalVerdict {
    double time = 0.0;
    LocalStatus status = LocalStatus::ModulusNonIncreasing;
    double mod_slope_left = 0.0;   // one-sided slope of |f| (continuity points)
    double mod_slope_right = 0.0;
    double xi = 1.0;               // jump ratio (jump times)
    bool at_jump = false;
};

// A pair s <= t violating the divisibility inequality.
struct Witness {
    double s = 0.0;
    double t = 0.0;
    double residual = 0.0;
};

struct MarkovVerdict {
    bool markovian = true;
    double worst_residual = 0.0;
    std::vector<Witness> witnesses;  // worst first, empty when markovian
};

// Residual at or below this means "Markovian" everywhere in the library.
inline constexpr double kMarkovResidualTol = 1e-9;

LocalVerdict classify_local(const CharacteristicFunction& cf, double tau);

// Markovian iff the run/jump sweep passes and the pairwise residual stays
// within tolerance over a dense grid. The two checks are redundant by
// construction; a clear disagreement raises std::logic_error.
MarkovVerdict is_markovian(const CharacteristicFunction& cf, int grid_resolution = 2000);

struct PStarBound {
    double value = 0.0;
    bool available = true;  // false for families without a published bound
};

// Model-independent lower bound on the mixing measure, from the worst
// violating pair. Zero for Markovian input; unavailable for dephasing.
PStarBound lower_bound_pstar(const CharacteristicFunction& cf, int grid_resolution = 2000);

enum class TractabilityClass {
    ContinuousClosedForm,
    PositiveClosedForm,
    ExtendedContinuous,
    GeneralEnumeration,
};

const char* to_string(TractabilityClass c);

// Classification drives which solution route computes the measure. The
// priority order resolves overlaps; overlapping classes agree on the value.
TractabilityClass classify_tractable(const CharacteristicFunction& cf,
                                     const std::vector<MonotoneRun>& runs);
TractabilityClass classify_tractable(const CharacteristicFunction& cf);

}  // namespace nmmix
