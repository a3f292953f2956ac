#pragma once

#include <vector>

#include "nmmix/charfun.hpp"

namespace nmmix {

struct Gap {
    double t_in = 0.0;
    double t_fin = 0.0;
    double amount = 0.0;
};

// All non-Markovian increments and Markovian rebounds of a characteristic
// function at horizon truncation, extracted from the run decomposition and
// the jump list.
struct GapReport {
    std::vector<Gap> positive_gaps;  // Delta_k > 0: positive increasing runs
    std::vector<Gap> negative_gaps;  // Theta_j < 0: negative decreasing runs
    std::vector<Gap> rebound_gaps;   // delta_j > 0: negative non-decreasing runs
    std::vector<Gap> jump_gaps;      // pi_i > 0: non-Markovian jumps, both sides >= 0

    double delta_nm = 0.0;    // sum of Delta_k
    double theta_nm = 0.0;    // sum of Theta_j (negative)
    double rebound_nm = 0.0;  // sum of delta_j
    double pi_nm = 0.0;       // sum of pi_i
    double gamma_nm = 0.0;    // delta_nm + |theta_nm|
};

GapReport extract_gaps(const CharacteristicFunction& cf, const std::vector<MonotoneRun>& runs);
GapReport extract_gaps(const CharacteristicFunction& cf);

}  // namespace nmmix
