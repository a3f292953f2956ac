#pragma once

#include <string>
#include <vector>

#include "nmmix/charfun.hpp"
#include "nmmix/solver.hpp"

namespace nmmix {

// Evolution-spec JSON:
// {
//   "family": {"depolarizing": {"d": 2}} or "dephasing",
//   "horizon": 10.0,
//   "pieces": [{"t_start": 0.0, "t_end": 10.0, "expr": "exp(-t)"}],
//   "jumps": [1.0],                               optional declared jumps
//   "grid": {"points": 2000},                     optional
//   "solver": {"max_jumps": 10, "tol_p": 1e-4,
//              "gamma_cap": 1e6, ...}             optional
// }
struct EvolutionSpec {
    struct PieceSpec {
        double t_start = 0.0;
        double t_end = 0.0;
        std::string expr;
    };

    ChannelFamily family = ChannelFamily::depolarizing(2);
    double horizon = 0.0;
    std::vector<PieceSpec> pieces;
    std::vector<double> declared_jumps;
    int grid_points = 2000;
    SolveOptions solver;
};

EvolutionSpec parse_evolution_spec(const std::string& json_text);
EvolutionSpec load_evolution_spec(const std::string& path);

CharacteristicFunction build_from_spec(const EvolutionSpec& spec);

// Re-ingestible evolution-spec JSON for a built function (used to emit
// companions).
std::string evolution_spec_json(const CharacteristicFunction& fn);

// Full analysis report. Deterministic: no timestamps, numbers at 12
// significant digits.
std::string report_json(const MeasureResult& result, const EvolutionSpec& spec,
                        const std::string& companion_file);

// Rounds to 12 significant digits (the serialization precision).
double round_sig12(double v);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& content);

inline constexpr const char* kToolVersion = "0.1.0";

}  // namespace nmmix
