#include "nmmix/spec_io.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace nmmix {

using nlohmann::json;

double round_sig12(double v) {
    if (!std::isfinite(v)) return v;
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return std::strtod(buf, nullptr);
}

std::string read_text_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot read " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_text_file(const std::string& path, const std::string& content) {
    // Write to a sibling temp file first so readers never see partial output.
    std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp);
        if (!out) throw ValidationError("cannot write " + tmp);
        out << content;
    }
    if (std::rename(tmp.c_str(), path.c_str()) != 0)
        throw ValidationError("cannot move " + tmp + " to " + path);
}

namespace {

ChannelFamily family_from_json(const json& j) {
    if (j.is_string() && j.get<std::string>() == "dephasing") return ChannelFamily::dephasing();
    if (j.is_object() && j.contains("depolarizing"))
        return ChannelFamily::depolarizing(j.at("depolarizing").at("d").get<int>());
    throw ValidationError("family must be \"dephasing\" or {\"depolarizing\":{\"d\":N}}");
}

json family_to_json(const ChannelFamily& fam) {
    if (fam.kind() == ChannelFamily::Kind::Dephasing) return "dephasing";
    return json{{"depolarizing", {{"d", fam.dim()}}}};
}

void load_solver_options(const json& j, SolveOptions& opts) {
    if (j.contains("max_jumps")) opts.max_jumps = j.at("max_jumps").get<int>();
    if (j.contains("tol_p")) opts.tol_p = j.at("tol_p").get<double>();
    if (j.contains("param_grid")) opts.param_grid = j.at("param_grid").get<int>();
    if (j.contains("refine_rounds")) opts.refine_rounds = j.at("refine_rounds").get<int>();
    if (j.contains("search_grid")) opts.search_grid = j.at("search_grid").get<int>();
    if (j.contains("final_grid")) opts.final_grid = j.at("final_grid").get<int>();
    if (j.contains("residual_tol")) opts.residual_tol = j.at("residual_tol").get<double>();
    if (j.contains("gamma_cap")) opts.gamma_cap = j.at("gamma_cap").get<double>();
    if (j.contains("p_scan_points")) opts.p_scan_points = j.at("p_scan_points").get<int>();
}

}  // namespace

EvolutionSpec parse_evolution_spec(const std::string& json_text) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw ValidationError(std::string("spec is not valid JSON: ") + e.what());
    }
    EvolutionSpec spec;
    try {
        spec.family = family_from_json(j.at("family"));
        spec.horizon = j.at("horizon").get<double>();
        for (const json& p : j.at("pieces")) {
            EvolutionSpec::PieceSpec ps;
            ps.t_start = p.at("t_start").get<double>();
            ps.t_end = p.at("t_end").get<double>();
            ps.expr = p.at("expr").get<std::string>();
            spec.pieces.push_back(std::move(ps));
        }
        if (j.contains("jumps"))
            spec.declared_jumps = j.at("jumps").get<std::vector<double>>();
        if (j.contains("grid") && j.at("grid").contains("points"))
            spec.grid_points = j.at("grid").at("points").get<int>();
        if (j.contains("solver")) load_solver_options(j.at("solver"), spec.solver);
        spec.solver.final_grid = spec.grid_points;
    } catch (const json::exception& e) {
        throw ValidationError(std::string("malformed evolution spec: ") + e.what());
    }
    return spec;
}

EvolutionSpec load_evolution_spec(const std::string& path) {
    return parse_evolution_spec(read_text_file(path));
}

CharacteristicFunction build_from_spec(const EvolutionSpec& spec) {
    std::vector<Piece> pieces;
    for (const EvolutionSpec::PieceSpec& ps : spec.pieces) {
        Piece p;
        p.t_start = ps.t_start;
        p.t_end = ps.t_end;
        p.expr = parse_expr(ps.expr);
        pieces.push_back(std::move(p));
    }
    return build(spec.family, std::move(pieces), spec.declared_jumps, spec.horizon);
}

std::string evolution_spec_json(const CharacteristicFunction& fn) {
    json j;
    j["family"] = family_to_json(fn.family());
    j["horizon"] = round_sig12(fn.horizon());
    j["pieces"] = json::array();
    for (const Piece& p : fn.pieces()) {
        j["pieces"].push_back({{"t_start", round_sig12(p.t_start)},
                               {"t_end", round_sig12(p.t_end)},
                               {"expr", p.expr.text()}});
    }
    return j.dump(2) + "\n";
}

namespace {

json gaps_to_json(const GapReport& gaps) {
    auto gap_list = [](const std::vector<Gap>& v) {
        json arr = json::array();
        for (const Gap& g : v)
            arr.push_back({{"t_in", round_sig12(g.t_in)},
                           {"t_fin", round_sig12(g.t_fin)},
                           {"amount", round_sig12(g.amount)}});
        return arr;
    };
    return json{{"positive_gaps", gap_list(gaps.positive_gaps)},
                {"negative_gaps", gap_list(gaps.negative_gaps)},
                {"rebound_gaps", gap_list(gaps.rebound_gaps)},
                {"jump_gaps", gap_list(gaps.jump_gaps)},
                {"delta_nm", round_sig12(gaps.delta_nm)},
                {"theta_nm", round_sig12(gaps.theta_nm)},
                {"rebound_nm", round_sig12(gaps.rebound_nm)},
                {"pi_nm", round_sig12(gaps.pi_nm)},
                {"gamma_nm", round_sig12(gaps.gamma_nm)}};
}

json sign_vector_to_json(const SignVector& sv) {
    json arr = json::array();
    for (int s : sv.s) arr.push_back(s);
    return arr;
}

}  // namespace

std::string report_json(const MeasureResult& result, const EvolutionSpec& spec,
                        const std::string& companion_file) {
    json j;
    j["version"] = kToolVersion;
    j["family"] = family_to_json(spec.family);
    j["horizon"] = round_sig12(spec.horizon);
    j["verdict"] = result.verdict.markovian ? "markovian" : "non-markovian";
    j["worst_residual"] = round_sig12(result.verdict.worst_residual);
    j["witnesses"] = json::array();
    for (const Witness& w : result.verdict.witnesses)
        j["witnesses"].push_back({{"s", round_sig12(w.s)},
                                  {"t", round_sig12(w.t)},
                                  {"residual", round_sig12(w.residual)}});
    j["class"] = to_string(result.tclass);
    j["p"] = round_sig12(result.p);
    j["p_star"] = {{"value", round_sig12(result.pstar.value)},
                   {"available", result.pstar.available}};
    j["divergent"] = result.divergent;
    j["gaps"] = gaps_to_json(result.gaps);
    if (result.companion) {
        j["companion"] = {{"file", companion_file},
                          {"provenance", to_string(result.companion->provenance)},
                          {"normalizer", round_sig12(result.companion->normalizer)}};
    }
    if (result.winning_signs) {
        j["sign_vectors"] = {{"sigma_a", sign_vector_to_json(result.winning_signs->first)},
                             {"sigma_b", sign_vector_to_json(result.winning_signs->second)}};
    }
    if (!result.params.empty()) {
        j["params"] = json::array();
        for (const SolvedParam& p : result.params)
            j["params"].push_back({{"name", p.name},
                                   {"value", round_sig12(p.value)},
                                   {"lo", round_sig12(p.lo)},
                                   {"hi", round_sig12(p.hi)}});
    }
    if (result.oracle_check) {
        j["oracle"] = {{"bisection_p", round_sig12(result.oracle_check->p)},
                       {"monotone_ok", result.oracle_check->monotone_ok},
                       {"agreement", round_sig12(std::fabs(result.oracle_check->p - result.p))}};
    }
    if (!result.diagnostic.empty()) j["diagnostic"] = result.diagnostic;
    j["tolerances"] = {{"residual_markovian", kMarkovResidualTol},
                       {"residual_solver", round_sig12(spec.solver.residual_tol)},
                       {"tol_p", round_sig12(spec.solver.tol_p)},
                       {"gamma_cap", round_sig12(spec.solver.gamma_cap)},
                       {"grid_points", spec.grid_points},
                       {"time_tol", 1e-9},
                       {"value_tol", 1e-9}};
    return j.dump(2) + "\n";
}

}  // namespace nmmix
