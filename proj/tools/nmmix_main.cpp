// Command-line front end: analyze evolution specs, verify mixtures, and
// sweep a spec parameter over a list of values.
//
//   nmmix analyze spec.json --out results/
//   nmmix verify spec.json companion.json --p 0.3
//   nmmix sweep template.json --param THETA --values 0.05,0.1,0.2 --out sweep/

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "nmmix/oracle.hpp"
#include "nmmix/spec_io.hpp"

namespace fs = std::filesystem;
using namespace nmmix;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitNonMarkovian = 1;
constexpr int kExitValidation = 2;
constexpr int kExitCapExceeded = 3;

std::string format12(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}

struct CommonFlags {
    int grid = 0;          // 0 = from spec
    double tol = 0.0;      // 0 = from spec
    int max_jumps = 0;     // 0 = from spec
    std::string out_dir = ".";
};

void apply_flags(EvolutionSpec& spec, const CommonFlags& flags) {
    if (flags.grid > 0) {
        spec.grid_points = flags.grid;
        spec.solver.final_grid = flags.grid;
    }
    if (flags.tol > 0.0) spec.solver.residual_tol = flags.tol;
    if (flags.max_jumps > 0) spec.solver.max_jumps = flags.max_jumps;
}

// samples.csv rows: t, f, companion h, and the mixture at the measured p.
std::string samples_csv(const CharacteristicFunction& f, const CharacteristicFunction& h,
                        double p, int rows) {
    std::vector<double> times;
    for (int i = 0; i < rows; ++i) times.push_back(f.horizon() * i / (rows - 1));
    for (const JumpEvent& j : f.jumps()) times.push_back(j.time);
    for (const JumpEvent& j : h.jumps()) times.push_back(j.time);
    std::sort(times.begin(), times.end());
    times.erase(std::unique(times.begin(), times.end(),
                            [](double a, double b) { return std::fabs(a - b) <= 1e-12; }),
                times.end());
    std::ostringstream out;
    out << "t,f,h,f_mixed_at_p\n";
    auto emit = [&](double t, double fv, double hv) {
        out << format12(t) << ',' << format12(fv) << ',' << format12(hv) << ','
            << format12((1.0 - p) * fv + p * hv) << '\n';
    };
    for (double t : times) {
        bool jump = f.jump_at(t) != nullptr || h.jump_at(t) != nullptr;
        if (jump) emit(t, f.value_left(t), h.value_left(t));
        emit(t, f.value_right(t), h.value_right(t));
    }
    return out.str();
}

int run_analysis(const EvolutionSpec& spec, const std::string& out_dir) {
    fs::create_directories(out_dir);
    CharacteristicFunction cf = build_from_spec(spec);
    MeasureResult result = measure_general(cf, spec.solver);

    CharacteristicFunction companion =
        result.companion ? result.companion->fn
                         : build_single(cf.family(), Expr::constant(1.0), cf.horizon());
    write_text_file(out_dir + "/report.json", report_json(result, spec, "companion.json"));
    write_text_file(out_dir + "/companion.json", evolution_spec_json(companion));
    write_text_file(out_dir + "/samples.csv", samples_csv(cf, companion, result.p, 1001));
    std::cout << "p = " << format12(result.p) << "  class = " << to_string(result.tclass)
              << "  verdict = " << (result.verdict.markovian ? "markovian" : "non-markovian")
              << "\n";
    return kExitOk;
}

int cmd_analyze(const std::string& spec_path, const CommonFlags& flags) {
    EvolutionSpec spec = load_evolution_spec(spec_path);
    apply_flags(spec, flags);
    return run_analysis(spec, flags.out_dir);
}

int cmd_verify(const std::string& spec_path, const std::string& companion_path, double p,
               const CommonFlags& flags) {
    EvolutionSpec spec = load_evolution_spec(spec_path);
    apply_flags(spec, flags);
    EvolutionSpec comp_spec = load_evolution_spec(companion_path);
    CharacteristicFunction cf = build_from_spec(spec);
    CharacteristicFunction companion = build_from_spec(comp_spec);
    GridVerdict verdict = verify_markovian_grid(mix(cf, companion, p), spec.grid_points,
                                                kMarkovResidualTol);
    nlohmann::json j{{"p", round_sig12(p)},
                     {"markovian", verdict.markovian},
                     {"worst_residual", round_sig12(verdict.worst_residual)},
                     {"worst_pair", {{"s", round_sig12(verdict.worst_s)},
                                     {"t", round_sig12(verdict.worst_t)}}},
                     {"grid_size", verdict.grid_size}};
    std::cout << j.dump(2) << "\n";
    return verdict.markovian ? kExitOk : kExitNonMarkovian;
}

int cmd_sweep(const std::string& template_path, const std::string& param,
              const std::vector<double>& values, const CommonFlags& flags) {
    if (values.empty()) throw ValidationError("sweep needs a non-empty value list");
    std::string templ = read_text_file(template_path);
    std::string needle = "${" + param + "}";
    if (templ.find(needle) == std::string::npos)
        throw ValidationError("template has no placeholder " + needle);
    fs::create_directories(flags.out_dir);

    std::ostringstream csv;
    csv << param << ",p,p_star,class\n";
    for (double value : values) {
        std::string text = templ;
        std::string vstr = format12(value);
        for (std::size_t pos = text.find(needle); pos != std::string::npos;
             pos = text.find(needle, pos + vstr.size()))
            text.replace(pos, needle.size(), vstr);
        EvolutionSpec spec = parse_evolution_spec(text);
        apply_flags(spec, flags);
        std::string sub_dir = flags.out_dir + "/" + param + "_" + vstr;
        run_analysis(spec, sub_dir);
        nlohmann::json report =
            nlohmann::json::parse(read_text_file(sub_dir + "/report.json"));
        csv << vstr << ',' << format12(report.at("p").get<double>()) << ','
            << format12(report.at("p_star").at("value").get<double>()) << ','
            << report.at("class").get<std::string>() << '\n';
    }
    write_text_file(flags.out_dir + "/sweep.csv", csv.str());
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"non-Markovianity robustness of depolarizing and dephasing evolutions"};
    app.require_subcommand(1);

    CommonFlags flags;
    std::string spec_path, companion_path, param;
    std::vector<double> values;
    double p = 0.0;

    auto add_common = [&](CLI::App* cmd) {
        cmd->add_option("--grid", flags.grid, "verification grid points");
        cmd->add_option("--tol", flags.tol, "solver residual tolerance");
        cmd->add_option("--max-jumps", flags.max_jumps, "enumeration cap on jumps");
        cmd->add_option("--out", flags.out_dir, "output directory");
    };

    CLI::App* analyze = app.add_subcommand("analyze", "measure one evolution spec");
    analyze->add_option("spec", spec_path, "evolution spec JSON")->required();
    add_common(analyze);

    CLI::App* verify = app.add_subcommand("verify", "check a mixture at a given p");
    verify->add_option("spec", spec_path, "evolution spec JSON")->required();
    verify->add_option("companion", companion_path, "companion spec JSON")->required();
    verify->add_option("--p", p, "mixing probability")->required();
    add_common(verify);

    CLI::App* sweep = app.add_subcommand("sweep", "analyze a template over parameter values");
    sweep->add_option("template", spec_path, "spec template with ${NAME} placeholder")->required();
    sweep->add_option("--param", param, "placeholder name")->required();
    // validated in cmd_sweep so an empty list maps to the validation exit code
    sweep->add_option("--values", values, "comma-separated values")->delimiter(',');
    add_common(sweep);

    CLI11_PARSE(app, argc, argv);

    try {
        if (analyze->parsed()) return cmd_analyze(spec_path, flags);
        if (verify->parsed()) return cmd_verify(spec_path, companion_path, p, flags);
        if (sweep->parsed()) return cmd_sweep(spec_path, param, values, flags);
    } catch (const CapExceeded& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitCapExceeded;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitValidation;
    }
    return kExitValidation;
}
