// Command-line front end: assemble operators, solve the benchmark problems,
// run level sweeps, and emit per-iteration timing series.

#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "fracmg/bench.hpp"

namespace {

using nlohmann::json;

struct CommonOpts {
    std::string config_path;
    std::string preset = "example1";
    std::string levels;
    std::string solvers;
    double tol = -1;
    std::string cache_dir;
    std::string out;
    std::string format = "csv";
};

void add_common(CLI::App* app, CommonOpts& o) {
    app->add_option("--config", o.config_path, "JSON config file");
    app->add_option("--preset", o.preset, "Problem preset: example1 | example2")
        ->check(CLI::IsMember({"example1", "example2"}));
    app->add_option("--levels", o.levels, "Level range a..b (e.g. 4..6)");
    app->add_option("--solvers", o.solvers, "Comma-separated subset of vcycle,pcg,cg");
    app->add_option("--tol", o.tol, "Stopping tolerance on the sup-norm iterate difference");
    app->add_option("--cache-dir", o.cache_dir, "Directory for assembled-operator cache files");
    app->add_option("--out", o.out, "Output file (default: stdout)");
    app->add_option("--format", o.format, "Output format: csv | json")
        ->check(CLI::IsMember({"csv", "json"}));
}

std::pair<int, int> parse_levels(const std::string& s) {
    auto pos = s.find("..");
    try {
        if (pos == std::string::npos) {
            int a = std::stoi(s);
            return {a, a};
        }
        return {std::stoi(s.substr(0, pos)), std::stoi(s.substr(pos + 2))};
    } catch (const std::exception&) {
        throw fracmg::config_error("bad --levels value '" + s + "', expected a..b");
    }
}

std::vector<fracmg::SolverKind> parse_solvers(const std::string& s) {
    std::vector<fracmg::SolverKind> out;
    std::stringstream ss(s);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        if (tok == "vcycle") out.push_back(fracmg::SolverKind::VCycle);
        else if (tok == "pcg") out.push_back(fracmg::SolverKind::PCG);
        else if (tok == "cg") out.push_back(fracmg::SolverKind::CG);
        else throw fracmg::config_error("unknown solver '" + tok + "'");
    }
    if (out.empty()) throw fracmg::config_error("--solvers selected no solver");
    return out;
}

void apply_json_config(fracmg::RunConfig& cfg, const std::string& path) {
    std::ifstream is(path);
    if (!is) throw fracmg::config_error("cannot open config file: " + path);
    json j;
    try {
        is >> j;
    } catch (const json::exception& e) {
        throw fracmg::config_error(std::string("config parse error: ") + e.what());
    }
    if (j.contains("domain")) {
        cfg.domain.lx = j["domain"].value("lx", cfg.domain.lx);
        cfg.domain.ly = j["domain"].value("ly", cfg.domain.ly);
    }
    cfg.n0 = j.value("n0", cfg.n0);
    cfg.l0 = j.value("l0", cfg.l0);
    cfg.alpha = j.value("alpha", cfg.alpha);
    cfg.c = j.value("c", cfg.c);
    cfg.tol = j.value("tol", cfg.tol);
    cfg.level_min = j.value("level_min", cfg.level_min);
    cfg.level_max = j.value("level_max", cfg.level_max);
    cfg.cg_level_cap = j.value("cg_level_cap", cfg.cg_level_cap);
    if (j.contains("levels")) {
        auto [a, b] = parse_levels(j["levels"].get<std::string>());
        cfg.level_min = a;
        cfg.level_max = b;
    }
    if (j.contains("solvers")) {
        if (j["solvers"].is_string()) {
            cfg.solvers = parse_solvers(j["solvers"].get<std::string>());
        } else {
            std::string joined;
            for (const auto& s : j["solvers"]) {
                if (!joined.empty()) joined += ',';
                joined += s.get<std::string>();
            }
            cfg.solvers = parse_solvers(joined);
        }
    }
    if (j.contains("measure")) {
        const json& m = j["measure"];
        std::string kind = m.value("kind", "atoms");
        if (kind == "uniform") {
            cfg.measure.kind = fracmg::MeasureSpec::Kind::Uniform;
        } else if (kind == "atoms") {
            cfg.measure.kind = fracmg::MeasureSpec::Kind::Atoms;
            cfg.measure.atoms.atoms.clear();
            for (const auto& a : m.at("atoms"))
                cfg.measure.atoms.atoms.push_back(
                    {a.at("theta").get<double>(), a.at("weight").get<double>()});
        } else {
            throw fracmg::config_error("measure.kind must be 'atoms' or 'uniform'");
        }
    }
    if (j.contains("cache_dir")) cfg.cache_dir = j["cache_dir"].get<std::string>();
}

fracmg::RunConfig make_config(const CommonOpts& o) {
    fracmg::RunConfig cfg =
        o.preset == "example2" ? fracmg::preset_example2() : fracmg::preset_example1();
    if (!o.config_path.empty()) apply_json_config(cfg, o.config_path);
    if (!o.levels.empty()) {
        auto [a, b] = parse_levels(o.levels);
        cfg.level_min = a;
        cfg.level_max = b;
    }
    if (!o.solvers.empty()) cfg.solvers = parse_solvers(o.solvers);
    if (o.tol > 0) cfg.tol = o.tol;
    if (!o.cache_dir.empty()) cfg.cache_dir = o.cache_dir;
    cfg.validate();
    return cfg;
}

void emit(const CommonOpts& o, const std::function<void(std::ostream&)>& writer) {
    if (o.out.empty()) {
        writer(std::cout);
        return;
    }
    std::ofstream os(o.out);
    if (!os) throw fracmg::config_error("cannot open output file: " + o.out);
    writer(os);
}

int cmd_assemble(const CommonOpts& o) {
    fracmg::RunConfig cfg = make_config(o);
    std::vector<std::string> lines;
    for (int J = cfg.level_min; J <= cfg.level_max; ++J) {
        fracmg::Hierarchy hier = fracmg::build_hierarchy(cfg.n0, cfg.l0, J, cfg.domain);
        fracmg::DirectionalMeasure measure = cfg.measure.resolve(hier.level(J));
        fracmg::KernelParams params{cfg.alpha, cfg.c};
        fracmg::MGOperators ops = fracmg::build_operators(hier, measure, params, cfg.cache_dir);
        for (int k = 1; k <= J; ++k) {
            const auto& gen = ops.level(k).stiffness->generator();
            std::ostringstream line;
            line << "level " << k << ": n=" << gen.nk << " l=" << gen.lk
                 << " generator_len=" << gen.values.size() << " nu1=" << gen.values[0];
            lines.push_back(line.str());
        }
    }
    emit(o, [&](std::ostream& os) {
        for (const auto& s : lines) os << s << '\n';
    });
    return 0;
}

int cmd_solve(const CommonOpts& o) {
    fracmg::RunConfig cfg = make_config(o);
    cfg.level_min = cfg.level_max; // solve on the finest requested level only
    auto rows = fracmg::run_benchmark(cfg);
    emit(o, [&](std::ostream& os) {
        if (o.format == "json") fracmg::write_json(rows, os);
        else fracmg::write_csv(rows, os);
    });
    for (const auto& r : rows)
        if (!r.converged) return 1;
    return 0;
}

int cmd_bench(const CommonOpts& o) {
    fracmg::RunConfig cfg = make_config(o);
    auto rows = fracmg::run_benchmark(cfg);
    emit(o, [&](std::ostream& os) {
        if (o.format == "json") fracmg::write_json(rows, os);
        else fracmg::write_csv(rows, os);
    });
    for (const auto& r : rows)
        if (!r.converged) return 1;
    return 0;
}

int cmd_timing(const CommonOpts& o) {
    fracmg::RunConfig cfg = make_config(o);
    if (cfg.solvers.size() != 1)
        cfg.solvers = {fracmg::SolverKind::VCycle}; // timing series tracks one solver
    auto rows = fracmg::run_benchmark(cfg);
    emit(o, [&](std::ostream& os) { fracmg::emit_timing_series(rows, os); });
    for (const auto& r : rows)
        if (!r.converged) return 1;
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Fractional-diffusion finite element solver toolkit"};
    app.require_subcommand(1);

    CommonOpts o_assemble, o_solve, o_bench, o_timing;
    CLI::App* assemble =
        app.add_subcommand("assemble", "Assemble operators for a level range (warms the cache)");
    add_common(assemble, o_assemble);
    CLI::App* solve = app.add_subcommand("solve", "Solve on the finest requested level");
    add_common(solve, o_solve);
    CLI::App* bench = app.add_subcommand("bench", "Solver iteration/timing sweep over levels");
    add_common(bench, o_bench);
    CLI::App* timing =
        app.add_subcommand("timing", "Per-iteration timing series with fitted scaling slope");
    add_common(timing, o_timing);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (assemble->parsed()) return cmd_assemble(o_assemble);
        if (solve->parsed()) return cmd_solve(o_solve);
        if (bench->parsed()) return cmd_bench(o_bench);
        if (timing->parsed()) return cmd_timing(o_timing);
    } catch (const fracmg::config_error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const fracmg::usage_error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 2;
}
