#pragma once

#include <filesystem>
#include <functional>
#include <numeric>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "fracmg/multigrid.hpp"

namespace fracmg {

/// Either an explicit atom list or the uniform density with the
/// N_theta = 4*(n_J + 1) rule tied to the finest level.
struct MeasureSpec {
    enum class Kind { Atoms, Uniform } kind = Kind::Atoms;
    DirectionalMeasure atoms; // Kind::Atoms

    DirectionalMeasure resolve(const MeshLevel& finest) const {
        if (kind == Kind::Atoms) return atoms;
        return discretize_measure([](double) { return 1.0; }, 4 * (finest.nk + 1));
    }
};

enum class SolverKind { VCycle, PCG, CG };

inline std::string solver_name(SolverKind s) {
    switch (s) {
        case SolverKind::VCycle: return "vcycle";
        case SolverKind::PCG: return "pcg";
        case SolverKind::CG: return "cg";
    }
    return "?";
}

struct RunConfig {
    Rect domain{2.0, 2.0};
    int n0 = 4, l0 = 4;
    int level_min = 4, level_max = 6;
    double alpha = 0.75;
    double c = 0.0;
    MeasureSpec measure;
    std::function<double(double, double)> f = [](double, double) { return 1.0; };
    std::vector<SolverKind> solvers{SolverKind::VCycle, SolverKind::PCG, SolverKind::CG};
    double tol = 1e-6;
    int mg_max_iter = 200;
    int cg_max_iter = 5000;
    int cg_level_cap = 6; // CG is skipped above this level
    std::optional<std::filesystem::path> cache_dir;

    void validate() const {
        if (level_min < 1 || level_max < level_min)
            throw config_error("RunConfig: bad level range");
        KernelParams{alpha, c}.validate();
        if (tol <= 0) throw config_error("RunConfig: tol must be positive");
    }
};

inline RunConfig preset_example1() {
    RunConfig cfg;
    cfg.measure.kind = MeasureSpec::Kind::Atoms;
    cfg.measure.atoms = axis_quarter_measure();
    return cfg;
}

inline RunConfig preset_example2() {
    RunConfig cfg;
    cfg.measure.kind = MeasureSpec::Kind::Uniform;
    return cfg;
}

struct ResultRow {
    int level = 0;
    std::int64_t dofs = 0;
    std::string solver;
    int iters = 0;
    double total_seconds = 0;
    double seconds_per_iteration = 0;
    double final_diff_inf = 0;
    bool converged = false;
};

inline ResultRow row_from_report(int level, std::int64_t dofs, const SolveReport& rep) {
    ResultRow row;
    row.level = level;
    row.dofs = dofs;
    row.solver = rep.solver;
    row.iters = rep.iterations;
    row.total_seconds = std::accumulate(rep.per_iteration_seconds.begin(),
                                        rep.per_iteration_seconds.end(), 0.0);
    row.seconds_per_iteration = rep.iterations > 0 ? row.total_seconds / rep.iterations : 0.0;
    row.final_diff_inf = rep.final_diff_inf;
    row.converged = rep.converged;
    return row;
}

/// Assemble (or load cached) operators for one finest level and run the
/// selected solvers; timings cover the solver loop only.
inline std::vector<ResultRow> run_level(const RunConfig& cfg, int J,
                                        MGOperators* keep_ops = nullptr) {
    Hierarchy hier = build_hierarchy(cfg.n0, cfg.l0, J, cfg.domain);
    const MeshLevel& finest = hier.level(J);
    DirectionalMeasure measure = cfg.measure.resolve(finest);
    KernelParams params{cfg.alpha, cfg.c};
    MGOperators ops = build_operators(hier, measure, params, cfg.cache_dir);
    MomentVector f = build_load(finest, cfg.f);

    std::vector<ResultRow> rows;
    for (SolverKind s : cfg.solvers) {
        if (s == SolverKind::CG && J > cfg.cg_level_cap) continue;
        SolveReport rep;
        switch (s) {
            case SolverKind::VCycle:
                rep = solve_vcycle(ops, f, cfg.tol, cfg.mg_max_iter).second;
                break;
            case SolverKind::PCG:
                rep = solve_pcg(ops, f, cfg.tol, cfg.mg_max_iter).second;
                break;
            case SolverKind::CG:
                rep = solve_cg(ops, f, cfg.tol, cfg.cg_max_iter).second;
                break;
        }
        rows.push_back(row_from_report(J, finest.dofs(), rep));
    }
    if (keep_ops) *keep_ops = std::move(ops);
    return rows;
}

inline std::vector<ResultRow> run_benchmark(const RunConfig& cfg) {
    cfg.validate();
    std::vector<ResultRow> rows;
    for (int J = cfg.level_min; J <= cfg.level_max; ++J) {
        auto lev_rows = run_level(cfg, J);
        rows.insert(rows.end(), lev_rows.begin(), lev_rows.end());
    }
    return rows;
}

inline void write_csv(const std::vector<ResultRow>& rows, std::ostream& os) {
    os << "level,dofs,solver,iters,total_seconds,seconds_per_iteration,final_diff_inf,converged\n";
    for (const auto& r : rows) {
        os << r.level << ',' << r.dofs << ',' << r.solver << ',' << r.iters << ','
           << r.total_seconds << ',' << r.seconds_per_iteration << ',' << r.final_diff_inf << ','
           << (r.converged ? "true" : "false") << '\n';
    }
}

inline void write_json(const std::vector<ResultRow>& rows, std::ostream& os) {
    os << "[\n";
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const auto& r = rows[i];
        os << "  {\"level\": " << r.level << ", \"dofs\": " << r.dofs << ", \"solver\": \""
           << r.solver << "\", \"iters\": " << r.iters << ", \"total_seconds\": "
           << r.total_seconds << ", \"seconds_per_iteration\": " << r.seconds_per_iteration
           << ", \"final_diff_inf\": " << r.final_diff_inf << ", \"converged\": "
           << (r.converged ? "true" : "false") << "}" << (i + 1 < rows.size() ? "," : "") << "\n";
    }
    os << "]\n";
}

/// Two-column (dofs, seconds_per_iteration) series for one solver with the
/// fitted log-log slope in a comment header.
inline void emit_timing_series(const std::vector<ResultRow>& rows, std::ostream& os) {
    if (rows.size() < 2) throw usage_error("emit_timing_series: need at least 2 levels");
    for (std::size_t i = 1; i < rows.size(); ++i) {
        if (rows[i].solver != rows[0].solver)
            throw usage_error("emit_timing_series: rows must come from one solver");
        if (rows[i].dofs <= rows[i - 1].dofs)
            throw usage_error("emit_timing_series: dofs must be strictly increasing");
    }
    // least-squares slope of log(time) vs log(dofs)
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const double n = double(rows.size());
    for (const auto& r : rows) {
        double x = std::log(double(r.dofs)), y = std::log(r.seconds_per_iteration);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    os << "# log-log slope of seconds_per_iteration vs dofs: " << slope << "\n";
    os << "# dofs seconds_per_iteration\n";
    for (const auto& r : rows) os << r.dofs << ' ' << r.seconds_per_iteration << '\n';
}

inline double timing_series_slope(const std::vector<ResultRow>& rows) {
    std::ostringstream oss;
    emit_timing_series(rows, oss);
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const double n = double(rows.size());
    for (const auto& r : rows) {
        double x = std::log(double(r.dofs)), y = std::log(r.seconds_per_iteration);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

} // namespace fracmg
