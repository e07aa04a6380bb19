#pragma once

#include <chrono>
#include <cmath>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "fracmg/assembly.hpp"
#include "fracmg/cache.hpp"
#include "fracmg/mesh.hpp"
#include "fracmg/toeplitz.hpp"

namespace fracmg {

/// Per-level bundle: fast stiffness, smoother scale, transfer from the next
/// coarser level, and the exact factorization on level 1.
struct LevelOperator {
    MeshLevel mesh;
    std::shared_ptr<ToeplitzOperator> stiffness; // levels >= 1 (level 1 kept for tests)
    double lambda_tilde = 0;                     // (3/2) * nu_1, levels >= 2
    Prolongation prolong;                        // from level k-1, levels >= 2
    std::shared_ptr<Eigen::LLT<Eigen::MatrixXd>> coarse_llt; // level 1 only
};

struct MGOperators {
    Hierarchy hier;
    KernelParams params;
    DirectionalMeasure measure;
    std::vector<LevelOperator> levels; // levels[k-1] is level k

    const LevelOperator& level(int k) const { return levels.at(std::size_t(k) - 1); }
    int finest() const { return int(levels.size()); }
};

inline MGOperators build_operators(const Hierarchy& hier, const DirectionalMeasure& measure,
                                   const KernelParams& params,
                                   const std::optional<std::filesystem::path>& cache_dir = {}) {
    MGOperators ops;
    ops.hier = hier;
    ops.params = params;
    ops.measure = measure;
    const int J = hier.finest();
    ops.levels.resize(std::size_t(J));
    for (int k = 1; k <= J; ++k) {
        LevelOperator& op = ops.levels[std::size_t(k - 1)];
        op.mesh = hier.level(k);
        GeneratorVector gen = cache_dir
                                  ? cached_generator(op.mesh, measure, params, *cache_dir)
                                  : build_generator(op.mesh, measure, params);
        if (k == 1) {
            Eigen::MatrixXd A1 = dense_from_generator(gen);
            op.coarse_llt = std::make_shared<Eigen::LLT<Eigen::MatrixXd>>(A1);
            if (op.coarse_llt->info() != Eigen::Success)
                throw solver_error("build_operators: coarse matrix is not positive definite");
        } else {
            op.lambda_tilde = 1.5 * gen.values[0];
            op.prolong = prolongation_weights(hier.level(k - 1), op.mesh);
        }
        op.stiffness = std::make_shared<ToeplitzOperator>(std::move(gen));
    }
    return ops;
}

/// Smoother in moment form: coefficients = moments / lambda_tilde.
inline std::vector<double> smooth(const LevelOperator& op, const MomentVector& g) {
    if (op.mesh.k < 2) throw usage_error("smooth: level 1 uses the exact coarse solve");
    if (g.level != op.mesh.k || std::int64_t(g.values.size()) != op.mesh.dofs())
        throw usage_error("smooth: moment vector does not match the level");
    std::vector<double> v(g.values.size());
    const double inv = 1.0 / op.lambda_tilde;
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = g.values[i] * inv;
    return v;
}

/// Moment restriction (g, phi_{k-1}^i) = sum_j P_ji (g, phi_k^j), exact for
/// nested piecewise-linear spaces.
inline MomentVector restrict_moments(const LevelOperator& fine_op, const MomentVector& r) {
    if (fine_op.mesh.k < 2) throw usage_error("restrict_moments: no coarser level");
    if (r.level != fine_op.mesh.k)
        throw usage_error("restrict_moments: moment vector does not match the level");
    MomentVector out;
    out.level = fine_op.mesh.k - 1;
    out.values = fine_op.prolong.apply_transpose(r.values);
    return out;
}

namespace detail {

inline std::vector<double> coarse_solve(const LevelOperator& op, const std::vector<double>& g) {
    Eigen::Map<const Eigen::VectorXd> gv(g.data(), Eigen::Index(g.size()));
    Eigen::VectorXd u = op.coarse_llt->solve(gv);
    return std::vector<double>(u.data(), u.data() + u.size());
}

inline MomentVector apply_level(const MGOperators& ops, int k, const std::vector<double>& U) {
    return apply_stiffness(*ops.level(k).stiffness, U, ops.level(k).mesh);
}

inline double linf(const std::vector<double>& v) {
    double m = 0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
}

inline double dot(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

} // namespace detail

/// One V-cycle B_k applied to moments g: pre-smooth, coarse-grid correction
/// through the moment restriction, post-smooth; exact solve on level 1.
inline std::vector<double> vcycle_apply(const MGOperators& ops, int k, const MomentVector& g) {
    if (k < 1 || k > ops.finest()) throw usage_error("vcycle_apply: level out of range");
    const LevelOperator& op = ops.level(k);
    if (k == 1) return detail::coarse_solve(op, g.values);

    std::vector<double> v1 = smooth(op, g);

    MomentVector r = detail::apply_level(ops, k, v1);
    for (std::size_t i = 0; i < r.values.size(); ++i) r.values[i] = g.values[i] - r.values[i];
    std::vector<double> corr = op.prolong.apply(vcycle_apply(ops, k - 1, restrict_moments(op, r)));
    std::vector<double> v2 = v1;
    for (std::size_t i = 0; i < v2.size(); ++i) v2[i] += corr[i];

    MomentVector r2 = detail::apply_level(ops, k, v2);
    const double inv = 1.0 / op.lambda_tilde;
    for (std::size_t i = 0; i < v2.size(); ++i)
        v2[i] += (g.values[i] - r2.values[i]) * inv;
    return v2;
}

struct SolveReport {
    std::string solver;
    int iterations = 0;
    std::vector<double> per_iteration_seconds;
    double final_diff_inf = 0;
    bool converged = false;
    std::string failure; // empty on success
};

namespace detail {

class IterTimer {
  public:
    void start() { t0_ = std::chrono::steady_clock::now(); }
    double stop() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0_).count();
    }

  private:
    std::chrono::steady_clock::time_point t0_;
};

} // namespace detail

/// Stationary V-cycle iteration u <- u + B_J (f - A u), stopping on the
/// sup-norm of the iterate difference.
inline std::pair<std::vector<double>, SolveReport>
solve_vcycle(const MGOperators& ops, const MomentVector& f, double tol = 1e-6,
             int max_iter = 200) {
    if (f.level != ops.finest()) throw usage_error("solve_vcycle: rhs is not on the finest level");
    const int J = ops.finest();
    std::vector<double> u(f.values.size(), 0.0);
    SolveReport rep;
    rep.solver = "vcycle";
    double prev_diff = 0;
    int growth_streak = 0;
    detail::IterTimer timer;
    for (int it = 1; it <= max_iter; ++it) {
        timer.start();
        MomentVector r = detail::apply_level(ops, J, u);
        for (std::size_t i = 0; i < r.values.size(); ++i) r.values[i] = f.values[i] - r.values[i];
        std::vector<double> d = vcycle_apply(ops, J, r);
        for (std::size_t i = 0; i < u.size(); ++i) u[i] += d[i];
        double diff = detail::linf(d);
        rep.per_iteration_seconds.push_back(timer.stop());
        rep.iterations = it;
        rep.final_diff_inf = diff;
        if (diff <= tol) {
            rep.converged = true;
            break;
        }
        growth_streak = (it > 1 && diff > prev_diff) ? growth_streak + 1 : 0;
        if (growth_streak >= 10) {
            rep.failure = "diverging: iterate difference grew for 10 consecutive iterations";
            break;
        }
        prev_diff = diff;
    }
    if (!rep.converged && rep.failure.empty())
        rep.failure = "iteration cap reached without meeting the tolerance";
    return {std::move(u), std::move(rep)};
}

/// Conjugate gradients preconditioned by the V-cycle operator B_J. Residuals
/// are moments, search directions coefficients, so <r, z> is the L2 pairing.
inline std::pair<std::vector<double>, SolveReport>
solve_pcg(const MGOperators& ops, const MomentVector& f, double tol = 1e-6, int max_iter = 200) {
    if (f.level != ops.finest()) throw usage_error("solve_pcg: rhs is not on the finest level");
    const int J = ops.finest();
    std::vector<double> u(f.values.size(), 0.0);
    SolveReport rep;
    rep.solver = "pcg";
    detail::IterTimer timer;

    MomentVector r = f;
    if (detail::linf(r.values) == 0.0) {
        timer.start();
        rep.per_iteration_seconds.push_back(timer.stop());
        rep.iterations = 1;
        rep.converged = true;
        return {std::move(u), std::move(rep)};
    }
    // each timed iteration covers one preconditioner application, one
    // operator application, and the vector updates
    std::vector<double> z, p;
    double rz = 0;
    for (int it = 1; it <= max_iter; ++it) {
        timer.start();
        z = vcycle_apply(ops, J, r);
        double rz_new = detail::dot(r.values, z);
        if (rz_new <= 0 && detail::linf(r.values) > 0) {
            rep.failure = "preconditioner lost positivity";
            rep.iterations = it;
            rep.per_iteration_seconds.push_back(timer.stop());
            break;
        }
        if (it == 1) {
            p = z;
        } else {
            double beta = rz_new / rz;
            for (std::size_t i = 0; i < p.size(); ++i) p[i] = z[i] + beta * p[i];
        }
        rz = rz_new;
        MomentVector q = detail::apply_level(ops, J, p);
        double pq = detail::dot(p, q.values);
        if (pq <= 0) {
            rep.failure = "operator lost positivity";
            rep.iterations = it;
            rep.per_iteration_seconds.push_back(timer.stop());
            break;
        }
        double step = rz / pq;
        double diff = 0;
        for (std::size_t i = 0; i < u.size(); ++i) {
            double d = step * p[i];
            u[i] += d;
            diff = std::max(diff, std::abs(d));
        }
        for (std::size_t i = 0; i < r.values.size(); ++i) r.values[i] -= step * q.values[i];
        rep.per_iteration_seconds.push_back(timer.stop());
        rep.iterations = it;
        rep.final_diff_inf = diff;
        if (diff <= tol) {
            rep.converged = true;
            break;
        }
    }
    if (!rep.converged && rep.failure.empty())
        rep.failure = "iteration cap reached without meeting the tolerance";
    return {std::move(u), std::move(rep)};
}

/// Plain conjugate gradients on the coefficient representation, for
/// comparison runs.
inline std::pair<std::vector<double>, SolveReport>
solve_cg(const MGOperators& ops, const MomentVector& f, double tol = 1e-6, int max_iter = 5000) {
    if (f.level != ops.finest()) throw usage_error("solve_cg: rhs is not on the finest level");
    const int J = ops.finest();
    std::vector<double> u(f.values.size(), 0.0);
    SolveReport rep;
    rep.solver = "cg";
    detail::IterTimer timer;

    std::vector<double> r = f.values;
    if (detail::linf(r) == 0.0) {
        timer.start();
        rep.per_iteration_seconds.push_back(timer.stop());
        rep.iterations = 1;
        rep.converged = true;
        return {std::move(u), std::move(rep)};
    }
    // each timed iteration covers the direction update, one operator
    // application, and the vector updates
    double rr = 0;
    std::vector<double> p;
    for (int it = 1; it <= max_iter; ++it) {
        timer.start();
        double rr_new = detail::dot(r, r);
        if (it == 1) {
            p = r;
        } else {
            double beta = rr_new / rr;
            for (std::size_t i = 0; i < p.size(); ++i) p[i] = r[i] + beta * p[i];
        }
        rr = rr_new;
        MomentVector q = detail::apply_level(ops, J, p);
        double pq = detail::dot(p, q.values);
        if (pq <= 0) {
            rep.failure = "operator lost positivity";
            rep.iterations = it;
            rep.per_iteration_seconds.push_back(timer.stop());
            break;
        }
        double step = rr / pq;
        double diff = 0;
        for (std::size_t i = 0; i < u.size(); ++i) {
            double d = step * p[i];
            u[i] += d;
            diff = std::max(diff, std::abs(d));
        }
        for (std::size_t i = 0; i < r.size(); ++i) r[i] -= step * q.values[i];
        rep.per_iteration_seconds.push_back(timer.stop());
        rep.iterations = it;
        rep.final_diff_inf = diff;
        if (diff <= tol) {
            rep.converged = true;
            break;
        }
    }
    if (!rep.converged && rep.failure.empty())
        rep.failure = "iteration cap reached without meeting the tolerance";
    return {std::move(u), std::move(rep)};
}

/// Largest eigenvalue of the level stiffness by power iteration.
inline double lambda_max(const MGOperators& ops, int k, int iters = 300) {
    const std::int64_t n = ops.level(k).mesh.dofs();
    std::vector<double> v(static_cast<std::size_t>(n));
    // fixed deterministic pseudo-random start
    std::uint64_t s = 0x9e3779b97f4a7c15ull + std::uint64_t(k);
    for (auto& x : v) {
        s ^= s << 13;
        s ^= s >> 7;
        s ^= s << 17;
        x = double(s % 1000003) / 1000003.0 - 0.5;
    }
    double lam = 0;
    for (int it = 0; it < iters; ++it) {
        MomentVector w = detail::apply_level(ops, k, v);
        double norm = std::sqrt(detail::dot(w.values, w.values));
        if (norm == 0) return 0;
        lam = detail::dot(v, w.values) / detail::dot(v, v);
        for (std::size_t i = 0; i < v.size(); ++i) v[i] = w.values[i] / norm;
    }
    return lam;
}

} // namespace fracmg
