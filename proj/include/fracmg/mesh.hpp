#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "fracmg/errors.hpp"

namespace fracmg {

struct Rect {
    double lx = 2.0;
    double ly = 2.0;
};

/// One level of the nested uniform right-triangle mesh on [0,Lx]x[0,Ly].
/// Interior nodes are numbered row-major: m = n_k*d + r with 1 <= r <= n_k,
/// 0 <= d <= l_k-1. The node (r,d) sits at (r*h, (d+1)*h).
struct MeshLevel {
    int k = 1;     // 1-based level index
    int nk = 0;    // interior nodes per row
    int lk = 0;    // interior rows
    double h = 0;  // mesh size
    Rect domain;

    std::int64_t dofs() const { return std::int64_t(nk) * lk; }

    /// 1-based node id -> (r, d)
    void node_to_grid(std::int64_t m, int& r, int& d) const {
        d = int((m - 1) / nk);
        r = int(m - std::int64_t(nk) * d);
    }
    std::int64_t grid_to_node(int r, int d) const { return std::int64_t(nk) * d + r; }

    double node_x(int r) const { return r * h; }
    double node_y(int d) const { return (d + 1) * h; }
};

struct Hierarchy {
    std::vector<MeshLevel> levels; // levels[0] is level 1
    int finest() const { return int(levels.size()); }
    const MeshLevel& level(int k) const { return levels.at(std::size_t(k) - 1); }
};

inline Hierarchy build_hierarchy(int n0, int l0, int J, Rect domain = {}) {
    if (n0 < 2 || l0 < 2)
        throw config_error("build_hierarchy: base sizes n0, l0 must be >= 2");
    if (J < 1)
        throw config_error("build_hierarchy: need at least one level");
    // square cells at every level <=> Lx/n0 == Ly/l0
    const double cx = domain.lx / n0, cy = domain.ly / l0;
    if (std::abs(cx - cy) > 1e-12 * std::max(cx, cy))
        throw config_error("build_hierarchy: domain does not give square cells");

    Hierarchy hier;
    hier.levels.reserve(std::size_t(J));
    for (int k = 1; k <= J; ++k) {
        MeshLevel lev;
        lev.k = k;
        lev.nk = n0 * (1 << k) - 1;
        lev.lk = l0 * (1 << k) - 1;
        lev.h = domain.lx / (lev.nk + 1);
        lev.domain = domain;
        hier.levels.push_back(lev);
    }
    return hier;
}

/// Nodal-interpolation transfer realizing the coarse-in-fine space inclusion.
/// Each fine node receives from 1 or 2 coarse nodes; boundary (non-interior)
/// coarse endpoints contribute nothing since all functions vanish there.
struct Prolongation {
    std::int64_t n_fine = 0;
    std::int64_t n_coarse = 0;
    // CSR-ish: per fine node up to 2 (coarse index, weight) pairs, 0-based.
    struct Entry {
        std::int64_t idx[2];
        double w[2];
        int cnt;
    };
    std::vector<Entry> rows;

    /// coarse coefficients -> fine coefficients
    std::vector<double> apply(const std::vector<double>& vc) const {
        if (std::int64_t(vc.size()) != n_coarse)
            throw usage_error("Prolongation::apply: coarse size mismatch");
        std::vector<double> vf(std::size_t(n_fine), 0.0);
        for (std::int64_t i = 0; i < n_fine; ++i) {
            const Entry& e = rows[std::size_t(i)];
            double s = 0;
            for (int t = 0; t < e.cnt; ++t) s += e.w[t] * vc[std::size_t(e.idx[t])];
            vf[std::size_t(i)] = s;
        }
        return vf;
    }

    /// transpose action: fine moments -> coarse moments
    std::vector<double> apply_transpose(const std::vector<double>& rf) const {
        if (std::int64_t(rf.size()) != n_fine)
            throw usage_error("Prolongation::apply_transpose: fine size mismatch");
        std::vector<double> rc(std::size_t(n_coarse), 0.0);
        for (std::int64_t i = 0; i < n_fine; ++i) {
            const Entry& e = rows[std::size_t(i)];
            for (int t = 0; t < e.cnt; ++t) rc[std::size_t(e.idx[t])] += e.w[t] * rf[std::size_t(i)];
        }
        return rc;
    }
};

inline Prolongation prolongation_weights(const MeshLevel& coarse, const MeshLevel& fine) {
    if (fine.k != coarse.k + 1)
        throw usage_error("prolongation_weights: levels must be adjacent");

    Prolongation P;
    P.n_fine = fine.dofs();
    P.n_coarse = coarse.dofs();
    P.rows.resize(std::size_t(P.n_fine));

    // Coarse node (rc, dc) coincides with fine node (2*rc, 2*dc + 1).
    auto coarse_at = [&](int rf, int df, std::int64_t& out) -> bool {
        if (rf % 2 != 0 || df % 2 != 1) return false;
        int rc = rf / 2, dc = (df - 1) / 2;
        if (rc < 1 || rc > coarse.nk || dc < 0 || dc > coarse.lk - 1) return false;
        out = coarse.grid_to_node(rc, dc) - 1;
        return true;
    };

    for (int d = 0; d < fine.lk; ++d) {
        for (int r = 1; r <= fine.nk; ++r) {
            Prolongation::Entry e{};
            e.cnt = 0;
            auto add = [&](int rf, int df) {
                std::int64_t idx;
                if (coarse_at(rf, df, idx)) {
                    e.idx[e.cnt] = idx;
                    e.w[e.cnt] = 0.5;
                    ++e.cnt;
                }
            };
            std::int64_t self;
            if (coarse_at(r, d, self)) {
                e.idx[0] = self;
                e.w[0] = 1.0;
                e.cnt = 1;
            } else if (r % 2 == 1 && d % 2 == 1) {
                add(r - 1, d); // horizontal coarse edge
                add(r + 1, d);
            } else if (r % 2 == 0 && d % 2 == 0) {
                add(r, d - 1); // vertical coarse edge
                add(r, d + 1);
            } else {
                add(r - 1, d - 1); // diagonal (lower-left to upper-right)
                add(r + 1, d + 1);
            }
            P.rows[std::size_t(fine.grid_to_node(r, d) - 1)] = e;
        }
    }
    return P;
}

} // namespace fracmg
