#pragma once

#include <cstdint>
#include <cstring>
#include <functional>
#include <vector>

#include <Eigen/Dense>

#include "fracmg/kernel.hpp"
#include "fracmg/mesh.hpp"
#include "fracmg/measure.hpp"

namespace fracmg {

/// Right-hand sides and residuals live in moment form: entry m is (g, phi_m).
struct MomentVector {
    int level = 0;
    std::vector<double> values;
};

inline std::uint64_t fnv1a(const void* data, std::size_t n, std::uint64_t h = 1469598103934665603ull) {
    const unsigned char* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < n; ++i) {
        h ^= p[i];
        h *= 1099511628211ull;
    }
    return h;
}

inline std::uint64_t params_digest(double alpha, double c, const DirectionalMeasure& measure,
                                   const Rect& domain) {
    std::uint64_t h = fnv1a(&alpha, sizeof alpha);
    h = fnv1a(&c, sizeof c, h);
    h = fnv1a(&domain.lx, sizeof domain.lx, h);
    h = fnv1a(&domain.ly, sizeof domain.ly, h);
    for (const auto& a : measure.atoms) {
        h = fnv1a(&a.theta, sizeof a.theta, h);
        h = fnv1a(&a.weight, sizeof a.weight, h);
    }
    return h;
}

/// The vector nu of distinct stiffness values generating the symmetric
/// Toeplitz matrix of one level. values[t] with t = (2 n_k - 1)*oy + ox is
/// B(phi at origin, phi at grid offset (ox, oy)) over the valid index range.
struct GeneratorVector {
    int level = 0;
    int nk = 0, lk = 0;
    double alpha = 0, c = 0;
    DirectionalMeasure measure;
    Rect domain;
    std::vector<double> values;
    std::uint64_t digest = 0;

    static std::int64_t length(int nk, int lk) {
        return std::int64_t(2 * nk - 1) * lk - nk + 1;
    }

    /// generator slot of a grid offset; valid for oy >= 1, or oy == 0 && ox >= 0
    std::int64_t index_of(int ox, int oy) const {
        return std::int64_t(2 * nk - 1) * oy + ox;
    }
    void offset_of(std::int64_t t, int& ox, int& oy) const {
        std::int64_t w = 2 * nk - 1;
        oy = int(t / w);
        ox = int(t - w * oy);
        if (ox > nk - 1) {
            ox -= int(w);
            oy += 1;
        }
    }
    /// entry for an arbitrary offset (uses B(u) = B(-u))
    double at_offset(int ox, int oy) const {
        std::int64_t t = index_of(ox, oy);
        return values[std::size_t(t >= 0 ? t : -t)];
    }
};

/// Exact piecewise-linear mass entry for the uniform triangulation.
inline double mass_entry(int offset_x, int offset_y, const MeshLevel& level) {
    const auto& supp = detail::support_tris();
    const double area = 0.5 * level.h * level.h;
    double acc = 0.0;
    for (const auto& a : supp) {
        for (const auto& b : supp) {
            if (a.cx == offset_x + b.cx && a.cy == offset_y + b.cy && a.type == b.type) {
                bool same_vertex = (offset_x == 0 && offset_y == 0);
                acc += same_vertex ? area / 6.0 : area / 12.0;
            }
        }
    }
    return acc;
}

/// Load moments (f, phi_m) by the 3-point (edge midpoint, degree-2 exact)
/// rule on each support triangle.
inline MomentVector build_load(const MeshLevel& level,
                               const std::function<double(double, double)>& f) {
    MomentVector out;
    out.level = level.k;
    out.values.assign(std::size_t(level.dofs()), 0.0);
    const double h = level.h;
    const auto& supp = detail::support_tris();
    for (int d = 0; d < level.lk; ++d) {
        for (int r = 1; r <= level.nk; ++r) {
            double x0 = level.node_x(r), y0 = level.node_y(d);
            double acc = 0.0;
            for (const auto& tref : supp) {
                Triangle tri = detail::cell_triangle(tref.cx, tref.cy, tref.type, h);
                int nv = detail::node_vertex(tref);
                double area = tri.area();
                for (int e = 0; e < 3; ++e) {
                    int e2 = (e + 1) % 3;
                    double mx = 0.5 * (tri.v[std::size_t(e)].x + tri.v[std::size_t(e2)].x) + x0;
                    double my = 0.5 * (tri.v[std::size_t(e)].y + tri.v[std::size_t(e2)].y) + y0;
                    double phi = 0.5 * ((e == nv ? 1.0 : 0.0) + (e2 == nv ? 1.0 : 0.0));
                    if (phi != 0.0) acc += (area / 3.0) * phi * f(mx, my);
                }
            }
            out.values[std::size_t(level.grid_to_node(r, d) - 1)] = acc;
        }
    }
    return out;
}

namespace detail {

/// Memoized triangle-pair interactions for one direction, keyed by the two
/// triangle types and the cell displacement. Re-used across directions via a
/// generation stamp so the backing arrays are allocated once per level.
class PairMemo {
  public:
    PairMemo(int dx_min, int dx_max, int dy_min, int dy_max)
        : dx0_(dx_min), dy0_(dy_min), wx_(dx_max - dx_min + 1), wy_(dy_max - dy_min + 1),
          vals_(std::size_t(4) * wx_ * wy_, 0.0), stamp_(std::size_t(4) * wx_ * wy_, 0) {}

    void new_direction(double theta, double nu, double h) {
        theta_ = theta;
        nu_ = nu;
        h_ = h;
        ++epoch_;
    }

    double get(int type_s, int type_t, int dx, int dy) {
        std::size_t idx =
            (std::size_t(dy - dy0_) * std::size_t(wx_) + std::size_t(dx - dx0_)) * 4 +
            std::size_t(type_s) * 2 + std::size_t(type_t);
        if (stamp_[idx] != epoch_) {
            Triangle src = cell_triangle(0, 0, type_s, h_);
            Triangle tgt = cell_triangle(dx, dy, type_t, h_);
            vals_[idx] = pair_interaction(src, tgt, theta_, nu_);
            stamp_[idx] = epoch_;
        }
        return vals_[idx];
    }

  private:
    int dx0_, dy0_;
    std::int64_t wx_, wy_;
    std::vector<double> vals_;
    std::vector<std::uint32_t> stamp_;
    std::uint32_t epoch_ = 0;
    double theta_ = 0, nu_ = 0, h_ = 1;
};

/// Accumulate weight * (-I_theta) for one measure atom into a rectangular
/// offset table. Offsets whose basis supports cannot interact in direction
/// theta (disjoint heights in rotated coordinates, or target fully upstream)
/// are skipped; the kernel support is a half-band along the direction.
inline void accumulate_atom(std::vector<double>& table, int ox_min, int ox_max, int oy_min,
                            int oy_max, double theta, double weight, double nu,
                            const MeshLevel& level, PairMemo& memo) {
    const double cth = std::cos(theta), sth = std::sin(theta);
    const double rho_y = std::max({std::abs(sth), std::abs(cth), std::abs(cth - sth)});
    const double rho_x = std::max({std::abs(cth), std::abs(sth), std::abs(cth + sth)});
    SupportDeriv sd = support_deriv(theta, level.h);
    memo.new_direction(theta, nu, level.h);

    const int wx = ox_max - ox_min + 1;
    for (int oy = oy_min; oy <= oy_max; ++oy) {
        for (int ox = ox_min; ox <= ox_max; ++ox) {
            double band = -ox * sth + oy * cth;
            if (std::abs(band) > 2 * rho_y + 1e-12) continue;
            double along = ox * cth + oy * sth;
            if (along < -(2 * rho_x + 1e-12)) continue;
            double val = 0.0;
            for (int a = 0; a < 6; ++a) {
                double ga = sd.deriv[std::size_t(a)];
                if (ga == 0.0) continue;
                const TriRef& ts = sd.tris[std::size_t(a)];
                for (int b = 0; b < 6; ++b) {
                    double gb = sd.deriv[std::size_t(b)];
                    if (gb == 0.0) continue;
                    const TriRef& tt = sd.tris[std::size_t(b)];
                    val += ga * gb *
                           memo.get(ts.type, tt.type, ox + tt.cx - ts.cx, oy + tt.cy - ts.cy);
                }
            }
            table[std::size_t(oy - oy_min) * std::size_t(wx) + std::size_t(ox - ox_min)] +=
                weight * val;
        }
    }
}

/// Stiffness entries for every offset in the rectangle
/// [ox_min, ox_max] x [oy_min, oy_max], row-major.
inline std::vector<double> offset_table(const MeshLevel& level, const DirectionalMeasure& measure,
                                        const KernelParams& params, int ox_min, int ox_max,
                                        int oy_min, int oy_max) {
    params.validate();
    if (!measure.is_pi_symmetric())
        throw config_error("offset_table: measure must be pi-symmetric");
    const int wx = ox_max - ox_min + 1;
    const std::int64_t n = std::int64_t(wx) * (oy_max - oy_min + 1);
    std::vector<double> table(std::size_t(n), 0.0);

    if (params.c != 0.0) {
        for (int oy = oy_min; oy <= oy_max; ++oy)
            for (int ox = ox_min; ox <= ox_max; ++ox)
                table[std::size_t(oy - oy_min) * std::size_t(wx) + std::size_t(ox - ox_min)] =
                    params.c * mass_entry(ox, oy, level);
    }

    if (params.alpha == 1.0) {
        for (const auto& atom : measure.atoms) {
            for (int oy = std::max(oy_min, -1); oy <= std::min(oy_max, 1); ++oy)
                for (int ox = std::max(ox_min, -1); ox <= std::min(ox_max, 1); ++ox)
                    table[std::size_t(oy - oy_min) * std::size_t(wx) + std::size_t(ox - ox_min)] +=
                        atom.weight * integer_order_entry(ox, oy, atom.theta, level);
        }
        return table;
    }

    PairMemo memo(ox_min - 1, ox_max + 1, oy_min - 1, oy_max + 1);
    const double nu = params.nu();
    for (const auto& atom : measure.atoms)
        accumulate_atom(table, ox_min, ox_max, oy_min, oy_max, atom.theta, atom.weight, nu, level,
                        memo);
    return table;
}

} // namespace detail

inline GeneratorVector build_generator(const MeshLevel& level, const DirectionalMeasure& measure,
                                       const KernelParams& params) {
    GeneratorVector gen;
    gen.level = level.k;
    gen.nk = level.nk;
    gen.lk = level.lk;
    gen.alpha = params.alpha;
    gen.c = params.c;
    gen.measure = measure;
    gen.domain = level.domain;
    gen.digest = params_digest(params.alpha, params.c, measure, level.domain);

    const int n = level.nk, l = level.lk;
    std::vector<double> table =
        detail::offset_table(level, measure, params, -(n - 1), n - 1, 0, l - 1);
    const int wx = 2 * n - 1;
    gen.values.assign(std::size_t(GeneratorVector::length(n, l)), 0.0);
    for (std::int64_t t = 0; t < std::int64_t(gen.values.size()); ++t) {
        int ox, oy;
        gen.offset_of(t, ox, oy);
        gen.values[std::size_t(t)] =
            table[std::size_t(oy) * std::size_t(wx) + std::size_t(ox + n - 1)];
    }
    return gen;
}

/// Dense stiffness matrix, test oracle and level-1 factorization input only.
inline Eigen::MatrixXd build_dense(const MeshLevel& level, const DirectionalMeasure& measure,
                                   const KernelParams& params, std::int64_t oracle_cap = 4096) {
    const std::int64_t N = level.dofs();
    if (N > oracle_cap) throw usage_error("build_dense: level exceeds the dense oracle cap");
    const int n = level.nk, l = level.lk;
    std::vector<double> table =
        detail::offset_table(level, measure, params, -(n - 1), n - 1, -(l - 1), l - 1);
    const int wx = 2 * n - 1;
    Eigen::MatrixXd A(N, N);
    for (std::int64_t i = 1; i <= N; ++i) {
        int ri, di;
        level.node_to_grid(i, ri, di);
        for (std::int64_t j = 1; j <= N; ++j) {
            int rj, dj;
            level.node_to_grid(j, rj, dj);
            int ox = rj - ri, oy = dj - di;
            A(i - 1, j - 1) =
                table[std::size_t(oy + l - 1) * std::size_t(wx) + std::size_t(ox + n - 1)];
        }
    }
    return A;
}

/// Expand a generator into the dense matrix it induces (the restricted
/// Toeplitz relation, used for the coarse-level factorization).
inline Eigen::MatrixXd dense_from_generator(const GeneratorVector& gen) {
    const std::int64_t N = std::int64_t(gen.nk) * gen.lk;
    Eigen::MatrixXd A(N, N);
    MeshLevel lev;
    lev.nk = gen.nk;
    lev.lk = gen.lk;
    for (std::int64_t i = 1; i <= N; ++i) {
        int ri, di;
        lev.node_to_grid(i, ri, di);
        for (std::int64_t j = 1; j <= N; ++j) {
            int rj, dj;
            lev.node_to_grid(j, rj, dj);
            A(i - 1, j - 1) = gen.at_offset(rj - ri, dj - di);
        }
    }
    return A;
}

} // namespace fracmg
