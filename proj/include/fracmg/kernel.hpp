#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <vector>

#include "fracmg/errors.hpp"
#include "fracmg/mesh.hpp"
#include "fracmg/measure.hpp"

namespace fracmg {

struct KernelParams {
    double alpha = 0.75; // fractional order, in (1/2, 1]
    double c = 0.0;      // reaction coefficient, >= 0

    double nu() const { return 2.0 - 2.0 * alpha; }

    void validate() const {
        if (!(alpha > 0.5 && alpha <= 1.0))
            throw config_error("KernelParams: alpha must lie in (1/2, 1]");
        if (c < 0) throw config_error("KernelParams: c must be nonnegative");
    }
};

struct Vec2 {
    double x = 0, y = 0;
};

/// Counter-clockwise triangle.
struct Triangle {
    std::array<Vec2, 3> v;

    double area() const {
        return 0.5 * ((v[1].x - v[0].x) * (v[2].y - v[0].y) -
                      (v[1].y - v[0].y) * (v[2].x - v[0].x));
    }
};

/// Gradient of the linear nodal function that is 1 at vertex `which` and 0 at
/// the other two vertices.
inline Vec2 hat_gradient(const Triangle& t, int which) {
    const Vec2& b = t.v[std::size_t((which + 1) % 3)];
    const Vec2& c = t.v[std::size_t((which + 2) % 3)];
    double inv2a = 1.0 / (2.0 * t.area());
    return {-(c.y - b.y) * inv2a, (c.x - b.x) * inv2a};
}

/// Left fractional integral of order nu of the indicator of [a,b], evaluated
/// at x:  ((x-a)_+^nu - (x-b)_+^nu) / Gamma(nu+1).
inline double rl_indicator_integral(double nu, double a, double b, double x) {
    if (!(a < b)) throw usage_error("rl_indicator_integral: need a < b");
    if (!(nu > 0)) throw usage_error("rl_indicator_integral: need nu > 0");
    auto pp = [nu](double t) { return t > 0 ? std::pow(t, nu) : 0.0; };
    return (pp(x - a) - pp(x - b)) / std::tgamma(nu + 1.0);
}

namespace detail {

// int_{y0}^{y1} t(y)^e dy for t linear with endpoint values t0, t1 >= 0.
// Switches to a midpoint expansion when the endpoint values are too close for
// the closed form to be evaluated without cancellation.
inline double integral_linear_power(double t0, double t1, double dy, double e) {
    if (t0 < 0) t0 = 0;
    if (t1 < 0) t1 = 0;
    double m = 0.5 * (t0 + t1);
    if (m <= 0) return 0.0;
    double d = 0.5 * (t1 - t0);
    if (std::abs(d) <= 1e-3 * m) {
        double r2 = (d / m) * (d / m);
        double c2 = e * (e - 1.0) / 2.0;
        double c4 = c2 * (e - 2.0) * (e - 3.0) / 12.0;
        return dy * std::pow(m, e) * (1.0 + c2 * r2 / 3.0 + c4 * r2 * r2 / 5.0);
    }
    return (std::pow(t1, e + 1.0) - std::pow(t0, e + 1.0)) * dy / ((t1 - t0) * (e + 1.0));
}

struct RotTri {
    std::array<Vec2, 3> v; // rotated vertices (x' along the integration direction)
    double ymin, ymax;
};

inline RotTri rotate_triangle(const Triangle& t, double cth, double sth) {
    RotTri r;
    for (int i = 0; i < 3; ++i) {
        const Vec2& p = t.v[std::size_t(i)];
        r.v[std::size_t(i)] = {p.x * cth + p.y * sth, -p.x * sth + p.y * cth};
    }
    r.ymin = std::min({r.v[0].y, r.v[1].y, r.v[2].y});
    r.ymax = std::max({r.v[0].y, r.v[1].y, r.v[2].y});
    return r;
}

// Chord [lo, hi] of a rotated triangle at height y (y strictly inside the
// span and away from vertex heights). Returns false if rounding left no edge
// crossing at this height (possible only in slivers of negligible measure).
// Edges whose height span is negligible relative to the triangle are skipped:
// interpolating along them amplifies rounding noise into arbitrarily large
// chord endpoints, while the remaining two edges still bound the chord.
inline bool chord(const RotTri& t, double y, double& lo, double& hi) {
    lo = 1e300;
    hi = -1e300;
    const double span_eps = 1e-12 * (t.ymax - t.ymin);
    for (int i = 0; i < 3; ++i) {
        const Vec2& p = t.v[std::size_t(i)];
        const Vec2& q = t.v[std::size_t((i + 1) % 3)];
        double y0 = p.y, y1 = q.y;
        if ((y0 <= y && y <= y1) || (y1 <= y && y <= y0)) {
            if (std::abs(y1 - y0) <= span_eps) continue;
            double x = p.x + (y - y0) * (q.x - p.x) / (y1 - y0);
            lo = std::min(lo, x);
            hi = std::max(hi, x);
        }
    }
    return hi >= lo;
}

} // namespace detail

/// integral over `target` of the order-nu directional fractional integral (in
/// direction theta) of the indicator of `source`.
///
/// In rotated coordinates the inner x'-integral of the indicator kernel has an
/// exact antiderivative, and the outer y'-integrand is a signed sum of powers
/// (linear in y')^(nu+1) between consecutive vertex heights and sign-change
/// heights. Each piece is integrated in closed form, so the result is exact
/// up to rounding; no quadrature rule enters.
inline double pair_interaction(const Triangle& source, const Triangle& target, double theta,
                               double nu) {
    if (!(nu > 0 && nu <= 1)) throw usage_error("pair_interaction: need nu in (0,1]");
    double cth = std::cos(theta), sth = std::sin(theta);
    // snap axis and diagonal directions exactly so rotated vertex heights of
    // grid-aligned edges coincide instead of differing by rounding slivers
    if (std::abs(cth) < 1e-14) {
        cth = 0.0;
        sth = sth > 0 ? 1.0 : -1.0;
    } else if (std::abs(sth) < 1e-14) {
        sth = 0.0;
        cth = cth > 0 ? 1.0 : -1.0;
    } else if (std::abs(std::abs(cth) - std::abs(sth)) < 1e-14) {
        const double r = std::numbers::sqrt2 / 2.0;
        cth = std::copysign(r, cth);
        sth = std::copysign(r, sth);
    }
    detail::RotTri S = detail::rotate_triangle(source, cth, sth);
    detail::RotTri T = detail::rotate_triangle(target, cth, sth);

    double ylo = std::max(S.ymin, T.ymin);
    double yhi = std::min(S.ymax, T.ymax);
    if (!(yhi > ylo)) return 0.0;

    // base subintervals: split at every vertex height inside the overlap
    std::array<double, 8> bp{};
    int nbp = 0;
    bp[std::size_t(nbp++)] = ylo;
    bp[std::size_t(nbp++)] = yhi;
    for (int i = 0; i < 3; ++i) {
        for (double yv : {S.v[std::size_t(i)].y, T.v[std::size_t(i)].y})
            if (yv > ylo && yv < yhi) bp[std::size_t(nbp++)] = yv;
    }
    std::sort(bp.begin(), bp.begin() + nbp);

    const double e = nu + 1.0;
    double acc = 0.0;
    for (int s = 0; s + 1 < nbp; ++s) {
        double y0 = bp[std::size_t(s)], y1 = bp[std::size_t(s + 1)];
        double dy = y1 - y0;
        if (dy <= 0) continue;

        // chords are linear here; recover coefficients from two interior samples
        double ya = y0 + dy / 3.0, yb = y0 + 2.0 * dy / 3.0;
        double sa_lo, sa_hi, sb_lo, sb_hi, ta_lo, ta_hi, tb_lo, tb_hi;
        if (!detail::chord(S, ya, sa_lo, sa_hi) || !detail::chord(S, yb, sb_lo, sb_hi) ||
            !detail::chord(T, ya, ta_lo, ta_hi) || !detail::chord(T, yb, tb_lo, tb_hi))
            continue; // rounding sliver outside one of the triangles

        // four argument functions, each p + q*(y - y0), with alternating signs:
        //   +(d-a) -(d-b) -(c-a) +(c-b)   for source chord [a,b], target [c,d]
        struct Lin {
            double p, q;
            double sign;
        };
        auto make = [&](double va, double vb, double sign) {
            double q = (vb - va) / (yb - ya);
            double p = va - q * (ya - y0);
            return Lin{p, q, sign};
        };
        std::array<Lin, 4> terms = {
            make(ta_hi - sa_lo, tb_hi - sb_lo, +1.0),
            make(ta_hi - sa_hi, tb_hi - sb_hi, -1.0),
            make(ta_lo - sa_lo, tb_lo - sb_lo, -1.0),
            make(ta_lo - sa_hi, tb_lo - sb_hi, +1.0),
        };

        // further split at sign changes of any argument
        std::array<double, 8> z{};
        int nz = 0;
        z[std::size_t(nz++)] = 0.0;
        z[std::size_t(nz++)] = dy;
        for (const Lin& t : terms) {
            if (t.q != 0.0) {
                double zc = -t.p / t.q;
                if (zc > 0 && zc < dy) z[std::size_t(nz++)] = zc;
            }
        }
        std::sort(z.begin(), z.begin() + nz);

        for (int j = 0; j + 1 < nz; ++j) {
            double z0 = z[std::size_t(j)], z1 = z[std::size_t(j + 1)];
            if (!(z1 > z0)) continue;
            for (const Lin& t : terms) {
                double t0 = t.p + t.q * z0;
                double t1 = t.p + t.q * z1;
                if (t0 <= 0 && t1 <= 0) continue;
                acc += t.sign * detail::integral_linear_power(t0, t1, z1 - z0, e);
            }
        }
    }
    return acc / std::tgamma(nu + 2.0);
}

namespace detail {

// The six support triangles of an interior node, as (cell offset, type).
// Cells are split by the lower-left to upper-right diagonal; type 0 is the
// lower-right triangle, type 1 the upper-left.
struct TriRef {
    int cx, cy; // cell origin relative to the node, in grid units
    int type;
};

inline const std::array<TriRef, 6>& support_tris() {
    static const std::array<TriRef, 6> s = {{{-1, -1, 0},
                                             {-1, -1, 1},
                                             {0, -1, 1},
                                             {0, 0, 0},
                                             {0, 0, 1},
                                             {-1, 0, 0}}};
    return s;
}

/// Triangle of cell (cx, cy) (grid units) and given type, scaled by h.
inline Triangle cell_triangle(double cx, double cy, int type, double h) {
    if (type == 0)
        return Triangle{{Vec2{cx * h, cy * h}, Vec2{(cx + 1) * h, cy * h},
                         Vec2{(cx + 1) * h, (cy + 1) * h}}};
    return Triangle{{Vec2{cx * h, cy * h}, Vec2{(cx + 1) * h, (cy + 1) * h},
                     Vec2{cx * h, (cy + 1) * h}}};
}

// Which vertex of the support triangle is the node itself (node at origin,
// cell at the TriRef offset).
inline int node_vertex(const TriRef& t) {
    Triangle tri = cell_triangle(t.cx, t.cy, t.type, 1.0);
    for (int i = 0; i < 3; ++i)
        if (tri.v[std::size_t(i)].x == 0.0 && tri.v[std::size_t(i)].y == 0.0) return i;
    throw usage_error("node_vertex: node is not a vertex of the triangle");
}

// Per-direction data for one basis function: its support triangles and the
// (constant) directional derivative of the hat on each.
struct SupportDeriv {
    std::array<TriRef, 6> tris;
    std::array<double, 6> deriv; // cos(theta) dx + sin(theta) dy of the hat
};

inline SupportDeriv support_deriv(double theta, double h) {
    SupportDeriv sd;
    sd.tris = support_tris();
    const double cth = std::cos(theta), sth = std::sin(theta);
    for (int i = 0; i < 6; ++i) {
        const TriRef& t = sd.tris[std::size_t(i)];
        Triangle tri = cell_triangle(t.cx, t.cy, t.type, h);
        Vec2 g = hat_gradient(tri, node_vertex(t));
        sd.deriv[std::size_t(i)] = cth * g.x + sth * g.y;
    }
    return sd;
}

} // namespace detail

/// I_theta for the basis pair identified by relative grid displacement
/// (offset_x, offset_y) = (r_j - r_i, d_j - d_i):
///   sum over support-triangle pairs of
///   (D_theta phi_i)|tau' * (D_{theta+pi} phi_j)|tau * pair_interaction(tau', tau).
inline double entry_interaction_I(int offset_x, int offset_y, double theta,
                                  const KernelParams& params, const MeshLevel& level) {
    if (params.alpha >= 1.0)
        throw usage_error("entry_interaction_I: alpha = 1 uses the integer-order path");
    const double nu = params.nu();
    const double h = level.h;
    detail::SupportDeriv sd = detail::support_deriv(theta, h);

    double acc = 0.0;
    for (int a = 0; a < 6; ++a) {       // source support (phi_i around origin)
        for (int b = 0; b < 6; ++b) {   // target support (phi_j around offset)
            const auto& ts = sd.tris[std::size_t(a)];
            const auto& tt = sd.tris[std::size_t(b)];
            Triangle src = detail::cell_triangle(ts.cx, ts.cy, ts.type, h);
            Triangle tgt = detail::cell_triangle(offset_x + tt.cx, offset_y + tt.cy, tt.type, h);
            double w = sd.deriv[std::size_t(a)] * (-sd.deriv[std::size_t(b)]);
            if (w == 0.0) continue;
            acc += w * pair_interaction(src, tgt, theta, nu);
        }
    }
    return acc;
}

namespace detail {

/// alpha = 1 single-direction entry: (D_theta phi_i, D_theta phi_j), exact.
inline double integer_order_entry(int offset_x, int offset_y, double theta,
                                  const MeshLevel& level) {
    const double h = level.h;
    SupportDeriv sd = support_deriv(theta, h);
    const double area = 0.5 * h * h;
    double acc = 0.0;
    for (int a = 0; a < 6; ++a) {
        for (int b = 0; b < 6; ++b) {
            const TriRef& ts = sd.tris[std::size_t(a)];
            const TriRef& tt = sd.tris[std::size_t(b)];
            if (ts.cx == offset_x + tt.cx && ts.cy == offset_y + tt.cy && ts.type == tt.type)
                acc += sd.deriv[std::size_t(a)] * sd.deriv[std::size_t(b)] * area;
        }
    }
    return acc;
}

} // namespace detail

/// One stiffness entry B(phi_i, phi_j) for the node pair at the given grid
/// offset: -sum_l p_l I_{theta_l} + c * (phi_i, phi_j). alpha = 1 takes the
/// integer-order path.
inline double bilinear_entry(int offset_x, int offset_y, const DirectionalMeasure& measure,
                             const KernelParams& params, const MeshLevel& level,
                             double mass_entry) {
    params.validate();
    if (!measure.is_pi_symmetric())
        throw config_error("bilinear_entry: measure must be pi-symmetric");
    double acc = params.c * mass_entry;
    if (params.alpha == 1.0) {
        for (const auto& atom : measure.atoms)
            acc += atom.weight * detail::integer_order_entry(offset_x, offset_y, atom.theta, level);
    } else {
        for (const auto& atom : measure.atoms)
            acc -= atom.weight * entry_interaction_I(offset_x, offset_y, atom.theta, params, level);
    }
    return acc;
}

} // namespace fracmg
