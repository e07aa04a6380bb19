#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "fracmg/mesh.hpp"

using namespace fracmg;

TEST_CASE("hierarchy sizes and spacings") {
    Hierarchy hier = build_hierarchy(4, 4, 4, Rect{2.0, 2.0});
    REQUIRE(hier.finest() == 4);
    CHECK(hier.level(1).nk == 7);
    CHECK(hier.level(1).lk == 7);
    CHECK(hier.level(1).h == Catch::Approx(0.25));
    CHECK(hier.level(4).nk == 63);
    CHECK(hier.level(4).lk == 63);
    CHECK(hier.level(4).h == Catch::Approx(0.03125));
    CHECK(hier.level(4).dofs() == 63 * 63);

    // nestedness: each level halves the spacing and every coarse node is a
    // fine node
    for (int k = 2; k <= 4; ++k) {
        const MeshLevel& c = hier.level(k - 1);
        const MeshLevel& f = hier.level(k);
        CHECK(f.h == Catch::Approx(0.5 * c.h));
        CHECK(f.nk == 2 * c.nk + 1);
        for (int d = 0; d < c.lk; d += 3) {
            for (int r = 1; r <= c.nk; r += 3) {
                double x = c.node_x(r), y = c.node_y(d);
                int rf = 2 * r, df = 2 * d + 1;
                CHECK(f.node_x(rf) == Catch::Approx(x));
                CHECK(f.node_y(df) == Catch::Approx(y));
            }
        }
    }
}

TEST_CASE("node indexing round-trip") {
    MeshLevel lev = build_hierarchy(4, 4, 2).level(2);
    for (std::int64_t m = 1; m <= lev.dofs(); ++m) {
        int r, d;
        lev.node_to_grid(m, r, d);
        CHECK(r >= 1);
        CHECK(r <= lev.nk);
        CHECK(d >= 0);
        CHECK(d <= lev.lk - 1);
        CHECK(lev.grid_to_node(r, d) == m);
    }
}

TEST_CASE("hierarchy validation errors") {
    CHECK_THROWS_AS(build_hierarchy(1, 4, 2), config_error);
    CHECK_THROWS_AS(build_hierarchy(4, 1, 2), config_error);
    CHECK_THROWS_AS(build_hierarchy(4, 4, 0), config_error);
    CHECK_THROWS_AS(build_hierarchy(4, 4, 2, Rect{2.0, 3.0}), config_error);
    CHECK_NOTHROW(build_hierarchy(4, 8, 2, Rect{2.0, 4.0}));
}

namespace {

// Evaluate the piecewise-linear function with nodal values vc at (x, y):
// locate the cell, pick the triangle by the diagonal, interpolate
// barycentrically. Independent of the Prolongation construction.
double eval_p1(const MeshLevel& lev, const std::vector<double>& vc, double x, double y) {
    auto nodal = [&](int r, int d) -> double {
        if (r < 1 || r > lev.nk || d < 0 || d > lev.lk - 1) return 0.0; // boundary
        return vc[std::size_t(lev.grid_to_node(r, d) - 1)];
    };
    double h = lev.h;
    int cx = int(std::floor(x / h));
    int cy = int(std::floor(y / h));
    double lx = x / h - cx, ly = y / h - cy;
    // cell corners in (r, d) indexing: node (r, d) sits at (r h, (d+1) h)
    double v00 = nodal(cx, cy - 1), v10 = nodal(cx + 1, cy - 1);
    double v01 = nodal(cx, cy), v11 = nodal(cx + 1, cy);
    if (lx >= ly) // lower-right triangle of the diagonal split
        return v00 * (1 - lx) + v10 * (lx - ly) + v11 * ly;
    return v00 * (1 - ly) + v11 * lx + v01 * (ly - lx);
}

} // namespace

TEST_CASE("prolongation reproduces coarse functions exactly") {
    Hierarchy hier = build_hierarchy(4, 4, 3);
    const MeshLevel& c = hier.level(2);
    const MeshLevel& f = hier.level(3);
    Prolongation P = prolongation_weights(c, f);
    REQUIRE(P.n_coarse == c.dofs());
    REQUIRE(P.n_fine == f.dofs());

    std::mt19937 rng(7);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    std::vector<double> vc(std::size_t(c.dofs()));
    for (auto& v : vc) v = dist(rng);
    std::vector<double> vf = P.apply(vc);

    // fine nodal values of P v must equal the coarse interpolant there
    for (int d = 0; d < f.lk; ++d) {
        for (int r = 1; r <= f.nk; ++r) {
            double x = f.node_x(r), y = f.node_y(d);
            double want = eval_p1(c, vc, x, y);
            double got = vf[std::size_t(f.grid_to_node(r, d) - 1)];
            CHECK(got == Catch::Approx(want).margin(1e-13));
        }
    }

    // and at random interior points the two interpolants agree
    std::uniform_real_distribution<double> px(0.01, 1.99);
    for (int t = 0; t < 200; ++t) {
        double x = px(rng), y = px(rng);
        CHECK(eval_p1(f, vf, x, y) == Catch::Approx(eval_p1(c, vc, x, y)).margin(1e-12));
    }
}

TEST_CASE("prolongation transpose is the adjoint") {
    Hierarchy hier = build_hierarchy(4, 4, 2);
    Prolongation P = prolongation_weights(hier.level(1), hier.level(2));
    std::mt19937 rng(11);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    std::vector<double> vc(std::size_t(P.n_coarse)), rf(std::size_t(P.n_fine));
    for (auto& v : vc) v = dist(rng);
    for (auto& v : rf) v = dist(rng);
    auto vf = P.apply(vc);
    auto rc = P.apply_transpose(rf);
    double lhs = 0, rhs = 0;
    for (std::size_t i = 0; i < vf.size(); ++i) lhs += vf[i] * rf[i];
    for (std::size_t i = 0; i < vc.size(); ++i) rhs += vc[i] * rc[i];
    CHECK(lhs == Catch::Approx(rhs).epsilon(1e-12));
}

TEST_CASE("transfer argument validation") {
    Hierarchy hier = build_hierarchy(4, 4, 3);
    CHECK_THROWS_AS(prolongation_weights(hier.level(1), hier.level(3)), usage_error);
    Prolongation P = prolongation_weights(hier.level(1), hier.level(2));
    CHECK_THROWS_AS(P.apply(std::vector<double>(3)), usage_error);
    CHECK_THROWS_AS(P.apply_transpose(std::vector<double>(3)), usage_error);
}
