#include <catch2/catch_amalgamated.hpp>

#include <numbers>
#include <random>

#include "fracmg/kernel.hpp"
#include "oracles.hpp"

using namespace fracmg;
constexpr double kPi = std::numbers::pi;

TEST_CASE("parameter validation") {
    CHECK_NOTHROW(KernelParams{0.75, 0.0}.validate());
    CHECK_NOTHROW(KernelParams{1.0, 1.0}.validate());
    CHECK_THROWS_AS((KernelParams{0.5, 0.0}.validate()), config_error);
    CHECK_THROWS_AS((KernelParams{1.1, 0.0}.validate()), config_error);
    CHECK_THROWS_AS((KernelParams{0.75, -1.0}.validate()), config_error);
    CHECK(KernelParams{0.75, 0.0}.nu() == Catch::Approx(0.5));
}

TEST_CASE("fractional integral of an interval indicator") {
    // closed form at nu = 1/2, interval [0,1], evaluation at 2:
    // (sqrt(2) - 1) / Gamma(3/2)
    double want = (std::sqrt(2.0) - 1.0) / std::tgamma(1.5);
    CHECK(rl_indicator_integral(0.5, 0.0, 1.0, 2.0) == Catch::Approx(want).epsilon(1e-14));
    CHECK(rl_indicator_integral(0.5, 0.0, 1.0, 2.0) == Catch::Approx(0.46739).margin(5e-6));
    // left of the support the integral vanishes
    CHECK(rl_indicator_integral(0.5, 0.0, 1.0, -0.5) == 0.0);
    // nu = 1 is the running length of intersection
    CHECK(rl_indicator_integral(1.0, 1.0, 3.0, 2.5) == Catch::Approx(1.5));
    CHECK(rl_indicator_integral(1.0, 1.0, 3.0, 7.0) == Catch::Approx(2.0));

    CHECK_THROWS_AS(rl_indicator_integral(0.5, 1.0, 1.0, 2.0), usage_error);
    CHECK_THROWS_AS(rl_indicator_integral(0.0, 0.0, 1.0, 2.0), usage_error);
}

TEST_CASE("fractional integral matches quadrature of the defining integral") {
    std::mt19937 rng(3);
    std::uniform_real_distribution<double> dnu(0.05, 1.0), dpt(-2.0, 4.0);
    for (int t = 0; t < 50; ++t) {
        double nu = dnu(rng);
        double a = dpt(rng), b = dpt(rng);
        if (a > b) std::swap(a, b);
        if (b - a < 0.1) b = a + 0.1;
        double x = dpt(rng);
        double want = oracles::rl_indicator_quadrature(nu, a, b, x);
        CHECK(rl_indicator_integral(nu, a, b, x) == Catch::Approx(want).margin(1e-10));
    }
}

TEST_CASE("measure discretization") {
    DirectionalMeasure m = discretize_measure([](double) { return 1.0; }, 8);
    REQUIRE(m.atoms.size() == 8);
    for (std::size_t i = 0; i < 8; ++i) {
        CHECK(m.atoms[i].theta == Catch::Approx(2 * kPi * double(i) / 8.0));
        CHECK(m.atoms[i].weight == Catch::Approx(kPi / 4.0));
    }
    CHECK(m.total_weight() == Catch::Approx(2 * kPi));
    CHECK(m.is_pi_symmetric());

    CHECK_THROWS_AS(discretize_measure([](double) { return 1.0; }, 6), config_error);
    CHECK_THROWS_AS(discretize_measure([](double) { return 1.0; }, 0), config_error);
    CHECK_THROWS_AS(discretize_measure([](double) { return -1.0; }, 8), config_error);
    // asymmetric density is rejected
    CHECK_THROWS_AS(discretize_measure([](double th) { return th < kPi ? 1.0 : 2.0; }, 8),
                    config_error);

    DirectionalMeasure q = axis_quarter_measure();
    CHECK(q.total_weight() == Catch::Approx(1.0));
    CHECK(q.is_pi_symmetric());
}

TEST_CASE("hat gradients") {
    Triangle t{{Vec2{0, 0}, Vec2{1, 0}, Vec2{1, 1}}};
    CHECK(t.area() == Catch::Approx(0.5));
    Vec2 g0 = hat_gradient(t, 0);
    CHECK(g0.x == Catch::Approx(-1.0));
    CHECK(g0.y == Catch::Approx(0.0));
    Vec2 g1 = hat_gradient(t, 1);
    CHECK(g1.x == Catch::Approx(1.0));
    CHECK(g1.y == Catch::Approx(-1.0));
    Vec2 g2 = hat_gradient(t, 2);
    CHECK(g2.x == Catch::Approx(0.0));
    CHECK(g2.y == Catch::Approx(1.0));
}

TEST_CASE("triangle pair interaction, hand-checked case") {
    // theta = 0, nu = 1: the pointwise value is the leftward chord length
    // through the source. Source at x in [1, 2-y], target at x in [3, 4-y]:
    // integral = int_0^1 (1-y)^2 dy = 1/3.
    Triangle S{{Vec2{1, 0}, Vec2{2, 0}, Vec2{1, 1}}};
    Triangle T{{Vec2{3, 0}, Vec2{4, 0}, Vec2{3, 1}}};
    CHECK(pair_interaction(S, T, 0.0, 1.0) == Catch::Approx(1.0 / 3.0).epsilon(1e-13));

    // upstream target contributes nothing
    CHECK(pair_interaction(T, S, 0.0, 1.0) == 0.0);
    CHECK(pair_interaction(T, S, 0.0, 0.5) == 0.0);

    CHECK_THROWS_AS(pair_interaction(S, T, 0.0, 0.0), usage_error);
    CHECK_THROWS_AS(pair_interaction(S, T, 0.0, 1.5), usage_error);
}

TEST_CASE("triangle pair interaction matches adaptive quadrature") {
    std::mt19937 rng(17);
    std::uniform_real_distribution<double> dv(-1.5, 1.5), dth(0.0, 2 * kPi);
    auto random_tri = [&]() {
        for (;;) {
            Triangle t{{Vec2{dv(rng), dv(rng)}, Vec2{dv(rng), dv(rng)}, Vec2{dv(rng), dv(rng)}}};
            if (t.area() < 0) std::swap(t.v[1], t.v[2]);
            if (t.area() > 0.08) return t;
        }
    };
    for (double nu : {0.1, 0.5, 0.9}) {
        for (int t = 0; t < 6; ++t) {
            Triangle S = random_tri(), T = random_tri();
            double theta = dth(rng);
            double want = oracles::pair_interaction_quadrature(S, T, theta, nu, 1e-11);
            double got = pair_interaction(S, T, theta, nu);
            INFO("nu=" << nu << " trial=" << t << " theta=" << theta);
            CHECK(got == Catch::Approx(want).margin(2e-8));
        }
    }
}

TEST_CASE("pair interaction adjointness under direction reversal") {
    std::mt19937 rng(23);
    std::uniform_real_distribution<double> dv(-1.0, 1.0), dth(0.0, 2 * kPi);
    for (int t = 0; t < 20; ++t) {
        Triangle S{{Vec2{dv(rng), dv(rng)}, Vec2{dv(rng), dv(rng)}, Vec2{dv(rng), dv(rng)}}};
        Triangle T{{Vec2{dv(rng), dv(rng)}, Vec2{dv(rng), dv(rng)}, Vec2{dv(rng), dv(rng)}}};
        if (S.area() < 0) std::swap(S.v[1], S.v[2]);
        if (T.area() < 0) std::swap(T.v[1], T.v[2]);
        if (S.area() < 1e-3 || T.area() < 1e-3) continue;
        double theta = dth(rng);
        for (double nu : {0.3, 0.8}) {
            double fwd = pair_interaction(S, T, theta, nu);
            double rev = pair_interaction(T, S, theta + kPi, nu);
            CHECK(fwd == Catch::Approx(rev).margin(1e-12));
        }
    }
}

TEST_CASE("single-direction stiffness interaction") {
    MeshLevel lev = build_hierarchy(4, 4, 1).level(1);
    KernelParams params{0.75, 0.0};
    // symmetric under simultaneous offset negation and direction reversal
    double a = entry_interaction_I(1, 0, 0.3, params, lev);
    double b = entry_interaction_I(-1, 0, 0.3 + kPi, params, lev);
    CHECK(a == Catch::Approx(b).margin(1e-12));

    KernelParams integer{1.0, 0.0};
    CHECK_THROWS_AS(entry_interaction_I(0, 0, 0.0, integer, lev), usage_error);
}

TEST_CASE("combined bilinear entry over a measure") {
    MeshLevel lev = build_hierarchy(4, 4, 1).level(1);
    DirectionalMeasure q = axis_quarter_measure();
    KernelParams params{0.75, 0.0};
    // diagonal entry is the weighted sum of single-direction interactions
    double want = 0.0;
    for (const auto& atom : q.atoms)
        want -= atom.weight * entry_interaction_I(0, 0, atom.theta, params, lev);
    CHECK(bilinear_entry(0, 0, q, params, lev, 0.0) == Catch::Approx(want).epsilon(1e-13));
    CHECK(bilinear_entry(0, 0, q, params, lev, 0.0) > 0); // coercive diagonal

    // asymmetric measure is rejected
    DirectionalMeasure bad{{{0.0, 1.0}}};
    CHECK_THROWS_AS(bilinear_entry(0, 0, bad, params, lev, 0.0), config_error);
}
