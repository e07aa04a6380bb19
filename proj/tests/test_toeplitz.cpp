#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "fracmg/toeplitz.hpp"

using namespace fracmg;

namespace {

GeneratorVector make_gen(int nk, int lk, std::vector<double> values) {
    GeneratorVector gen;
    gen.nk = nk;
    gen.lk = lk;
    REQUIRE(std::int64_t(values.size()) == GeneratorVector::length(nk, lk));
    gen.values = std::move(values);
    return gen;
}

// direct O(m^2) symmetric Toeplitz multiplication
std::vector<double> toeplitz_direct(const GeneratorVector& gen, const std::vector<double>& x) {
    const std::int64_t m = std::int64_t(gen.values.size());
    std::vector<double> y(std::size_t(m), 0.0);
    for (std::int64_t i = 0; i < m; ++i)
        for (std::int64_t j = 0; j < m; ++j)
            y[std::size_t(i)] += gen.values[std::size_t(std::abs(i - j))] * x[std::size_t(j)];
    return y;
}

} // namespace

TEST_CASE("row padding layout") {
    MeshLevel lev;
    lev.k = 1;
    lev.nk = 2;
    lev.lk = 2;
    // padded length (2n-1)l - n + 1 = 5; rows separated by n - 1 zeros
    std::vector<double> U = {1, 2, 3, 4};
    std::vector<double> Up = embed(U, lev);
    REQUIRE(Up == std::vector<double>{1, 2, 0, 3, 4});
    CHECK(restrict_padded(Up, lev) == U);
    CHECK_THROWS_AS(embed(std::vector<double>(3), lev), usage_error);
    CHECK_THROWS_AS(restrict_padded(std::vector<double>(4), lev), usage_error);
}

TEST_CASE("identity and all-ones generators") {
    GeneratorVector id = make_gen(3, 3, {1, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0});
    ToeplitzOperator opi(id);
    std::vector<double> x(13);
    for (std::size_t i = 0; i < 13; ++i) x[i] = double(i) - 4.0;
    CHECK_THAT(opi.matvec(x), Catch::Matchers::Approx(x).margin(1e-12));

    GeneratorVector ones = make_gen(3, 3, std::vector<double>(13, 1.0));
    ToeplitzOperator opo(ones);
    double sum = 0;
    for (double v : x) sum += v;
    for (double v : opo.matvec(x)) CHECK(v == Catch::Approx(sum).margin(1e-11));
}

TEST_CASE("fast multiplication matches the direct sum") {
    std::mt19937 rng(5);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    for (auto [nk, lk] : {std::pair{3, 3}, {7, 7}, {4, 9}}) {
        std::vector<double> vals(std::size_t(GeneratorVector::length(nk, lk)));
        for (auto& v : vals) v = dist(rng);
        GeneratorVector gen = make_gen(nk, lk, vals);
        ToeplitzOperator op(gen);
        std::vector<double> x(vals.size());
        for (auto& v : x) v = dist(rng);
        auto fast = op.matvec(x);
        auto direct = toeplitz_direct(gen, x);
        for (std::size_t i = 0; i < x.size(); ++i)
            CHECK(fast[i] == Catch::Approx(direct[i]).margin(1e-12));
    }
    ToeplitzOperator op(make_gen(3, 3, std::vector<double>(13, 1.0)));
    CHECK_THROWS_AS(op.matvec(std::vector<double>(5)), usage_error);
}

TEST_CASE("operator application matches the dense matrix") {
    MeshLevel lev = build_hierarchy(2, 2, 2).level(2); // 49 dofs
    DirectionalMeasure q = axis_quarter_measure();
    KernelParams params{0.75, 0.0};
    GeneratorVector gen = build_generator(lev, q, params);
    ToeplitzOperator op(gen);
    Eigen::MatrixXd A = build_dense(lev, q, params);

    std::mt19937 rng(9);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    for (int t = 0; t < 5; ++t) {
        std::vector<double> U(std::size_t(lev.dofs()));
        for (auto& v : U) v = dist(rng);
        MomentVector got = apply_stiffness(op, U, lev);
        Eigen::Map<const Eigen::VectorXd> uv(U.data(), Eigen::Index(U.size()));
        Eigen::VectorXd want = A * uv;
        for (std::int64_t i = 0; i < lev.dofs(); ++i)
            CHECK(got.values[std::size_t(i)] == Catch::Approx(want(i)).margin(1e-11));
    }
    MeshLevel other = build_hierarchy(2, 2, 1).level(1);
    CHECK_THROWS_AS(apply_stiffness(op, std::vector<double>(std::size_t(other.dofs())), other),
                    usage_error);
}

TEST_CASE("operator application is symmetric") {
    MeshLevel lev = build_hierarchy(2, 2, 2).level(2);
    GeneratorVector gen = build_generator(lev, axis_quarter_measure(), KernelParams{0.75, 0.0});
    ToeplitzOperator op(gen);
    std::mt19937 rng(13);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    std::vector<double> u(std::size_t(lev.dofs())), v(std::size_t(lev.dofs()));
    for (auto& x : u) x = dist(rng);
    for (auto& x : v) x = dist(rng);
    auto Au = apply_stiffness(op, u, lev).values;
    auto Av = apply_stiffness(op, v, lev).values;
    double a = 0, b = 0;
    for (std::size_t i = 0; i < u.size(); ++i) {
        a += Au[i] * v[i];
        b += Av[i] * u[i];
    }
    CHECK(a == Catch::Approx(b).epsilon(1e-11));
}
