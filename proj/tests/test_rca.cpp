#include <catch_amalgamated.hpp>

#include <random>
#include <sstream>

#include "fixtures.hpp"
#include "oracles.hpp"
#include "greenlink/rca.hpp"

using namespace greenlink;
using Catch::Approx;

TEST_CASE("uniform weights give RCA 1 everywhere") {
    const auto r = compute_rca(fixture::windowed(fixture::matrix({{1, 1}, {1, 1}})));
    for (double v : r.values.data()) CHECK(v == 1.0);
    // inclusive threshold: exactly 1 counts as specialized
    const auto m = binarize(r);
    for (auto v : m.values.data()) CHECK(v == 1);
}

TEST_CASE("diagonal weights give diagonal RCA and an identity specialization") {
    const auto r = compute_rca(fixture::windowed(fixture::matrix({{2, 0}, {0, 2}})));
    CHECK(r.values == fixture::matrix({{2, 0}, {0, 2}}));
    const auto m = binarize(r);
    CHECK(m.values(0, 0) == 1);
    CHECK(m.values(0, 1) == 0);
    CHECK(m.values(1, 0) == 0);
    CHECK(m.values(1, 1) == 1);
    CHECK(m.diversification == std::vector<int>{1, 1});
    CHECK(m.ubiquity == std::vector<int>{1, 1});
}

TEST_CASE("zero rows and columns give zero RCA") {
    const auto r = compute_rca(fixture::windowed(fixture::matrix({{0, 0, 0}, {1, 0, 3}, {2, 0, 1}})));
    for (std::size_t a = 0; a < 3; ++a) CHECK(r.values(0, a) == 0.0);
    for (std::size_t c = 0; c < 3; ++c) CHECK(r.values(c, 1) == 0.0);
    const auto m = binarize(r);
    CHECK(m.diversification[0] == 0);
    CHECK(m.ubiquity[1] == 0);
}

TEST_CASE("an all-zero window is an error") {
    CHECK_THROWS_AS(compute_rca(fixture::windowed(Matrix<double>(3, 2))), Error);
}

TEST_CASE("threshold must be positive") {
    const auto r = compute_rca(fixture::windowed(fixture::matrix({{1, 2}})));
    CHECK_THROWS_AS(binarize(r, 0.0), Error);
    CHECK_THROWS_AS(binarize(r, -1.0), Error);
}

TEST_CASE("RCA matches a direct evaluation on random weights") {
    std::mt19937_64 rng(2024);
    std::uniform_int_distribution<std::size_t> dim(1, 20);
    for (int trial = 0; trial < 100; ++trial) {
        const auto x = oracle::random_weights(rng, dim(rng), dim(rng) + 5);
        if (std::all_of(x.data().begin(), x.data().end(), [](double v) { return v == 0.0; })) continue;
        const auto got = compute_rca(fixture::windowed(x)).values;
        const auto want = oracle::rca(x);
        for (std::size_t k = 0; k < x.size(); ++k)
            REQUIRE(got.data()[k] == Approx(want.data()[k]).epsilon(1e-12).margin(1e-12));
    }
}

TEST_CASE("binarized RCA is invariant under global scaling") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> k(1e-3, 1e3);
    for (int trial = 0; trial < 50; ++trial) {
        const auto x = oracle::random_weights(rng, 12, 17);
        auto scaled = x;
        const double factor = k(rng);
        for (auto& v : scaled.data()) v *= factor;
        const auto a = compute_rca(fixture::windowed(x));
        const auto b = compute_rca(fixture::windowed(scaled));
        for (std::size_t i = 0; i < x.size(); ++i)
            REQUIRE(a.values.data()[i] == Approx(b.values.data()[i]).epsilon(1e-12).margin(1e-12));
        // values sitting on the threshold may round either way after scaling
        const auto ma = binarize(a), mb = binarize(b);
        for (std::size_t i = 0; i < x.size(); ++i)
            if (std::abs(a.values.data()[i] - 1.0) > 1e-9) REQUIRE(ma.values.data()[i] == mb.values.data()[i]);
    }
}

TEST_CASE("every active column has a specialized country") {
    std::mt19937_64 rng(99);
    for (int trial = 0; trial < 50; ++trial) {
        const auto x = oracle::random_weights(rng, 9, 14, 0.6);
        if (std::all_of(x.data().begin(), x.data().end(), [](double v) { return v == 0.0; })) continue;
        const auto m = binarize(compute_rca(fixture::windowed(x)));
        for (std::size_t a = 0; a < x.cols(); ++a) {
            double col = 0.0;
            for (std::size_t c = 0; c < x.rows(); ++c) col += x(c, a);
            if (col > 0.0) CHECK(m.ubiquity[a] >= 1);
        }
    }
}

TEST_CASE("country activity shares sum to one") {
    std::mt19937_64 rng(5);
    const auto x = oracle::random_weights(rng, 10, 10);
    const auto r = compute_rca(fixture::windowed(x)).values;
    double total = 0.0;
    std::vector<double> col(x.cols(), 0.0);
    for (std::size_t c = 0; c < x.rows(); ++c)
        for (std::size_t a = 0; a < x.cols(); ++a) {
            total += x(c, a);
            col[a] += x(c, a);
        }
    // RCA * world share recovers the country's own share
    for (std::size_t c = 0; c < x.rows(); ++c) {
        double s = 0.0;
        bool any = false;
        for (std::size_t a = 0; a < x.cols(); ++a) {
            s += r(c, a) * col[a] / total;
            any = any || x(c, a) > 0.0;
        }
        if (any) CHECK(s == Approx(1.0).epsilon(1e-12));
    }
}

TEST_CASE("binary matrices survive a CSV round trip") {
    std::mt19937_64 rng(1);
    const auto m = fixture::binary(oracle::random_binary(rng, 5, 7, 0.4));
    std::stringstream io;
    write_binary_csv(io, m);
    const auto back = read_binary_csv(io, m.window);
    CHECK(back.values == m.values);
    CHECK(back.country_ids == m.country_ids);
    CHECK(back.activity_ids == m.activity_ids);
    CHECK(back.diversification == m.diversification);
    CHECK(back.ubiquity == m.ubiquity);
}

TEST_CASE("restricting countries recomputes degrees") {
    const auto m = fixture::binary({{1, 1, 0}, {0, 1, 1}, {1, 0, 0}});
    const auto r = restrict_countries(m, {"c0", "c2"});
    CHECK(r.ubiquity == std::vector<int>{2, 1, 0});
    CHECK(r.diversification == std::vector<int>{2, 1});
    CHECK_THROWS_AS(restrict_countries(m, {"zz"}), Error);
}
