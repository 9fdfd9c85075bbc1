#include <catch_amalgamated.hpp>

#include <numeric>
#include <random>

#include "fixtures.hpp"
#include "oracles.hpp"
#include "greenlink/efc.hpp"

using namespace greenlink;
using Catch::Approx;

namespace {

ValidatedNetwork network(std::vector<std::pair<std::size_t, std::size_t>> edges, std::size_t techs,
                         std::vector<std::string> products) {
    ValidatedNetwork net;
    for (std::size_t t = 0; t < techs; ++t) net.tech_ids.push_back("t" + std::to_string(t));
    net.product_ids = std::move(products);
    for (auto [t, p] : edges) net.edges.push_back({t, p, {}});
    return net;
}

FitnessComplexity ranking_of(std::vector<std::string> ids, std::vector<int> ranks) {
    FitnessComplexity fc;
    fc.activity_ids = std::move(ids);
    fc.activity_rank = std::move(ranks);
    return fc;
}

}  // namespace

TEST_CASE("all-ones matrices stay at one") {
    const auto m = fixture::binary({{1, 1, 1}, {1, 1, 1}});
    const auto fc = run_efc(m, {}, [](int, std::span<const double> f, std::span<const double> q) {
        for (double v : f) REQUIRE(v == Approx(1.0).epsilon(1e-15));
        for (double v : q) REQUIRE(v == Approx(1.0).epsilon(1e-15));
    });
    CHECK(fc.stable);
    CHECK(fc.iterations == 50);
}

TEST_CASE("the diversified country and its exclusive activity rank first") {
    const auto fc = run_efc(fixture::binary({{1, 1}, {1, 0}}));
    CHECK(fc.country_rank == std::vector<int>{1, 2});
    CHECK(fc.activity_rank == std::vector<int>{2, 1});
    CHECK(fc.fitness[0] > fc.fitness[1]);
    CHECK(fc.complexity[1] > fc.complexity[0]);
    CHECK(fc.stable);

    const auto brute = oracle::efc(fixture::binary({{1, 1}, {1, 0}}).values, 200);
    CHECK(brute.fitness[0] > brute.fitness[1]);
    CHECK(brute.complexity[1] > brute.complexity[0]);
}

TEST_CASE("nested matrix ranks complexity against ubiquity") {
    std::vector<std::vector<int>> rows(5, std::vector<int>(5, 0));
    for (std::size_t c = 0; c < 5; ++c)
        for (std::size_t a = 0; a <= c; ++a) rows[c][a] = 1;
    const auto m = fixture::binary(rows);
    const auto fc = run_efc(m);
    REQUIRE(fc.stable);
    // column a is held by 5 - a countries
    CHECK(fc.activity_rank == std::vector<int>{5, 4, 3, 2, 1});
    CHECK(fc.country_rank == std::vector<int>{5, 4, 3, 2, 1});
}

TEST_CASE("rankings agree with a brute-force long double iteration") {
    std::mt19937_64 rng(101);
    int compared = 0;
    for (int trial = 0; trial < 40; ++trial) {
        auto raw = oracle::random_binary(rng, 8, 10, 0.45);
        const auto m = fixture::binary(raw);
        if (std::find(m.diversification.begin(), m.diversification.end(), 0) != m.diversification.end()) continue;
        if (std::find(m.ubiquity.begin(), m.ubiquity.end(), 0) != m.ubiquity.end()) continue;
        const auto fc = run_efc(m, {200, 1000});
        const auto brute = oracle::efc(raw, 200);
        for (std::size_t a = 0; a < 10; ++a)
            REQUIRE(double(fc.complexity[a]) == Approx(double(brute.complexity[a])).epsilon(1e-9).margin(1e-300));
        ++compared;
    }
    CHECK(compared > 5);
}

TEST_CASE("normalization and dominance hold at every iteration") {
    std::mt19937_64 rng(55);
    for (int trial = 0; trial < 20; ++trial) {
        auto raw = oracle::random_binary(rng, 7, 9, 0.5);
        for (std::size_t c = 0; c < 7; ++c) raw(c, c % 9) = 1;
        for (std::size_t a = 0; a < 9; ++a) raw(a % 7, a) = 1;
        for (std::size_t a = 0; a < 9; ++a) raw(0, a) = raw(0, a) | raw(1, a);  // row 0 contains row 1
        const auto m = fixture::binary(raw);
        run_efc(m, {300, 50}, [](int, std::span<const double> f, std::span<const double> q) {
            const double mf = std::accumulate(f.begin(), f.end(), 0.0) / f.size();
            const double mq = std::accumulate(q.begin(), q.end(), 0.0) / q.size();
            REQUIRE(std::abs(mf - 1.0) <= 1e-12);
            REQUIRE(std::abs(mq - 1.0) <= 1e-12);
            REQUIRE(f[0] >= f[1]);
        });
    }
}

TEST_CASE("permuting rows and columns keeps the ranking of labels") {
    std::mt19937_64 rng(64);
    auto raw = oracle::random_binary(rng, 6, 8, 0.5);
    for (std::size_t c = 0; c < 6; ++c) raw(c, c) = 1;
    for (std::size_t a = 0; a < 8; ++a) raw(a % 6, a) = 1;
    const auto m = fixture::binary(raw);
    const auto fc = run_efc(m);

    std::vector<std::size_t> rows(6), cols(8);
    std::iota(rows.begin(), rows.end(), std::size_t{0});
    std::iota(cols.begin(), cols.end(), std::size_t{0});
    std::shuffle(rows.begin(), rows.end(), rng);
    std::shuffle(cols.begin(), cols.end(), rng);
    std::vector<std::string> rid, cid;
    for (auto r : rows) rid.push_back(m.country_ids[r]);
    for (auto c : cols) cid.push_back(m.activity_ids[c]);
    const auto pm = make_binary(m.window, rid, cid, select_cols(select_rows(raw, rows), cols));
    const auto pfc = run_efc(pm);
    for (std::size_t j = 0; j < 8; ++j) {
        CHECK(pfc.rank_of_activity(cid[j]) == fc.rank_of_activity(cid[j]));
        CHECK(pfc.complexity[j] == Approx(fc.complexity[cols[j]]).epsilon(1e-12));
    }
}

TEST_CASE("empty rows and columns") {
    const auto m = fixture::binary({{1, 0, 1}, {0, 0, 0}, {1, 0, 0}});
    CHECK_THROWS_AS(run_efc(m), Error);
    const auto fc = rank_efc(m);
    CHECK(fc.country_stripped == std::vector<bool>{false, true, false});
    CHECK(fc.activity_stripped == std::vector<bool>{false, true, false});
    CHECK(fc.activity_rank[1] == 3);
    CHECK(fc.country_rank[1] == 3);
    CHECK(fc.activity_rank[2] == 1);
    CHECK(fc.complexity[1] == 0.0);
    CHECK_THROWS_AS(rank_efc(fixture::binary({{0, 0}})), Error);
}

TEST_CASE("equal complexity breaks ties by id") {
    const auto fc = run_efc(fixture::binary({{1, 1}, {1, 1}}));
    CHECK(fc.activity_rank == std::vector<int>{1, 2});
}

TEST_CASE("iteration cap flags an unstable ranking") {
    std::vector<std::vector<int>> rows(5, std::vector<int>(5, 0));
    for (std::size_t c = 0; c < 5; ++c)
        for (std::size_t a = 0; a <= c; ++a) rows[c][a] = 1;
    const auto fc = run_efc(fixture::binary(rows), {10, 50});
    CHECK_FALSE(fc.stable);
    CHECK(fc.iterations == 10);
}

TEST_CASE("cumulative link difference") {
    const std::vector<std::string> products{"p0", "p1", "p2", "p3"};
    // p2 is the most complex, p0 the least
    const auto ranking = ranking_of(products, {4, 2, 1, 3});
    const auto base = network({{0, 0}, {1, 1}, {0, 3}}, 2, products);

    SECTION("identical networks give a flat curve") {
        const auto curve = cumulative_link_difference(base, base, ranking, Layer::product);
        for (const auto& pt : curve.points) CHECK(pt.cumulative == 0);
    }
    SECTION("an extra edge on the most complex product appears last") {
        auto later = base;
        later.edges.push_back({1, 2, {}});
        const auto curve = cumulative_link_difference(base, later, ranking, Layer::product);
        REQUIRE(curve.points.size() == 4);
        CHECK(curve.points.back().label == "p2");
        for (std::size_t i = 0; i + 1 < 4; ++i) CHECK(curve.points[i].cumulative == 0);
        CHECK(curve.points.back().cumulative == 1);
        std::vector<std::string> order;
        for (const auto& pt : curve.points) order.push_back(pt.label);
        CHECK(order == std::vector<std::string>{"p0", "p3", "p1", "p2"});
    }
    SECTION("endpoint is the change in edge count") {
        auto later = base;
        later.edges.erase(later.edges.begin());
        later.edges.push_back({0, 1, {}});
        later.edges.push_back({1, 3, {}});
        const auto curve = cumulative_link_difference(base, later, ranking, Layer::product);
        CHECK(curve.points.back().cumulative == int(later.edges.size()) - int(base.edges.size()));
        const auto tech_rank = ranking_of({"t0", "t1"}, {1, 2});
        const auto tcurve = cumulative_link_difference(base, later, tech_rank, Layer::technology);
        CHECK(tcurve.points.back().cumulative == 1);
    }
    SECTION("quartile markers") {
        const auto curve = cumulative_link_difference(base, base, ranking, Layer::product);
        CHECK(curve.quartile_positions == std::array<std::size_t, 3>{3, 2, 1});
        CHECK(curve.points[3].quartile == 25);
        CHECK(curve.points[2].quartile == 50);
        CHECK(curve.points[1].quartile == 75);
        CHECK(curve.points[0].quartile == 0);
    }
    SECTION("unranked nodes are an error") {
        CHECK_THROWS_AS(cumulative_link_difference(base, base, ranking_of({"p0"}, {1}), Layer::product), Error);
    }
}
