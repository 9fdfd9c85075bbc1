#include <catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "fixtures.hpp"
#include "greenlink/greenlink.hpp"

using namespace greenlink;
namespace fs = std::filesystem;

namespace {

Panels planted_panels(int tech_first = 2008) {
    return make_panels(fixture::planted_panel(Layer::technology, tech_first, 2017),
                       fixture::planted_panel(Layer::product, 2008, 2017), 0);
}

RunConfig planted_config(std::size_t samples = 2000) {
    RunConfig cfg;
    cfg.tech_panel = "unused-tech.csv";
    cfg.product_panel = "unused-products.csv";
    cfg.samples = samples;
    cfg.tier = Tier::p999;
    finalize_config(cfg);
    return cfg;
}

fs::path scratch(const std::string& name) {
    const auto dir = fs::temp_directory_path() / ("greenlink-test-" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

}  // namespace

TEST_CASE("config files parse with defaults") {
    std::istringstream in("# comment\n"
                          "tech_panel = t.csv\n"
                          "product_panel = /abs/p.csv   # trailing comment\n"
                          "seed = 7\n"
                          "tier = 99%\n");
    const auto cfg = parse_config(in, "/data");
    CHECK(cfg.tech_panel == "/data/t.csv");
    CHECK(cfg.product_panel == "/abs/p.csv");
    CHECK(cfg.seed == 7);
    CHECK(cfg.tier == Tier::p99);
    CHECK(cfg.delta == 5);
    CHECK(cfg.samples == 10000);
    CHECK(cfg.pairs == std::vector<PeriodPair>{{2012, 2012}, {2017, 2017}});
}

TEST_CASE("ten-year lag defaults to the anticipating pairs") {
    std::istringstream in("tech_panel = a\nproduct_panel = b\nlag = 10\n");
    CHECK(parse_config(in).pairs == std::vector<PeriodPair>{{2002, 2012}, {2007, 2017}});
}

TEST_CASE("invalid configs are rejected") {
    auto parse = [](const std::string& text) {
        std::istringstream in(text);
        return parse_config(in);
    };
    const std::string base = "tech_panel = a\nproduct_panel = b\n";
    CHECK_THROWS_AS(parse(base + "lag = 0\npairs = 2012:2013\n"), Error);
    CHECK_THROWS_AS(parse(base + "colour = blue\n"), Error);
    CHECK_THROWS_AS(parse(base + "delta = five\n"), Error);
    CHECK_THROWS_AS(parse(base + "delta = 0\n"), Error);
    CHECK_THROWS_AS(parse(base + "lag = 3\n"), Error);
    CHECK_THROWS_AS(parse(base + "compare_pairs = 2002:2012\n"), Error);
    CHECK_THROWS_AS(parse("tech_panel = a\n"), Error);
    CHECK_THROWS_AS(parse(base + "just words\n"), Error);
    try {
        parse(base + "lag = 10\npairs = 2002:2012, 2007:2012\n");
        FAIL("accepted a pair with the wrong lag");
    } catch (const Error& e) {
        CHECK(std::string(e.what()).find("2007:2012") != std::string::npos);
    }
}

TEST_CASE("config serialization round-trips") {
    std::istringstream in("tech_panel = /x/t.csv\nproduct_panel = /x/p.csv\nlag = 10\ncompare_lag = 0\n"
                          "samples = 500\nseed = 99\ntier = 99.9\ndigits = 2\nrca_threshold = 1.25\n"
                          "robustness_deltas = 3, 5\nrobustness_years = 2008:2017\nefc_year = 2016\n"
                          "cache = /tmp/c\nthreads = 3\nbicm_tolerance = 1e-9\n");
    const auto cfg = parse_config(in);
    const auto text = serialize_config(cfg);
    std::istringstream again(text);
    const auto back = parse_config(again);
    CHECK(back == cfg);
    CHECK(serialize_config(back) == text);
}

TEST_CASE("planted pair is validated at the top tier") {
    const auto panels = planted_panels();
    const auto cfg = planted_config();
    const auto r = run_pair(panels, {2017, 2017}, PairSettings::from(cfg));
    const auto t = static_cast<std::size_t>(std::find(r.assist.tech_ids.begin(), r.assist.tech_ids.end(), fixture::kPlantedTech) - r.assist.tech_ids.begin());
    const auto p = static_cast<std::size_t>(std::find(r.assist.product_ids.begin(), r.assist.product_ids.end(), fixture::kPlantedProduct) - r.assist.product_ids.begin());
    CHECK(r.assist.values(t, p) == 1.0);
    CHECK(r.validation.significant(t, p, Tier::p999));
    CHECK(r.assist.common_country_ids.size() == 6);
    CHECK(r.tech_model.fit_residual <= 1e-8);
}

TEST_CASE("pair seeds depend only on run seed, pair and window") {
    CHECK(pair_seed(1, {2012, 2012}, 5) == pair_seed(1, {2012, 2012}, 5));
    CHECK(pair_seed(1, {2012, 2012}, 5) != pair_seed(2, {2012, 2012}, 5));
    CHECK(pair_seed(1, {2012, 2012}, 5) != pair_seed(1, {2017, 2017}, 5));
    CHECK(pair_seed(1, {2012, 2012}, 5) != pair_seed(1, {2012, 2012}, 4));
}

TEST_CASE("stage errors carry the stage name") {
    RunConfig cfg = planted_config();
    cfg.tech_panel = "/nonexistent/tech.csv";
    try {
        load_panels(cfg);
        FAIL("loaded a missing file");
    } catch (const StageError& e) {
        CHECK(e.stage() == "ingest");
        CHECK(std::string(e.what()).rfind("[ingest] ", 0) == 0);
        CHECK(std::string(e.what()).find("/nonexistent/tech.csv") != std::string::npos);
    }
    const auto panels = planted_panels();
    try {
        run_pair(panels, {2020, 2020}, PairSettings::from(cfg));
        FAIL("ran a window beyond the panel");
    } catch (const StageError& e) {
        CHECK(e.stage().rfind("rca", 0) == 0);
        CHECK(std::string(e.what()).find("2020") != std::string::npos);
    }
}

TEST_CASE("cached intermediates reproduce the same downstream results") {
    const auto dir = scratch("cache");
    const auto panels = planted_panels();
    auto cfg = planted_config(1500);
    const auto settings = PairSettings::from(cfg);
    const auto fresh = run_pair(panels, {2012, 2012}, settings);

    const ArtifactCache cache(dir / "store");
    const auto first = run_pair(panels, {2012, 2012}, settings, cache);
    std::size_t files = 0;
    for (const auto& e : fs::directory_iterator(dir / "store")) files += e.is_regular_file();
    CHECK(files == 5);  // two binaries, two models, one count table

    const auto second = run_pair(panels, {2012, 2012}, settings, cache);
    CHECK(second.validation.exceed == fresh.validation.exceed);
    CHECK(first.validation.exceed == fresh.validation.exceed);
    CHECK(second.tech_model.probabilities == fresh.tech_model.probabilities);
    CHECK(second.product.values == fresh.product.values);

    // drop the counts only: recomputed from cached models
    for (const auto& e : fs::directory_iterator(dir / "store"))
        if (e.path().string().ends_with(".counts.txt")) fs::remove(e.path());
    const auto third = run_pair(panels, {2012, 2012}, settings, cache);
    CHECK(third.validation.exceed == fresh.validation.exceed);

    // a different sample count must not hit the stored counts
    auto other = settings;
    other.samples = 1000;
    CHECK(run_pair(panels, {2012, 2012}, other, cache).validation.n_samples == 1000);
}

TEST_CASE("full pipeline writes identical files on rerun") {
    const auto panels = planted_panels(2003);
    auto cfg = planted_config(1000);
    cfg.compare_lag = 5;
    cfg.compare_pairs.clear();
    cfg.compare_pairs = {{2007, 2012}, {2012, 2017}};
    finalize_config(cfg);

    auto run = [&](const std::string& name) {
        const auto dir = scratch(name);
        Manifest m(dir, "report");
        write_pipeline_outputs(m, cfg, run_pipeline(cfg, panels));
        m.complete();
        return dir;
    };
    const auto a = run("det-a");
    const auto b = run("det-b");
    for (const auto* f : {"edges.csv", "edges_lag5.csv", "network.graphml", "report.json", "tech_ranks.csv",
                          "product_ranks.csv", "curve_product.csv", "curve_technology.csv",
                          "pairs/validation_2012_2012.csv", "models/tech_2017_2017.model"}) {
        INFO(f);
        REQUIRE(fs::exists(a / f));
        CHECK(slurp(a / f) == slurp(b / f));
    }
    const auto edges = slurp(a / "edges.csv");
    CHECK(edges.rfind("tech,product,weight,p_value,tier\n", 0) == 0);
    CHECK(edges.find("Y02E 60,810520,1,") != std::string::npos);
    const auto manifest = nlohmann::json::parse(slurp(a / "manifest.json"));
    CHECK(manifest["status"] == "complete");

    const auto report = nlohmann::json::parse(slurp(a / "report.json"));
    CHECK(report["network"]["edges"] == 1);
    CHECK(report["curves"]["product_final"] == 0);
    CHECK(report["significance_profiles"].contains("810520"));
}

TEST_CASE("robustness windows") {
    SECTION("a ten-year span gives 8 + 7 + 1 configurations") {
        const auto w = enumerate_windows({3, 4, 10}, 2008, 2017);
        CHECK(w.size() == 16);
        CHECK(w.front() == std::pair{3, 2010});
        CHECK(w.back() == std::pair{10, 2017});
    }
    SECTION("laxer tiers") {
        CHECK(laxer_tier(Tier::p95) == Tier::p90);
        CHECK(laxer_tier(Tier::p99) == Tier::p95);
        CHECK(laxer_tier(Tier::p999) == Tier::p99);
    }
    SECTION("identical benchmark recovers everything") {
        const auto panels = planted_panels();
        auto cfg = planted_config(1000);
        cfg.tier = Tier::p95;
        cfg.robustness_years = std::pair{2013, 2017};
        const auto single = run_pair(panels, {2017, 2017}, PairSettings::from(cfg));
        const auto bench = intersect_pairs(std::vector<PairValidation>{single.validation}, cfg.tier);
        const auto rep = run_robustness(cfg, panels, bench, {5});
        REQUIRE(rep.entries.size() == 1);
        CHECK(rep.entries[0].overlap == 1.0);
        // the narrowed span drops windows that fit the full panel
        CHECK_FALSE(rep.notes.empty());
    }
}

TEST_CASE("two-digit aggregation of products") {
    const auto panels = make_panels(fixture::planted_panel(Layer::technology),
                                    fixture::planted_panel(Layer::product), 2);
    CHECK(panels.product.activity_ids == std::vector<std::string>{"28", "81", "85", "87"});
}
