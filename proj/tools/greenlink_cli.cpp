// Command-line front end: one subcommand per pipeline stage.

#include <filesystem>
#include <iostream>
#include <set>
#include <string>

#include <CLI11.hpp>

#include "greenlink/greenlink.hpp"

namespace fs = std::filesystem;
using namespace greenlink;

namespace {

struct Overrides {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> samples;
    std::optional<std::string> tier;
    std::optional<int> digits;
    std::optional<std::string> out;
    std::optional<unsigned> threads;
    std::optional<std::string> cache;
};

void add_common(CLI::App* cmd, Overrides& o) {
    cmd->add_option("--config", o.config, "run configuration file")->required()->check(CLI::ExistingFile);
    cmd->add_option("--seed", o.seed, "random seed");
    cmd->add_option("--samples", o.samples, "null-model draws per period pair");
    cmd->add_option("--tier", o.tier, "significance tier: 90, 95, 99 or 99.9");
    cmd->add_option("--digits", o.digits, "product code length (2 for HS chapters, 6 for subheadings)");
    cmd->add_option("--out", o.out, "output directory");
    cmd->add_option("--threads", o.threads, "worker threads for null sampling");
    cmd->add_option("--cache", o.cache, "artifact cache directory");
}

RunConfig resolve_config(const Overrides& o) {
    auto cfg = run_stage("config", [&] { return load_config_file(o.config); });
    if (o.seed) cfg.seed = *o.seed;
    if (o.samples) cfg.samples = *o.samples;
    if (o.tier) cfg.tier = run_stage("config", [&] { return parse_tier(*o.tier); });
    if (o.digits) cfg.digits = *o.digits;
    if (o.out) cfg.out = *o.out;
    if (o.threads) cfg.threads = std::max(1u, *o.threads);
    if (o.cache) cfg.cache = *o.cache;
    run_stage("config", [&] { finalize_config(cfg); });
    return cfg;
}

std::vector<PeriodPair> all_pairs(const RunConfig& cfg) {
    auto pairs = cfg.pairs;
    pairs.insert(pairs.end(), cfg.compare_pairs.begin(), cfg.compare_pairs.end());
    return pairs;
}

void cmd_ingest(const RunConfig& cfg, Manifest& m) {
    const auto panels = load_panels(cfg);
    m.stage_done("ingest");
    auto summary = [](const ActivityPanel& p) {
        Json j;
        j["layer"] = std::string(to_string(p.layer));
        j["countries"] = p.country_ids.size();
        j["activities"] = p.activity_ids.size();
        j["years"] = p.years;
        return j;
    };
    Json j;
    j["technology"] = summary(panels.tech);
    j["product"] = summary(panels.product);
    const auto common = common_countries(panels.tech.country_ids, panels.product.country_ids);
    j["common_countries"] = common.size();
    j["common_country_ids"] = common;
    m.write("ingest.json", [&](std::ostream& o) { o << j.dump(2) << '\n'; });
}

void cmd_rca(const RunConfig& cfg, Manifest& m) {
    const auto panels = load_panels(cfg);
    m.stage_done("ingest");
    std::set<std::pair<int, int>> tech_years, prod_years;
    for (const auto& p : all_pairs(cfg)) {
        tech_years.insert({cfg.delta, p.tech_end_year});
        prod_years.insert({cfg.delta, p.product_end_year});
    }
    auto dump = [&](const ActivityPanel& panel, const std::set<std::pair<int, int>>& windows, const char* name) {
        for (const auto& [delta, year] : windows) {
            const auto w = run_stage("rca", [&] { return specialize(panel, delta, year, cfg.rca_threshold); });
            const auto tag = std::string(name) + "_" + std::to_string(delta) + "_" + std::to_string(year) + ".csv";
            m.write("rca/" + tag, [&](std::ostream& o) { write_rca_csv(o, w.rca); });
            m.write("binary/" + tag, [&](std::ostream& o) { write_binary_csv(o, w.binary); });
        }
    };
    dump(panels.tech, tech_years, "tech");
    dump(panels.product, prod_years, "product");
    m.stage_done("rca");
}

void cmd_assist(const RunConfig& cfg, Manifest& m) {
    const auto panels = load_panels(cfg);
    m.stage_done("ingest");
    for (const auto& p : all_pairs(cfg)) {
        const auto a = run_stage("assist", [&] {
            const auto t = specialize(panels.tech, cfg.delta, p.tech_end_year, cfg.rca_threshold).binary;
            const auto q = specialize(panels.product, cfg.delta, p.product_end_year, cfg.rca_threshold).binary;
            const auto aligned = align_countries(t, q);
            return compute_assist(aligned.tech, aligned.product);
        });
        m.write("assist/assist_" + pair_tag(p) + ".csv", [&](std::ostream& o) { write_assist_csv(o, a); });
    }
    m.stage_done("assist");
}

void write_lag(Manifest& m, const LagResult& lag, const SectionTable& sections, const std::string& suffix) {
    for (const auto& p : lag.pairs) {
        const auto tag = pair_tag(p.pair);
        m.write("pairs/validation_" + tag + ".csv", [&](std::ostream& o) { write_validation_csv(o, p.validation); });
        m.write("models/tech_" + tag + ".model", [&](std::ostream& o) { write_model(o, p.tech_model); });
        m.write("models/product_" + tag + ".model", [&](std::ostream& o) { write_model(o, p.product_model); });
    }
    m.write("edges" + suffix + ".csv", [&](std::ostream& o) { write_edge_csv(o, lag.network); });
    m.write("network" + suffix + ".graphml", [&](std::ostream& o) { write_graphml(o, lag.network, sections); });
}

void cmd_validate(const RunConfig& cfg, Manifest& m) {
    const auto panels = load_panels(cfg);
    m.stage_done("ingest");
    const auto settings = PairSettings::from(cfg);
    const ArtifactCache cache = cfg.cache.empty() ? ArtifactCache() : ArtifactCache(cfg.cache);
    const auto sections = sections_for(cfg);
    const auto main = run_lag(panels, cfg.lag, cfg.pairs, settings, cfg.tier, cache);
    write_lag(m, main, sections, "");
    if (cfg.compare_lag) {
        const auto cmp = run_lag(panels, *cfg.compare_lag, cfg.compare_pairs, settings, cfg.tier, cache);
        write_lag(m, cmp, sections, "_lag" + std::to_string(cmp.lag));
    }
    m.stage_done("validate");
}

void cmd_efc(const RunConfig& cfg, Manifest& m) {
    const auto panels = load_panels(cfg);
    m.stage_done("ingest");
    const auto r = run_rankings(panels, cfg);
    m.write("tech_ranks.csv", [&](std::ostream& o) { write_rank_csv(o, r.tech); });
    m.write("product_ranks.csv", [&](std::ostream& o) { write_rank_csv(o, r.product); });
    m.stage_done("efc");
}

void cmd_report(const RunConfig& cfg, Manifest& m) {
    const auto panels = load_panels(cfg);
    m.stage_done("ingest");
    const auto r = run_pipeline(cfg, panels);
    m.stage_done("pipeline");
    write_pipeline_outputs(m, cfg, r);
    m.stage_done("report");
}

void cmd_robustness(const RunConfig& cfg, Manifest& m) {
    const auto panels = load_panels(cfg);
    m.stage_done("ingest");
    const ArtifactCache cache = cfg.cache.empty() ? ArtifactCache() : ArtifactCache(cfg.cache);
    const auto bench = run_lag(panels, cfg.lag, cfg.pairs, PairSettings::from(cfg), cfg.tier, cache);
    m.write("benchmark_edges.csv", [&](std::ostream& o) { write_edge_csv(o, bench.network); });
    m.stage_done("benchmark");
    const auto rep = run_robustness(cfg, panels, bench.network, cfg.robustness_deltas);
    m.write("robustness.json", [&](std::ostream& o) { o << robustness_json(rep).dump(2) << '\n'; });
    m.stage_done("robustness");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Validated green technology -> product networks"};
    app.require_subcommand(1);

    using Handler = void (*)(const RunConfig&, Manifest&);
    struct Command {
        const char* name;
        const char* help;
        Handler run;
        Overrides options;
        CLI::App* app = nullptr;
    };
    std::vector<Command> commands = {
        {"ingest", "load both panels and summarise their axes", cmd_ingest, {}},
        {"rca", "write RCA and specialization matrices for every configured window", cmd_rca, {}},
        {"assist", "write empirical assist matrices for every period pair", cmd_assist, {}},
        {"validate", "fit null models, count exceedances and write the validated networks", cmd_validate, {}},
        {"efc", "write fitness-complexity rankings", cmd_efc, {}},
        {"report", "run the full pipeline and write every output", cmd_report, {}},
        {"robustness", "re-validate over alternative windows and report benchmark overlap", cmd_robustness, {}},
    };
    for (auto& c : commands) {
        c.app = app.add_subcommand(c.name, c.help);
        add_common(c.app, c.options);
    }

    CLI11_PARSE(app, argc, argv);

    for (auto& c : commands) {
        if (!c.app->parsed()) continue;
        std::optional<Manifest> manifest;
        try {
            const auto cfg = resolve_config(c.options);
            manifest.emplace(fs::path(cfg.out), c.name);
            c.run(cfg, *manifest);
            manifest->complete();
        } catch (const std::exception& e) {
            if (manifest) manifest->fail(e.what());
            std::cerr << "greenlink " << c.name << ": " << e.what() << '\n';
            return 2;
        }
    }
    return 0;
}
