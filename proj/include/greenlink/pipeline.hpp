#pragma once

#include <algorithm>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "greenlink/assist.hpp"
#include "greenlink/cache.hpp"
#include "greenlink/common.hpp"
#include "greenlink/config.hpp"
#include "greenlink/efc.hpp"
#include "greenlink/nullmodel.hpp"
#include "greenlink/panel.hpp"
#include "greenlink/rca.hpp"
#include "greenlink/sections.hpp"
#include "greenlink/validate.hpp"

namespace greenlink {

// Error raised by a pipeline stage; what() is prefixed with the stage name.
class StageError : public Error {
public:
    StageError(std::string stage, const std::string& message)
        : Error("[" + stage + "] " + message), stage_(std::move(stage)) {}
    const std::string& stage() const { return stage_; }

private:
    std::string stage_;
};

template <typename F>
auto run_stage(const std::string& stage, F&& f) -> decltype(f()) {
    try {
        return f();
    } catch (const StageError&) {
        throw;
    } catch (const std::exception& e) {
        throw StageError(stage, e.what());
    }
}

struct Panels {
    ActivityPanel tech;
    ActivityPanel product;
    std::uint64_t tech_fingerprint = 0;
    std::uint64_t product_fingerprint = 0;
};

inline std::uint64_t panel_fingerprint(const ActivityPanel& p) {
    Fingerprint fp;
    fp.add(static_cast<int>(p.layer)).add(p.country_ids).add(p.activity_ids);
    fp.add(std::span<const int>(p.years));
    for (const auto& m : p.values) fp.add(m.data());
    return fp.value();
}

inline Panels make_panels(ActivityPanel tech, ActivityPanel product, int digits) {
    Panels panels;
    panels.tech = std::move(tech);
    panels.product = digits > 0 ? truncate_activity_codes(product, static_cast<std::size_t>(digits))
                                : std::move(product);
    panels.tech_fingerprint = panel_fingerprint(panels.tech);
    panels.product_fingerprint = panel_fingerprint(panels.product);
    return panels;
}

inline Panels load_panels(const RunConfig& cfg) {
    return run_stage("ingest", [&] {
        auto tech = load_panel_file(cfg.tech_panel, Layer::technology);
        auto product = load_panel_file(cfg.product_panel, Layer::product);
        return make_panels(std::move(tech), std::move(product), cfg.digits);
    });
}

struct LayerWindow {
    RcaMatrix rca;
    BinaryMatrix binary;
};

// Window -> RCA -> specialization matrix on the layer's full country set.
inline LayerWindow specialize(const ActivityPanel& panel, int delta, int end_year, double threshold) {
    LayerWindow out;
    out.rca = compute_rca(aggregate_window(panel, delta, end_year));
    out.binary = binarize(out.rca, threshold);
    return out;
}

struct PairResult {
    PeriodPair pair;
    std::uint64_t seed = 0;
    BinaryMatrix tech;     // aligned to common countries
    BinaryMatrix product;  // aligned to common countries
    AssistMatrix assist;
    BicmModel tech_model;
    BicmModel product_model;
    PairValidation validation;
};

// Seed of one period pair: depends on the run seed, the pair and the window
// length only, so a pair gets the same draws whichever run it appears in.
inline std::uint64_t pair_seed(std::uint64_t seed, const PeriodPair& pair, int delta) {
    Fingerprint fp;
    fp.add(pair.tech_end_year).add(pair.product_end_year).add(delta);
    return mix_seed(seed, fp.value());
}

struct PairSettings {
    int delta = 5;
    std::size_t samples = 10000;
    std::uint64_t seed = 1;
    double rca_threshold = 1.0;
    unsigned threads = 1;
    BicmOptions bicm;

    static PairSettings from(const RunConfig& cfg) {
        return {cfg.delta, cfg.samples, cfg.seed, cfg.rca_threshold, cfg.threads,
                {cfg.bicm_tolerance, cfg.bicm_max_iterations}};
    }
};

inline BinaryMatrix cached_binary(const ArtifactCache& cache, const ActivityPanel& panel,
                                  std::uint64_t panel_fp, int delta, int end_year, double threshold) {
    Fingerprint fp;
    fp.add(panel_fp).add(delta).add(end_year).add(threshold);
    const auto key = "m-" + fp.hex();
    const WindowInfo window{panel.layer, delta, end_year};
    if (auto hit = cache.load_binary(key, window)) return *hit;
    auto m = specialize(panel, delta, end_year, threshold).binary;
    cache.store_binary(key, m);
    return m;
}

inline std::string binary_key(const BinaryMatrix& m, const BicmOptions& opt) {
    Fingerprint fp;
    fp.add(m.country_ids).add(m.activity_ids).add(m.values.data());
    fp.add(opt.tolerance).add(opt.max_iterations);
    return "b-" + fp.hex();
}

inline BicmModel cached_model(const ArtifactCache& cache, const BinaryMatrix& m, const BicmOptions& opt) {
    const auto key = binary_key(m, opt);
    if (auto hit = cache.load_model(key)) {
        hit->window = m.window;
        return *hit;
    }
    auto model = fit_bicm(m, opt);
    cache.store_model(key, model);
    return model;
}

// Full single-pair validation: aggregate -> RCA -> binarize -> align ->
// assist -> null models -> null ensemble -> exceedance counts.
inline PairResult run_pair(const Panels& panels, const PeriodPair& pair, const PairSettings& s,
                           const ArtifactCache& cache = {}) {
    PairResult r;
    r.pair = pair;
    r.seed = pair_seed(s.seed, pair, s.delta);
    const auto tag = " (pair " + std::to_string(pair.tech_end_year) + ":" + std::to_string(pair.product_end_year) + ")";

    const auto full = run_stage("rca" + tag, [&] {
        return std::pair{
            cached_binary(cache, panels.tech, panels.tech_fingerprint, s.delta, pair.tech_end_year, s.rca_threshold),
            cached_binary(cache, panels.product, panels.product_fingerprint, s.delta, pair.product_end_year,
                          s.rca_threshold)};
    });
    run_stage("assist" + tag, [&] {
        auto aligned = align_countries(full.first, full.second);
        r.tech = std::move(aligned.tech);
        r.product = std::move(aligned.product);
        r.assist = compute_assist(r.tech, r.product);
    });
    run_stage("nullmodel" + tag, [&] {
        r.tech_model = cached_model(cache, r.tech, s.bicm);
        r.product_model = cached_model(cache, r.product, s.bicm);
    });
    run_stage("validate" + tag, [&] {
        Fingerprint fp;
        fp.add(r.tech_model.fingerprint()).add(r.product_model.fingerprint());
        fp.add(static_cast<std::uint64_t>(s.samples)).add(r.seed).add(r.assist.values.data());
        const auto key = "v-" + fp.hex();
        if (auto counts = cache.load_counts(key)) {
            r.validation = detail::make_pair_validation(r.assist, std::move(*counts), s.samples);
            return;
        }
        const auto nulls = null_assist_ensemble(r.tech_model, r.product_model, s.samples, r.seed);
        r.validation = compute_pvalues(r.assist, nulls, s.threads);
        cache.store_counts(key, r.validation.exceed);
    });
    return r;
}

struct LagResult {
    int lag = 0;
    std::vector<PairResult> pairs;
    ValidatedNetwork network;
};

inline LagResult run_lag(const Panels& panels, int lag, const std::vector<PeriodPair>& pairs,
                         const PairSettings& s, Tier tier, const ArtifactCache& cache = {}) {
    LagResult out;
    out.lag = lag;
    std::vector<PairValidation> validations;
    for (const auto& p : pairs) {
        out.pairs.push_back(run_pair(panels, p, s, cache));
        validations.push_back(out.pairs.back().validation);
    }
    out.network = run_stage("intersect", [&] { return intersect_pairs(validations, tier); });
    out.network.lag = lag;
    return out;
}

struct Rankings {
    FitnessComplexity tech;
    FitnessComplexity product;
    int end_year = 0;
};

// Complexity rankings from the most recent configured window of each layer.
inline Rankings run_rankings(const Panels& panels, const RunConfig& cfg) {
    return run_stage("efc", [&] {
        int year = 0;
        for (const auto& p : cfg.pairs) year = std::max(year, p.product_end_year);
        for (const auto& p : cfg.compare_pairs) year = std::max(year, p.product_end_year);
        if (cfg.efc_year) year = *cfg.efc_year;
        const EfcOptions opt{cfg.efc_max_iterations, cfg.efc_stability_window};
        Rankings r;
        r.end_year = year;
        r.tech = rank_efc(specialize(panels.tech, cfg.delta, year, cfg.rca_threshold).binary, opt);
        r.product = rank_efc(specialize(panels.product, cfg.delta, year, cfg.rca_threshold).binary, opt);
        return r;
    });
}

struct PipelineResult {
    LagResult main;
    std::optional<LagResult> comparison;
    Rankings rankings;
    std::optional<CumulativeCurve> tech_curve;
    std::optional<CumulativeCurve> product_curve;
    DegreeReport degrees;
};

inline SectionTable sections_for(const RunConfig& cfg) {
    return cfg.sections.empty() ? default_hs_sections() : read_sections_file(cfg.sections);
}

inline PipelineResult run_pipeline(const RunConfig& cfg, const Panels& panels) {
    const auto settings = PairSettings::from(cfg);
    const ArtifactCache cache = cfg.cache.empty() ? ArtifactCache() : ArtifactCache(cfg.cache);

    PipelineResult r;
    r.main = run_lag(panels, cfg.lag, cfg.pairs, settings, cfg.tier, cache);
    if (cfg.compare_lag) r.comparison = run_lag(panels, *cfg.compare_lag, cfg.compare_pairs, settings, cfg.tier, cache);
    r.rankings = run_rankings(panels, cfg);
    if (r.comparison) {
        run_stage("curves", [&] {
            const bool main_first = cfg.lag <= *cfg.compare_lag;
            const auto& earlier = main_first ? r.main.network : r.comparison->network;
            const auto& later = main_first ? r.comparison->network : r.main.network;
            r.tech_curve = cumulative_link_difference(earlier, later, r.rankings.tech, Layer::technology);
            r.product_curve = cumulative_link_difference(earlier, later, r.rankings.product, Layer::product);
        });
    }
    r.degrees = run_stage("report", [&] { return degree_report(r.main.network, sections_for(cfg)); });
    return r;
}

inline PipelineResult run_pipeline(const RunConfig& cfg) { return run_pipeline(cfg, load_panels(cfg)); }

struct RobustnessEntry {
    int delta = 0;
    int end_year = 0;
    std::size_t edges = 0;
    std::size_t edges_lax = 0;
    std::size_t recovered = 0;
    std::size_t recovered_lax = 0;
    double overlap = 0.0;
    double overlap_lax = 0.0;
};

struct RobustnessReport {
    Tier tier = Tier::p95;
    Tier lax_tier = Tier::p90;
    std::size_t benchmark_edges = 0;
    int first_year = 0;
    int last_year = 0;
    std::vector<RobustnessEntry> entries;
    std::map<int, double> mean_overlap;
    std::map<int, double> mean_overlap_lax;
    std::map<int, std::size_t> windows_per_delta;
    std::vector<std::string> notes;
};

inline Tier laxer_tier(Tier t) {
    switch (t) {
        case Tier::p999: return Tier::p99;
        case Tier::p99: return Tier::p95;
        default: return Tier::p90;
    }
}

// Every (delta, end_year) whose window lies inside [first, last].
inline std::vector<std::pair<int, int>> enumerate_windows(const std::vector<int>& deltas, int first, int last) {
    std::vector<std::pair<int, int>> out;
    for (int d : deltas)
        for (int t = first + d - 1; t <= last; ++t) out.emplace_back(d, t);
    return out;
}

namespace detail {

inline std::pair<int, int> common_year_span(const Panels& panels, int lag) {
    // product end years t such that year t - lag is also covered by the tech panel
    int first = std::numeric_limits<int>::max(), last = std::numeric_limits<int>::min();
    for (int y : panels.product.years) {
        if (!panels.tech.has_year(y - lag)) continue;
        first = std::min(first, y);
        last = std::max(last, y);
    }
    if (first > last) throw Error("robustness: technology and product panels share no years at this lag");
    return {first, last};
}

}  // namespace detail

// Re-runs single-pair validation for every window of the requested lengths
// and measures how many benchmark edges each one recovers.
inline RobustnessReport run_robustness(const RunConfig& cfg, const Panels& panels, const ValidatedNetwork& benchmark,
                                       const std::vector<int>& deltas) {
    return run_stage("robustness", [&] {
        RobustnessReport rep;
        rep.tier = benchmark.tier;
        rep.lax_tier = laxer_tier(benchmark.tier);
        rep.benchmark_edges = benchmark.edges.size();
        const auto span = cfg.robustness_years ? *cfg.robustness_years : detail::common_year_span(panels, cfg.lag);
        rep.first_year = span.first;
        rep.last_year = span.second;

        const auto keys = benchmark.edge_keys();
        const ArtifactCache cache = cfg.cache.empty() ? ArtifactCache() : ArtifactCache(cfg.cache);
        std::map<int, std::vector<double>> overlaps, overlaps_lax;
        for (const auto& [delta, end_year] : enumerate_windows(deltas, span.first, span.second)) {
            auto s = PairSettings::from(cfg);
            s.delta = delta;
            const PeriodPair pair{end_year - cfg.lag, end_year};
            const auto pr = run_pair(panels, pair, s, cache);
            if (pr.validation.tech_ids != benchmark.tech_ids || pr.validation.product_ids != benchmark.product_ids)
                throw Error("robustness: benchmark axes differ from the configuration axes");
            const std::vector<PairValidation> single{pr.validation};
            const auto net = intersect_pairs(single, rep.tier);
            const auto lax = intersect_pairs(single, rep.lax_tier);

            RobustnessEntry e{delta, end_year, net.edges.size(), lax.edges.size(), 0, 0, 1.0, 1.0};
            for (const auto& k : net.edge_keys()) e.recovered += keys.contains(k);
            for (const auto& k : lax.edge_keys()) e.recovered_lax += keys.contains(k);
            if (!keys.empty()) {
                e.overlap = static_cast<double>(e.recovered) / static_cast<double>(keys.size());
                e.overlap_lax = static_cast<double>(e.recovered_lax) / static_cast<double>(keys.size());
            }
            rep.entries.push_back(e);
            overlaps[delta].push_back(e.overlap);
            overlaps_lax[delta].push_back(e.overlap_lax);
            ++rep.windows_per_delta[delta];
        }
        auto mean = [](const std::vector<double>& v) {
            double s = 0.0;
            for (double x : v) s += x;
            return v.empty() ? 0.0 : s / static_cast<double>(v.size());
        };
        for (const auto& [d, v] : overlaps) rep.mean_overlap[d] = mean(v);
        for (const auto& [d, v] : overlaps_lax) rep.mean_overlap_lax[d] = mean(v);

        if (keys.empty()) rep.notes.push_back("benchmark network has no edges; overlaps reported as 1");
        const auto full = detail::common_year_span(panels, cfg.lag);
        for (int d : deltas) {
            const auto in_span = rep.windows_per_delta.contains(d) ? rep.windows_per_delta.at(d) : 0;
            const auto in_panel = enumerate_windows({d}, full.first, full.second).size();
            if (in_span != in_panel)
                rep.notes.push_back("delta " + std::to_string(d) + ": " + std::to_string(in_span) + " windows in " +
                                    std::to_string(span.first) + "-" + std::to_string(span.second) + ", " +
                                    std::to_string(in_panel) + " fit the full panel overlap " +
                                    std::to_string(full.first) + "-" + std::to_string(full.second));
        }
        return rep;
    });
}

}  // namespace greenlink
