#pragma once

#include <fstream>
#include <istream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "greenlink/common.hpp"
#include "greenlink/validate.hpp"

namespace greenlink {

// Run configuration. File format is one `key = value` per line; `#` starts a
// comment. Recognised keys:
//
//   tech_panel          path to the technology panel CSV (required)
//   product_panel       path to the product panel CSV (required)
//   delta               window length in years                   [5]
//   lag                 t2 - t1 of the main network               [0]
//   pairs               tech:product end years, comma separated   [by lag]
//   compare_lag         second lag for the cumulative curves      [none]
//   compare_pairs       pairs for compare_lag                     [by lag]
//   samples             null draws per pair                       [10000]
//   seed                RNG seed                                  [1]
//   tier                90 | 95 | 99 | 99.9                       [95]
//   digits              product code length (0 keeps codes)       [0]
//   rca_threshold       specialization cut                        [1]
//   out                 output directory                          [out]
//   sections            HS section CSV                            [built-in]
//   cache               artifact cache directory                  [none]
//   threads             worker threads for null sampling          [1]
//   efc_year            end year of the ranking windows           [latest t2]
//   efc_max_iterations                                            [5000]
//   efc_stability_window                                          [50]
//   robustness_deltas   window lengths for the robustness study   [3,4,10]
//   robustness_years    first:last product end-year span          [panel overlap]
//   bicm_tolerance                                                [1e-8]
//   bicm_max_iterations                                           [10000]
//
// Relative panel/section paths resolve against the config file's directory.
struct RunConfig {
    std::string tech_panel;
    std::string product_panel;
    int delta = 5;
    int lag = 0;
    std::vector<PeriodPair> pairs;
    std::optional<int> compare_lag;
    std::vector<PeriodPair> compare_pairs;
    std::size_t samples = 10000;
    std::uint64_t seed = 1;
    Tier tier = Tier::p95;
    int digits = 0;
    double rca_threshold = 1.0;
    std::string out = "out";
    std::string sections;
    std::string cache;
    unsigned threads = 1;
    std::optional<int> efc_year;
    int efc_max_iterations = 5000;
    int efc_stability_window = 50;
    std::vector<int> robustness_deltas{3, 4, 10};
    std::optional<std::pair<int, int>> robustness_years;
    double bicm_tolerance = 1e-8;
    int bicm_max_iterations = 10000;

    friend bool operator==(const RunConfig&, const RunConfig&) = default;
};

// Pairs used when a config names only the lag.
inline std::vector<PeriodPair> default_pairs(int lag) {
    if (lag == 0) return {{2012, 2012}, {2017, 2017}};
    if (lag == 10) return {{2002, 2012}, {2007, 2017}};
    throw Error("no default period pairs for lag " + std::to_string(lag) + "; list them under 'pairs'");
}

namespace detail {

inline std::vector<PeriodPair> parse_pairs(std::string_view text) {
    std::vector<PeriodPair> pairs;
    std::string item;
    std::istringstream in{std::string(text)};
    while (std::getline(in, item, ',')) {
        const auto s = trim(item);
        if (s.empty()) continue;
        const auto colon = s.find(':');
        if (colon == std::string_view::npos) throw Error("period pair '" + std::string(s) + "' must be tech:product");
        const auto a = parse_integer(trim(s.substr(0, colon)));
        const auto b = parse_integer(trim(s.substr(colon + 1)));
        if (!a || !b) throw Error("period pair '" + std::string(s) + "' must hold two years");
        pairs.push_back({static_cast<int>(*a), static_cast<int>(*b)});
    }
    return pairs;
}

inline std::string format_pairs(const std::vector<PeriodPair>& pairs) {
    std::string s;
    for (std::size_t i = 0; i < pairs.size(); ++i) {
        if (i) s += ", ";
        s += std::to_string(pairs[i].tech_end_year) + ":" + std::to_string(pairs[i].product_end_year);
    }
    return s;
}

inline long long require_int(const std::string& key, std::string_view v) {
    const auto n = parse_integer(trim(v));
    if (!n) throw Error("config key '" + key + "' needs an integer, got '" + std::string(v) + "'");
    return *n;
}

inline double require_double(const std::string& key, std::string_view v) {
    const auto n = parse_double(trim(v));
    if (!n) throw Error("config key '" + key + "' needs a number, got '" + std::string(v) + "'");
    return *n;
}

}  // namespace detail

// Checks invariants and fills default pairs. Throws on the first problem.
inline void finalize_config(RunConfig& cfg) {
    if (cfg.tech_panel.empty()) throw Error("config: 'tech_panel' is required");
    if (cfg.product_panel.empty()) throw Error("config: 'product_panel' is required");
    if (cfg.delta < 1) throw Error("config: delta must be at least 1");
    if (cfg.samples < 1) throw Error("config: samples must be at least 1");
    if (cfg.digits < 0) throw Error("config: digits must be nonnegative");
    if (!(cfg.rca_threshold > 0.0)) throw Error("config: rca_threshold must be positive");
    if (cfg.pairs.empty()) cfg.pairs = default_pairs(cfg.lag);
    if (cfg.compare_lag && cfg.compare_pairs.empty()) cfg.compare_pairs = default_pairs(*cfg.compare_lag);
    if (!cfg.compare_lag && !cfg.compare_pairs.empty()) throw Error("config: compare_pairs given without compare_lag");
    for (const auto& p : cfg.pairs)
        if (p.lag() != cfg.lag)
            throw Error("config: pair " + detail::format_pairs({p}) + " has lag " + std::to_string(p.lag()) +
                        ", expected " + std::to_string(cfg.lag));
    for (const auto& p : cfg.compare_pairs)
        if (p.lag() != *cfg.compare_lag)
            throw Error("config: compare pair " + detail::format_pairs({p}) + " has lag " +
                        std::to_string(p.lag()) + ", expected " + std::to_string(*cfg.compare_lag));
    for (int d : cfg.robustness_deltas)
        if (d < 1) throw Error("config: robustness deltas must be positive");
    if (cfg.efc_max_iterations < 1 || cfg.efc_stability_window < 1)
        throw Error("config: efc iteration limits must be positive");
    if (cfg.robustness_years && cfg.robustness_years->first > cfg.robustness_years->second)
        throw Error("config: robustness_years must be first:last");
}

inline RunConfig parse_config(std::istream& in, const std::string& base_dir = "") {
    RunConfig cfg;
    std::string line;
    std::size_t line_no = 0;
    auto resolve = [&](std::string_view p) {
        std::string path(p);
        if (!base_dir.empty() && !path.empty() && path.front() != '/') path = base_dir + "/" + path;
        return path;
    };
    while (std::getline(in, line)) {
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        if (trim(line).empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw Error("config line " + std::to_string(line_no) + ": expected key = value");
        const std::string key(trim(std::string_view(line).substr(0, eq)));
        const std::string_view value = trim(std::string_view(line).substr(eq + 1));
        if (key == "tech_panel") cfg.tech_panel = resolve(value);
        else if (key == "product_panel") cfg.product_panel = resolve(value);
        else if (key == "delta") cfg.delta = static_cast<int>(detail::require_int(key, value));
        else if (key == "lag") cfg.lag = static_cast<int>(detail::require_int(key, value));
        else if (key == "pairs") cfg.pairs = detail::parse_pairs(value);
        else if (key == "compare_lag") cfg.compare_lag = static_cast<int>(detail::require_int(key, value));
        else if (key == "compare_pairs") cfg.compare_pairs = detail::parse_pairs(value);
        else if (key == "samples") {
            const auto n = detail::require_int(key, value);
            if (n < 1) throw Error("config: samples must be at least 1");
            cfg.samples = static_cast<std::size_t>(n);
        }
        else if (key == "seed") cfg.seed = static_cast<std::uint64_t>(detail::require_int(key, value));
        else if (key == "tier") cfg.tier = parse_tier(value);
        else if (key == "digits") cfg.digits = static_cast<int>(detail::require_int(key, value));
        else if (key == "rca_threshold") cfg.rca_threshold = detail::require_double(key, value);
        else if (key == "out") cfg.out = std::string(value);
        else if (key == "sections") cfg.sections = resolve(value);
        else if (key == "cache") cfg.cache = std::string(value);
        else if (key == "threads") cfg.threads = static_cast<unsigned>(std::max(1LL, detail::require_int(key, value)));
        else if (key == "efc_year") cfg.efc_year = static_cast<int>(detail::require_int(key, value));
        else if (key == "efc_max_iterations") cfg.efc_max_iterations = static_cast<int>(detail::require_int(key, value));
        else if (key == "efc_stability_window") cfg.efc_stability_window = static_cast<int>(detail::require_int(key, value));
        else if (key == "robustness_deltas") {
            cfg.robustness_deltas.clear();
            std::istringstream ds{std::string(value)};
            std::string item;
            while (std::getline(ds, item, ','))
                if (!trim(item).empty()) cfg.robustness_deltas.push_back(static_cast<int>(detail::require_int(key, item)));
        }
        else if (key == "robustness_years") {
            const auto p = detail::parse_pairs(value);
            if (p.size() != 1) throw Error("config: robustness_years must be first:last");
            cfg.robustness_years = std::pair{p[0].tech_end_year, p[0].product_end_year};
        }
        else if (key == "bicm_tolerance") cfg.bicm_tolerance = detail::require_double(key, value);
        else if (key == "bicm_max_iterations") cfg.bicm_max_iterations = static_cast<int>(detail::require_int(key, value));
        else throw Error("config line " + std::to_string(line_no) + ": unknown key '" + key + "'");
    }
    finalize_config(cfg);
    return cfg;
}

inline RunConfig load_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open config file " + path);
    const auto slash = path.find_last_of('/');
    return parse_config(in, slash == std::string::npos ? "" : path.substr(0, slash));
}

// Writes every key explicitly, so parse(serialize(cfg)) == cfg.
inline std::string serialize_config(const RunConfig& cfg) {
    std::ostringstream out;
    out << "tech_panel = " << cfg.tech_panel << '\n';
    out << "product_panel = " << cfg.product_panel << '\n';
    out << "delta = " << cfg.delta << '\n';
    out << "lag = " << cfg.lag << '\n';
    out << "pairs = " << detail::format_pairs(cfg.pairs) << '\n';
    if (cfg.compare_lag) {
        out << "compare_lag = " << *cfg.compare_lag << '\n';
        out << "compare_pairs = " << detail::format_pairs(cfg.compare_pairs) << '\n';
    }
    out << "samples = " << cfg.samples << '\n';
    out << "seed = " << cfg.seed << '\n';
    out << "tier = " << tier_label(cfg.tier) << '\n';
    out << "digits = " << cfg.digits << '\n';
    out << "rca_threshold = " << format_double(cfg.rca_threshold) << '\n';
    out << "out = " << cfg.out << '\n';
    if (!cfg.sections.empty()) out << "sections = " << cfg.sections << '\n';
    if (!cfg.cache.empty()) out << "cache = " << cfg.cache << '\n';
    out << "threads = " << cfg.threads << '\n';
    if (cfg.efc_year) out << "efc_year = " << *cfg.efc_year << '\n';
    out << "efc_max_iterations = " << cfg.efc_max_iterations << '\n';
    out << "efc_stability_window = " << cfg.efc_stability_window << '\n';
    out << "robustness_deltas = ";
    for (std::size_t i = 0; i < cfg.robustness_deltas.size(); ++i)
        out << (i ? "," : "") << cfg.robustness_deltas[i];
    out << '\n';
    if (cfg.robustness_years)
        out << "robustness_years = " << cfg.robustness_years->first << ':' << cfg.robustness_years->second << '\n';
    out << "bicm_tolerance = " << format_double(cfg.bicm_tolerance) << '\n';
    out << "bicm_max_iterations = " << cfg.bicm_max_iterations << '\n';
    return out.str();
}

}  // namespace greenlink
