#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "greenlink/assist.hpp"
#include "greenlink/common.hpp"
#include "greenlink/matrix.hpp"
#include "greenlink/nullmodel.hpp"
#include "greenlink/sections.hpp"

namespace greenlink {

// Confidence levels in per mille. A link passes a tier when its empirical
// weight beats the null weight in at least ceil(level * N) draws.
enum class Tier : int { p90 = 900, p95 = 950, p99 = 990, p999 = 999 };

inline constexpr std::array<Tier, 3> kReportedTiers = {Tier::p95, Tier::p99, Tier::p999};

inline std::string tier_label(Tier t) {
    switch (t) {
        case Tier::p90: return "90";
        case Tier::p95: return "95";
        case Tier::p99: return "99";
        case Tier::p999: return "99.9";
    }
    return "?";
}

inline Tier parse_tier(std::string_view text) {
    const auto s = trim(text);
    if (s == "90" || s == "90%" || s == "0.9") return Tier::p90;
    if (s == "95" || s == "95%" || s == "0.95") return Tier::p95;
    if (s == "99" || s == "99%" || s == "0.99") return Tier::p99;
    if (s == "99.9" || s == "99.9%" || s == "0.999") return Tier::p999;
    throw Error("unknown significance tier '" + std::string(s) + "' (use 90, 95, 99 or 99.9)");
}

// Integer threshold, never a floating fraction.
inline std::size_t required_count(Tier tier, std::size_t n_samples) {
    const auto level = static_cast<std::size_t>(tier);
    return (level * n_samples + 999) / 1000;
}

struct LinkValidation {
    std::string tech_id;
    std::string product_id;
    double empirical_weight = 0.0;
    std::size_t exceed_count = 0;
    std::size_t n_samples = 0;

    double exceed_fraction() const {
        return static_cast<double>(exceed_count) / static_cast<double>(n_samples);
    }
    // Fraction of null draws at least as large as the empirical weight.
    double p_value() const {
        return static_cast<double>(n_samples - exceed_count) / static_cast<double>(n_samples);
    }
    bool passes(Tier tier) const { return exceed_count >= required_count(tier, n_samples); }
    bool tier_95() const { return passes(Tier::p95); }
    bool tier_99() const { return passes(Tier::p99); }
    bool tier_999() const { return passes(Tier::p999); }

    std::optional<Tier> highest_tier() const {
        std::optional<Tier> best;
        for (auto t : kReportedTiers)
            if (passes(t)) best = t;
        return best;
    }
};

// Per-link comparison of one empirical assist matrix against its null draws.
struct PairValidation {
    std::vector<std::string> tech_ids;
    std::vector<std::string> product_ids;
    int t1 = 0;
    int t2 = 0;
    std::size_t n_samples = 0;
    Matrix<double> empirical;
    Matrix<std::uint32_t> exceed;

    LinkValidation link(std::size_t t, std::size_t p) const {
        return {tech_ids[t], product_ids[p], empirical(t, p), exceed(t, p), n_samples};
    }
    bool significant(std::size_t t, std::size_t p, Tier tier) const {
        return exceed(t, p) >= required_count(tier, n_samples);
    }
    std::size_t count_significant(Tier tier) const {
        const auto need = required_count(tier, n_samples);
        std::size_t n = 0;
        for (auto v : exceed.data()) n += v >= need;
        return n;
    }
};

// Accumulates strict exceedances (empirical > null); ties count against.
class ExceedanceCounter {
public:
    explicit ExceedanceCounter(const Matrix<double>& empirical)
        : empirical_(&empirical), counts_(empirical.rows(), empirical.cols(), 0) {}

    void add(const Matrix<double>& null) {
        if (!null.same_shape(*empirical_)) throw Error("null assist matrix has a different shape");
        const auto e = empirical_->data();
        const auto n = null.data();
        auto c = counts_.data();
        for (std::size_t k = 0; k < e.size(); ++k) c[k] += e[k] > n[k];
        ++draws_;
    }

    void merge(const ExceedanceCounter& other) {
        counts_ += other.counts_;
        draws_ += other.draws_;
    }

    std::size_t draws() const { return draws_; }
    const Matrix<std::uint32_t>& counts() const { return counts_; }

private:
    const Matrix<double>* empirical_;
    Matrix<std::uint32_t> counts_;
    std::size_t draws_ = 0;
};

namespace detail {

inline PairValidation make_pair_validation(const AssistMatrix& empirical, Matrix<std::uint32_t> counts,
                                           std::size_t n) {
    PairValidation v;
    v.tech_ids = empirical.tech_ids;
    v.product_ids = empirical.product_ids;
    v.t1 = empirical.t1;
    v.t2 = empirical.t2;
    v.n_samples = n;
    v.empirical = empirical.values;
    v.exceed = std::move(counts);
    return v;
}

}  // namespace detail

// Generic form: any range of AssistMatrix null draws.
template <typename Range>
    requires std::ranges::input_range<Range> &&
             std::same_as<std::remove_cvref_t<std::ranges::range_reference_t<Range>>, AssistMatrix>
PairValidation compute_pvalues(const AssistMatrix& empirical, Range&& nulls) {
    ExceedanceCounter counter(empirical.values);
    for (const AssistMatrix& null : nulls) {
        if (null.tech_ids != empirical.tech_ids || null.product_ids != empirical.product_ids)
            throw Error("p-values: null assist matrix axes differ from the empirical one");
        counter.add(null.values);
    }
    if (counter.draws() == 0) throw Error("p-values need at least one null draw");
    return detail::make_pair_validation(empirical, counter.counts(), counter.draws());
}

// Streaming form: draws are generated, contracted and counted without being
// stored. Sample indices are split across `threads` workers; integer counts
// make the result independent of the split.
inline PairValidation compute_pvalues(const AssistMatrix& empirical, const NullAssistStream& nulls,
                                      unsigned threads = 1) {
    const std::size_t n = nulls.size();
    {
        const auto probe = nulls.draw(0);
        if (probe.tech_ids != empirical.tech_ids || probe.product_ids != empirical.product_ids)
            throw Error("p-values: null model axes differ from the empirical assist matrix");
    }
    threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(n)));
    std::vector<ExceedanceCounter> counters(threads, ExceedanceCounter(empirical.values));
    auto work = [&](unsigned w) {
        NullAssistStream::Workspace ws;
        for (std::size_t i = w; i < n; i += threads) {
            nulls.draw_into(i, ws);
            counters[w].add(ws.assist);
        }
    };
    if (threads == 1) {
        work(0);
    } else {
        std::vector<std::jthread> pool;
        for (unsigned w = 0; w < threads; ++w) pool.emplace_back(work, w);
    }
    for (unsigned w = 1; w < threads; ++w) counters[0].merge(counters[w]);
    return detail::make_pair_validation(empirical, counters[0].counts(), n);
}

struct PeriodPair {
    int tech_end_year = 0;
    int product_end_year = 0;

    int lag() const { return product_end_year - tech_end_year; }
    friend bool operator==(const PeriodPair&, const PeriodPair&) = default;
    friend auto operator<=>(const PeriodPair&, const PeriodPair&) = default;
};

struct NetworkEdge {
    std::size_t tech = 0;
    std::size_t product = 0;
    std::vector<LinkValidation> per_pair;

    double weight() const {
        double s = 0.0;
        for (const auto& l : per_pair) s += l.empirical_weight;
        return s / static_cast<double>(per_pair.size());
    }
    // Largest p-value across pairs.
    double p_value() const {
        double p = 0.0;
        for (const auto& l : per_pair) p = std::max(p, l.p_value());
        return p;
    }
    // Highest reported tier passed in every pair.
    std::optional<Tier> tier() const {
        std::optional<Tier> best;
        for (auto t : kReportedTiers) {
            if (std::all_of(per_pair.begin(), per_pair.end(), [t](const auto& l) { return l.passes(t); }))
                best = t;
        }
        return best;
    }
};

// Directed technology -> product network of links significant in every
// constituent period pair.
struct ValidatedNetwork {
    int lag = 0;
    Tier tier = Tier::p95;
    std::vector<PeriodPair> pairs;
    std::vector<std::string> tech_ids;
    std::vector<std::string> product_ids;
    std::vector<NetworkEdge> edges;

    std::vector<int> tech_degree() const {
        std::vector<int> d(tech_ids.size(), 0);
        for (const auto& e : edges) ++d[e.tech];
        return d;
    }
    std::vector<int> product_degree() const {
        std::vector<int> d(product_ids.size(), 0);
        for (const auto& e : edges) ++d[e.product];
        return d;
    }
    bool contains(std::size_t t, std::size_t p) const {
        return std::any_of(edges.begin(), edges.end(),
                           [&](const auto& e) { return e.tech == t && e.product == p; });
    }
    std::set<std::pair<std::string, std::string>> edge_keys() const {
        std::set<std::pair<std::string, std::string>> keys;
        for (const auto& e : edges) keys.emplace(tech_ids[e.tech], product_ids[e.product]);
        return keys;
    }
};

inline ValidatedNetwork intersect_pairs(std::span<const PairValidation> validations, Tier tier) {
    if (validations.empty()) throw Error("intersection needs at least one period pair");
    const auto& first = validations.front();
    for (const auto& v : validations) {
        if (v.tech_ids != first.tech_ids || v.product_ids != first.product_ids)
            throw Error("intersection: period pairs have different technology or product axes");
    }

    ValidatedNetwork net;
    net.tier = tier;
    net.lag = first.t2 - first.t1;
    net.tech_ids = first.tech_ids;
    net.product_ids = first.product_ids;
    for (const auto& v : validations) net.pairs.push_back({v.t1, v.t2});

    for (std::size_t t = 0; t < first.tech_ids.size(); ++t) {
        for (std::size_t p = 0; p < first.product_ids.size(); ++p) {
            const bool all = std::all_of(validations.begin(), validations.end(),
                                         [&](const auto& v) { return v.significant(t, p, tier); });
            if (!all) continue;
            NetworkEdge e{t, p, {}};
            for (const auto& v : validations) e.per_pair.push_back(v.link(t, p));
            net.edges.push_back(std::move(e));
        }
    }
    return net;
}

inline ValidatedNetwork intersect_pairs(const std::vector<PairValidation>& validations, Tier tier) {
    return intersect_pairs(std::span<const PairValidation>(validations), tier);
}

struct DegreeRow {
    std::string group;
    std::string members;  // chapter range for product sections
    std::size_t activities = 0;
    std::size_t nodes = 0;
    std::size_t edges = 0;
    double node_share = 0.0;  // percent of total nodes
    double edge_share = 0.0;  // percent of total edges
    bool flagged = false;     // unmapped chapters
};

struct DegreeReport {
    std::vector<DegreeRow> product_sections;
    std::vector<DegreeRow> tech_subclasses;
    std::size_t total_products = 0;
    std::size_t total_product_nodes = 0;
    std::size_t total_tech_nodes = 0;
    std::size_t total_edges = 0;
};

namespace detail {

inline void fill_shares(std::vector<DegreeRow>& rows, std::size_t nodes, std::size_t edges) {
    for (auto& r : rows) {
        r.node_share = nodes ? 100.0 * static_cast<double>(r.nodes) / static_cast<double>(nodes) : 0.0;
        r.edge_share = edges ? 100.0 * static_cast<double>(r.edges) / static_cast<double>(edges) : 0.0;
    }
}

}  // namespace detail

// Node and edge counts per product section and per technology subclass (the
// first four characters of the technology code, e.g. "Y02A").
inline DegreeReport degree_report(const ValidatedNetwork& net, const SectionTable& sections) {
    DegreeReport rep;
    const auto pdeg = net.product_degree();
    const auto tdeg = net.tech_degree();
    rep.total_edges = net.edges.size();
    rep.total_products = net.product_ids.size();

    for (const auto& s : sections.sections)
        rep.product_sections.push_back({s.name, s.chapters_label(), 0, 0, 0, 0.0, 0.0, false});
    DegreeRow unclassified{"unclassified", "", 0, 0, 0, 0.0, 0.0, true};
    for (std::size_t p = 0; p < net.product_ids.size(); ++p) {
        const auto s = sections.section_of_product(net.product_ids[p]);
        auto& row = s ? rep.product_sections[*s] : unclassified;
        ++row.activities;
        if (pdeg[p] > 0) {
            ++row.nodes;
            ++rep.total_product_nodes;
        }
        row.edges += static_cast<std::size_t>(pdeg[p]);
    }
    if (unclassified.activities > 0) rep.product_sections.push_back(unclassified);
    detail::fill_shares(rep.product_sections, rep.total_product_nodes, rep.total_edges);

    std::vector<std::string> groups;
    for (const auto& id : net.tech_ids) groups.push_back(id.substr(0, 4));
    auto uniq = groups;
    std::sort(uniq.begin(), uniq.end());
    uniq.erase(std::unique(uniq.begin(), uniq.end()), uniq.end());
    for (const auto& g : uniq) rep.tech_subclasses.push_back({g, "", 0, 0, 0, 0.0, 0.0, false});
    for (std::size_t t = 0; t < net.tech_ids.size(); ++t) {
        const auto i = static_cast<std::size_t>(std::lower_bound(uniq.begin(), uniq.end(), groups[t]) - uniq.begin());
        auto& row = rep.tech_subclasses[i];
        ++row.activities;
        if (tdeg[t] > 0) {
            ++row.nodes;
            ++rep.total_tech_nodes;
        }
        row.edges += static_cast<std::size_t>(tdeg[t]);
    }
    detail::fill_shares(rep.tech_subclasses, rep.total_tech_nodes, rep.total_edges);
    return rep;
}

struct ProfileEntry {
    std::string tech_id;
    std::vector<double> exceed_fraction;  // one per period pair
    std::optional<Tier> highest_tier;     // passed in every pair
};

// All technologies for one product with their exceedance fractions: the data
// behind a radial significance plot.
inline std::vector<ProfileEntry> significance_profile(const std::string& product_id,
                                                      std::span<const PairValidation> validations) {
    if (validations.empty()) throw Error("significance profile needs at least one period pair");
    const auto& ids = validations.front().product_ids;
    const auto it = std::find(ids.begin(), ids.end(), product_id);
    if (it == ids.end()) throw Error("unknown product '" + product_id + "'");
    const auto p = static_cast<std::size_t>(it - ids.begin());

    std::vector<ProfileEntry> out;
    for (std::size_t t = 0; t < validations.front().tech_ids.size(); ++t) {
        ProfileEntry e{validations.front().tech_ids[t], {}, std::nullopt};
        NetworkEdge edge{t, p, {}};
        for (const auto& v : validations) {
            if (v.product_ids != ids) throw Error("significance profile: period pairs have different axes");
            edge.per_pair.push_back(v.link(t, p));
            e.exceed_fraction.push_back(edge.per_pair.back().exceed_fraction());
        }
        e.highest_tier = edge.tier();
        out.push_back(std::move(e));
    }
    return out;
}

}  // namespace greenlink
