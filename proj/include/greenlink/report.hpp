#pragma once

#include <filesystem>
#include <fstream>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "greenlink/common.hpp"
#include "greenlink/config.hpp"
#include "greenlink/efc.hpp"
#include "greenlink/pipeline.hpp"
#include "greenlink/sections.hpp"
#include "greenlink/validate.hpp"

namespace greenlink {

using Json = nlohmann::ordered_json;

inline void write_edge_csv(std::ostream& out, const ValidatedNetwork& net) {
    out << "tech,product,weight,p_value,tier\n";
    for (const auto& e : net.edges) {
        const auto tier = e.tier();
        out << csv_escape(net.tech_ids[e.tech]) << ',' << csv_escape(net.product_ids[e.product]) << ','
            << format_double(e.weight()) << ',' << format_double(e.p_value()) << ','
            << (tier ? tier_label(*tier) : tier_label(net.tier)) << '\n';
    }
}

// Every link of one period pair, significant or not.
inline void write_validation_csv(std::ostream& out, const PairValidation& v) {
    out << "tech,product,weight,exceed_count,samples,p_value,tier\n";
    for (std::size_t t = 0; t < v.tech_ids.size(); ++t)
        for (std::size_t p = 0; p < v.product_ids.size(); ++p) {
            const auto l = v.link(t, p);
            const auto tier = l.highest_tier();
            out << csv_escape(l.tech_id) << ',' << csv_escape(l.product_id) << ','
                << format_double(l.empirical_weight) << ',' << l.exceed_count << ',' << l.n_samples << ','
                << format_double(l.p_value()) << ',' << (tier ? tier_label(*tier) : "none") << '\n';
        }
}

namespace detail {

inline std::string xml_escape(std::string_view s) {
    std::string out;
    for (char ch : s) {
        switch (ch) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            case '\'': out += "&apos;"; break;
            default: out += ch;
        }
    }
    return out;
}

}  // namespace detail

// GraphML with node attributes layer / group / degree and weighted edges.
// Only nodes with at least one edge are written.
inline void write_graphml(std::ostream& out, const ValidatedNetwork& net, const SectionTable& sections) {
    using detail::xml_escape;
    out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
        << "<graphml xmlns=\"http://graphml.graphdrawing.org/xmlns\">\n"
        << "  <key id=\"layer\" for=\"node\" attr.name=\"layer\" attr.type=\"string\"/>\n"
        << "  <key id=\"group\" for=\"node\" attr.name=\"group\" attr.type=\"string\"/>\n"
        << "  <key id=\"degree\" for=\"node\" attr.name=\"degree\" attr.type=\"int\"/>\n"
        << "  <key id=\"weight\" for=\"edge\" attr.name=\"weight\" attr.type=\"double\"/>\n"
        << "  <key id=\"p_value\" for=\"edge\" attr.name=\"p_value\" attr.type=\"double\"/>\n"
        << "  <key id=\"tier\" for=\"edge\" attr.name=\"tier\" attr.type=\"string\"/>\n"
        << "  <graph id=\"lag" << net.lag << "\" edgedefault=\"directed\">\n";
    const auto tdeg = net.tech_degree();
    const auto pdeg = net.product_degree();
    auto node = [&](const std::string& id, std::string_view layer, const std::string& group, int degree) {
        out << "    <node id=\"" << xml_escape(id) << "\">\n"
            << "      <data key=\"layer\">" << layer << "</data>\n"
            << "      <data key=\"group\">" << xml_escape(group) << "</data>\n"
            << "      <data key=\"degree\">" << degree << "</data>\n"
            << "    </node>\n";
    };
    for (std::size_t t = 0; t < net.tech_ids.size(); ++t)
        if (tdeg[t] > 0) node("tech:" + net.tech_ids[t], "technology", net.tech_ids[t].substr(0, 4), tdeg[t]);
    for (std::size_t p = 0; p < net.product_ids.size(); ++p) {
        if (pdeg[p] == 0) continue;
        const auto s = sections.section_of_product(net.product_ids[p]);
        node("product:" + net.product_ids[p], "product", s ? sections.sections[*s].name : "unclassified", pdeg[p]);
    }
    std::size_t k = 0;
    for (const auto& e : net.edges) {
        const auto tier = e.tier();
        out << "    <edge id=\"e" << k++ << "\" source=\"" << xml_escape("tech:" + net.tech_ids[e.tech])
            << "\" target=\"" << xml_escape("product:" + net.product_ids[e.product]) << "\">\n"
            << "      <data key=\"weight\">" << format_double(e.weight()) << "</data>\n"
            << "      <data key=\"p_value\">" << format_double(e.p_value()) << "</data>\n"
            << "      <data key=\"tier\">" << (tier ? tier_label(*tier) : tier_label(net.tier)) << "</data>\n"
            << "    </edge>\n";
    }
    out << "  </graph>\n</graphml>\n";
}

inline void write_rank_csv(std::ostream& out, const FitnessComplexity& fc) {
    out << "activity,rank,complexity,stripped\n";
    std::vector<std::size_t> order(fc.activity_ids.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) {
        if (fc.activity_rank[a] != fc.activity_rank[b]) return fc.activity_rank[a] < fc.activity_rank[b];
        return fc.activity_ids[a] < fc.activity_ids[b];
    });
    for (auto a : order)
        out << csv_escape(fc.activity_ids[a]) << ',' << fc.activity_rank[a] << ',' << format_double(fc.complexity[a])
            << ',' << (fc.activity_stripped[a] ? 1 : 0) << '\n';
}

inline void write_curve_csv(std::ostream& out, const CumulativeCurve& curve) {
    out << "position,label,rank,degree_change,cumulative_value,quartile_flag\n";
    for (const auto& p : curve.points)
        out << p.position << ',' << csv_escape(p.label) << ',' << p.rank << ',' << p.degree_change << ','
            << p.cumulative << ',' << (p.quartile ? std::to_string(p.quartile) + "%" : "") << '\n';
}

inline Json degree_rows_json(const std::vector<DegreeRow>& rows) {
    Json arr = Json::array();
    for (const auto& r : rows) {
        Json j;
        j["group"] = r.group;
        if (!r.members.empty()) j["chapters"] = r.members;
        j["activities"] = r.activities;
        j["nodes"] = r.nodes;
        j["node_percent"] = r.node_share;
        j["edges"] = r.edges;
        j["edge_percent"] = r.edge_share;
        if (r.flagged) j["flagged"] = true;
        arr.push_back(std::move(j));
    }
    return arr;
}

inline Json tier_json(std::optional<Tier> t) { return t ? Json(tier_label(*t)) : Json(nullptr); }

inline Json network_summary_json(const LagResult& lag) {
    Json j;
    j["lag"] = lag.lag;
    j["tier"] = tier_label(lag.network.tier);
    j["edges"] = lag.network.edges.size();
    Json pairs = Json::array();
    for (const auto& p : lag.pairs) {
        Json pj;
        pj["tech_end_year"] = p.pair.tech_end_year;
        pj["product_end_year"] = p.pair.product_end_year;
        pj["common_countries"] = p.assist.common_country_ids.size();
        pj["samples"] = p.validation.n_samples;
        pj["tech_model_residual"] = p.tech_model.fit_residual;
        pj["product_model_residual"] = p.product_model.fit_residual;
        for (auto t : kReportedTiers) pj["significant_" + tier_label(t)] = p.validation.count_significant(t);
        pairs.push_back(std::move(pj));
    }
    j["pairs"] = std::move(pairs);
    return j;
}

// Degree tables, per-pair summaries and significance profiles of every
// product that has at least one edge.
inline Json pipeline_report_json(const PipelineResult& r) {
    Json j;
    j["network"] = network_summary_json(r.main);
    if (r.comparison) j["comparison"] = network_summary_json(*r.comparison);
    Json deg;
    deg["total_products"] = r.degrees.total_products;
    deg["product_nodes"] = r.degrees.total_product_nodes;
    deg["tech_nodes"] = r.degrees.total_tech_nodes;
    deg["edges"] = r.degrees.total_edges;
    deg["product_sections"] = degree_rows_json(r.degrees.product_sections);
    deg["tech_subclasses"] = degree_rows_json(r.degrees.tech_subclasses);
    j["degrees"] = std::move(deg);

    Json rank;
    rank["end_year"] = r.rankings.end_year;
    rank["tech_iterations"] = r.rankings.tech.iterations;
    rank["tech_stable"] = r.rankings.tech.stable;
    rank["product_iterations"] = r.rankings.product.iterations;
    rank["product_stable"] = r.rankings.product.stable;
    j["rankings"] = std::move(rank);

    std::vector<PairValidation> validations;
    for (const auto& p : r.main.pairs) validations.push_back(p.validation);
    Json profiles = Json::object();
    const auto pdeg = r.main.network.product_degree();
    for (std::size_t p = 0; p < r.main.network.product_ids.size(); ++p) {
        if (pdeg[p] == 0) continue;
        Json entries = Json::array();
        for (const auto& e : significance_profile(r.main.network.product_ids[p], validations)) {
            Json ej;
            ej["tech"] = e.tech_id;
            ej["exceed_fraction"] = e.exceed_fraction;
            ej["tier"] = tier_json(e.highest_tier);
            entries.push_back(std::move(ej));
        }
        profiles[r.main.network.product_ids[p]] = std::move(entries);
    }
    j["significance_profiles"] = std::move(profiles);
    if (r.tech_curve) {
        j["curves"]["technology_final"] = r.tech_curve->points.empty() ? 0 : r.tech_curve->points.back().cumulative;
        j["curves"]["product_final"] = r.product_curve->points.empty() ? 0 : r.product_curve->points.back().cumulative;
    }
    return j;
}

inline Json robustness_json(const RobustnessReport& rep) {
    Json j;
    j["tier"] = tier_label(rep.tier);
    j["lax_tier"] = tier_label(rep.lax_tier);
    j["benchmark_edges"] = rep.benchmark_edges;
    j["first_year"] = rep.first_year;
    j["last_year"] = rep.last_year;
    j["configurations"] = rep.entries.size();
    Json entries = Json::array();
    for (const auto& e : rep.entries) {
        Json ej;
        ej["delta"] = e.delta;
        ej["end_year"] = e.end_year;
        ej["edges"] = e.edges;
        ej["edges_lax"] = e.edges_lax;
        ej["recovered"] = e.recovered;
        ej["recovered_lax"] = e.recovered_lax;
        ej["overlap"] = e.overlap;
        ej["overlap_lax"] = e.overlap_lax;
        entries.push_back(std::move(ej));
    }
    j["entries"] = std::move(entries);
    Json means = Json::array();
    for (const auto& [d, m] : rep.mean_overlap) {
        Json mj;
        mj["delta"] = d;
        mj["windows"] = rep.windows_per_delta.at(d);
        mj["mean_overlap"] = m;
        mj["mean_overlap_lax"] = rep.mean_overlap_lax.at(d);
        means.push_back(std::move(mj));
    }
    j["summary"] = std::move(means);
    j["notes"] = rep.notes;
    return j;
}

// Records completed stages so partial output directories are recognisable.
class Manifest {
public:
    explicit Manifest(std::filesystem::path dir, std::string command) : dir_(std::move(dir)) {
        std::filesystem::create_directories(dir_);
        doc_["command"] = std::move(command);
        doc_["status"] = "running";
        doc_["stages"] = Json::array();
        doc_["files"] = Json::array();
        flush();
    }

    void stage_done(const std::string& stage) {
        doc_["stages"].push_back(stage);
        flush();
    }

    // Writes a file under the output directory and records it.
    template <typename Writer>
    void write(const std::string& name, Writer&& writer) {
        const auto path = dir_ / name;
        if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
        std::ofstream out(path, std::ios::binary);
        if (!out) throw Error("cannot write " + path.string());
        writer(out);
        doc_["files"].push_back(name);
    }

    void complete() {
        doc_["status"] = "complete";
        flush();
    }

    void fail(const std::string& message) {
        doc_["status"] = "failed";
        doc_["error"] = message;
        flush();
    }

    const std::filesystem::path& dir() const { return dir_; }

private:
    void flush() {
        std::ofstream out(dir_ / "manifest.json", std::ios::binary);
        out << doc_.dump(2) << '\n';
    }

    std::filesystem::path dir_;
    Json doc_;
};

inline std::string pair_tag(const PeriodPair& p) {
    return std::to_string(p.tech_end_year) + "_" + std::to_string(p.product_end_year);
}

// Writes the full output set of a pipeline run.
inline void write_pipeline_outputs(Manifest& m, const RunConfig& cfg, const PipelineResult& r) {
    const auto sections = sections_for(cfg);
    m.write("config.cfg", [&](std::ostream& o) { o << serialize_config(cfg); });
    for (const auto* lag : {&r.main, r.comparison ? &*r.comparison : nullptr}) {
        if (!lag) continue;
        const auto suffix = lag == &r.main ? std::string() : "_lag" + std::to_string(lag->lag);
        for (const auto& p : lag->pairs) {
            const auto tag = pair_tag(p.pair);
            m.write("pairs/validation_" + tag + ".csv", [&](std::ostream& o) { write_validation_csv(o, p.validation); });
            m.write("models/tech_" + tag + ".model", [&](std::ostream& o) { write_model(o, p.tech_model); });
            m.write("models/product_" + tag + ".model", [&](std::ostream& o) { write_model(o, p.product_model); });
        }
        m.write("edges" + suffix + ".csv", [&](std::ostream& o) { write_edge_csv(o, lag->network); });
        m.write("network" + suffix + ".graphml", [&](std::ostream& o) { write_graphml(o, lag->network, sections); });
    }
    m.write("tech_ranks.csv", [&](std::ostream& o) { write_rank_csv(o, r.rankings.tech); });
    m.write("product_ranks.csv", [&](std::ostream& o) { write_rank_csv(o, r.rankings.product); });
    if (r.tech_curve) {
        m.write("curve_technology.csv", [&](std::ostream& o) { write_curve_csv(o, *r.tech_curve); });
        m.write("curve_product.csv", [&](std::ostream& o) { write_curve_csv(o, *r.product_curve); });
    }
    m.write("report.json", [&](std::ostream& o) { o << pipeline_report_json(r).dump(2) << '\n'; });
}

}  // namespace greenlink
