#pragma once

#include <algorithm>
#include <fstream>
#include <istream>
#include <map>
#include <sstream>
#include <string>
#include <tuple>
#include <unordered_map>
#include <vector>

#include "greenlink/common.hpp"
#include "greenlink/matrix.hpp"

namespace greenlink {

struct PanelRecord {
    std::string country;
    std::string activity;
    int year = 0;
    double value = 0.0;
};

// Yearly country x activity weights for one layer. Axes are sorted
// lexicographically; years are sorted ascending and contiguous entries of
// `values` follow `years`.
struct ActivityPanel {
    Layer layer = Layer::technology;
    std::vector<std::string> country_ids;
    std::vector<std::string> activity_ids;
    std::vector<int> years;
    std::vector<Matrix<double>> values;

    bool has_year(int year) const { return std::binary_search(years.begin(), years.end(), year); }

    const Matrix<double>& at_year(int year) const {
        const auto it = std::lower_bound(years.begin(), years.end(), year);
        if (it == years.end() || *it != year)
            throw Error("panel has no data for year " + std::to_string(year));
        return values[static_cast<std::size_t>(it - years.begin())];
    }
};

// Sum of the yearly matrices over [end_year - delta + 1, end_year].
struct WindowedMatrix {
    WindowInfo window;
    std::vector<std::string> country_ids;
    std::vector<std::string> activity_ids;
    Matrix<double> values;
};

namespace detail {

inline std::vector<std::string> sorted_unique(std::vector<std::string> ids) {
    std::sort(ids.begin(), ids.end());
    ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
    return ids;
}

inline std::unordered_map<std::string, std::size_t> index_of(const std::vector<std::string>& ids) {
    std::unordered_map<std::string, std::size_t> out;
    out.reserve(ids.size());
    for (std::size_t i = 0; i < ids.size(); ++i) out.emplace(ids[i], i);
    return out;
}

}  // namespace detail

inline ActivityPanel load_panel(const std::vector<PanelRecord>& records, Layer layer) {
    if (records.empty()) throw Error("panel input contains no records");

    std::vector<std::string> countries, activities;
    std::vector<int> years;
    for (const auto& r : records) {
        if (!std::isfinite(r.value) || r.value < 0.0) {
            throw Error("invalid panel value " + format_double(r.value) + " in record (" +
                        r.country + ", " + r.activity + ", " + std::to_string(r.year) + ")");
        }
        countries.push_back(r.country);
        activities.push_back(r.activity);
        years.push_back(r.year);
    }

    ActivityPanel panel;
    panel.layer = layer;
    panel.country_ids = detail::sorted_unique(std::move(countries));
    panel.activity_ids = detail::sorted_unique(std::move(activities));
    std::sort(years.begin(), years.end());
    years.erase(std::unique(years.begin(), years.end()), years.end());
    panel.years = std::move(years);

    const auto cidx = detail::index_of(panel.country_ids);
    const auto aidx = detail::index_of(panel.activity_ids);
    panel.values.assign(panel.years.size(),
                        Matrix<double>(panel.country_ids.size(), panel.activity_ids.size()));
    for (const auto& r : records) {
        const auto y = std::lower_bound(panel.years.begin(), panel.years.end(), r.year) -
                       panel.years.begin();
        panel.values[static_cast<std::size_t>(y)](cidx.at(r.country), aidx.at(r.activity)) +=
            r.value;
    }
    return panel;
}

// Reads `country,activity,year,value` CSV (header required).
inline std::vector<PanelRecord> read_panel_records(std::istream& in) {
    std::string line;
    std::size_t line_no = 0;
    bool header_seen = false;
    std::vector<PanelRecord> records;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        auto fields = split_csv_line(line);
        if (!header_seen) {
            header_seen = true;
            if (fields.size() != 4 || trim(fields[0]) != "country" || trim(fields[1]) != "activity" ||
                trim(fields[2]) != "year" || trim(fields[3]) != "value") {
                throw Error("line 1: expected header 'country,activity,year,value'");
            }
            continue;
        }
        const auto where = "line " + std::to_string(line_no) + ": ";
        if (fields.size() != 4)
            throw Error(where + "expected 4 fields, found " + std::to_string(fields.size()));
        const auto year = parse_integer(trim(fields[2]));
        if (!year) throw Error(where + "cannot parse year '" + fields[2] + "'");
        const auto value = parse_double(trim(fields[3]));
        if (!value) throw Error(where + "cannot parse value '" + fields[3] + "'");
        if (!std::isfinite(*value) || *value < 0.0)
            throw Error(where + "negative or non-finite value '" + fields[3] + "' in record " + line);
        records.push_back({std::string(trim(fields[0])), std::string(trim(fields[1])),
                           static_cast<int>(*year), *value});
    }
    if (records.empty()) throw Error("panel input contains no records");
    return records;
}

inline ActivityPanel load_panel(std::istream& in, Layer layer) {
    return load_panel(read_panel_records(in), layer);
}

inline ActivityPanel load_panel_file(const std::string& path, Layer layer) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open panel file " + path);
    try {
        return load_panel(in, layer);
    } catch (const Error& e) {
        throw Error(path + ": " + e.what());
    }
}

// Collapses activity codes to their first `digits` characters (e.g. 6-digit
// HS subheadings into 2-digit chapters), summing merged columns.
inline ActivityPanel truncate_activity_codes(const ActivityPanel& panel, std::size_t digits) {
    if (digits == 0) throw Error("activity code length must be positive");
    std::vector<std::string> truncated;
    truncated.reserve(panel.activity_ids.size());
    for (const auto& id : panel.activity_ids) truncated.push_back(id.substr(0, digits));

    ActivityPanel out;
    out.layer = panel.layer;
    out.country_ids = panel.country_ids;
    out.years = panel.years;
    out.activity_ids = detail::sorted_unique(truncated);
    const auto aidx = detail::index_of(out.activity_ids);
    for (const auto& m : panel.values) {
        Matrix<double> agg(m.rows(), out.activity_ids.size());
        for (std::size_t c = 0; c < m.rows(); ++c)
            for (std::size_t a = 0; a < m.cols(); ++a) agg(c, aidx.at(truncated[a])) += m(c, a);
        out.values.push_back(std::move(agg));
    }
    return out;
}

inline WindowedMatrix aggregate_window(const ActivityPanel& panel, int delta, int end_year) {
    if (delta < 1) throw Error("window length must be at least 1, got " + std::to_string(delta));
    std::vector<int> missing;
    for (int y = end_year - delta + 1; y <= end_year; ++y)
        if (!panel.has_year(y)) missing.push_back(y);
    if (!missing.empty()) {
        std::string msg = "window of " + std::to_string(delta) + " years ending " +
                          std::to_string(end_year) + " exceeds the " +
                          std::string(to_string(panel.layer)) + " panel; missing years:";
        for (int y : missing) msg += " " + std::to_string(y);
        throw Error(msg);
    }

    WindowedMatrix out;
    out.window = {panel.layer, delta, end_year};
    out.country_ids = panel.country_ids;
    out.activity_ids = panel.activity_ids;
    out.values = Matrix<double>(panel.country_ids.size(), panel.activity_ids.size());
    for (int y = end_year - delta + 1; y <= end_year; ++y) out.values += panel.at_year(y);
    return out;
}

// Any country-labelled matrix type (WindowedMatrix, BinaryMatrix, ...) can be
// restricted to a subset of its rows.
template <typename M>
concept CountryLabelled = requires(const M& m) {
    { m.country_ids } -> std::convertible_to<std::vector<std::string>>;
};

inline std::vector<std::string> common_countries(const std::vector<std::string>& a,
                                                 const std::vector<std::string>& b) {
    auto sa = detail::sorted_unique(a);
    auto sb = detail::sorted_unique(b);
    std::vector<std::string> out;
    std::set_intersection(sa.begin(), sa.end(), sb.begin(), sb.end(), std::back_inserter(out));
    return out;
}

template <typename M>
struct AlignedPair {
    M tech;
    M product;
    std::vector<std::string> common_country_ids;
};

inline WindowedMatrix restrict_countries(const WindowedMatrix& m,
                                         const std::vector<std::string>& countries) {
    const auto idx = detail::index_of(m.country_ids);
    std::vector<std::size_t> rows;
    rows.reserve(countries.size());
    for (const auto& c : countries) {
        const auto it = idx.find(c);
        if (it == idx.end()) throw Error("country " + c + " is not on the matrix axis");
        rows.push_back(it->second);
    }
    WindowedMatrix out;
    out.window = m.window;
    out.country_ids = countries;
    out.activity_ids = m.activity_ids;
    out.values = select_rows(m.values, rows);
    return out;
}

// Restricts both layers to the sorted intersection of their country axes.
// Works for any type with a `restrict_countries` overload found by ADL.
template <typename M>
    requires CountryLabelled<M>
AlignedPair<M> align_countries(const M& tech, const M& product) {
    auto common = common_countries(tech.country_ids, product.country_ids);
    if (common.empty()) throw Error("technology and product layers share no countries");
    return {restrict_countries(tech, common), restrict_countries(product, common),
            std::move(common)};
}

}  // namespace greenlink
