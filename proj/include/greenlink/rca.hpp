#pragma once

#include <cstdint>
#include <istream>
#include <ostream>
#include <string>
#include <vector>

#include "greenlink/common.hpp"
#include "greenlink/matrix.hpp"
#include "greenlink/panel.hpp"

namespace greenlink {

struct RcaMatrix {
    WindowInfo window;
    std::vector<std::string> country_ids;
    std::vector<std::string> activity_ids;
    Matrix<double> values;
};

// Country x activity specialization matrix with its degree vectors:
// diversification (row sums) and ubiquity (column sums).
struct BinaryMatrix {
    WindowInfo window;
    std::vector<std::string> country_ids;
    std::vector<std::string> activity_ids;
    Matrix<std::uint8_t> values;
    std::vector<int> diversification;
    std::vector<int> ubiquity;

    std::size_t countries() const { return country_ids.size(); }
    std::size_t activities() const { return activity_ids.size(); }
    int links() const {
        int total = 0;
        for (int d : diversification) total += d;
        return total;
    }
};

// Builds a BinaryMatrix and fills in its degrees. `values` must be 0/1.
inline BinaryMatrix make_binary(WindowInfo window, std::vector<std::string> country_ids,
                                std::vector<std::string> activity_ids, Matrix<std::uint8_t> values) {
    if (values.rows() != country_ids.size() || values.cols() != activity_ids.size())
        throw Error("binary matrix shape does not match its axes");
    BinaryMatrix m;
    m.window = window;
    m.country_ids = std::move(country_ids);
    m.activity_ids = std::move(activity_ids);
    m.values = std::move(values);
    m.diversification.assign(m.values.rows(), 0);
    m.ubiquity.assign(m.values.cols(), 0);
    for (std::size_t c = 0; c < m.values.rows(); ++c) {
        for (std::size_t a = 0; a < m.values.cols(); ++a) {
            const auto v = m.values(c, a);
            if (v > 1) throw Error("binary matrix entries must be 0 or 1");
            m.diversification[c] += v;
            m.ubiquity[a] += v;
        }
    }
    return m;
}

// Balassa index. Zero-weight cells, including those in all-zero rows or
// columns, get RCA 0.
inline RcaMatrix compute_rca(const WindowedMatrix& w) {
    const auto& x = w.values;
    std::vector<double> row_total(x.rows(), 0.0), col_total(x.cols(), 0.0);
    double total = 0.0;
    for (std::size_t c = 0; c < x.rows(); ++c) {
        for (std::size_t a = 0; a < x.cols(); ++a) {
            row_total[c] += x(c, a);
            col_total[a] += x(c, a);
        }
    }
    for (double v : row_total) total += v;
    if (!(total > 0.0)) throw Error("cannot compute RCA of an all-zero matrix");

    RcaMatrix out;
    out.window = w.window;
    out.country_ids = w.country_ids;
    out.activity_ids = w.activity_ids;
    out.values = Matrix<double>(x.rows(), x.cols());
    for (std::size_t c = 0; c < x.rows(); ++c) {
        if (row_total[c] == 0.0) continue;
        for (std::size_t a = 0; a < x.cols(); ++a) {
            if (x(c, a) == 0.0) continue;
            out.values(c, a) = (x(c, a) / row_total[c]) / (col_total[a] / total);
        }
    }
    return out;
}

inline BinaryMatrix binarize(const RcaMatrix& rca, double threshold = 1.0) {
    if (!(threshold > 0.0)) throw Error("RCA threshold must be positive");
    Matrix<std::uint8_t> m(rca.values.rows(), rca.values.cols());
    for (std::size_t c = 0; c < m.rows(); ++c)
        for (std::size_t a = 0; a < m.cols(); ++a) m(c, a) = rca.values(c, a) >= threshold ? 1 : 0;
    return make_binary(rca.window, rca.country_ids, rca.activity_ids, std::move(m));
}

inline BinaryMatrix restrict_countries(const BinaryMatrix& m,
                                       const std::vector<std::string>& countries) {
    const auto idx = detail::index_of(m.country_ids);
    std::vector<std::size_t> rows;
    rows.reserve(countries.size());
    for (const auto& c : countries) {
        const auto it = idx.find(c);
        if (it == idx.end()) throw Error("country " + c + " is not on the matrix axis");
        rows.push_back(it->second);
    }
    return make_binary(m.window, countries, m.activity_ids, select_rows(m.values, rows));
}

// Audit dump: header row of activity ids, then one row per country.
template <typename T>
void write_matrix_csv(std::ostream& out, const std::vector<std::string>& row_ids,
                      const std::vector<std::string>& col_ids, const Matrix<T>& values) {
    out << "country";
    for (const auto& a : col_ids) out << ',' << csv_escape(a);
    out << '\n';
    for (std::size_t r = 0; r < values.rows(); ++r) {
        out << csv_escape(row_ids[r]);
        for (std::size_t c = 0; c < values.cols(); ++c) {
            if constexpr (std::is_floating_point_v<T>)
                out << ',' << format_double(values(r, c));
            else
                out << ',' << static_cast<long long>(values(r, c));
        }
        out << '\n';
    }
}

inline void write_rca_csv(std::ostream& out, const RcaMatrix& m) {
    write_matrix_csv(out, m.country_ids, m.activity_ids, m.values);
}

inline void write_binary_csv(std::ostream& out, const BinaryMatrix& m) {
    write_matrix_csv(out, m.country_ids, m.activity_ids, m.values);
}

inline BinaryMatrix read_binary_csv(std::istream& in, WindowInfo window) {
    std::string line;
    if (!std::getline(in, line)) throw Error("empty binary matrix file");
    auto header = split_csv_line(line);
    if (header.empty() || header[0] != "country") throw Error("binary matrix header must start with 'country'");
    std::vector<std::string> activities(header.begin() + 1, header.end());
    std::vector<std::string> countries;
    std::vector<std::uint8_t> cells;
    while (std::getline(in, line)) {
        if (trim(line).empty()) continue;
        auto fields = split_csv_line(line);
        if (fields.size() != header.size()) throw Error("ragged binary matrix row for " + fields[0]);
        countries.push_back(fields[0]);
        for (std::size_t i = 1; i < fields.size(); ++i) {
            if (fields[i] != "0" && fields[i] != "1")
                throw Error("binary matrix entry must be 0 or 1, got '" + fields[i] + "'");
            cells.push_back(fields[i] == "1" ? 1 : 0);
        }
    }
    Matrix<std::uint8_t> values(countries.size(), activities.size());
    std::copy(cells.begin(), cells.end(), values.data().begin());
    return make_binary(window, std::move(countries), std::move(activities), std::move(values));
}

}  // namespace greenlink
