#pragma once

#include <ostream>
#include <string>
#include <vector>

#include "greenlink/common.hpp"
#include "greenlink/matrix.hpp"
#include "greenlink/rca.hpp"

namespace greenlink {

// Technology x product co-occurrence matrix contracted over common countries:
//
//   A(tau, pi) = 1/u_tau * sum_c M(c, tau) M(c, pi) / d_c
//
// with u_tau and d_c recomputed on the common country set.
struct AssistMatrix {
    std::vector<std::string> tech_ids;
    std::vector<std::string> product_ids;
    std::vector<std::string> common_country_ids;
    Matrix<double> values;
    // false where no common country holds the technology (zero row)
    std::vector<bool> active;
    int t1 = 0;
    int t2 = 0;

    int lag() const { return t2 - t1; }
};

// Raw kernel shared by the empirical and null paths. Countries with no
// product (d_c = 0) are skipped; technologies with u_tau = 0 leave a zero row.
// Summation runs over countries in axis order so repeated calls are bitwise
// reproducible.
inline void assist_kernel(const Matrix<std::uint8_t>& tech, const Matrix<std::uint8_t>& prod,
                          Matrix<double>& out, std::vector<bool>& active) {
    const std::size_t n_countries = tech.rows();
    const std::size_t n_tech = tech.cols();
    const std::size_t n_prod = prod.cols();
    if (out.rows() != n_tech || out.cols() != n_prod) out = Matrix<double>(n_tech, n_prod);
    else out.fill(0.0);
    active.assign(n_tech, false);

    std::vector<int> ubiquity(n_tech, 0);
    std::vector<std::size_t> held_tech, held_prod;
    held_tech.reserve(n_tech);
    held_prod.reserve(n_prod);
    for (std::size_t c = 0; c < n_countries; ++c) {
        held_tech.clear();
        held_prod.clear();
        const auto trow = tech.row(c);
        const auto prow = prod.row(c);
        for (std::size_t t = 0; t < n_tech; ++t)
            if (trow[t]) {
                held_tech.push_back(t);
                ++ubiquity[t];
            }
        for (std::size_t p = 0; p < n_prod; ++p)
            if (prow[p]) held_prod.push_back(p);
        if (held_prod.empty() || held_tech.empty()) continue;
        const double weight = 1.0 / static_cast<double>(held_prod.size());
        for (std::size_t t : held_tech) {
            auto orow = out.row(t);
            for (std::size_t p : held_prod) orow[p] += weight;
        }
    }
    for (std::size_t t = 0; t < n_tech; ++t) {
        if (ubiquity[t] == 0) continue;
        active[t] = true;
        const double inv = static_cast<double>(ubiquity[t]);
        for (auto& v : out.row(t)) v /= inv;
    }
}

inline AssistMatrix compute_assist(const BinaryMatrix& tech, const BinaryMatrix& prod) {
    if (tech.country_ids != prod.country_ids)
        throw Error("assist: technology and product layers are not aligned on the same countries");
    AssistMatrix a;
    a.tech_ids = tech.activity_ids;
    a.product_ids = prod.activity_ids;
    a.common_country_ids = tech.country_ids;
    a.t1 = tech.window.end_year;
    a.t2 = prod.window.end_year;
    assist_kernel(tech.values, prod.values, a.values, a.active);
    return a;
}

// Nonzero entries as (tech_id, product_id, value).
inline void write_assist_csv(std::ostream& out, const AssistMatrix& a) {
    out << "tech_id,product_id,value\n";
    for (std::size_t t = 0; t < a.values.rows(); ++t)
        for (std::size_t p = 0; p < a.values.cols(); ++p)
            if (a.values(t, p) != 0.0)
                out << csv_escape(a.tech_ids[t]) << ',' << csv_escape(a.product_ids[p]) << ','
                    << format_double(a.values(t, p)) << '\n';
}

}  // namespace greenlink
