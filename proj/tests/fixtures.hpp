#pragma once

#include <string>
#include <vector>

#include "greenlink/panel.hpp"
#include "greenlink/rca.hpp"

namespace fixture {

using greenlink::Layer;
using greenlink::PanelRecord;

inline const std::vector<std::string> kCountries = {"AUT", "BEL", "CHE", "DEU", "DNK", "FRA"};
inline const std::vector<std::string> kTechs = {"Y02A 10", "Y02E 60", "Y02T 10", "Y02W 30"};
inline const std::vector<std::string> kProducts = {"280530", "810520", "850760", "854140", "870380"};
inline const std::string kPlantedTech = "Y02E 60";
inline const std::string kPlantedProduct = "810520";

// Two countries hold only the planted technology and only the planted
// product; the other four hold everything else. Values change from year to
// year by a common factor, which leaves every RCA window unchanged.
inline std::vector<PanelRecord> planted_records(Layer layer, int first_year, int last_year) {
    const auto& ids = layer == Layer::technology ? kTechs : kProducts;
    const auto& planted = layer == Layer::technology ? kPlantedTech : kPlantedProduct;
    std::vector<PanelRecord> out;
    for (int y = first_year; y <= last_year; ++y) {
        const double scale = layer == Layer::technology ? 0.5 * (1 + y % 3) : 1000.0 * (y - 1990);
        for (std::size_t c = 0; c < kCountries.size(); ++c) {
            const bool planted_country = c < 2;
            for (const auto& a : ids)
                if ((a == planted) == planted_country) out.push_back({kCountries[c], a, y, scale});
        }
    }
    return out;
}

inline greenlink::ActivityPanel planted_panel(Layer layer, int first_year = 2008, int last_year = 2017) {
    return greenlink::load_panel(planted_records(layer, first_year, last_year), layer);
}

inline greenlink::BinaryMatrix binary(std::vector<std::vector<int>> rows, Layer layer = Layer::technology,
                                      int end_year = 2017, std::string row_prefix = "c",
                                      std::string col_prefix = "a") {
    const std::size_t R = rows.size(), C = R ? rows.front().size() : 0;
    greenlink::Matrix<std::uint8_t> m(R, C);
    std::vector<std::string> rid, cid;
    for (std::size_t r = 0; r < R; ++r) {
        rid.push_back(row_prefix + std::to_string(r));
        for (std::size_t c = 0; c < C; ++c) m(r, c) = static_cast<std::uint8_t>(rows[r][c]);
    }
    for (std::size_t c = 0; c < C; ++c) cid.push_back(col_prefix + std::to_string(c));
    return greenlink::make_binary({layer, 1, end_year}, rid, cid, std::move(m));
}

inline greenlink::BinaryMatrix binary(const greenlink::Matrix<std::uint8_t>& m, Layer layer = Layer::technology,
                                      int end_year = 2017, std::string col_prefix = "a") {
    std::vector<std::string> rid, cid;
    for (std::size_t r = 0; r < m.rows(); ++r) rid.push_back("c" + std::to_string(r / 10) + std::to_string(r % 10));
    for (std::size_t c = 0; c < m.cols(); ++c) cid.push_back(col_prefix + std::to_string(c / 10) + std::to_string(c % 10));
    return greenlink::make_binary({layer, 1, end_year}, rid, cid, m);
}

inline greenlink::Matrix<double> matrix(std::vector<std::vector<double>> rows) {
    greenlink::Matrix<double> m(rows.size(), rows.empty() ? 0 : rows.front().size());
    for (std::size_t r = 0; r < m.rows(); ++r)
        for (std::size_t c = 0; c < m.cols(); ++c) m(r, c) = rows[r][c];
    return m;
}

inline greenlink::WindowedMatrix windowed(const greenlink::Matrix<double>& x, Layer layer = Layer::technology) {
    greenlink::WindowedMatrix w;
    w.window = {layer, 1, 2017};
    for (std::size_t r = 0; r < x.rows(); ++r) w.country_ids.push_back("c" + std::to_string(r / 10) + std::to_string(r % 10));
    for (std::size_t c = 0; c < x.cols(); ++c) w.activity_ids.push_back("a" + std::to_string(c / 10) + std::to_string(c % 10));
    w.values = x;
    return w;
}

}  // namespace fixture
