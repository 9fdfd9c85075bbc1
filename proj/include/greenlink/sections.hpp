#pragma once

#include <fstream>
#include <istream>
#include <optional>
#include <string>
#include <vector>

#include "greenlink/common.hpp"

namespace greenlink {

// Groups of HS chapters (the first two digits of a product code) into the
// product sections used by the degree report.
struct SectionTable {
    struct Section {
        std::string name;
        int first_chapter = 0;
        int last_chapter = 0;

        std::string chapters_label() const {
            char buf[16];
            if (first_chapter == last_chapter)
                std::snprintf(buf, sizeof buf, "%02d", first_chapter);
            else
                std::snprintf(buf, sizeof buf, "%02d-%02d", first_chapter, last_chapter);
            return buf;
        }
    };

    std::vector<Section> sections;

    std::optional<std::size_t> section_of_chapter(int chapter) const {
        for (std::size_t i = 0; i < sections.size(); ++i)
            if (chapter >= sections[i].first_chapter && chapter <= sections[i].last_chapter) return i;
        return std::nullopt;
    }

    std::optional<std::size_t> section_of_product(const std::string& product_id) const {
        if (product_id.size() < 2) return std::nullopt;
        const auto chapter = parse_integer(product_id.substr(0, 2));
        if (!chapter) return std::nullopt;
        return section_of_chapter(static_cast<int>(*chapter));
    }
};

// The 21 Harmonized System sections. Chapters 98-99 are left unmapped.
inline SectionTable default_hs_sections() {
    return {{
        {"Animal & animal products", 1, 5},
        {"Vegetable products", 6, 14},
        {"Fats, oils and waxes", 15, 15},
        {"Foodstuffs", 16, 24},
        {"Mineral products", 25, 27},
        {"Chemicals & allied industries", 28, 38},
        {"Plastics/Rubbers", 39, 40},
        {"Leather", 41, 43},
        {"Wood", 44, 46},
        {"Paper", 47, 49},
        {"Textiles", 50, 63},
        {"Footwear/Headgear", 64, 67},
        {"Stone/Glass", 68, 70},
        {"Precious stones and metals", 71, 71},
        {"Metals", 72, 83},
        {"Machinery/Electrical", 84, 85},
        {"Transportation", 86, 89},
        {"Optical instruments", 90, 92},
        {"Arms and ammunition", 93, 93},
        {"Miscellaneous manufactured articles", 94, 96},
        {"Works of art", 97, 97},
    }};
}

// CSV with header `section,first_chapter,last_chapter`.
inline SectionTable read_sections(std::istream& in) {
    SectionTable table;
    std::string line;
    bool header = true;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        auto f = split_csv_line(line);
        if (header) {
            header = false;
            if (f.size() != 3 || f[0] != "section")
                throw Error("section file: expected header 'section,first_chapter,last_chapter'");
            continue;
        }
        if (f.size() != 3) throw Error("section file line " + std::to_string(line_no) + ": expected 3 fields");
        const auto first = parse_integer(trim(f[1]));
        const auto last = parse_integer(trim(f[2]));
        if (!first || !last || *first > *last)
            throw Error("section file line " + std::to_string(line_no) + ": bad chapter range");
        table.sections.push_back({f[0], static_cast<int>(*first), static_cast<int>(*last)});
    }
    return table;
}

inline SectionTable read_sections_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open section file " + path);
    return read_sections(in);
}

}  // namespace greenlink
