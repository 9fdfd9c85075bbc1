#pragma once

#include <cerrno>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <type_traits>
#include <vector>

namespace greenlink {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class Layer { technology, product };

inline std::string_view to_string(Layer layer) {
    return layer == Layer::technology ? "technology" : "product";
}

// Provenance of a windowed matrix: which layer, and which years were summed.
struct WindowInfo {
    Layer layer = Layer::technology;
    int delta = 1;
    int end_year = 0;

    int first_year() const { return end_year - delta + 1; }
    friend bool operator==(const WindowInfo&, const WindowInfo&) = default;
};

// Shortest representation that reads back to the same double.
inline std::string format_double(double v) {
    char buf[32];
    for (int precision = 15; precision <= 17; ++precision) {
        std::snprintf(buf, sizeof buf, "%.*g", precision, v);
        if (std::strtod(buf, nullptr) == v || std::isnan(v)) break;
    }
    return buf;
}

inline std::optional<double> parse_double(std::string_view text) {
    std::string s(text);
    if (s.empty()) return std::nullopt;
    char* end = nullptr;
    errno = 0;
    const double v = std::strtod(s.c_str(), &end);
    if (end != s.c_str() + s.size() || errno == ERANGE) return std::nullopt;
    return v;
}

inline std::optional<long long> parse_integer(std::string_view text) {
    std::string s(text);
    if (s.empty()) return std::nullopt;
    char* end = nullptr;
    errno = 0;
    const long long v = std::strtoll(s.c_str(), &end, 10);
    if (end != s.c_str() + s.size() || errno == ERANGE) return std::nullopt;
    return v;
}

inline std::string_view trim(std::string_view s) {
    const auto ws = " \t\r\n";
    const auto b = s.find_first_not_of(ws);
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(ws);
    return s.substr(b, e - b + 1);
}

// Splits one CSV line. Handles double-quoted fields with "" escapes.
inline std::vector<std::string> split_csv_line(std::string_view line) {
    std::vector<std::string> fields(1);
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char ch = line[i];
        if (quoted) {
            if (ch == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    fields.back() += '"';
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                fields.back() += ch;
            }
        } else if (ch == '"') {
            quoted = true;
        } else if (ch == ',') {
            fields.emplace_back();
        } else if (ch != '\r') {
            fields.back() += ch;
        }
    }
    if (quoted) throw Error("unterminated quoted field in CSV line: " + std::string(line));
    return fields;
}

inline std::string csv_escape(std::string_view field) {
    if (field.find_first_of(",\"\n") == std::string_view::npos) return std::string(field);
    std::string out = "\"";
    for (char ch : field) {
        if (ch == '"') out += '"';
        out += ch;
    }
    out += '"';
    return out;
}

// FNV-1a, used for cache keys and model fingerprints. Stable across runs.
class Fingerprint {
public:
    Fingerprint& add_bytes(const void* data, std::size_t n) {
        const auto* p = static_cast<const unsigned char*>(data);
        for (std::size_t i = 0; i < n; ++i) {
            state_ ^= p[i];
            state_ *= 0x100000001b3ULL;
        }
        return *this;
    }
    Fingerprint& add(std::string_view s) {
        add(static_cast<std::uint64_t>(s.size()));
        return add_bytes(s.data(), s.size());
    }
    template <typename T>
        requires std::is_arithmetic_v<T>
    Fingerprint& add(T v) {
        return add_bytes(&v, sizeof v);
    }
    template <typename T, std::size_t Extent>
    Fingerprint& add(std::span<T, Extent> values) {
        add(static_cast<std::uint64_t>(values.size()));
        for (const auto& v : values) add(v);
        return *this;
    }
    Fingerprint& add(const std::vector<std::string>& values) {
        add(static_cast<std::uint64_t>(values.size()));
        for (const auto& v : values) add(std::string_view(v));
        return *this;
    }

    std::uint64_t value() const { return state_; }
    std::string hex() const {
        char buf[17];
        std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(state_));
        return buf;
    }

private:
    std::uint64_t state_ = 0xcbf29ce484222325ULL;
};

}  // namespace greenlink
