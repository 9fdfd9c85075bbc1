#pragma once

#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>

#include "greenlink/common.hpp"
#include "greenlink/nullmodel.hpp"
#include "greenlink/rca.hpp"
#include "greenlink/validate.hpp"

namespace greenlink {

// Write-once on-disk store for expensive intermediates, keyed by a content
// hash of their inputs. A disabled cache (empty directory) never hits.
class ArtifactCache {
public:
    ArtifactCache() = default;
    explicit ArtifactCache(std::filesystem::path dir) : dir_(std::move(dir)) {
        if (!dir_.empty()) std::filesystem::create_directories(dir_);
    }

    bool enabled() const { return !dir_.empty(); }

    std::optional<BinaryMatrix> load_binary(const std::string& key, WindowInfo window) const {
        auto in = open(key, "binary.csv");
        if (!in) return std::nullopt;
        return read_binary_csv(*in, window);
    }
    void store_binary(const std::string& key, const BinaryMatrix& m) const {
        store(key, "binary.csv", [&](std::ostream& out) { write_binary_csv(out, m); });
    }

    std::optional<BicmModel> load_model(const std::string& key) const {
        auto in = open(key, "model.txt");
        if (!in) return std::nullopt;
        return read_model(*in);
    }
    void store_model(const std::string& key, const BicmModel& m) const {
        store(key, "model.txt", [&](std::ostream& out) { write_model(out, m); });
    }

    std::optional<Matrix<std::uint32_t>> load_counts(const std::string& key) const {
        auto in = open(key, "counts.txt");
        if (!in) return std::nullopt;
        std::size_t rows = 0, cols = 0;
        std::string magic;
        *in >> magic >> rows >> cols;
        if (magic != "exceed-counts") throw Error("cache: malformed counts file for key " + key);
        Matrix<std::uint32_t> m(rows, cols);
        for (auto& v : m.data())
            if (!(*in >> v)) throw Error("cache: truncated counts file for key " + key);
        return m;
    }
    void store_counts(const std::string& key, const Matrix<std::uint32_t>& m) const {
        store(key, "counts.txt", [&](std::ostream& out) {
            out << "exceed-counts " << m.rows() << ' ' << m.cols() << '\n';
            for (std::size_t r = 0; r < m.rows(); ++r) {
                for (std::size_t c = 0; c < m.cols(); ++c) out << (c ? " " : "") << m(r, c);
                out << '\n';
            }
        });
    }

private:
    std::optional<std::ifstream> open(const std::string& key, const char* kind) const {
        if (!enabled()) return std::nullopt;
        const auto path = dir_ / (key + "." + kind);
        if (!std::filesystem::exists(path)) return std::nullopt;
        std::ifstream in(path);
        if (!in) return std::nullopt;
        return in;
    }

    template <typename Writer>
    void store(const std::string& key, const char* kind, Writer&& write) const {
        if (!enabled()) return;
        const auto path = dir_ / (key + "." + kind);
        if (std::filesystem::exists(path)) return;
        // write to a temporary name and rename so readers never see partial files
        const auto tmp = dir_ / (key + "." + kind + ".tmp");
        {
            std::ofstream out(tmp);
            if (!out) throw Error("cache: cannot write " + tmp.string());
            write(out);
        }
        std::filesystem::rename(tmp, path);
    }

    std::filesystem::path dir_;
};

}  // namespace greenlink
