#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <istream>
#include <limits>
#include <map>
#include <ostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "greenlink/assist.hpp"
#include "greenlink/common.hpp"
#include "greenlink/matrix.hpp"
#include "greenlink/rca.hpp"
#include "greenlink/rng.hpp"

namespace greenlink {

// Bipartite Configuration Model fitted to one binary layer. Free entries have
// link probability x_c y_a / (1 + x_c y_a); entries that take the same value
// in every matrix with the observed degrees are pinned to that value.
struct BicmModel {
    static constexpr std::int8_t kFree = -1;

    WindowInfo window;
    std::vector<std::string> country_ids;
    std::vector<std::string> activity_ids;
    std::vector<double> row_multipliers;
    std::vector<double> col_multipliers;
    Matrix<std::int8_t> pinned;
    Matrix<double> probabilities;
    double fit_residual = 0.0;
    int iterations = 0;

    std::uint64_t fingerprint() const {
        Fingerprint fp;
        fp.add(country_ids).add(activity_ids);
        fp.add(std::span<const double>(row_multipliers)).add(std::span<const double>(col_multipliers));
        fp.add(pinned.data());
        return fp.value();
    }
};

struct BicmOptions {
    double tolerance = 1e-8;
    int max_iterations = 10000;
};

class ConvergenceError : public Error {
public:
    ConvergenceError(const std::string& what, double residual)
        : Error(what), residual_(residual) {}
    double residual() const { return residual_; }

private:
    double residual_;
};

namespace detail {

// Strongly connected components of the residual digraph of a 0/1 matrix:
// rows are nodes [0, R), columns are nodes [R, R + C); a 1-entry is an arc
// column -> row and a 0-entry an arc row -> column. An entry can change
// between degree-preserving matrices iff it lies on a directed cycle, i.e.
// iff its row and column share a component.
inline std::vector<int> residual_components(const Matrix<std::uint8_t>& m) {
    const std::size_t R = m.rows(), C = m.cols(), N = R + C;
    std::vector<int> index(N, -1), low(N, 0), comp(N, -1);
    std::vector<bool> on_stack(N, false);
    std::vector<std::size_t> stack;
    struct Frame {
        std::size_t node;
        std::size_t next;
    };
    std::vector<Frame> call;
    int counter = 0, n_comp = 0;

    auto successor = [&](std::size_t v, std::size_t& cursor) -> std::ptrdiff_t {
        if (v < R) {
            for (; cursor < C; ++cursor)
                if (m(v, cursor) == 0) return static_cast<std::ptrdiff_t>(R + cursor++);
        } else {
            const std::size_t a = v - R;
            for (; cursor < R; ++cursor)
                if (m(cursor, a) == 1) return static_cast<std::ptrdiff_t>(cursor++);
        }
        return -1;
    };

    for (std::size_t root = 0; root < N; ++root) {
        if (index[root] != -1) continue;
        call.push_back({root, 0});
        index[root] = low[root] = counter++;
        stack.push_back(root);
        on_stack[root] = true;
        while (!call.empty()) {
            auto& f = call.back();
            const auto w = successor(f.node, f.next);
            if (w >= 0) {
                const auto u = static_cast<std::size_t>(w);
                if (index[u] == -1) {
                    index[u] = low[u] = counter++;
                    stack.push_back(u);
                    on_stack[u] = true;
                    call.push_back({u, 0});
                } else if (on_stack[u]) {
                    low[f.node] = std::min(low[f.node], index[u]);
                }
                continue;
            }
            const std::size_t v = f.node;
            call.pop_back();
            if (!call.empty()) low[call.back().node] = std::min(low[call.back().node], low[v]);
            if (low[v] == index[v]) {
                std::size_t u;
                do {
                    u = stack.back();
                    stack.pop_back();
                    on_stack[u] = false;
                    comp[u] = n_comp;
                } while (u != v);
                ++n_comp;
            }
        }
    }
    return comp;
}

// Fully free BiCM on one block, reduced to classes of equal target degree.
// Returns the number of iterations used.
struct BlockFit {
    std::vector<double> row_class_value;
    std::vector<double> col_class_value;
    int iterations = 0;
    double residual = 0.0;
};

inline double block_residual(const std::vector<double>& x, const std::vector<double>& y,
                             const std::vector<double>& row_target, const std::vector<double>& row_mult,
                             const std::vector<double>& col_target, const std::vector<double>& col_mult) {
    double res = 0.0;
    std::vector<double> col_sum(y.size(), 0.0);
    for (std::size_t k = 0; k < x.size(); ++k) {
        double row_sum = 0.0;
        for (std::size_t l = 0; l < y.size(); ++l) {
            const double xy = x[k] * y[l];
            const double p = xy / (1.0 + xy);
            row_sum += col_mult[l] * p;
            col_sum[l] += row_mult[k] * p;
        }
        res = std::max(res, std::abs(row_sum - row_target[k]));
    }
    for (std::size_t l = 0; l < y.size(); ++l) res = std::max(res, std::abs(col_sum[l] - col_target[l]));
    return res;
}

// Damped fixed-point iteration in log space with step halving whenever the
// residual grows.
inline BlockFit fit_block(const std::vector<double>& row_target, const std::vector<double>& row_mult,
                          const std::vector<double>& col_target, const std::vector<double>& col_mult,
                          const BicmOptions& opt) {
    double links = 0.0;
    for (std::size_t k = 0; k < row_target.size(); ++k) links += row_target[k] * row_mult[k];
    const double scale = std::sqrt(links);
    std::vector<double> x(row_target.size()), y(col_target.size());
    for (std::size_t k = 0; k < x.size(); ++k) x[k] = row_target[k] / scale;
    for (std::size_t l = 0; l < y.size(); ++l) y[l] = col_target[l] / scale;

    double res = block_residual(x, y, row_target, row_mult, col_target, col_mult);
    double step = 1.0;
    constexpr double min_step = 1.0 / 1024.0;
    std::vector<double> xn(x.size()), yn(y.size());
    int it = 0;
    // Past the tolerance, keep going while the residual still drops.
    const double polish = opt.tolerance * 1e-4;
    while (res > polish && it < opt.max_iterations) {
        ++it;
        for (std::size_t k = 0; k < x.size(); ++k) {
            double denom = 0.0;
            for (std::size_t l = 0; l < y.size(); ++l) denom += col_mult[l] * y[l] / (1.0 + x[k] * y[l]);
            const double target = row_target[k] / denom;
            xn[k] = step == 1.0 ? target : std::exp((1.0 - step) * std::log(x[k]) + step * std::log(target));
        }
        for (std::size_t l = 0; l < y.size(); ++l) {
            double denom = 0.0;
            for (std::size_t k = 0; k < x.size(); ++k) denom += row_mult[k] * xn[k] / (1.0 + xn[k] * y[l]);
            const double target = col_target[l] / denom;
            yn[l] = step == 1.0 ? target : std::exp((1.0 - step) * std::log(y[l]) + step * std::log(target));
        }
        const double res_new = block_residual(xn, yn, row_target, row_mult, col_target, col_mult);
        if (res <= opt.tolerance && res_new >= res) break;
        if (res_new > res && step > min_step) {
            step *= 0.5;
            continue;
        }
        x.swap(xn);
        y.swap(yn);
        res = res_new;
        step = std::min(1.0, step * 2.0);
    }
    return {std::move(x), std::move(y), it, res};
}

inline Matrix<double> link_probabilities(const std::vector<double>& x, const std::vector<double>& y,
                                         const Matrix<std::int8_t>& pinned) {
    Matrix<double> p(x.size(), y.size());
    for (std::size_t c = 0; c < x.size(); ++c)
        for (std::size_t a = 0; a < y.size(); ++a) {
            const auto pin = pinned(c, a);
            if (pin != BicmModel::kFree) {
                p(c, a) = pin;
            } else {
                const double xy = x[c] * y[a];
                p(c, a) = xy / (1.0 + xy);
            }
        }
    return p;
}

// Max-norm mismatch between expected and observed degrees.
inline double degree_residual(const Matrix<double>& p, const std::vector<int>& rows,
                              const std::vector<int>& cols) {
    double res = 0.0;
    std::vector<double> col_sum(p.cols(), 0.0);
    for (std::size_t c = 0; c < p.rows(); ++c) {
        double s = 0.0;
        for (std::size_t a = 0; a < p.cols(); ++a) {
            s += p(c, a);
            col_sum[a] += p(c, a);
        }
        res = std::max(res, std::abs(s - rows[c]));
    }
    for (std::size_t a = 0; a < p.cols(); ++a) res = std::max(res, std::abs(col_sum[a] - cols[a]));
    return res;
}

// Multiplier for a node with no free entries: 0 if all its entries are
// pinned to 0, +inf if all pinned to 1, NaN when mixed.
inline double pinned_multiplier(int ones, std::size_t len) {
    if (ones == 0) return 0.0;
    if (static_cast<std::size_t>(ones) == len) return std::numeric_limits<double>::infinity();
    return std::numeric_limits<double>::quiet_NaN();
}

}  // namespace detail

inline BicmModel fit_bicm(const BinaryMatrix& m, const BicmOptions& opt = {}) {
    const std::size_t R = m.countries(), C = m.activities();
    if (R == 0 || C == 0) throw Error("cannot fit a null model to an empty matrix");

    BicmModel model;
    model.window = m.window;
    model.country_ids = m.country_ids;
    model.activity_ids = m.activity_ids;
    model.row_multipliers.assign(R, 0.0);
    model.col_multipliers.assign(C, 0.0);
    model.pinned = Matrix<std::int8_t>(R, C);

    const auto comp = detail::residual_components(m.values);
    for (std::size_t c = 0; c < R; ++c)
        for (std::size_t a = 0; a < C; ++a)
            model.pinned(c, a) = comp[c] == comp[R + a] ? BicmModel::kFree
                                                        : static_cast<std::int8_t>(m.values(c, a));

    // Group nodes of each component by their degree inside the component.
    std::map<int, std::vector<std::size_t>> rows_of, cols_of;
    for (std::size_t c = 0; c < R; ++c) rows_of[comp[c]].push_back(c);
    for (std::size_t a = 0; a < C; ++a) cols_of[comp[R + a]].push_back(a);

    for (std::size_t c = 0; c < R; ++c)
        if (!cols_of.contains(comp[c]))
            model.row_multipliers[c] = detail::pinned_multiplier(m.diversification[c], C);
    for (std::size_t a = 0; a < C; ++a)
        if (!rows_of.contains(comp[R + a]))
            model.col_multipliers[a] = detail::pinned_multiplier(m.ubiquity[a], R);

    for (const auto& [id, rows] : rows_of) {
        const auto it = cols_of.find(id);
        if (it == cols_of.end()) continue;
        const auto& cols = it->second;

        std::map<int, std::vector<std::size_t>> row_classes, col_classes;
        for (auto c : rows) {
            int k = 0;
            for (auto a : cols) k += m.values(c, a);
            row_classes[k].push_back(c);
        }
        for (auto a : cols) {
            int k = 0;
            for (auto c : rows) k += m.values(c, a);
            col_classes[k].push_back(a);
        }
        std::vector<double> rt, rm, ct, cm;
        for (const auto& [k, members] : row_classes) {
            rt.push_back(k);
            rm.push_back(static_cast<double>(members.size()));
        }
        for (const auto& [k, members] : col_classes) {
            ct.push_back(k);
            cm.push_back(static_cast<double>(members.size()));
        }
        const auto fit = detail::fit_block(rt, rm, ct, cm, opt);
        model.iterations = std::max(model.iterations, fit.iterations);
        if (fit.residual > opt.tolerance) {
            throw ConvergenceError("null model fit did not converge within " +
                                       std::to_string(opt.max_iterations) +
                                       " iterations (residual " + format_double(fit.residual) + ")",
                                   fit.residual);
        }
        std::size_t k = 0;
        for (const auto& [deg, members] : row_classes) {
            for (auto c : members) model.row_multipliers[c] = fit.row_class_value[k];
            ++k;
        }
        k = 0;
        for (const auto& [deg, members] : col_classes) {
            for (auto a : members) model.col_multipliers[a] = fit.col_class_value[k];
            ++k;
        }
    }

    model.probabilities =
        detail::link_probabilities(model.row_multipliers, model.col_multipliers, model.pinned);
    model.fit_residual = detail::degree_residual(model.probabilities, m.diversification, m.ubiquity);
    return model;
}

// Text artifact: multipliers (round-trip exact), pinned mask and residual.
inline void write_model(std::ostream& out, const BicmModel& model) {
    out << "bicm-model 1\n";
    out << "window " << to_string(model.window.layer) << ' ' << model.window.delta << ' '
        << model.window.end_year << '\n';
    out << "iterations " << model.iterations << '\n';
    out << "residual " << format_double(model.fit_residual) << '\n';
    out << "countries " << model.country_ids.size() << '\n';
    for (std::size_t c = 0; c < model.country_ids.size(); ++c)
        out << format_double(model.row_multipliers[c]) << ' ' << model.country_ids[c] << '\n';
    out << "activities " << model.activity_ids.size() << '\n';
    for (std::size_t a = 0; a < model.activity_ids.size(); ++a)
        out << format_double(model.col_multipliers[a]) << ' ' << model.activity_ids[a] << '\n';
    out << "pinned\n";
    for (std::size_t c = 0; c < model.pinned.rows(); ++c) {
        for (auto v : model.pinned.row(c)) out << (v == BicmModel::kFree ? '.' : v == 1 ? '1' : '0');
        out << '\n';
    }
}

inline BicmModel read_model(std::istream& in) {
    auto fail = [](const std::string& what) -> Error { return Error("malformed model file: " + what); };
    std::string line, word;
    BicmModel model;
    auto expect_line = [&](const char* key) {
        if (!std::getline(in, line)) throw fail(std::string("missing ") + key);
        std::istringstream ls(line);
        ls >> word;
        if (word != key) throw fail(std::string("expected ") + key + ", got " + word);
        return std::string(trim(line.substr(word.size())));
    };
    if (expect_line("bicm-model") != "1") throw fail("unsupported version");
    {
        std::istringstream ws(expect_line("window"));
        std::string layer;
        ws >> layer >> model.window.delta >> model.window.end_year;
        model.window.layer = layer == "product" ? Layer::product : Layer::technology;
    }
    model.iterations = static_cast<int>(parse_integer(expect_line("iterations")).value_or(0));
    model.fit_residual = parse_double(expect_line("residual")).value_or(NAN);
    auto read_axis = [&](const char* key, std::vector<std::string>& ids, std::vector<double>& mult) {
        const auto n = parse_integer(expect_line(key));
        if (!n || *n < 0) throw fail(std::string("bad count for ") + key);
        for (long long i = 0; i < *n; ++i) {
            if (!std::getline(in, line)) throw fail("truncated axis");
            const auto sp = line.find(' ');
            if (sp == std::string::npos) throw fail("axis line without id");
            const auto v = parse_double(line.substr(0, sp));
            if (!v) throw fail("bad multiplier " + line.substr(0, sp));
            mult.push_back(*v);
            ids.push_back(line.substr(sp + 1));
        }
    };
    read_axis("countries", model.country_ids, model.row_multipliers);
    read_axis("activities", model.activity_ids, model.col_multipliers);
    expect_line("pinned");
    model.pinned = Matrix<std::int8_t>(model.country_ids.size(), model.activity_ids.size());
    for (std::size_t c = 0; c < model.pinned.rows(); ++c) {
        if (!std::getline(in, line) || line.size() != model.pinned.cols()) throw fail("bad pinned row");
        for (std::size_t a = 0; a < line.size(); ++a) {
            const char ch = line[a];
            if (ch != '.' && ch != '0' && ch != '1') throw fail("bad pinned symbol");
            model.pinned(c, a) = ch == '.' ? BicmModel::kFree : static_cast<std::int8_t>(ch - '0');
        }
    }
    model.probabilities =
        detail::link_probabilities(model.row_multipliers, model.col_multipliers, model.pinned);
    return model;
}

// Lazily addressable ensemble of independent Bernoulli(p) matrices. Sample i
// is regenerated from (seed, i, lane) on demand, so nothing is stored.
class NullEnsemble {
public:
    NullEnsemble(const BicmModel& model, std::size_t n, std::uint64_t seed, std::uint32_t lane = 0)
        : probabilities_(model.probabilities), n_(n), seed_(seed), lane_(lane),
          model_fingerprint_(model.fingerprint()) {}

    std::size_t size() const { return n_; }
    std::uint64_t seed() const { return seed_; }
    std::uint64_t model_fingerprint() const { return model_fingerprint_; }

    void sample_into(std::size_t i, Matrix<std::uint8_t>& out) const {
        if (out.rows() != probabilities_.rows() || out.cols() != probabilities_.cols())
            out = Matrix<std::uint8_t>(probabilities_.rows(), probabilities_.cols());
        auto engine = substream(seed_, i, lane_);
        const auto p = probabilities_.data();
        auto o = out.data();
        for (std::size_t k = 0; k < p.size(); ++k) o[k] = unit_uniform(engine) < p[k] ? 1 : 0;
    }

    Matrix<std::uint8_t> sample(std::size_t i) const {
        Matrix<std::uint8_t> out;
        sample_into(i, out);
        return out;
    }

private:
    Matrix<double> probabilities_;
    std::size_t n_;
    std::uint64_t seed_;
    std::uint32_t lane_;
    std::uint64_t model_fingerprint_;
};

inline NullEnsemble sample_ensemble(const BicmModel& model, std::size_t n, std::uint64_t seed) {
    if (n < 1) throw Error("null ensemble needs at least one sample");
    return NullEnsemble(model, n, seed);
}

// Draw i pairs technology sample i (lane 0) with product sample i (lane 1)
// and contracts them exactly like the empirical assist matrix.
class NullAssistStream {
public:
    struct Workspace {
        Matrix<std::uint8_t> tech;
        Matrix<std::uint8_t> prod;
        Matrix<double> assist;
        std::vector<bool> active;
    };

    NullAssistStream(const BicmModel& tech_model, const BicmModel& prod_model, std::size_t n,
                     std::uint64_t seed)
        : tech_(tech_model, n, seed, 0), prod_(prod_model, n, seed, 1),
          tech_ids_(tech_model.activity_ids), product_ids_(prod_model.activity_ids),
          countries_(tech_model.country_ids), t1_(tech_model.window.end_year),
          t2_(prod_model.window.end_year) {
        if (n < 1) throw Error("null ensemble needs at least one sample");
        if (tech_model.country_ids != prod_model.country_ids)
            throw Error("null assist: technology and product models have different country axes");
    }

    std::size_t size() const { return tech_.size(); }

    // Fills ws.assist with null draw i.
    void draw_into(std::size_t i, Workspace& ws) const {
        tech_.sample_into(i, ws.tech);
        prod_.sample_into(i, ws.prod);
        assist_kernel(ws.tech, ws.prod, ws.assist, ws.active);
    }

    AssistMatrix draw(std::size_t i) const {
        Workspace ws;
        draw_into(i, ws);
        AssistMatrix a;
        a.tech_ids = tech_ids_;
        a.product_ids = product_ids_;
        a.common_country_ids = countries_;
        a.values = std::move(ws.assist);
        a.active = std::move(ws.active);
        a.t1 = t1_;
        a.t2 = t2_;
        return a;
    }

    template <typename Visitor>
    void for_each(Visitor&& visit) const {
        for (std::size_t i = 0; i < size(); ++i) visit(draw(i));
    }

private:
    NullEnsemble tech_;
    NullEnsemble prod_;
    std::vector<std::string> tech_ids_;
    std::vector<std::string> product_ids_;
    std::vector<std::string> countries_;
    int t1_;
    int t2_;
};

inline NullAssistStream null_assist_ensemble(const BicmModel& tech_model, const BicmModel& prod_model,
                                             std::size_t n, std::uint64_t seed) {
    return NullAssistStream(tech_model, prod_model, n, seed);
}

}  // namespace greenlink
