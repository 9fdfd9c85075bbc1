#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "greenlink/common.hpp"
#include "greenlink/rca.hpp"
#include "greenlink/validate.hpp"

namespace greenlink {

struct EfcOptions {
    int max_iterations = 5000;
    // Stop once both rankings have been unchanged for this many iterations.
    int stability_window = 50;
    // Values this close (relative) rank as equal; limits that coincide
    // otherwise swap order on rounding noise forever.
    double tie_tolerance = 1e-9;
};

struct FitnessComplexity {
    std::vector<std::string> country_ids;
    std::vector<std::string> activity_ids;
    std::vector<double> fitness;
    std::vector<double> complexity;
    // 1 = most complex / fittest. Stripped (all-zero) nodes share the worst rank.
    std::vector<int> activity_rank;
    std::vector<int> country_rank;
    std::vector<bool> activity_stripped;
    std::vector<bool> country_stripped;
    int iterations = 0;
    int stable_streak = 0;
    bool stable = false;

    int rank_of_activity(const std::string& id) const {
        const auto it = std::find(activity_ids.begin(), activity_ids.end(), id);
        if (it == activity_ids.end()) throw Error("activity '" + id + "' is not ranked");
        return activity_rank[static_cast<std::size_t>(it - activity_ids.begin())];
    }
};

namespace detail {

// Positions sorted by descending value. A run of values within `tolerance`
// of its largest member is a tie, ordered by id.
inline std::vector<std::size_t> ranking_order(std::span<const double> values, const std::vector<std::string>& ids,
                                              double tolerance = 0.0) {
    std::vector<std::size_t> order(values.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (values[a] != values[b]) return values[a] > values[b];
        return ids[a] < ids[b];
    });
    if (tolerance <= 0.0) return order;
    for (std::size_t lead = 0; lead < order.size();) {
        const double top = values[order[lead]];
        std::size_t end = lead + 1;
        while (end < order.size() && top - values[order[end]] <= tolerance * std::abs(top)) ++end;
        std::sort(order.begin() + static_cast<std::ptrdiff_t>(lead), order.begin() + static_cast<std::ptrdiff_t>(end),
                  [&](std::size_t a, std::size_t b) { return ids[a] < ids[b]; });
        lead = end;
    }
    return order;
}

inline std::vector<int> ranks_from_order(const std::vector<std::size_t>& order) {
    std::vector<int> rank(order.size());
    for (std::size_t i = 0; i < order.size(); ++i) rank[order[i]] = static_cast<int>(i) + 1;
    return rank;
}

inline void normalize_mean(std::vector<double>& v) {
    double mean = 0.0;
    for (double x : v) mean += x;
    mean /= static_cast<double>(v.size());
    for (double& x : v) x /= mean;
}

}  // namespace detail

// Fitness-complexity iteration from F = Q = 1:
//   F~_c = sum_a M_ca Q_a,   Q~_a = 1 / sum_c (M_ca / F_c),
// each followed by division by its mean. `observer(iteration, F, Q)` is
// called after every normalized update.
template <typename Observer>
FitnessComplexity run_efc(const BinaryMatrix& m, const EfcOptions& opt, Observer&& observer) {
    const std::size_t R = m.countries(), C = m.activities();
    if (R == 0 || C == 0) throw Error("fitness-complexity needs a nonempty matrix");
    for (std::size_t c = 0; c < R; ++c)
        if (m.diversification[c] == 0)
            throw Error("fitness-complexity: country " + m.country_ids[c] + " has no activity");
    for (std::size_t a = 0; a < C; ++a)
        if (m.ubiquity[a] == 0)
            throw Error("fitness-complexity: activity " + m.activity_ids[a] + " has no country");
    if (opt.stability_window < 1 || opt.max_iterations < 1)
        throw Error("fitness-complexity: iteration limits must be positive");

    FitnessComplexity out;
    out.country_ids = m.country_ids;
    out.activity_ids = m.activity_ids;
    out.fitness.assign(R, 1.0);
    out.complexity.assign(C, 1.0);
    out.activity_stripped.assign(C, false);
    out.country_stripped.assign(R, false);

    auto f_order = detail::ranking_order(out.fitness, out.country_ids, opt.tie_tolerance);
    auto q_order = detail::ranking_order(out.complexity, out.activity_ids, opt.tie_tolerance);
    std::vector<double> f_next(R), q_next(C);
    int it = 0;
    while (it < opt.max_iterations) {
        ++it;
        for (std::size_t c = 0; c < R; ++c) {
            double s = 0.0;
            for (std::size_t a = 0; a < C; ++a)
                if (m.values(c, a)) s += out.complexity[a];
            f_next[c] = s;
        }
        for (std::size_t a = 0; a < C; ++a) {
            double s = 0.0;
            for (std::size_t c = 0; c < R; ++c)
                if (m.values(c, a)) s += 1.0 / out.fitness[c];
            q_next[a] = 1.0 / s;
        }
        detail::normalize_mean(f_next);
        detail::normalize_mean(q_next);
        out.fitness.swap(f_next);
        out.complexity.swap(q_next);
        observer(it, std::span<const double>(out.fitness), std::span<const double>(out.complexity));

        auto f_new = detail::ranking_order(out.fitness, out.country_ids, opt.tie_tolerance);
        auto q_new = detail::ranking_order(out.complexity, out.activity_ids, opt.tie_tolerance);
        if (f_new == f_order && q_new == q_order) {
            ++out.stable_streak;
        } else {
            out.stable_streak = 0;
            f_order.swap(f_new);
            q_order.swap(q_new);
        }
        if (out.stable_streak >= opt.stability_window) {
            out.stable = true;
            break;
        }
    }
    out.iterations = it;
    out.country_rank = detail::ranks_from_order(f_order);
    out.activity_rank = detail::ranks_from_order(q_order);
    return out;
}

inline FitnessComplexity run_efc(const BinaryMatrix& m, const EfcOptions& opt = {}) {
    return run_efc(m, opt, [](int, std::span<const double>, std::span<const double>) {});
}

// Strips all-zero rows and columns, ranks the rest, and gives stripped nodes
// a shared worst rank (one past the last ranked node) with zero values.
inline FitnessComplexity rank_efc(const BinaryMatrix& m, const EfcOptions& opt = {}) {
    std::vector<std::size_t> rows, cols;
    for (std::size_t c = 0; c < m.countries(); ++c)
        if (m.diversification[c] > 0) rows.push_back(c);
    for (std::size_t a = 0; a < m.activities(); ++a)
        if (m.ubiquity[a] > 0) cols.push_back(a);
    if (rows.empty() || cols.empty()) throw Error("fitness-complexity: matrix has no links");

    std::vector<std::string> rid, cid;
    for (auto c : rows) rid.push_back(m.country_ids[c]);
    for (auto a : cols) cid.push_back(m.activity_ids[a]);
    const auto core = run_efc(make_binary(m.window, rid, cid, select_cols(select_rows(m.values, rows), cols)), opt);

    FitnessComplexity out;
    out.country_ids = m.country_ids;
    out.activity_ids = m.activity_ids;
    out.fitness.assign(m.countries(), 0.0);
    out.complexity.assign(m.activities(), 0.0);
    out.country_rank.assign(m.countries(), static_cast<int>(rows.size()) + 1);
    out.activity_rank.assign(m.activities(), static_cast<int>(cols.size()) + 1);
    out.country_stripped.assign(m.countries(), true);
    out.activity_stripped.assign(m.activities(), true);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        out.fitness[rows[i]] = core.fitness[i];
        out.country_rank[rows[i]] = core.country_rank[i];
        out.country_stripped[rows[i]] = false;
    }
    for (std::size_t j = 0; j < cols.size(); ++j) {
        out.complexity[cols[j]] = core.complexity[j];
        out.activity_rank[cols[j]] = core.activity_rank[j];
        out.activity_stripped[cols[j]] = false;
    }
    out.iterations = core.iterations;
    out.stable_streak = core.stable_streak;
    out.stable = core.stable;
    return out;
}

struct CurvePoint {
    std::size_t position = 0;
    std::string label;
    int rank = 0;
    int degree_change = 0;
    int cumulative = 0;
    // 0 = none, otherwise 25/50/75: first node of the top quarter, half or
    // three quarters by complexity.
    int quartile = 0;
};

struct CumulativeCurve {
    Layer side = Layer::product;
    std::vector<CurvePoint> points;
    std::array<std::size_t, 3> quartile_positions{};
};

// Nodes ordered from least to most complex (the most complex node comes
// last); running sum of degree(later lag) - degree(earlier lag).
inline CumulativeCurve cumulative_link_difference(const ValidatedNetwork& earlier,
                                                  const ValidatedNetwork& later,
                                                  const FitnessComplexity& ranking, Layer side) {
    if (earlier.tech_ids != later.tech_ids || earlier.product_ids != later.product_ids)
        throw Error("cumulative difference: networks have different axes");
    const auto& ids = side == Layer::technology ? earlier.tech_ids : earlier.product_ids;
    const auto d0 = side == Layer::technology ? earlier.tech_degree() : earlier.product_degree();
    const auto d1 = side == Layer::technology ? later.tech_degree() : later.product_degree();

    std::unordered_map<std::string, std::size_t> rank_index;
    for (std::size_t i = 0; i < ranking.activity_ids.size(); ++i) rank_index.emplace(ranking.activity_ids[i], i);

    struct Node {
        std::size_t axis;
        int rank;
    };
    std::vector<Node> nodes;
    for (std::size_t i = 0; i < ids.size(); ++i) {
        const auto it = rank_index.find(ids[i]);
        if (it == rank_index.end()) throw Error("cumulative difference: node '" + ids[i] + "' has no complexity rank");
        nodes.push_back({i, ranking.activity_rank[it->second]});
    }
    std::sort(nodes.begin(), nodes.end(), [&](const Node& a, const Node& b) {
        if (a.rank != b.rank) return a.rank > b.rank;
        return ids[a.axis] > ids[b.axis];
    });

    CumulativeCurve curve;
    curve.side = side;
    const std::size_t n = nodes.size();
    const std::array<int, 3> percents{25, 50, 75};
    for (std::size_t q = 0; q < 3; ++q)
        curve.quartile_positions[q] = n - (n * static_cast<std::size_t>(percents[q])) / 100;
    int running = 0;
    for (std::size_t pos = 0; pos < n; ++pos) {
        const auto& node = nodes[pos];
        const int delta = d1[node.axis] - d0[node.axis];
        running += delta;
        int flag = 0;
        for (std::size_t q = 0; q < 3; ++q)
            if (curve.quartile_positions[q] == pos && n > 0) flag = percents[q];
        curve.points.push_back({pos, ids[node.axis], node.rank, delta, running, flag});
    }
    return curve;
}

}  // namespace greenlink
