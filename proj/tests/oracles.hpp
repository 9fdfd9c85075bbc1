#pragma once

// Reference implementations written straight from the formulas, sharing no
// code with the library beyond its plain data types.

#include <cmath>
#include <cstdint>
#include <map>
#include <random>
#include <vector>

#include "greenlink/matrix.hpp"

namespace oracle {

using greenlink::Matrix;

// Balassa index: (X_ca / sum_a' X_ca') / (sum_c' X_c'a / sum_c'a' X_c'a').
inline Matrix<double> rca(const Matrix<double>& x) {
    const std::size_t R = x.rows(), C = x.cols();
    std::vector<double> row(R, 0.0), col(C, 0.0);
    double total = 0.0;
    for (std::size_t c = 0; c < R; ++c)
        for (std::size_t a = 0; a < C; ++a) {
            row[c] += x(c, a);
            col[a] += x(c, a);
            total += x(c, a);
        }
    Matrix<double> out(R, C, 0.0);
    for (std::size_t c = 0; c < R; ++c)
        for (std::size_t a = 0; a < C; ++a)
            if (x(c, a) > 0.0) out(c, a) = (x(c, a) / row[c]) / (col[a] / total);
    return out;
}

// Assist entry by entry, countries summed in index order.
inline Matrix<double> assist(const Matrix<std::uint8_t>& tech, const Matrix<std::uint8_t>& prod) {
    const std::size_t N = tech.rows(), T = tech.cols(), P = prod.cols();
    std::vector<int> d(N, 0);
    for (std::size_t c = 0; c < N; ++c)
        for (std::size_t p = 0; p < P; ++p) d[c] += prod(c, p);
    Matrix<double> out(T, P, 0.0);
    for (std::size_t t = 0; t < T; ++t) {
        int u = 0;
        for (std::size_t c = 0; c < N; ++c) u += tech(c, t);
        if (u == 0) continue;
        for (std::size_t p = 0; p < P; ++p) {
            double s = 0.0;
            for (std::size_t c = 0; c < N; ++c)
                if (tech(c, t) && prod(c, p) && d[c] > 0) s += 1.0 / static_cast<double>(d[c]);
            out(t, p) = s / static_cast<double>(u);
        }
    }
    return out;
}

// Every 0/1 matrix of the given shape with its probability under independent
// Bernoulli(p) entries.
inline std::vector<std::pair<Matrix<std::uint8_t>, double>> enumerate(const Matrix<double>& p) {
    const std::size_t cells = p.rows() * p.cols();
    std::vector<std::pair<Matrix<std::uint8_t>, double>> out;
    for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << cells); ++mask) {
        Matrix<std::uint8_t> m(p.rows(), p.cols());
        double w = 1.0;
        for (std::size_t k = 0; k < cells; ++k) {
            const bool one = (mask >> k) & 1u;
            m.data()[k] = one;
            w *= one ? p.data()[k] : 1.0 - p.data()[k];
        }
        if (w > 0.0) out.emplace_back(std::move(m), w);
    }
    return out;
}

// Exact P(empirical > null) per link, over all paired configurations.
inline Matrix<double> exceedance(const Matrix<double>& empirical, const Matrix<double>& p_tech,
                                 const Matrix<double>& p_prod) {
    Matrix<double> out(empirical.rows(), empirical.cols(), 0.0);
    const auto techs = enumerate(p_tech);
    const auto prods = enumerate(p_prod);
    for (const auto& [mt, wt] : techs)
        for (const auto& [mp, wp] : prods) {
            const auto null = assist(mt, mp);
            for (std::size_t k = 0; k < out.data().size(); ++k)
                if (empirical.data()[k] > null.data()[k]) out.data()[k] += wt * wp;
        }
    return out;
}

// Fitness-complexity iterated in long double for a fixed number of steps.
struct Efc {
    std::vector<long double> fitness;
    std::vector<long double> complexity;
};

inline Efc efc(const Matrix<std::uint8_t>& m, int iterations) {
    const std::size_t R = m.rows(), C = m.cols();
    Efc e{std::vector<long double>(R, 1.0L), std::vector<long double>(C, 1.0L)};
    for (int it = 0; it < iterations; ++it) {
        std::vector<long double> f(R, 0.0L), q(C, 0.0L);
        for (std::size_t c = 0; c < R; ++c)
            for (std::size_t a = 0; a < C; ++a)
                if (m(c, a)) f[c] += e.complexity[a];
        for (std::size_t a = 0; a < C; ++a) {
            long double s = 0.0L;
            for (std::size_t c = 0; c < R; ++c)
                if (m(c, a)) s += 1.0L / e.fitness[c];
            q[a] = 1.0L / s;
        }
        long double fm = 0.0L, qm = 0.0L;
        for (auto v : f) fm += v;
        for (auto v : q) qm += v;
        fm /= static_cast<long double>(R);
        qm /= static_cast<long double>(C);
        for (auto& v : f) v /= fm;
        for (auto& v : q) v /= qm;
        e.fitness = f;
        e.complexity = q;
    }
    return e;
}

template <typename T = std::uint8_t>
Matrix<T> random_binary(std::mt19937_64& rng, std::size_t rows, std::size_t cols, double density) {
    std::bernoulli_distribution coin(density);
    Matrix<T> m(rows, cols);
    for (auto& v : m.data()) v = coin(rng);
    return m;
}

inline Matrix<double> random_weights(std::mt19937_64& rng, std::size_t rows, std::size_t cols,
                                     double zero_share = 0.3) {
    std::bernoulli_distribution zero(zero_share);
    std::lognormal_distribution<double> size(0.0, 2.0);
    Matrix<double> m(rows, cols);
    for (auto& v : m.data()) v = zero(rng) ? 0.0 : size(rng);
    return m;
}

}  // namespace oracle
