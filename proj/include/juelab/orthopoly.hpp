#pragma once

// Monic orthogonal polynomials for w(x,a) via the discretized Stieltjes
// procedure: x P_n = P_{n+1} + beta_n P_{n-1}.

#include <string>
#include <vector>

#include "juelab/weight.hpp"

namespace juelab {

template <class T>
struct RecurrenceTable {
    WeightParams<T> wp;
    std::size_t n_max = 0;
    std::vector<T> beta;    ///< beta[n] for 1 <= n <= n_max; beta[0] = 0.
    std::vector<T> h;       ///< h[n], 0 <= n <= n_max.
    std::vector<T> p_coef;  ///< p(n,a), coefficient of x^{n-2} in P_n.
    std::size_t nodes_per_interval = 0;
};

template <class X>
struct PolyEval {
    std::size_t n = 0;
    X x{};
    X value{};
    X value_prev{};  ///< P_{n-1}(x); zero for n = 0.
};

template <class T>
struct TableOptions {
    RuleCache<T>* cache = nullptr;
    /// Largest node count per interval tried before giving up.
    std::size_t max_nodes = std::size_t{1} << 14;
    /// Nonzero: skip node doubling and use exactly this many nodes.
    std::size_t fixed_nodes = 0;
};

namespace detail {

template <class T>
RecurrenceTable<T> stieltjes(const WeightParams<T>& wp, std::size_t n_max, std::size_t m, RuleCache<T>* cache) {
    if (n_max >= 2 * m) throw InvalidArgument("stieltjes: too few nodes for the requested degree");
    const auto rule = complement_rule(wp, m, cache);
    // P_n^2 and x P_n P_{n-1} are even, so the right half carries half of every inner product.
    const auto& x = rule.right.nodes;
    const auto& w = rule.right.weights;

    RecurrenceTable<T> t;
    t.wp = wp;
    t.n_max = n_max;
    t.nodes_per_interval = m;
    t.beta.assign(n_max + 1, T(0));
    t.h.assign(n_max + 1, T(0));
    t.p_coef.assign(n_max + 1, T(0));

    std::vector<T> prev(m, T(0)), cur(m, T(1)), next(m);
    for (std::size_t n = 0; n <= n_max; ++n) {
        T hn = 0;
        for (std::size_t i = 0; i < m; ++i) hn += w[i] * cur[i] * cur[i];
        hn *= 2;
        if (!(hn > 0) || !isfinite(hn))
            throw PrecisionLoss("Stieltjes norm h_" + std::to_string(n) + " lost positivity",
                                bits_of<T>() + 2 * static_cast<unsigned>(n_max));
        t.h[n] = hn;
        if (n >= 1) t.beta[n] = hn / t.h[n - 1];
        if (n == n_max) break;
        const T& b = t.beta[n];
        for (std::size_t i = 0; i < m; ++i) next[i] = x[i] * cur[i] - b * prev[i];
        std::swap(prev, cur);
        std::swap(cur, next);
    }
    for (std::size_t n = 2; n <= n_max; ++n) t.p_coef[n] = t.p_coef[n - 1] - t.beta[n - 1];
    return t;
}

template <class T>
T max_relative_change(const RecurrenceTable<T>& coarse, const RecurrenceTable<T>& fine) {
    T worst = abs(coarse.h[0] - fine.h[0]) / fine.h[0];
    for (std::size_t n = 1; n <= fine.n_max; ++n)
        worst = std::max(worst, T(abs(coarse.beta[n] - fine.beta[n]) / fine.beta[n]));
    return worst;
}

}  // namespace detail

/// beta_n, h_n and p(n,a) up to n_max. Node counts double until every
/// beta_n (and h_0) moves by less than 2^(bits/2 - bits) relative; the finer
/// table of the converged pair is returned.
template <class T>
RecurrenceTable<T> build_table(const WeightParams<T>& wp, std::size_t n_max, const TableOptions<T>& opts = {}) {
    wp.validate();
    if (n_max < 1) throw InvalidArgument("build_table: n_max must be >= 1");
    if (opts.fixed_nodes) return detail::stieltjes(wp, n_max, opts.fixed_nodes, opts.cache);

    std::size_t m = 16;
    while (m < n_max + 8) m *= 2;
    const T tol = ulp_scaled<T>(static_cast<int>(bits_of<T>() / 2));
    auto coarse = detail::stieltjes(wp, n_max, m, opts.cache);
    while (2 * m <= opts.max_nodes) {
        m *= 2;
        auto fine = detail::stieltjes(wp, n_max, m, opts.cache);
        if (detail::max_relative_change(coarse, fine) <= tol) return fine;
        coarse = std::move(fine);
    }
    throw NonConvergence("build_table: node doubling", opts.max_nodes);
}

/// P_n(x) and P_{n-1}(x) by the forward recurrence; x may be complex.
template <class T, class X>
PolyEval<X> eval_monic(const RecurrenceTable<T>& table, std::size_t n, const X& x) {
    if (n > table.n_max) throw InvalidArgument("eval_monic: n exceeds the table's n_max");
    X prev = X(0), cur = X(1);
    for (std::size_t k = 0; k < n; ++k) {
        X next = x * cur - X(table.beta[k]) * prev;
        prev = std::move(cur);
        cur = std::move(next);
    }
    return PolyEval<X>{n, x, cur, prev};
}

/// P_0(x), ..., P_{n_max}(x).
template <class T, class X>
std::vector<X> eval_monic_all(const RecurrenceTable<T>& table, const X& x) {
    std::vector<X> out(table.n_max + 1);
    out[0] = X(1);
    if (table.n_max >= 1) out[1] = x;
    for (std::size_t k = 1; k < table.n_max; ++k) out[k + 1] = x * out[k] - X(table.beta[k]) * out[k - 1];
    return out;
}

}  // namespace juelab
