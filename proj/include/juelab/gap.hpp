#pragma once

// Gap probability P(a,n) = prod h_j(a)/h_j(0), the quantity
// H_n(a) = a(a^2-1) d/da ln P, its section-5 equations, and a Monte Carlo
// estimate of P for small n.

#include <cstdint>
#include <future>
#include <thread>
#include <vector>

#include "juelab/dynamics.hpp"

namespace juelab {

template <class T>
struct GapResult {
    std::size_t n = 0;
    T a;
    T prob;      ///< P(a,n)
    T log_prob;  ///< ln P(a,n)
    T H;         ///< H_n(a)
    T logdP;     ///< d/da ln P(a,n) = -sum_{j<n} R_j(a)
};

/// P, H and d/da ln P from tables at a and at 0 (both need n_max >= n - 1).
template <class T>
GapResult<T> gap_from_tables(const RecurrenceTable<T>& at_a, const RecurrenceTable<T>& at_zero, std::size_t n) {
    if (n < 1) throw InvalidArgument("gap_probability: n must be >= 1");
    if (at_a.n_max + 1 < n || at_zero.n_max + 1 < n) throw InvalidArgument("gap_probability: tables too short");
    if (at_zero.wp.a != 0) throw InvalidArgument("gap_probability: reference table must have a = 0");
    const T& a = at_a.wp.a;
    T log_p = 0;
    for (std::size_t j = 0; j < n; ++j) {
        if (!(at_a.h[j] > 0))
            throw PrecisionLoss("gap_probability: h_" + std::to_string(j) + " not positive", 2 * bits_of<T>());
        log_p += log(at_a.h[j]) - log(at_zero.h[j]);
    }
    const auto st = ladder_states(at_a);
    T sum_r = 0;
    for (std::size_t j = 0; j < n; ++j) sum_r += st[j].R;
    GapResult<T> g;
    g.n = n;
    g.a = a;
    g.log_prob = log_p;
    g.prob = exp(log_p);
    g.logdP = -sum_r;
    g.H = a * (1 - a) * (1 + a) * sum_r;
    return g;
}

template <class T>
GapResult<T> gap_probability(const WeightParams<T>& wp, std::size_t n, const TableOptions<T>& opts = {}) {
    wp.validate();
    if (n < 1) throw InvalidArgument("gap_probability: n must be >= 1");
    const std::size_t n_max = std::max<std::size_t>(n, 1);
    const auto at_a = build_table(wp, n_max, opts);
    const auto at_zero = wp.a == 0 ? at_a : build_table(WeightParams<T>{wp.alpha, T(0)}, n_max, opts);
    return gap_from_tables(at_a, at_zero, n);
}

/// P(a,n) as a ratio of moment determinants (n <= 12).
template <class T>
T hankel_gap_probability(const WeightParams<T>& wp, std::size_t n) {
    wp.validate();
    if (n < 1 || n > 12) throw InvalidArgument("hankel_gap_probability: need 1 <= n <= 12");
    const WeightParams<T> free{wp.alpha, T(0)};
    std::vector<T> num(n * n), den(n * n);
    std::vector<T> mu_a(2 * n - 1), mu_0(2 * n - 1);
    for (std::size_t k = 0; k < 2 * n - 1; ++k) {
        mu_a[k] = moment(k, wp);
        mu_0[k] = moment(k, free);
    }
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            num[i * n + j] = mu_a[i + j];
            den[i * n + j] = mu_0[i + j];
        }
    return small_det(std::move(num), n) / small_det(std::move(den), n);
}

/// H_n(a) = a(1-a^2) sum_{j<n} R_j(a) from a single table.
template <class T>
T h_value(const RecurrenceTable<T>& table, std::size_t n) {
    if (n < 1 || n > table.n_max + 1) throw InvalidArgument("h_value: need 1 <= n <= n_max + 1");
    const auto st = ladder_states(table);
    T sum_r = 0;
    for (std::size_t j = 0; j < n; ++j) sum_r += st[j].R;
    const T& a = table.wp.a;
    return a * (1 - a) * (1 + a) * sum_r;
}

/// H_n at each abscissa of the family.
template <class T>
std::vector<T> h_on_family(const TableFamily<T>& fam, std::size_t n) {
    std::vector<T> out;
    for (const auto& t : fam.tables) out.push_back(h_value(t, n));
    return out;
}

/// d/da ln P by finite differences of sum_j ln h_j over the family, next to -sum_j R_j.
template <class T>
std::pair<T, T> log_gap_derivative(const TableFamily<T>& fam, std::size_t n) {
    std::vector<T> logs;
    for (const auto& t : fam.tables) {
        T s = 0;
        for (std::size_t j = 0; j < n; ++j) s += log(t.h[j]);
        logs.push_back(s);
    }
    const auto st = ladder_states(fam.center());
    T sum_r = 0;
    for (std::size_t j = 0; j < n; ++j) sum_r += st[j].R;
    return {detail::grid_derivative(fam, 1, logs), -sum_r};
}

/// Numerator N of r_n = N/D, in terms of (H, H', H'').
template <class T>
T rna_numerator(const T& a, const T& n, const T& al, const T& H, const T& Hp, const T& Hpp) {
    const T A2 = (a - 1) * (a + 1);
    const T m = al + n;
    const T a2 = a * a, a3 = a2 * a, a4 = a2 * a2, a5 = a4 * a;
    const T q = a2 * n * n + 2 * al * a2 * n + 1;
    return a2 * A2 * A2 * A2 * Hpp * Hpp + 4 * a2 * A2 * A2 * (H - a * Hp) * Hpp + 4 * a * A2 * A2 * Hp * Hp * Hp -
           4 * A2 * ((5 * a2 - 1) * H + (m - 1) * (m + 1) * a4 - 4 * n * (n + 2 * al) * a2) * Hp * Hp +
           (32 * a * A2 * H * H +
            (8 * a5 * (2 * al * al + 2 * n * n + 4 * al * n - 1) - 8 * a3 * (4 * n * n + 8 * al * n - 1) +
             32 * a * n * (2 * al + n)) *
                H -
            16 * a3 * m * m * q) *
               Hp -
           16 * A2 * H * H * H -
           (4 * a4 * (4 * al * al + 4 * n * n + 8 * al * n - 1) - 4 * a2 * (4 * n * n + 8 * al * n - 1) +
            16 * n * (2 * al + n)) *
               H * H +
           16 * a2 * m * m * q * H;
}

namespace detail {

// The braced factor of D (D = 8(n+alpha) times this), as separate summands.
template <class T>
std::vector<T> rna_den_terms(const T& a, const T& n, const T& al, const T& H, const T& Hp, const T& Hpp) {
    const T A2 = (a - 1) * (a + 1);
    const T m = al + n;
    const T a2 = a * a, a4 = a2 * a2;
    return {a2 * A2 * A2 * Hpp, -2 * a * A2 * (a2 * (2 * n * n + 4 * al * n + 1) - 2 * H) * Hp, -4 * A2 * H * H,
            -2 * a2 * ((2 * al * al - 1) * a2 + 2 * n * n + 4 * al * n + 1) * H,
            4 * a4 * m * m * (a2 * n * n + 2 * al * a2 * n + 1)};
}

// Summands of the squared bracket on the left of the H_n equation.
template <class T>
std::vector<T> hna_left_terms(const T& a, const T& n, const T& al, const T& H, const T& Hp, const T& Hpp) {
    const T A2 = (a - 1) * (a + 1);
    const T m = al + n;
    const T a2 = a * a, a4 = a2 * a2, a6 = a4 * a2;
    const T A2sq = A2 * A2;
    return {
        a2 * A2sq * A2sq * Hpp * Hpp,
        -4 * a2 * A2sq * ((a2 * a - a) * Hp - A2 * H - 2 * a2 * m * m) * Hpp,
        4 * a * A2sq * A2 * Hp * Hp * Hp,
        -4 * A2sq * (a4 * (m - 1) * (m + 1) - 4 * a2 * n * (2 * al + n) + (5 * a2 - 1) * H) * Hp * Hp,
        8 * a * A2 *
            (4 * A2 * H * H +
             (a4 * (2 * al * al + 2 * n * n + 4 * al * n - 1) + a2 * (4 * al * al + 1) + 4 * n * (2 * al + n)) * H -
             2 * a2 * m * m * (3 * a2 * n * n + 6 * al * a2 * n + a2 + 1)) *
            Hp,
        -16 * A2sq * H * H * H,
        -4 * A2 * (a4 * (4 * al * al + 4 * n * n + 8 * al * n - 1) + a2 * (8 * al * al + 4 * n * n + 8 * al * n + 1) +
                   4 * n * (2 * al + n)) *
            H * H,
        -16 * a2 * m * m * (a4 * (2 * al * al - n * n - 2 * al * n - 1) + 3 * a2 * n * (2 * al + n) + 1) * H,
        32 * a6 * m * m * m * m * (a2 * n * n + 2 * al * a2 * n + 1),
    };
}

}  // namespace detail

template <class T>
T rna_denominator(const T& a, const T& n, const T& al, const T& H, const T& Hp, const T& Hpp) {
    T s = 0;
    for (const auto& t : detail::rna_den_terms(a, n, al, H, Hp, Hpp)) s += t;
    return 8 * (al + n) * s;
}

/// Normalized residual of the second-order equation for H_n.
template <class T>
T residual_hna(const T& a, const T& n, const T& al, const T& H, const T& Hp, const T& Hpp) {
    const T m = al + n;
    T left = 0, left_scale = 0;
    for (const auto& t : detail::hna_left_terms(a, n, al, H, Hp, Hpp)) {
        left += t;
        left_scale = std::max(left_scale, T(abs(t)));
    }
    T f = 0, f_scale = 0;
    for (const auto& t : detail::rna_den_terms(a, n, al, H, Hp, Hpp)) {
        f += t;
        f_scale = std::max(f_scale, T(abs(t)));
    }
    const T g1 = pow(a, 4) * m * m;
    const T g2 = (a - 1) * (a + 1) * (H - a * Hp);
    const T right = 64 * m * m * (g1 + g2) * f * f;
    const T scale = std::max(left_scale * left_scale, T(64 * m * m * std::max(abs(g1), abs(g2)) * f_scale * f_scale));
    return scale == 0 ? T(0) : T(abs(left * left - right) / scale);
}

template <class T>
struct HnOdeReport {
    T res_equ4;
    T res_rna;  ///< |r_n - N/D|
    T res_hna;
    T D_value;
    T H, H_p, H_pp;
    ResidualReport<T> all;  ///< the above plus equ1, rnp4, rnp5
};

/// Section-5 equations at the family centre; H', H'' and r_n' by finite differences.
template <class T>
HnOdeReport<T> hn_ode_report(const TableFamily<T>& fam, std::size_t n) {
    const auto hs = h_on_family(fam, n);
    const auto j = fd_jet(fam, n);
    const T nn = T(static_cast<double>(n));
    const T& a = j.a;
    const T& al = j.alpha;
    const T& r = j.r;
    const T m = nn + al;
    const T one_m = (1 - a) * (1 + a);
    const T k1 = 2 * nn + 2 * al + 1;

    HnOdeReport<T> rep;
    rep.H = hs[static_cast<std::size_t>(fam.half)];
    rep.H_p = detail::grid_derivative(fam, 1, hs);
    rep.H_pp = detail::grid_derivative(fam, 2, hs);
    const T& H = rep.H;
    const T& Hp = rep.H_p;
    const T& Hpp = rep.H_pp;

    rep.res_equ4 = normalized_residual({a * Hp, -H, -one_m * r * r, 2 * m * a * a * r});
    rep.D_value = rna_denominator(a, nn, al, H, Hp, Hpp);
    T d_scale = 0;
    for (const auto& t : detail::rna_den_terms(a, nn, al, H, Hp, Hpp)) d_scale = std::max(d_scale, T(abs(t)));
    if (rep.D_value == 0 || abs(rep.D_value) <= 8 * m * d_scale * ulp_scaled<T>(16))
        throw ZeroDenominator("hn_ode_report: D vanishes at a = " + a.str(20) + ", n = " + std::to_string(n));
    rep.res_rna = abs(r - rna_numerator(a, nn, al, H, Hp, Hpp) / rep.D_value);
    rep.res_hna = residual_hna(a, nn, al, H, Hp, Hpp);

    rep.all.add("equ4", rep.res_equ4);
    rep.all.add("rna", rep.res_rna);
    rep.all.add("hna", rep.res_hna);
    rep.all.add("equ1", normalized_residual({k1 * (k1 - 2) * j.beta, H, -2 * m * one_m * r, -(nn * nn + 2 * nn * al)}));
    const T rp4 = (a * Hpp + 2 * a * r * r + 4 * a * m * r) / (2 * (one_m * r - a * a * m));
    rep.all.add("rnp4", normalized_residual({j.r_p, -rp4}));
    rep.all.add("rnp5", normalized_residual({one_m * one_m * j.r_p * j.r_p, 8 * one_m * m * r * r * r,
                                             -4 * ((4 * a * a - 1) * m * m + al * al + H) * r * r, -8 * a * m * Hp * r,
                                             -Hp * Hp}));
    return rep;
}

struct McEstimate {
    double estimate = 0;
    double stderr_ = 0;
    std::size_t samples = 0;
};

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

struct McSums {
    double sx = 0, sy = 0, sxx = 0, syy = 0;
};

// One chunk: uniform points on [-1,1]^n, f = Vandermonde^2 * prod (1-x^2)^alpha.
inline McSums mc_chunk(double alpha, double a, std::size_t n, std::uint64_t key, std::size_t count) {
    McSums s;
    std::vector<double> x(n);
    std::uint64_t ctr = 0;
    for (std::size_t i = 0; i < count; ++i) {
        bool outside = true;
        for (auto& xi : x) {
            const std::uint64_t u = splitmix64(key + 0x632be59bd9b4e019ULL * ++ctr);
            xi = 2.0 * (static_cast<double>(u >> 11) * 0x1.0p-53) - 1.0;
            outside = outside && std::abs(xi) >= a;
        }
        double f = 1;
        for (std::size_t p = 0; p < n; ++p) {
            f *= std::pow((1 - x[p]) * (1 + x[p]), alpha);
            for (std::size_t q = p + 1; q < n; ++q) f *= (x[p] - x[q]) * (x[p] - x[q]);
        }
        s.sx += f;
        s.sxx += f * f;
        if (outside) {
            s.sy += f;
            s.syy += f * f;
        }
    }
    return s;
}

}  // namespace detail

/// Ratio estimate of P(a,n): sum f 1[all |x_i| >= a] / sum f, standard error
/// by the delta method. Chunks have seeds derived from (seed, chunk index) and
/// are merged in index order, so the result does not depend on thread count.
template <class T>
McEstimate mc_gap_probability(const WeightParams<T>& wp, std::size_t n, std::size_t samples, std::uint64_t seed,
                              unsigned threads = 0) {
    wp.validate();
    if (n < 1 || n > 4) throw InvalidArgument("mc_gap_probability: need 1 <= n <= 4");
    if (samples < 10000) throw InvalidArgument("mc_gap_probability: need at least 10^4 samples");
    const double alpha = static_cast<double>(wp.alpha);
    const double a = static_cast<double>(wp.a);
    constexpr std::size_t chunk = std::size_t{1} << 15;
    const std::size_t chunks = (samples + chunk - 1) / chunk;
    if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
    threads = static_cast<unsigned>(std::min<std::size_t>(threads, chunks));

    std::vector<detail::McSums> parts(chunks);
    auto work = [&](std::size_t first) {
        for (std::size_t c = first; c < chunks; c += threads) {
            const std::size_t count = std::min(chunk, samples - c * chunk);
            parts[c] = detail::mc_chunk(alpha, a, n, detail::splitmix64(seed ^ detail::splitmix64(c)), count);
        }
    };
    std::vector<std::future<void>> jobs;
    for (unsigned t = 1; t < threads; ++t) jobs.push_back(std::async(std::launch::async, work, t));
    work(0);
    for (auto& j : jobs) j.get();

    detail::McSums tot;
    for (const auto& p : parts) {
        tot.sx += p.sx;
        tot.sy += p.sy;
        tot.sxx += p.sxx;
        tot.syy += p.syy;
    }
    const double N = static_cast<double>(samples);
    const double ratio = tot.sy / tot.sx;
    // Var of (Y - ratio X), using X Y = Y^2 since Y = X on the event.
    const double v = (tot.syy - 2 * ratio * tot.syy + ratio * ratio * tot.sxx) / N;
    const double mean_x = tot.sx / N;
    return {ratio, std::sqrt(std::max(v, 0.0) / N) / mean_x, samples};
}

}  // namespace juelab
