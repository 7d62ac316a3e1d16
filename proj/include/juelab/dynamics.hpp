#pragma once

// Evolution in a: derivatives of beta_n, h_n, r_n, R_n (closed form or by
// finite differences over a local a-grid) and the residuals of the coupled
// Riccati system and the second-order equations built from them.

#include <string>
#include <vector>

#include "juelab/ladder.hpp"

namespace juelab {

/// Tables at a + k*step, k = -half..half, all on the centre's node count so
/// that discretization error varies smoothly across the grid.
template <class T>
struct TableFamily {
    WeightParams<T> wp;
    T step;
    int half = 2;
    std::vector<RecurrenceTable<T>> tables;

    const RecurrenceTable<T>& center() const { return tables[static_cast<std::size_t>(half)]; }
    T abscissa(int k) const { return wp.a + step * k; }
};

template <class T>
TableFamily<T> build_family(const WeightParams<T>& wp, std::size_t n_max, const T& step,
                            const TableOptions<T>& opts = {}, int half = 2) {
    wp.validate();
    if (!(step > 0)) throw InvalidArgument("build_family: step must be positive");
    if (half < 2) throw InvalidArgument("build_family: need at least two points per side");
    if (wp.a - step * half < 0 || !(wp.a + step * half < 1))
        throw InvalidArgument("build_family: a-grid leaves [0, 1)");
    TableFamily<T> fam{wp, step, half, {}};
    auto center = build_table(wp, n_max, opts);
    TableOptions<T> fixed = opts;
    fixed.fixed_nodes = center.nodes_per_interval;
    for (int k = -half; k <= half; ++k) {
        if (k == 0) {
            fam.tables.push_back(center);
            continue;
        }
        fam.tables.push_back(build_table(WeightParams<T>{wp.alpha, fam.abscissa(k)}, n_max, fixed));
    }
    return fam;
}

enum class DerivMode { analytic, finite_difference };

template <class T>
struct DerivBundle {
    std::size_t n = 0;
    T a;
    T beta_p;
    T h_p;
    T r_p;
    T R_p;
    DerivMode mode = DerivMode::analytic;
};

/// Values and a-derivatives at one (n, a); second derivatives only in FD mode.
template <class T>
struct Jet {
    std::size_t n = 0;
    T alpha, a;
    T beta, beta_p, beta_pp;
    T h, h_p;
    T r, r_p, r_pp;
    T R, R_p, R_pp;
    T R_prev;
    T p, p_p;
};

namespace detail {

template <class T>
T grid_derivative(const TableFamily<T>& fam, int order, const std::vector<T>& values) {
    std::vector<std::pair<T, T>> pts;
    for (int k = -fam.half; k <= fam.half; ++k)
        pts.emplace_back(fam.abscissa(k), values[static_cast<std::size_t>(k + fam.half)]);
    return fd_derivative(pts, order, fam.step);
}

}  // namespace detail

/// All quantities at the family centre, derivatives by finite differences.
template <class T>
Jet<T> fd_jet(const TableFamily<T>& fam, std::size_t n) {
    const auto& c = fam.center();
    if (n < 1 || n > c.n_max) throw InvalidArgument("fd_jet: need 1 <= n <= n_max");
    std::vector<T> beta, h, r, R, p;
    for (const auto& t : fam.tables) {
        const auto st = ladder_states(t);
        beta.push_back(t.beta[n]);
        h.push_back(t.h[n]);
        r.push_back(st[n].r);
        R.push_back(st[n].R);
        p.push_back(t.p_coef[n]);
    }
    const auto mid = static_cast<std::size_t>(fam.half);
    const auto st = ladder_states(c);
    Jet<T> j;
    j.n = n;
    j.alpha = fam.wp.alpha;
    j.a = fam.wp.a;
    j.beta = beta[mid];
    j.beta_p = detail::grid_derivative(fam, 1, beta);
    j.beta_pp = detail::grid_derivative(fam, 2, beta);
    j.h = h[mid];
    j.h_p = detail::grid_derivative(fam, 1, h);
    j.r = r[mid];
    j.r_p = detail::grid_derivative(fam, 1, r);
    j.r_pp = detail::grid_derivative(fam, 2, r);
    j.R = R[mid];
    j.R_p = detail::grid_derivative(fam, 1, R);
    j.R_pp = detail::grid_derivative(fam, 2, R);
    j.R_prev = st[n - 1].R;
    j.p = p[mid];
    j.p_p = detail::grid_derivative(fam, 1, p);
    return j;
}

/// Closed-form first derivatives from a single table. At a = 0 the Riccati
/// equation for R_n is used in its limiting form R' = R^2 - 2 r'(0) R.
template <class T>
DerivBundle<T> derivative_bundle(const RecurrenceTable<T>& table, std::size_t n) {
    if (n < 1 || n > table.n_max) throw InvalidArgument("derivative_bundle: need 1 <= n <= n_max");
    const auto st = ladder_states(table);
    const T& a = table.wp.a;
    const T& alpha = table.wp.alpha;
    const T nn = T(static_cast<double>(n));
    const T one_m = (1 - a) * (1 + a);
    const T& beta = table.beta[n];
    const T& R = st[n].R;
    const T& r = st[n].r;
    const T pa = eval_monic(table, n, a).value;

    DerivBundle<T> d;
    d.n = n;
    d.a = a;
    d.mode = DerivMode::analytic;
    d.beta_p = beta * (st[n - 1].R - R);
    d.h_p = -2 * pow(one_m, alpha) * pa * pa;
    d.r_p = (2 * beta * R + (2 * nn + 2 * alpha + 1) * d.beta_p) / one_m;
    if (a == 0)
        d.R_p = R * R - 2 * d.r_p * R;
    else
        d.R_p = R * R + (2 * a * a * (nn + alpha) + 2 * one_m * r) / (-a * one_m) * R +
                2 * (2 * nn + 2 * alpha + 1) * r / one_m;
    return d;
}

template <class T>
DerivBundle<T> derivative_bundle(const TableFamily<T>& fam, std::size_t n, DerivMode mode) {
    if (mode == DerivMode::analytic) return derivative_bundle(fam.center(), n);
    const auto j = fd_jet(fam, n);
    return {n, j.a, j.beta_p, j.h_p, j.r_p, j.R_p, DerivMode::finite_difference};
}

namespace detail {

template <class T>
void require_riccati_point(const Jet<T>& j, const char* where) {
    if (j.a == 0) throw DegeneratePoint(where, "a");
    if (j.R == 0) throw DegeneratePoint(where, "R_n(a)");
    const T nn = T(static_cast<double>(j.n));
    if (j.a * j.R + 2 * nn + 2 * j.alpha + 1 == 0) throw DegeneratePoint(where, "a R_n + 2n + 2alpha + 1");
}

}  // namespace detail

/// beta_n' = beta_n (R_{n-1} - R_n).
template <class T>
T residual_beta(const Jet<T>& j) {
    return normalized_residual({j.beta_p, -j.beta * j.R_prev, j.beta * j.R});
}

/// p'(n,a) = a r_n - beta_n R_n.
template <class T>
T residual_pna1(const Jet<T>& j) {
    return normalized_residual({j.p_p, -j.a * j.r, j.beta * j.R});
}

/// (1 - a^2) r_n' = 2 beta_n R_n + (2n+2alpha+1) beta_n'.
template <class T>
T residual_rnp(const Jet<T>& j) {
    const T k1 = 2 * T(static_cast<double>(j.n)) + 2 * j.alpha + 1;
    return normalized_residual({(1 - j.a) * (1 + j.a) * j.r_p, -2 * j.beta * j.R, -k1 * j.beta_p});
}

/// (beta_n' + beta_n R_n) beta_n R_n = beta_n r_n^2.
template <class T>
T residual_bn(const Jet<T>& j) {
    return normalized_residual({j.beta_p * j.beta * j.R, j.beta * j.R * j.beta * j.R, -j.beta * j.r * j.r});
}

template <class T>
T residual_bep(const Jet<T>& j) {
    detail::require_riccati_point(j, "bep");
    return normalized_residual({j.beta_p, -j.r * j.r / j.R, j.beta * j.R});
}

/// beta_n rebuilt from (r_n, R_n) alone.
template <class T>
T residual_beta1(const Jet<T>& j) {
    detail::require_riccati_point(j, "beta1");
    const T nn = T(static_cast<double>(j.n));
    const T& a = j.a;
    const T k1 = 2 * nn + 2 * j.alpha + 1;
    const T num = ((1 - a * a) * j.r * j.r + 2 * (nn + j.alpha) * j.r + nn * nn + 2 * nn * j.alpha) * j.R -
                  k1 * a * j.r * j.r;
    const T den = (k1 - 2) * j.R * (a * j.R + k1);
    return normalized_residual({j.beta, -num / den});
}

/// Riccati equation for r_n.
template <class T>
T residual_rnp2(const Jet<T>& j) {
    detail::require_riccati_point(j, "rnp2");
    const T nn = T(static_cast<double>(j.n));
    const T& a = j.a;
    const T& R = j.R;
    const T k1 = 2 * nn + 2 * j.alpha + 1;
    const T one_m = (1 - a) * (1 + a);
    const T lead = (-one_m * R * R + 2 * a * k1 * R + k1 * k1) * j.r * j.r / (one_m * R * (a * R + k1));
    const T tail = (2 * (nn + j.alpha) * R * j.r + nn * (nn + 2 * j.alpha) * R) / (one_m * (a * R + k1));
    return normalized_residual({j.r_p, -lead, tail});
}

/// Riccati equation for R_n.
template <class T>
T residual_ri(const Jet<T>& j) {
    detail::require_riccati_point(j, "ri");
    const T nn = T(static_cast<double>(j.n));
    const T& a = j.a;
    const T a2m = (a - 1) * (a + 1);
    const T k1 = 2 * nn + 2 * j.alpha + 1;
    return normalized_residual({j.R_p, -j.R * j.R, -(2 * a * a * (nn + j.alpha) - 2 * a2m * j.r) / (a * a2m) * j.R,
                                2 * k1 * j.r / a2m});
}

template <class T>
T residual_rnbn(const Jet<T>& j) {
    const T nn = T(static_cast<double>(j.n));
    const T a2m = (j.a - 1) * (j.a + 1);
    const T k1 = 2 * nn + 2 * j.alpha + 1;
    return normalized_residual({k1 * (k1 - 2) * j.beta_p * j.beta_p, 4 * (nn + j.alpha) * a2m * j.beta_p * j.r_p,
                                a2m * a2m * j.r_p * j.r_p, -4 * j.beta * j.r * j.r});
}

template <class T>
T residual_equ3(const Jet<T>& j) {
    const T nn = T(static_cast<double>(j.n));
    const T& a = j.a;
    const T one_m = (1 - a) * (1 + a);
    const T k1 = 2 * nn + 2 * j.alpha + 1;
    const T m = nn + j.alpha;
    return normalized_residual({k1 * (k1 - 2) * j.beta, -k1 * (k1 - 2) * a * j.beta_p, -one_m * j.r * j.r,
                                -2 * m * j.r, 2 * m * a * one_m * j.r_p, -(nn * nn + 2 * nn * j.alpha)});
}

/// The second-order equation for R_n (degree 6 in R_n).
template <class T>
T residual_R_ode(const Jet<T>& j) {
    const T n = T(static_cast<double>(j.n));
    const T& al = j.alpha;
    const T& a = j.a;
    const T& R = j.R;
    const T& Rp = j.R_p;
    const T A2 = (a - 1) * (a + 1);
    const T K = 2 * n + 2 * al + 1;
    const T a2 = a * a, a3 = a2 * a, a4 = a2 * a2;
    const T R2 = R * R, R3 = R2 * R, R4 = R3 * R, R5 = R4 * R, R6 = R5 * R;
    const T c4 = a4 * (7 + 24 * al + 24 * n + 24 * n * n + 48 * n * al + 24 * al * al) -
                 a2 * (5 + 24 * n + 24 * n * n + 24 * al + 48 * n * al + 20 * al * al) + 2 + 4 * al + 4 * n +
                 4 * n * n + 8 * n * al;
    return normalized_residual({
        2 * a * A2 * A2 * R * (a * R + K) * (A2 * R + K * a) * j.R_pp,
        -a * A2 * A2 * (3 * a * A2 * R2 + 2 * (2 * a2 - 1) * K * R + K * K * a) * Rp * Rp,
        2 * A2 * K * R * ((2 * a4 - a2 + 1) * R + 2 * a3 * K) * Rp,
        -a2 * A2 * A2 * A2 * R6,
        -2 * a * A2 * A2 * (2 * a2 - 1) * K * R5,
        -A2 * c4 * R4,
        -4 * a * A2 * K * (a2 * K * K - 2 * n - 2 * n * n - 2 * al - 4 * n * al) * R3,
        -4 * a2 * K * K * ((n * (n + 1) + (2 * n + 1) * al + al * al) * a2 - n * (n + 1) - (2 * n + 1) * al) * R2,
    });
}

/// The second-order equation for r_n.
template <class T>
T residual_cha(const Jet<T>& j) {
    const T n = T(static_cast<double>(j.n));
    const T& al = j.alpha;
    const T& a = j.a;
    const T& r = j.r;
    const T& rp = j.r_p;
    const T& rpp = j.r_pp;
    const T A2 = (a - 1) * (a + 1);
    const T m = al + n;
    const T a2 = a * a, a3 = a2 * a, a4 = a2 * a2;
    const T r2 = r * r, r3 = r2 * r, r4 = r3 * r, r5 = r4 * r, r6 = r5 * r;
    const T A2sq = A2 * A2;
    const T nn2 = n * (2 * al + n);
    return normalized_residual({
        a2 * A2sq * A2sq * rpp * rpp,
        4 * a2 * A2sq * (a * A2 * rp + 4 * r3 + 6 * m * r2 + 2 * nn2 * r) * rpp,
        -4 * A2sq * ((a2 + 1) * (a2 + 1) * r2 + 2 * (a2 + 1) * a2 * m * r + a4 * (m - 1) * (m + 1)) * rp * rp,
        16 * a3 * A2 * (2 * r3 + 3 * m * r2 + nn2 * r) * rp,
        -16 * A2sq * r6,
        -32 * (2 * a4 - 3 * a2 + 1) * m * r5,
        -16 * A2 * (5 * a2 * al * al + (6 * a2 - 1) * nn2) * r4,
        -32 * a2 * m * (a2 * al * al + A2 * 2 * nn2) * r3,
        -16 * a2 * nn2 * (a2 * al * al + A2 * nn2) * r2,
    });
}

/// Riccati pair plus the beta_n reconstruction, FD derivatives throughout.
template <class T>
ResidualReport<T> riccati_residuals(const TableFamily<T>& fam, std::size_t n) {
    const auto j = fd_jet(fam, n);
    ResidualReport<T> rep;
    rep.add("ri", residual_ri(j));
    rep.add("rnp2", residual_rnp2(j));
    rep.add("bep", residual_bep(j));
    rep.add("beta1", residual_beta1(j));
    return rep;
}

template <class T>
ResidualReport<T> second_order_residuals(const TableFamily<T>& fam, std::size_t n) {
    const auto j = fd_jet(fam, n);
    detail::require_riccati_point(j, "second_order_residuals");
    ResidualReport<T> rep;
    rep.add("R_ode", residual_R_ode(j));
    rep.add("cha", residual_cha(j));
    rep.add("rnbn", residual_rnbn(j));
    rep.add("equ3", residual_equ3(j));
    return rep;
}

/// First-order relations of the a-evolution (FD derivatives).
template <class T>
ResidualReport<T> evolution_residuals(const TableFamily<T>& fam, std::size_t n) {
    const auto j = fd_jet(fam, n);
    ResidualReport<T> rep;
    rep.add("beta", residual_beta(j));
    rep.add("pna1", residual_pna1(j));
    rep.add("rnp", residual_rnp(j));
    rep.add("bn", residual_bn(j));
    return rep;
}

}  // namespace juelab
