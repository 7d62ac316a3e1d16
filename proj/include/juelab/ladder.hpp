#pragma once

// Ladder-operator data for w(x,a): R_n, r_n and their companions, the
// coefficient functions A_n(z), B_n(z), and the section-2 identity suite.

#include <complex>
#include <string>
#include <vector>

#include "juelab/orthopoly.hpp"

namespace juelab {

template <class T>
struct LadderState {
    std::size_t n = 0;
    T a;
    T R;   ///< 2 P_n(a)^2 (1-a^2)^alpha / h_n
    T r;   ///< 2 P_n(a) P_{n-1}(a) (1-a^2)^alpha / h_{n-1}; zero for n = 0
    T Rt;
    T rt;
};

template <class T>
struct LadderCoeffs {
    std::complex<T> z;
    std::complex<T> A;
    std::complex<T> B;
};

namespace detail {

template <class T>
std::vector<LadderState<T>> states_from_values(const RecurrenceTable<T>& t, const std::vector<T>& p_at_a) {
    const T& a = t.wp.a;
    const T& alpha = t.wp.alpha;
    const T edge = 2 * pow((1 - a) * (1 + a), alpha);
    std::vector<LadderState<T>> out(t.n_max + 1);
    for (std::size_t n = 0; n <= t.n_max; ++n) {
        auto& s = out[n];
        const T nn = T(static_cast<double>(n));
        s.n = n;
        s.a = a;
        s.R = edge * p_at_a[n] * p_at_a[n] / t.h[n];
        s.r = n == 0 ? T(0) : T(edge * p_at_a[n] * p_at_a[n - 1] / t.h[n - 1]);
        s.Rt = -(a * s.R + 2 * nn + 2 * alpha + 1);
        s.rt = -(s.r + nn);
    }
    return out;
}

}  // namespace detail

/// States for n = 0..n_max from one pass of the recurrence at x = a.
template <class T>
std::vector<LadderState<T>> ladder_states(const RecurrenceTable<T>& table) {
    return detail::states_from_values(table, eval_monic_all(table, table.wp.a));
}

template <class T>
LadderState<T> ladder_state(const RecurrenceTable<T>& table, std::size_t n) {
    if (n > table.n_max) throw InvalidArgument("ladder_state: n exceeds the table's n_max");
    auto all = ladder_states(table);
    if (!(table.h[n] > 0)) throw PrecisionLoss("ladder_state: h_n underflow", 2 * bits_of<T>());
    return all[n];
}

/// Rt and rt from their integral definitions, on a rule for (1-x^2)^(alpha-1).
/// `m` nodes per interval; zero picks twice the table's node count.
template <class T>
LadderState<T> ladder_state_quadrature(const RecurrenceTable<T>& table, std::size_t n, std::size_t m = 0,
                                       RuleCache<T>* cache = nullptr) {
    auto s = ladder_state(table, n);
    if (m == 0) m = 2 * std::max<std::size_t>(table.nodes_per_interval, n + 8);
    const T& alpha = table.wp.alpha;
    const auto rule = complement_rule_for_exponent(table.wp.a, alpha - 1, m, cache);
    // w/(x^2-1) = -(1-x^2)^(alpha-1); both integrands are even, so use the right half twice.
    T sq = 0, cross = 0;
    for (std::size_t i = 0; i < rule.right.size(); ++i) {
        const T& x = rule.right.nodes[i];
        const auto p = eval_monic(table, n, x);
        sq += rule.right.weights[i] * p.value * p.value;
        cross += rule.right.weights[i] * x * p.value * p.value_prev;
    }
    s.Rt = -4 * alpha * sq / table.h[n];
    s.rt = n == 0 ? T(0) : T(-4 * alpha * cross / table.h[n - 1]);
    return s;
}

/// v0'(z) for v0 = -alpha ln(1 - z^2).
template <class T>
std::complex<T> v0_prime(const T& alpha, const std::complex<T>& z) {
    using C = std::complex<T>;
    return C(2 * alpha) * z / (C(1) - z * z);
}

template <class T>
LadderCoeffs<T> ladder_coeffs(const LadderState<T>& s, const std::complex<T>& z) {
    using C = std::complex<T>;
    const C z2 = z * z;
    const C da = z2 - C(s.a * s.a);
    const C d1 = z2 - C(1);
    if (abs(da) == 0 || abs(d1) == 0) throw DegeneratePoint("ladder_coeffs", "z^2 - a^2 or z^2 - 1");
    return {z, C(s.a * s.R) / da + C(s.Rt) / d1, z * C(s.r) / da + z * C(s.rt) / d1};
}

/// Default z samples: real, imaginary and off-support points away from the poles.
template <class T>
std::vector<std::complex<T>> default_z_samples() {
    using C = std::complex<T>;
    return {C(T(0.7), T(0)), C(T(0), T(0.9)), C(T(0.5), T(0.5)), C(T(2), T(0)), C(T(0), T(1.5))};
}

/// P_n'(z) - beta_n A_n(z) P_{n-1}(z) + B_n(z) P_n(z), with P_n' from a
/// five-point difference in z.
template <class T>
T lowering_residual(const RecurrenceTable<T>& table, std::size_t n, const std::complex<T>& z,
                    const std::vector<LadderState<T>>& states) {
    using C = std::complex<T>;
    const T h = default_fd_step<T>();
    std::vector<std::pair<T, C>> grid;
    for (int k = -2; k <= 2; ++k) grid.emplace_back(h * k, eval_monic(table, n, z + C(h * k)).value);
    const C dp = fd_derivative(grid, 1, h);
    const auto here = eval_monic(table, n, z);
    const auto lc = ladder_coeffs(states[n], z);
    return normalized_residual({dp, C(-table.beta[n]) * lc.A * here.value_prev, lc.B * here.value});
}

/// The lowering relation at each z sample; limited by the FD step, not by the
/// working precision, so it is kept apart from the algebraic identities.
template <class T>
ResidualReport<T> lowering_residuals(const RecurrenceTable<T>& table, std::size_t n,
                                     const std::vector<std::complex<T>>& z_samples) {
    if (n < 1 || n > table.n_max) throw InvalidArgument("lowering_residuals: need 1 <= n <= n_max");
    const auto st = ladder_states(table);
    ResidualReport<T> rep;
    for (std::size_t i = 0; i < z_samples.size(); ++i)
        rep.add("lowering@z" + std::to_string(i), lowering_residual(table, n, z_samples[i], st));
    return rep;
}

/// Every section-2 identity at degree n as a normalized residual (|sum| over
/// the largest summand). Needs 1 <= n <= n_max - 2.
template <class T>
ResidualReport<T> identity_residuals(const RecurrenceTable<T>& table, std::size_t n,
                                     const std::vector<std::complex<T>>& z_samples, RuleCache<T>* cache = nullptr) {
    using C = std::complex<T>;
    if (n < 1 || n + 2 > table.n_max) throw InvalidArgument("identity_residuals: need 1 <= n <= n_max - 2");
    const T& a = table.wp.a;
    const T& alpha = table.wp.alpha;
    for (const auto& z : z_samples)
        for (double pole : {-1.0, 1.0})
            if (abs(z - C(T(pole))) < T(0.05) || abs(z - C(T(pole) * a)) < T(0.05))
                throw InvalidArgument("identity_residuals: z sample within 0.05 of a pole");

    const auto st = ladder_states(table);
    const auto& s = st[n];
    const auto& sp = st[n + 1];
    const auto& sm = st[n - 1];
    const T& b = table.beta[n];
    const T& b1 = table.beta[n + 1];
    const T nn = T(static_cast<double>(n));
    const T k1 = 2 * nn + 2 * alpha + 1;
    const T k0 = 2 * nn + 2 * alpha - 1;

    ResidualReport<T> rep;
    for (std::size_t i = 0; i < z_samples.size(); ++i) {
        const C& z = z_samples[i];
        const std::string tag = "@z" + std::to_string(i);
        const auto c = ladder_coeffs(s, z);
        const auto cp = ladder_coeffs(sp, z);
        const auto cm = ladder_coeffs(sm, z);
        const C v = v0_prime(alpha, z);
        rep.add("S1" + tag, normalized_residual({cp.B, c.B, -z * c.A, v}));
        rep.add("S2" + tag,
                normalized_residual({C(1), z * cp.B, -z * c.B, C(-b1) * cp.A, C(b) * cm.A}));
        std::vector<C> terms{c.B * c.B, v * c.B, C(-b) * c.A * cm.A};
        for (std::size_t j = 0; j < n; ++j) terms.push_back(ladder_coeffs(st[j], z).A);
        rep.add("S2'" + tag, normalized_residual(terms));
    }

    RuleCache<T> local;
    if (!cache) cache = &local;
    const auto q = ladder_state_quadrature(table, n, 0, cache);
    const auto q1 = ladder_state_quadrature(table, n + 1, 0, cache);
    rep.add("s11", normalized_residual({sp.r, s.r, -a * s.R}));
    rep.add("s12", normalized_residual({q.Rt, -q1.rt, -q.rt, T(2 * alpha)}));
    rep.add("s21", normalized_residual({a * sp.r, -a * s.r, -b1 * sp.R, b * sm.R}));
    rep.add("s22", normalized_residual({sp.r, -s.r, T(1), -a * b1 * sp.R, a * b * sm.R, -(k1 + 2) * b1, k0 * b}));
    rep.add("rn", normalized_residual({s.r * s.r, -b * s.R * sm.R}));
    rep.add("rn1", normalized_residual({s.r * s.r, 2 * (nn + alpha) * s.r, nn * nn + 2 * nn * alpha,
                                        -b * (a * s.R + k1) * (a * sm.R + k0)}));
    const T one_m = (1 - a) * (1 + a);
    rep.add("eq3", normalized_residual({one_m * s.r * s.r, 2 * (nn + alpha) * s.r, nn * nn + 2 * nn * alpha,
                                        -k0 * a * b * s.R, -k1 * a * b * sm.R, -k1 * k0 * b}));
    // R_j >= 0, so the sum is never smaller than its largest summand.
    T sum_r = 0;
    for (std::size_t j = 0; j < n; ++j) sum_r += st[j].R;
    rep.add("eq4", normalized_residual({one_m * s.r * s.r, 2 * (nn + alpha) * a * a * s.r, a * one_m * sum_r,
                                        -k0 * a * b * s.R, -k1 * a * b * sm.R}));
    rep.add("eq5", normalized_residual({-a * one_m * sum_r, 2 * (nn + alpha) * one_m * s.r, -k1 * k0 * b,
                                        nn * nn + 2 * nn * alpha}));
    rep.add("pna", normalized_residual({table.p_coef[n], one_m * s.r / 2, -k1 * b / 2, nn / 2}));
    rep.add("Rt-quadrature", normalized_residual({s.Rt, -q.Rt}));
    rep.add("rt-quadrature", normalized_residual({s.rt, -q.rt}));
    return rep;
}

template <class T>
ResidualReport<T> identity_residuals(const RecurrenceTable<T>& table, std::size_t n) {
    return identity_residuals(table, n, default_z_samples<T>());
}

}  // namespace juelab
