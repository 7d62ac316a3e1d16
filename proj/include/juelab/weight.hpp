#pragma once

// The gap-deformed symmetric Jacobi weight w(x,a) = (1-x^2)^alpha on
// J^c = (-1,-a) U (a,1), its moments, and quadrature on J^c.

#include <string>

#include "juelab/numerics.hpp"

namespace juelab {

template <class T>
struct WeightParams {
    T alpha = T(1);
    T a = T(0);

    void validate() const {
        if (!(alpha > 0)) throw InvalidArgument("WeightParams: alpha must be > 0");
        if (!(a >= 0) || !(a < 1)) throw InvalidArgument("WeightParams: a must lie in [0, 1)");
    }
};

/// w(x,a); the indicator is closed at |x| = a, so w(+-a) = (1-a^2)^alpha.
template <class T>
T weight_eval(const T& x, const WeightParams<T>& wp) {
    wp.validate();
    if (abs(x) > 1) throw InvalidArgument("weight_eval: |x| must be <= 1");
    if (abs(x) < wp.a) return T(0);
    return pow(1 - x * x, wp.alpha);
}

/// Gauss rules on the two pieces of J^c. `left` mirrors `right`.
template <class T>
struct ComplementRule {
    QuadRule<T> left;
    QuadRule<T> right;
    T exponent;

    std::size_t nodes_per_interval() const { return right.size(); }

    template <class F>
    auto integrate(F&& f) const {
        return left.integrate(f) + right.integrate(f);
    }
};

/// Rule on J^c for (1-x^2)^exponent. The factor (1-x)^exponent on (a,1) is
/// absorbed by an (exponent, 0) Gauss-Jacobi rule under
/// x = (1+a)/2 + (1-a)/2 u; the smooth factor (1+x)^exponent goes into the
/// weights. Any exponent > -1 is accepted.
template <class T>
ComplementRule<T> complement_rule_for_exponent(const T& a, const T& exponent, std::size_t m,
                                               RuleCache<T>* cache = nullptr) {
    if (m == 0) throw InvalidArgument("complement_rule: m must be >= 1");
    if (!(a >= 0) || !(a < 1)) throw InvalidArgument("complement_rule: a must lie in [0, 1)");
    if (!(exponent > -1)) throw InvalidArgument("complement_rule: exponent must exceed -1");

    const auto base = detail::jacobi_from(cache, m, exponent, T(0));
    const T half = (1 - a) / 2;
    const T mid = (1 + a) / 2;
    const T jac = pow(half, exponent + 1);

    ComplementRule<T> out;
    out.exponent = exponent;
    out.right.lo = a;
    out.right.hi = T(1);
    out.right.nodes.resize(m);
    out.right.weights.resize(m);
    for (std::size_t i = 0; i < m; ++i) {
        const T x = mid + half * base->nodes[i];
        out.right.nodes[i] = x;
        out.right.weights[i] = base->weights[i] * jac * pow(1 + x, exponent);
    }
    out.left.lo = T(-1);
    out.left.hi = -a;
    out.left.nodes.resize(m);
    out.left.weights.resize(m);
    for (std::size_t i = 0; i < m; ++i) {
        out.left.nodes[i] = -out.right.nodes[m - 1 - i];
        out.left.weights[i] = out.right.weights[m - 1 - i];
    }
    return out;
}

template <class T>
ComplementRule<T> complement_rule(const WeightParams<T>& wp, std::size_t m, RuleCache<T>* cache = nullptr) {
    wp.validate();
    return complement_rule_for_exponent(wp.a, wp.alpha, m, cache);
}

namespace detail {

// Continued fraction of the incomplete Beta function (modified Lentz).
template <class T>
T beta_continued_fraction(const T& x, const T& p, const T& q) {
    const T tiny = ldexp(T(1), -static_cast<int>(4 * bits_of<T>()));
    const T eps = ulp_scaled<T>(2);
    const T qab = p + q, qap = p + 1, qam = p - 1;
    T c = 1;
    T d = 1 - qab * x / qap;
    if (abs(d) < tiny) d = tiny;
    d = 1 / d;
    T h = d;
    const std::size_t budget = 64 * bits_of<T>();
    for (std::size_t m = 1; m <= budget; ++m) {
        const T mm = T(static_cast<double>(m));
        const T m2 = 2 * mm;
        T aa = mm * (q - mm) * x / ((qam + m2) * (p + m2));
        d = 1 + aa * d;
        if (abs(d) < tiny) d = tiny;
        c = 1 + aa / c;
        if (abs(c) < tiny) c = tiny;
        d = 1 / d;
        h *= d * c;
        aa = -(p + mm) * (qab + mm) * x / ((p + m2) * (qap + m2));
        d = 1 + aa * d;
        if (abs(d) < tiny) d = tiny;
        c = 1 + aa / c;
        if (abs(c) < tiny) c = tiny;
        d = 1 / d;
        const T del = d * c;
        h *= del;
        if (abs(del - 1) <= eps) return h;
    }
    throw NonConvergence("incomplete Beta continued fraction", budget);
}

}  // namespace detail

template <class T>
T complete_beta(const T& p, const T& q) {
    return tgamma(p) * tgamma(q) / tgamma(p + q);
}

/// Non-regularized incomplete Beta B_x(p, q) = int_0^x s^(p-1) (1-s)^(q-1) ds.
template <class T>
T incomplete_beta(const T& x, const T& p, const T& q) {
    if (!(x >= 0) || !(x <= 1)) throw InvalidArgument("incomplete_beta: x must lie in [0, 1]");
    if (!(p > 0) || !(q > 0)) throw InvalidArgument("incomplete_beta: parameters must be positive");
    if (x == 0) return T(0);
    if (x == 1) return complete_beta(p, q);
    if (x < (p + 1) / (p + q + 2)) {
        const T front = exp(p * log(x) + q * log1p(-x));
        return front * detail::beta_continued_fraction(x, p, q) / p;
    }
    const T y = 1 - x;
    const T front = exp(q * log(y) + p * log(x));
    return complete_beta(p, q) - front * detail::beta_continued_fraction(y, q, p) / q;
}

/// int_{J^c} x^k (1-x^2)^alpha dx. Odd k vanish by parity; for k = 2j the
/// substitution s = x^2 gives B(j+1/2, alpha+1) - B_{a^2}(j+1/2, alpha+1),
/// evaluated as B_{1-a^2}(alpha+1, j+1/2) to avoid cancellation.
template <class T>
T moment(std::size_t k, const WeightParams<T>& wp) {
    wp.validate();
    if (k % 2 == 1) return T(0);
    const T p = T(static_cast<double>(k / 2)) + T(1) / 2;
    const T q = wp.alpha + 1;
    return incomplete_beta(1 - wp.a * wp.a, q, p);
}

}  // namespace juelab
