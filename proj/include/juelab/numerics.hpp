#pragma once

// Extended-precision scalars, Gauss-Jacobi rules, small determinants and
// finite-difference stencils shared by every other module.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <span>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include <boost/multiprecision/mpfr.hpp>

#include "juelab/errors.hpp"

namespace juelab {

namespace mp = boost::multiprecision;

namespace detail {

// Same digits10 -> bits rule the MPFR backend applies when it allocates.
constexpr unsigned mpfr_bits_for_digits10(unsigned d10) {
    return (d10 * 1000u) / 301u + ((d10 * 1000u) % 301u ? 2u : 1u);
}

constexpr unsigned digits10_for_bits(unsigned bits) {
    unsigned d = 1;
    while (mpfr_bits_for_digits10(d) < bits) ++d;
    return d;
}

}  // namespace detail

/// Fixed-precision MPFR scalar carrying at least `Bits` mantissa bits.
template <unsigned Bits>
using real = mp::number<mp::mpfr_float_backend<detail::digits10_for_bits(Bits)>, mp::et_off>;

using real256 = real<256>;
using real512 = real<512>;

/// Binary mantissa precision of a scalar type.
struct Precision {
    unsigned bits = 256;
};

template <class T>
constexpr Precision precision_of() {
    return Precision{static_cast<unsigned>(std::numeric_limits<T>::digits)};
}

template <class T>
constexpr unsigned bits_of() {
    return static_cast<unsigned>(std::numeric_limits<T>::digits);
}

/// 2^(k - bits): the tolerance idiom used throughout ("2^(8-bits)" etc.).
template <class T>
T ulp_scaled(int k) {
    return ldexp(T(1), k - static_cast<int>(bits_of<T>()));
}

template <class T>
T pi() {
    return boost::math::constants::pi<T>();
}

/// Nodes and positive weights of an interpolatory rule on [lo, hi].
template <class T>
struct QuadRule {
    std::vector<T> nodes;
    std::vector<T> weights;
    T lo = T(-1);
    T hi = T(1);

    std::size_t size() const { return nodes.size(); }

    T total_mass() const {
        T s = 0;
        for (const auto& w : weights) s += w;
        return s;
    }

    template <class F>
    auto integrate(F&& f) const {
        using R = decltype(f(nodes[0]));
        R s = R(0);
        for (std::size_t i = 0; i < nodes.size(); ++i) s += weights[i] * f(nodes[i]);
        return s;
    }
};

namespace detail {

// P_m^{(p,q)}(x) and P_{m-1}^{(p,q)}(x), classical normalization, by the
// three-term recurrence.
template <class T>
std::pair<T, T> jacobi_pair(std::size_t m, const T& p, const T& q, const T& x) {
    T prev = T(1);
    if (m == 0) return {prev, T(0)};
    T cur = (p - q) / 2 + (p + q + 2) * x / 2;
    for (std::size_t k = 2; k <= m; ++k) {
        const T kk = T(static_cast<double>(k));
        const T s = 2 * kk + p + q;
        const T c0 = 2 * kk * (kk + p + q) * (s - 2);
        const T c1 = (s - 1) * (s * (s - 2) * x + p * p - q * q);
        const T c2 = 2 * (kk + p - 1) * (kk + q - 1) * s;
        T next = (c1 * cur - c2 * prev) / c0;
        prev = std::move(cur);
        cur = std::move(next);
    }
    return {cur, prev};
}

// d/dx P_m from P_m, P_{m-1}: (2m+p+q)(1-x^2) P_m' = m[(p-q)-(2m+p+q)x] P_m + 2(m+p)(m+q) P_{m-1}.
template <class T>
T jacobi_derivative(std::size_t m, const T& p, const T& q, const T& x, const T& pm, const T& pm1) {
    const T mm = T(static_cast<double>(m));
    const T s = 2 * mm + p + q;
    return (mm * ((p - q) - s * x) * pm + 2 * (mm + p) * (mm + q) * pm1) / (s * (1 - x) * (1 + x));
}

inline std::vector<double> jacobi_roots_double(std::size_t m, double p, double q) {
    std::vector<double> roots;
    roots.reserve(m);
    constexpr std::size_t budget = 200;
    for (std::size_t i = 1; i <= m; ++i) {
        double x = std::cos(std::numbers::pi * (0.5 * p + static_cast<double>(i) - 0.25) /
                            (0.5 * (1.0 + p + q) + static_cast<double>(m)));
        std::size_t it = 0;
        for (; it < budget; ++it) {
            auto [pm, pm1] = jacobi_pair<double>(m, p, q, x);
            const double dp = jacobi_derivative<double>(m, p, q, x, pm, pm1);
            double defl = 0.0;
            for (double r : roots) defl += 1.0 / (x - r);
            const double dx = 1.0 / (dp / pm - defl);
            x -= dx;
            x = std::clamp(x, -1.0 + 1e-300, 1.0 - 1e-300);
            if (std::abs(dx) <= 1e-15) break;
        }
        if (it == budget) throw NonConvergence("Gauss-Jacobi seed root " + std::to_string(i), budget);
        roots.push_back(x);
    }
    std::sort(roots.begin(), roots.end());
    return roots;
}

}  // namespace detail

/// m-point Gauss rule for the weight (1-x)^p (1+x)^q on (-1, 1), exact for
/// polynomials of degree <= 2m-1. Nodes: deflated Newton in double from
/// Chebyshev-type guesses, then plain Newton at working precision.
template <class T>
QuadRule<T> gauss_jacobi_rule(std::size_t m, const T& p, const T& q) {
    if (m == 0) throw InvalidArgument("gauss_jacobi_rule: m must be >= 1");
    if (!(p > -1) || !(q > -1)) throw InvalidArgument("gauss_jacobi_rule: exponents must exceed -1");

    const auto seeds = detail::jacobi_roots_double(m, static_cast<double>(p), static_cast<double>(q));
    for (std::size_t i = 1; i < m; ++i)
        if (!(seeds[i] > seeds[i - 1])) throw NonConvergence("Gauss-Jacobi seeds collided", m);

    // Squared norms h_k of P_k^{(p,q)}; h_1/h_0 is written with the
    // (p+q+1) factor cancelled so p+q = -1 needs no special case.
    std::vector<T> inv_norm(m);
    T hk = pow(T(2), p + q + 1) * tgamma(p + 1) * tgamma(q + 1) / tgamma(p + q + 2);
    inv_norm[0] = 1 / hk;
    for (std::size_t k = 1; k < m; ++k) {
        const T kk = T(static_cast<double>(k));
        if (k == 1)
            hk *= (1 + p) * (1 + q) / (3 + p + q);
        else
            hk *= (kk + p) * (kk + q) * (2 * kk + p + q - 1) / (kk * (kk + p + q) * (2 * kk + p + q + 1));
        inv_norm[k] = 1 / hk;
    }
    const T tol = ulp_scaled<T>(4);

    QuadRule<T> rule;
    rule.nodes.resize(m);
    rule.weights.resize(m);
    constexpr std::size_t budget = 64;
    for (std::size_t i = 0; i < m; ++i) {
        T x = T(seeds[i]);
        std::size_t it = 0;
        for (; it < budget; ++it) {
            auto [pm, prev] = detail::jacobi_pair(m, p, q, x);
            const T dp = detail::jacobi_derivative(m, p, q, x, pm, prev);
            const T dx = pm / dp;
            x -= dx;
            if (abs(dx) <= tol) break;
        }
        if (it == budget) throw NonConvergence("Gauss-Jacobi node polish", budget);
        // Christoffel number 1 / sum_k P_k(x)^2 / h_k: a positive sum, smooth
        // in x, so node rounding near +-1 does not leak into the weight.
        T christoffel = inv_norm[0];
        T prev = T(1), cur = (p - q) / 2 + (p + q + 2) * x / 2;
        for (std::size_t k = 1; k < m; ++k) {
            christoffel += cur * cur * inv_norm[k];
            const T kk = T(static_cast<double>(k + 1));
            const T s = 2 * kk + p + q;
            T next = ((s - 1) * (s * (s - 2) * x + p * p - q * q) * cur - 2 * (kk + p - 1) * (kk + q - 1) * s * prev) /
                     (2 * kk * (kk + p + q) * (s - 2));
            prev = std::move(cur);
            cur = std::move(next);
        }
        rule.nodes[i] = x;
        rule.weights[i] = 1 / christoffel;
    }
    return rule;
}

template <class T>
QuadRule<T> gauss_legendre_rule(std::size_t m) {
    return gauss_jacobi_rule<T>(m, T(0), T(0));
}

/// Memoizes Gauss-Jacobi rules on (-1,1); safe for concurrent use.
template <class T>
class RuleCache {
public:
    std::shared_ptr<const QuadRule<T>> jacobi(std::size_t m, const T& p, const T& q) {
        const Key key{m, p, q};
        {
            std::lock_guard lock(mutex_);
            if (auto it = rules_.find(key); it != rules_.end()) return it->second;
        }
        auto rule = std::make_shared<const QuadRule<T>>(gauss_jacobi_rule<T>(m, p, q));
        std::lock_guard lock(mutex_);
        return rules_.emplace(key, std::move(rule)).first->second;
    }

private:
    using Key = std::tuple<std::size_t, T, T>;
    std::mutex mutex_;
    std::map<Key, std::shared_ptr<const QuadRule<T>>> rules_;
};

namespace detail {

template <class T>
std::shared_ptr<const QuadRule<T>> jacobi_from(RuleCache<T>* cache, std::size_t m, const T& p, const T& q) {
    if (cache) return cache->jacobi(m, p, q);
    return std::make_shared<const QuadRule<T>>(gauss_jacobi_rule<T>(m, p, q));
}

}  // namespace detail

/// Determinant of a row-major dim x dim matrix by partial-pivoted elimination.
template <class T>
T small_det(std::vector<T> a, std::size_t dim) {
    if (a.size() != dim * dim) throw InvalidArgument("small_det: matrix is not square");
    if (dim > 512) throw InvalidArgument("small_det: dimension exceeds 512");
    using std::abs;
    T det = T(1);
    for (std::size_t k = 0; k < dim; ++k) {
        std::size_t piv = k;
        T best = abs(a[k * dim + k]);
        for (std::size_t i = k + 1; i < dim; ++i) {
            T v = abs(a[i * dim + k]);
            if (v > best) {
                best = v;
                piv = i;
            }
        }
        if (best == 0) return T(0);
        if (piv != k) {
            for (std::size_t j = k; j < dim; ++j) std::swap(a[k * dim + j], a[piv * dim + j]);
            det = -det;
        }
        const T d = a[k * dim + k];
        det *= d;
        for (std::size_t i = k + 1; i < dim; ++i) {
            const T f = a[i * dim + k] / d;
            if (f == 0) continue;
            for (std::size_t j = k + 1; j < dim; ++j) a[i * dim + j] -= f * a[k * dim + j];
        }
    }
    return det;
}

template <class T>
T small_det(const std::vector<std::vector<T>>& rows) {
    const std::size_t dim = rows.size();
    std::vector<T> flat;
    flat.reserve(dim * dim);
    for (const auto& r : rows) {
        if (r.size() != dim) throw InvalidArgument("small_det: matrix is not square");
        flat.insert(flat.end(), r.begin(), r.end());
    }
    return small_det(std::move(flat), dim);
}

/// FD step used by default: 2^(-bits/4).
template <class T>
T default_fd_step() {
    return ldexp(T(1), -static_cast<int>(bits_of<T>() / 4));
}

/// Fourth-order central difference (first or second derivative) at the
/// middle sample of a uniform grid with at least five points.
template <class X, class V>
V fd_derivative(std::span<const std::pair<X, V>> samples, int order, const X& step) {
    if (order != 1 && order != 2) throw InvalidArgument("fd_derivative: order must be 1 or 2");
    if (samples.size() < 5 || samples.size() % 2 == 0)
        throw InvalidArgument("fd_derivative: need an odd number (>= 5) of grid points");
    if (!(step > 0)) throw InvalidArgument("fd_derivative: step must be positive");
    using std::abs;
    const X slack = step * ldexp(X(1), -static_cast<int>(bits_of<X>() / 2));
    for (std::size_t i = 1; i < samples.size(); ++i)
        if (abs(samples[i].first - samples[i - 1].first - step) > slack)
            throw InvalidArgument("fd_derivative: grid is not uniform with the given step");

    const std::size_t c = samples.size() / 2;
    const V& fm2 = samples[c - 2].second;
    const V& fm1 = samples[c - 1].second;
    const V& f0 = samples[c].second;
    const V& fp1 = samples[c + 1].second;
    const V& fp2 = samples[c + 2].second;
    if (order == 1) return (fm2 - fp2 + V(8) * (fp1 - fm1)) / V(12 * step);
    return (-(fm2 + fp2) + V(16) * (fm1 + fp1) - V(30) * f0) / V(12 * step * step);
}

template <class X, class V>
V fd_derivative(const std::vector<std::pair<X, V>>& samples, int order, const X& step) {
    return fd_derivative(std::span<const std::pair<X, V>>(samples), order, step);
}

/// Samples f on the grid center + k*step, k = -half..half.
template <class X, class F>
auto sample_grid(const X& center, const X& step, int half, F&& f) {
    using V = decltype(f(center));
    std::vector<std::pair<X, V>> out;
    out.reserve(2 * half + 1);
    for (int k = -half; k <= half; ++k) {
        X x = center + step * k;
        out.emplace_back(x, f(x));
    }
    return out;
}

/// |sum| / max|term|, the normalized residual used for every identity.
template <class V>
auto normalized_residual(std::initializer_list<V> terms) {
    using std::abs;
    V sum = V(0);
    decltype(abs(sum)) scale = 0;
    for (const auto& t : terms) {
        sum += t;
        scale = std::max(scale, decltype(scale)(abs(t)));
    }
    if (scale == 0) return decltype(scale)(0);
    return decltype(scale)(abs(sum) / scale);
}

template <class V>
auto normalized_residual(const std::vector<V>& terms) {
    using std::abs;
    V sum = V(0);
    decltype(abs(sum)) scale = 0;
    for (const auto& t : terms) {
        sum += t;
        scale = std::max(scale, decltype(scale)(abs(t)));
    }
    if (scale == 0) return decltype(scale)(0);
    return decltype(scale)(abs(sum) / scale);
}

/// Named residuals in insertion order.
template <class T>
struct ResidualReport {
    std::vector<std::pair<std::string, T>> entries;

    void add(std::string name, T value) { entries.emplace_back(std::move(name), std::move(value)); }

    const T& at(const std::string& name) const {
        for (const auto& [k, v] : entries)
            if (k == name) return v;
        throw InvalidArgument("ResidualReport: no entry named " + name);
    }

    T max() const {
        T worst = 0;
        for (const auto& e : entries) worst = std::max(worst, e.second);
        return worst;
    }

    void merge(const ResidualReport& other) { entries.insert(entries.end(), other.entries.begin(), other.entries.end()); }
};

}  // namespace juelab
