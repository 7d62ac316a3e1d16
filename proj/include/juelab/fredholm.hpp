#pragma once

// Sine-kernel Fredholm determinant det(I - K) on (-t,t) with
// K(x,y) = sin(x-y)/(pi(x-y)), sigma(t) = t d/dt ln det, the sigma-form
// Painleve V residual, the Coulomb-fluid density and the double-scaling study.

#include <array>
#include <complex>
#include <vector>

#include "juelab/gap.hpp"

namespace juelab {

/// Nystrom approximation on an m-point Gauss-Legendre rule.
template <class T>
T sine_kernel_det(const T& t, std::size_t m, RuleCache<T>* cache = nullptr) {
    if (t < 0) throw InvalidArgument("sine_kernel_det: t must be >= 0");
    if (m < 8) throw InvalidArgument("sine_kernel_det: need at least 8 nodes");
    if (t == 0) return T(1);
    const auto rule = detail::jacobi_from(cache, m, T(0), T(0));
    const T inv_pi = 1 / pi<T>();
    std::vector<T> x(m), sw(m);
    for (std::size_t i = 0; i < m; ++i) {
        x[i] = t * rule->nodes[i];
        sw[i] = sqrt(t * rule->weights[i]);
    }
    std::vector<T> mat(m * m);
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < m; ++j) {
            const T d = x[i] - x[j];
            const T k = i == j ? inv_pi : T(sin(d) / d * inv_pi);
            mat[i * m + j] = (i == j ? T(1) : T(0)) - sw[i] * k * sw[j];
        }
    return small_det(std::move(mat), m);
}

template <class T>
struct FredholmOptions {
    RuleCache<T>* cache = nullptr;
    std::size_t start_nodes = 16;
    std::size_t max_nodes = 512;
    /// Step of the t-grid used for sigma and its derivatives; zero means 2^(-bits/16).
    T step = T(0);
};

template <class T>
struct DetValue {
    T value;
    std::size_t nodes_used = 0;
};

/// Node doubling until successive determinants agree to 2^(bits/2 - bits) relative.
template <class T>
DetValue<T> sine_kernel_det_converged(const T& t, const FredholmOptions<T>& opts = {}) {
    if (t == 0) return {T(1), 0};
    const T tol = ulp_scaled<T>(static_cast<int>(bits_of<T>() / 2));
    std::size_t m = std::max<std::size_t>(opts.start_nodes, 8);
    T prev = sine_kernel_det(t, m, opts.cache);
    while (2 * m <= opts.max_nodes) {
        m *= 2;
        T cur = sine_kernel_det(t, m, opts.cache);
        if (abs(cur - prev) <= tol * abs(cur)) return {cur, m};
        prev = cur;
    }
    throw NonConvergence("sine_kernel_det: node doubling", opts.max_nodes);
}

template <class T>
struct SigmaOracle {
    T t;
    T det_value;
    T sigma;
    T sigma_p;
    T sigma_pp;
    std::size_t nodes_used = 0;
};

namespace detail {

template <class T>
T fredholm_step(const FredholmOptions<T>& opts) {
    return opts.step > 0 ? opts.step : ldexp(T(1), -static_cast<int>(bits_of<T>() / 16));
}

// sigma at t + k*h for k = -reach..reach, from ln det on t + j*h, |j| <= reach + 2.
template <class T>
std::vector<T> sigma_samples(const T& t, const T& h, int reach, std::size_t m, RuleCache<T>* cache) {
    const int span = reach + 2;
    std::vector<T> logdet;
    for (int j = -span; j <= span; ++j) logdet.push_back(log(sine_kernel_det(T(t + h * j), m, cache)));
    std::vector<T> out;
    for (int k = -reach; k <= reach; ++k) {
        std::vector<std::pair<T, T>> pts;
        for (int j = -2; j <= 2; ++j) pts.emplace_back(h * (k + j), logdet[static_cast<std::size_t>(k + j + span)]);
        out.push_back(T(t + h * k) * fd_derivative(pts, 1, h));
    }
    return out;
}

}  // namespace detail

/// sigma(t) only (one level of differencing).
template <class T>
SigmaOracle<T> sigma_value(const T& t, const FredholmOptions<T>& opts = {}) {
    const T h = detail::fredholm_step(opts);
    if (!(t - 2 * h > 0)) throw InvalidArgument("sigma_value: t too small for the difference grid");
    RuleCache<T> local;
    FredholmOptions<T> o = opts;
    if (!o.cache) o.cache = &local;
    const auto dv = sine_kernel_det_converged(t, o);
    const auto s = detail::sigma_samples(t, h, 0, dv.nodes_used, o.cache);
    return {t, dv.value, s[0], T(0), T(0), dv.nodes_used};
}

/// sigma, sigma' and sigma'' by nested fourth-order differences on a fixed node count.
template <class T>
SigmaOracle<T> sigma_oracle(const T& t, const FredholmOptions<T>& opts = {}) {
    const T h = detail::fredholm_step(opts);
    if (!(t - 4 * h > 0)) throw InvalidArgument("sigma_oracle: t too small for the difference grid");
    RuleCache<T> local;
    FredholmOptions<T> o = opts;
    if (!o.cache) o.cache = &local;
    const auto dv = sine_kernel_det_converged(t, o);
    const auto s = detail::sigma_samples(t, h, 2, dv.nodes_used, o.cache);
    std::vector<std::pair<T, T>> pts;
    for (int k = -2; k <= 2; ++k) pts.emplace_back(h * k, s[static_cast<std::size_t>(k + 2)]);
    return {t, dv.value, s[2], fd_derivative(pts, 1, h), fd_derivative(pts, 2, h), dv.nodes_used};
}

/// Jimbo-Miwa-Okamoto sigma form: LHS - RHS at the jet (sigma, sigma', sigma'') and t.
template <class S>
S sigma_pv_residual(const S& sigma, const S& sp, const S& spp, const S& t, const std::array<S, 4>& nu) {
    const S nsum = nu[0] + nu[1] + nu[2] + nu[3];
    const S bracket = sigma - t * sp + S(2) * sp * sp + nsum * sp;
    return t * spp * t * spp - bracket * bracket + S(4) * (nu[0] + sp) * (nu[1] + sp) * (nu[2] + sp) * (nu[3] + sp);
}

/// The same equation with nu = 0, in expanded polynomial form.
template <class S>
S pv_expanded_residual(const S& sigma, const S& sp, const S& spp, const S& t) {
    return t * spp * t * spp -
           (S(-4) * t * sp * sp * sp + (S(4) * sigma + t * t) * sp * sp - S(2) * t * sigma * sp + sigma * sigma);
}

/// Large-n limit of the H_n equation for scaling constant c (given as c^2).
template <class S>
S limit_equation_residual(const S& sigma, const S& sp, const S& spp, const S& t, const S& c2) {
    return t * spp * t * spp - (S(-4) * t * sp * sp * sp + (S(4) * c2 * sigma - S(16) * t * t) * sp * sp / c2 +
                                S(32) * t * sigma * sp / c2 - S(16) * sigma * sigma / c2);
}

/// The real-t oracle jet continued to tau = 4i t, where sigma(tau) obeys the
/// nu = 0 sigma form; returns |LHS - RHS|.
template <class T>
T continued_pv_residual(const SigmaOracle<T>& o) {
    using C = std::complex<T>;
    const C four_i(T(0), T(4));
    const C zero(T(0));
    return abs(sigma_pv_residual(C(o.sigma), C(o.sigma_p) / four_i, C(o.sigma_pp) / (four_i * four_i),
                                 four_i * C(o.t), {zero, zero, zero, zero}));
}

template <class T>
struct DensityProfile {
    std::size_t n = 0;
    T alpha;
    T b;     ///< support endpoint sqrt(n(n+2alpha))/(n+alpha)
    T rho0;  ///< density at the origin

    T rho_at(const T& x) const {
        if (abs(x) > b) throw InvalidArgument("rho_at: |x| exceeds the support endpoint b");
        const T nn = T(static_cast<double>(n));
        const T inner = nn * (nn + 2 * alpha) - (nn + alpha) * (nn + alpha) * x * x;
        return sqrt(std::max(inner, T(0))) / (pi<T>() * (1 - x) * (1 + x));
    }
};

template <class T>
DensityProfile<T> equilibrium_density(std::size_t n, const T& alpha) {
    if (n < 1) throw InvalidArgument("equilibrium_density: n must be >= 1");
    if (!(alpha > 0)) throw InvalidArgument("equilibrium_density: alpha must be > 0");
    const T nn = T(static_cast<double>(n));
    const T s = sqrt(nn * (nn + 2 * alpha));
    return {n, alpha, s / (nn + alpha), s / pi<T>()};
}

template <class T>
struct ScalingRow {
    std::size_t n = 0;
    T t;
    T a;
    T sigma_n;  ///< -H_n(a)
    T sigma_oracle;
    T error;
};

/// e(n,t) = |-H_n(t / sqrt(n(n+2alpha))) - sigma(t)| over the given grid;
/// rows ordered by n, then t.
template <class T>
std::vector<ScalingRow<T>> scaling_convergence(const T& alpha, const std::vector<std::size_t>& n_list,
                                               const std::vector<T>& t_list, RuleCache<T>* cache = nullptr) {
    if (!(alpha > 0)) throw InvalidArgument("scaling_convergence: alpha must be > 0");
    RuleCache<T> local;
    if (!cache) cache = &local;
    for (std::size_t n : n_list) {
        if (n < 1) throw InvalidArgument("scaling_convergence: n must be >= 1");
        for (const auto& t : t_list)
            if (!(t > 0) || !(t / sqrt(T(static_cast<double>(n)) * (n + 2 * alpha)) < T(0.5)))
                throw InvalidArgument("scaling_convergence: a = t/sqrt(n(n+2alpha)) must lie in (0, 0.5)");
    }
    std::vector<T> oracle;
    FredholmOptions<T> fo;
    for (const auto& t : t_list) oracle.push_back(sigma_value(t, fo).sigma);
    std::vector<ScalingRow<T>> rows;
    for (std::size_t n : n_list)
        for (std::size_t i = 0; i < t_list.size(); ++i) {
            const T nn = T(static_cast<double>(n));
            const T a = t_list[i] / sqrt(nn * (nn + 2 * alpha));
            const auto table = build_table(WeightParams<T>{alpha, a}, n, {.cache = cache});
            const T sn = -h_value(table, n);
            rows.push_back({n, t_list[i], a, sn, oracle[i], T(abs(sn - oracle[i]))});
        }
    return rows;
}

}  // namespace juelab
