#pragma once

// Independent elimination behind r_n = N/D. Squaring the expression for r_n'
// obtained by differentiating
//   (equ4)  a H' - H = (1-a^2) r^2 - 2(n+alpha) a^2 r
// and equating it with the (rnp5) expression for (a^2-1)^2 r'^2 gives a
// polynomial in r; reducing it modulo (equ4) leaves c0 + c1 r, whose root is
// r = -c0/c1. The published N, D must satisfy N c1 + D c0 = 0.

#include <vector>

namespace nd_oracle {

template <class T>
using Poly = std::vector<T>;  // coefficients in r, lowest first

template <class T>
Poly<T> mul(const Poly<T>& p, const Poly<T>& q) {
    Poly<T> out(p.size() + q.size() - 1, T(0));
    for (std::size_t i = 0; i < p.size(); ++i)
        for (std::size_t j = 0; j < q.size(); ++j) out[i + j] += p[i] * q[j];
    return out;
}

template <class T>
Poly<T> sub(Poly<T> p, const Poly<T>& q) {
    if (p.size() < q.size()) p.resize(q.size(), T(0));
    for (std::size_t i = 0; i < q.size(); ++i) p[i] -= q[i];
    return p;
}

template <class T>
struct Linear {
    T c0, c1;
};

template <class T>
Linear<T> reduce(const T& a, const T& n, const T& al, const T& H, const T& Hp, const T& Hpp) {
    const T m = n + al;
    const T one_m = 1 - a * a;
    const T a2m = a * a - 1;
    // r' = num / (2 den), num = a H'' + 2a r^2 + 4 a m r, den = (1-a^2) r - a^2 m.
    const Poly<T> num{a * Hpp, 4 * a * m, 2 * a};
    const Poly<T> den{-a * a * m, one_m};
    const Poly<T> rhs5{Hp * Hp, 8 * a * m * Hp, 4 * ((4 * a * a - 1) * m * m + al * al + H), 8 * a2m * m};
    // (a^2-1)^2 num^2 - 4 den^2 rhs5 = 0.
    Poly<T> lhs = mul(num, num);
    for (auto& c : lhs) c *= a2m * a2m;
    Poly<T> right = mul(mul(den, den), rhs5);
    for (auto& c : right) c *= 4;
    Poly<T> p = sub(lhs, right);
    // r^2 = (a H' - H + 2 m a^2 r) / (1 - a^2).
    const T s0 = (a * Hp - H) / one_m;
    const T s1 = 2 * m * a * a / one_m;
    for (std::size_t k = p.size(); k-- > 2;) {
        const T c = p[k];
        p[k] = 0;
        p[k - 2] += c * s0;
        p[k - 1] += c * s1;
    }
    return {p[0], p[1]};
}

}  // namespace nd_oracle
