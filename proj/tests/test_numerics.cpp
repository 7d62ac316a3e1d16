#include <gtest/gtest.h>

#include <random>

#include "juelab/numerics.hpp"
#include "juelab/weight.hpp"

using juelab::real256;
using R = real256;

namespace {

// Laplace expansion along the first row; exponential cost, fine for n <= 6.
R cofactor_det(const std::vector<std::vector<R>>& m) {
    const std::size_t n = m.size();
    if (n == 1) return m[0][0];
    R det = 0;
    for (std::size_t c = 0; c < n; ++c) {
        std::vector<std::vector<R>> minor;
        for (std::size_t r = 1; r < n; ++r) {
            std::vector<R> row;
            for (std::size_t k = 0; k < n; ++k)
                if (k != c) row.push_back(m[r][k]);
            minor.push_back(row);
        }
        const R term = m[0][c] * cofactor_det(minor);
        det += (c % 2 == 0) ? term : R(-term);
    }
    return det;
}

// int_{-1}^{1} x^k (1-x)^p (1+x)^q dx. Integrating d/dx[x^k (1-x)^{p+1} (1+x)^{q+1}]
// gives (k+p+q+2) mu_{k+1} = (q-p) mu_k + k mu_{k-1}.
R jacobi_moment(std::size_t k, const R& p, const R& q) {
    R prev = 0;
    R cur = pow(R(2), p + q + 1) * juelab::complete_beta(p + 1, q + 1);
    for (std::size_t j = 0; j < k; ++j) {
        const R jj = R(static_cast<double>(j));
        R next = ((q - p) * cur + jj * prev) / (jj + p + q + 2);
        prev = cur;
        cur = next;
    }
    return cur;
}

}  // namespace

TEST(GaussJacobi, OnePointLegendre) {
    const auto rule = juelab::gauss_jacobi_rule<R>(1, R(0), R(0));
    ASSERT_EQ(rule.size(), 1u);
    EXPECT_LT(abs(rule.nodes[0]), juelab::ulp_scaled<R>(4));
    EXPECT_LT(abs(rule.weights[0] - 2), juelab::ulp_scaled<R>(4));
}

TEST(GaussJacobi, TwoPointLegendre) {
    const auto rule = juelab::gauss_legendre_rule<R>(2);
    const R r = 1 / sqrt(R(3));
    EXPECT_LT(abs(rule.nodes[0] + r), juelab::ulp_scaled<R>(4));
    EXPECT_LT(abs(rule.nodes[1] - r), juelab::ulp_scaled<R>(4));
    EXPECT_LT(abs(rule.weights[0] - 1), juelab::ulp_scaled<R>(4));
    EXPECT_LT(abs(rule.weights[1] - 1), juelab::ulp_scaled<R>(4));
}

TEST(GaussJacobi, OnePointFirstMomentRatio) {
    // mu0 = int (1-x) dx = 2, mu1 = int x (1-x) dx = -2/3; node = mu1/mu0.
    const auto rule = juelab::gauss_jacobi_rule<R>(1, R(1), R(0));
    EXPECT_LT(abs(rule.nodes[0] + R(1) / 3), juelab::ulp_scaled<R>(4));
    EXPECT_LT(abs(rule.weights[0] - 2), juelab::ulp_scaled<R>(4));
}

TEST(GaussJacobi, RejectsBadParameters) {
    EXPECT_THROW(juelab::gauss_jacobi_rule<R>(0, R(0), R(0)), juelab::InvalidArgument);
    EXPECT_THROW(juelab::gauss_jacobi_rule<R>(4, R(-1), R(0)), juelab::InvalidArgument);
    EXPECT_THROW(juelab::gauss_jacobi_rule<R>(4, R(0), R(-1.5)), juelab::InvalidArgument);
}

TEST(GaussJacobi, NodesIncreasingWeightsPositive) {
    for (double p : {-0.5, 0.0, 1.0, 2.5}) {
        const auto rule = juelab::gauss_jacobi_rule<R>(40, R(p), R(0.25));
        for (std::size_t i = 0; i < rule.size(); ++i) {
            EXPECT_GT(rule.weights[i], 0);
            EXPECT_GT(rule.nodes[i], -1);
            EXPECT_LT(rule.nodes[i], 1);
            if (i) EXPECT_GT(rule.nodes[i], rule.nodes[i - 1]);
        }
        EXPECT_LT(abs(rule.total_mass() - jacobi_moment(0, R(p), R(0.25))) / rule.total_mass(),
                  juelab::ulp_scaled<R>(16));
    }
}

TEST(GaussJacobi, RandomPolynomialExactness) {
    std::mt19937_64 gen(20240917);
    std::uniform_real_distribution<double> coef(-1.0, 1.0), expo(-0.9, 3.0);
    std::uniform_int_distribution<int> size(1, 12);
    for (int trial = 0; trial < 25; ++trial) {
        const std::size_t m = static_cast<std::size_t>(size(gen));
        const R p = R(expo(gen)), q = R(expo(gen));
        const std::size_t deg = 2 * m - 1;
        std::vector<R> c(deg + 1);
        for (auto& v : c) v = R(coef(gen));
        const auto rule = juelab::gauss_jacobi_rule<R>(m, p, q);
        auto poly = [&](const R& x) {
            R acc = 0;
            for (std::size_t k = c.size(); k-- > 0;) acc = acc * x + c[k];
            return acc;
        };
        const R approx = rule.integrate(poly);
        // Relative to the integral of |f|, the rule's own conditioning.
        const R scale = rule.integrate([&](const R& x) { return abs(poly(x)); });
        R exact = 0;
        for (std::size_t k = 0; k <= deg; ++k) exact += c[k] * jacobi_moment(k, p, q);
        EXPECT_LT(abs(approx - exact) / scale, juelab::ulp_scaled<R>(8)) << "m=" << m << " p=" << p << " q=" << q;
    }
}

TEST(GaussJacobi, DoublingStableForAnalyticIntegrand) {
    const R p = R(0.5), q = R(1.5);
    auto f = [](const R& x) { return exp(x) * cos(3 * x); };
    const R i32 = juelab::gauss_jacobi_rule<R>(48, p, q).integrate(f);
    const R i64 = juelab::gauss_jacobi_rule<R>(96, p, q).integrate(f);
    EXPECT_LT(abs(i32 - i64) / abs(i64), juelab::ulp_scaled<R>(16));
}

TEST(RuleCache, ReturnsSameRule) {
    juelab::RuleCache<R> cache;
    auto a = cache.jacobi(8, R(1), R(0));
    auto b = cache.jacobi(8, R(1), R(0));
    EXPECT_EQ(a.get(), b.get());
    EXPECT_NE(a.get(), cache.jacobi(8, R(2), R(0)).get());
}

TEST(SmallDet, IdentityAndDiagonal) {
    std::vector<std::vector<R>> id{{1, 0, 0}, {0, 1, 0}, {0, 0, 1}};
    EXPECT_EQ(juelab::small_det(id), R(1));
    std::vector<std::vector<R>> d{{2, 0}, {0, 3}};
    EXPECT_EQ(juelab::small_det(d), R(6));
}

TEST(SmallDet, HilbertMatchesCofactorExpansion) {
    std::vector<std::vector<R>> h(5, std::vector<R>(5));
    for (int i = 0; i < 5; ++i)
        for (int j = 0; j < 5; ++j) h[i][j] = R(1) / R(i + j + 1);
    const R fast = juelab::small_det(h);
    const R slow = cofactor_det(h);
    EXPECT_LT(abs(fast - slow) / abs(slow), R("1e-60"));
}

TEST(SmallDet, SignOfPermutation) {
    std::vector<std::vector<R>> p{{0, 1, 0}, {1, 0, 0}, {0, 0, 1}};
    EXPECT_EQ(juelab::small_det(p), R(-1));
}

TEST(SmallDet, TriangularIsDiagonalProduct) {
    std::mt19937_64 gen(7);
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    const std::size_t n = 9;
    std::vector<std::vector<R>> m(n, std::vector<R>(n, R(0)));
    R prod = 1;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i; j < n; ++j) m[i][j] = R(u(gen));
        m[i][i] += 3;
        prod *= m[i][i];
    }
    EXPECT_LT(abs(juelab::small_det(m) - prod) / abs(prod), juelab::ulp_scaled<R>(8));
}

TEST(SmallDet, RejectsNonSquare) {
    std::vector<std::vector<R>> bad{{1, 2}, {3}};
    EXPECT_THROW(juelab::small_det(bad), juelab::InvalidArgument);
    EXPECT_THROW(juelab::small_det(std::vector<R>(6, R(1)), 2), juelab::InvalidArgument);
}

TEST(FdDerivative, ExactOnLowDegree) {
    const R h = R(0.125);
    auto sq = juelab::sample_grid(R(1), h, 2, [](const R& x) { return x * x; });
    EXPECT_LT(abs(juelab::fd_derivative(sq, 1, h) - 2), juelab::ulp_scaled<R>(12));
    auto cube = juelab::sample_grid(R(1), h, 2, [](const R& x) { return x * x * x; });
    EXPECT_LT(abs(juelab::fd_derivative(cube, 2, h) - 6), juelab::ulp_scaled<R>(16));
}

TEST(FdDerivative, ExponentialSecondDerivative) {
    const R h = ldexp(R(1), -20);
    auto e = juelab::sample_grid(R(0), h, 2, [](const R& x) { return exp(x); });
    EXPECT_LT(abs(juelab::fd_derivative(e, 2, h) - 1), R("1e-20"));
}

TEST(FdDerivative, RejectsBadGrids) {
    const R h = R(0.1);
    auto three = juelab::sample_grid(R(0), h, 1, [](const R& x) { return x; });
    EXPECT_THROW(juelab::fd_derivative(three, 1, h), juelab::InvalidArgument);
    auto five = juelab::sample_grid(R(0), h, 2, [](const R& x) { return x; });
    five[3].first += R(0.01);
    EXPECT_THROW(juelab::fd_derivative(five, 1, h), juelab::InvalidArgument);
    auto ok = juelab::sample_grid(R(0), h, 2, [](const R& x) { return x; });
    EXPECT_THROW(juelab::fd_derivative(ok, 3, h), juelab::InvalidArgument);
}

TEST(Precision, ReportsAtLeastRequestedBits) {
    EXPECT_GE(juelab::bits_of<juelab::real256>(), 256u);
    EXPECT_LT(juelab::bits_of<juelab::real256>(), 264u);
    EXPECT_GE(juelab::bits_of<juelab::real512>(), 512u);
    EXPECT_EQ(juelab::precision_of<juelab::real512>().bits, juelab::bits_of<juelab::real512>());
}
