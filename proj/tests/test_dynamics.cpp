#include <gtest/gtest.h>

#include "juelab/dynamics.hpp"

using R = juelab::real256;
using R5 = juelab::real512;
using WP = juelab::WeightParams<R>;

namespace {

template <class T>
juelab::TableFamily<T> family(double alpha, double a, std::size_t n_max, int step_exp) {
    return juelab::build_family(juelab::WeightParams<T>{T(alpha), T(a)}, n_max, ldexp(T(1), -step_exp));
}

}  // namespace

TEST(Family, GridAndNodeCounts) {
    const auto fam = family<R>(1, 0.3, 10, 20);
    ASSERT_EQ(fam.tables.size(), 5u);
    for (int k = -2; k <= 2; ++k) {
        const auto& t = fam.tables[static_cast<std::size_t>(k + 2)];
        EXPECT_EQ(t.wp.a, fam.abscissa(k));
        EXPECT_EQ(t.nodes_per_interval, fam.center().nodes_per_interval);
    }
    EXPECT_THROW(family<R>(1, 0.0, 10, 20), juelab::InvalidArgument);
    EXPECT_THROW(juelab::build_family(WP{R(1), R(0.3)}, 10, R(0)), juelab::InvalidArgument);
}

TEST(DerivBundle, AnalyticMatchesFiniteDifference) {
    const auto fam = family<R>(1, 0.3, 10, 64);
    const auto an = juelab::derivative_bundle(fam, 8, juelab::DerivMode::analytic);
    const auto fd = juelab::derivative_bundle(fam, 8, juelab::DerivMode::finite_difference);
    EXPECT_EQ(fd.mode, juelab::DerivMode::finite_difference);
    EXPECT_LT(abs(an.beta_p - fd.beta_p), R("1e-20"));
    EXPECT_LT(abs(an.h_p - fd.h_p), R("1e-20"));
    EXPECT_LT(abs(an.r_p - fd.r_p), R("1e-20"));
    EXPECT_LT(abs(an.R_p - fd.R_p), R("1e-20"));
}

TEST(DerivBundle, ZeroGapLimit) {
    // r_n(0) = 0; (rnp) fixes r_n'(0) and (rnbn) must then hold with the analytic derivatives.
    const auto t = juelab::build_table(WP{R(1.5), R(0)}, 12);
    for (std::size_t n : {3u, 4u, 7u}) {
        const auto d = juelab::derivative_bundle(t, n);
        const auto st = juelab::ladder_states(t);
        EXPECT_EQ(st[n].r, R(0));
        const R k1 = 2 * R(static_cast<double>(n)) + 2 * R(1.5) + 1;
        EXPECT_LT(abs(d.r_p - (2 * t.beta[n] * st[n].R + k1 * d.beta_p)), juelab::ulp_scaled<R>(16) * abs(d.r_p));
        juelab::Jet<R> j;
        j.n = n;
        j.alpha = R(1.5);
        j.a = R(0);
        j.beta = t.beta[n];
        j.beta_p = d.beta_p;
        j.r = R(0);
        j.r_p = d.r_p;
        EXPECT_LT(juelab::residual_rnbn(j), juelab::ulp_scaled<R>(32)) << n;
        if (n % 2 == 1) {
            EXPECT_LT(st[n].R, juelab::ulp_scaled<R>(8));
            EXPECT_GT(abs(d.beta_p), R(0.01));
        }
    }
}

TEST(Riccati, FiniteDifferenceResiduals) {
    const auto fam = family<R>(1, 0.3, 12, 64);
    const auto rep = juelab::riccati_residuals(fam, 10);
    EXPECT_LT(rep.at("ri"), R("1e-18"));
    EXPECT_LT(rep.at("rnp2"), R("1e-18"));
    EXPECT_LT(rep.at("bep"), R("1e-18"));
    EXPECT_LT(rep.at("beta1"), R("1e-30"));
}

TEST(Riccati, DegenerateAtZero) {
    const auto t = juelab::build_table(WP{R(1), R(0)}, 6);
    const auto d = juelab::derivative_bundle(t, 3);
    juelab::Jet<R> j;
    j.n = 3;
    j.alpha = R(1);
    j.a = R(0);
    j.R = R(1);
    j.r = R(0);
    j.beta = t.beta[3];
    j.beta_p = d.beta_p;
    j.r_p = d.r_p;
    j.R_p = d.R_p;
    EXPECT_THROW(juelab::residual_ri(j), juelab::DegeneratePoint);
    EXPECT_THROW(juelab::residual_bep(j), juelab::DegeneratePoint);
    j.a = R(0.2);
    j.R = R(0);
    EXPECT_THROW(juelab::residual_rnp2(j), juelab::DegeneratePoint);
}

TEST(SecondOrder, ResidualsAt512Bits) {
    const auto fam = family<R5>(0.5, 0.25, 8, 80);
    const auto rep = juelab::second_order_residuals(fam, 6);
    for (const auto& [name, v] : rep.entries) EXPECT_LT(v, R5("1e-12")) << name;
}

TEST(SecondOrder, ShrinkWhenPrecisionDoubles) {
    const auto lo = juelab::second_order_residuals(family<R>(1, 0.4, 10, 64), 8);
    const auto hi = juelab::second_order_residuals(family<R5>(1, 0.4, 10, 128), 8);
    for (std::size_t i = 0; i < lo.entries.size(); ++i)
        EXPECT_GT(lo.entries[i].second, 4 * R(hi.entries[i].second)) << lo.entries[i].first;
}

TEST(Evolution, FirstOrderRelations) {
    const auto fam = family<R>(2.5, 0.45, 20, 64);
    const auto rep = juelab::evolution_residuals(fam, 17);
    for (const auto& [name, v] : rep.entries) EXPECT_LT(v, R("1e-40")) << name;
}

TEST(Evolution, AnalyticBundleSatisfiesBn) {
    const auto t = juelab::build_table(WP{R(1), R(0.35)}, 10);
    const auto d = juelab::derivative_bundle(t, 9);
    const auto st = juelab::ladder_states(t);
    juelab::Jet<R> j;
    j.beta = t.beta[9];
    j.beta_p = d.beta_p;
    j.R = st[9].R;
    j.r = st[9].r;
    EXPECT_LT(juelab::residual_bn(j), juelab::ulp_scaled<R>(32));
}
