#include <gtest/gtest.h>

#include <random>

#include "juelab/gap.hpp"
#include "support/nd_oracle.hpp"

using R = juelab::real256;
using R5 = juelab::real512;
using WP = juelab::WeightParams<R>;

TEST(GapProbability, OneAtZeroGap) {
    for (std::size_t n : {1u, 5u, 20u}) {
        const auto g = juelab::gap_probability(WP{R(1), R(0)}, n);
        EXPECT_EQ(g.prob, R(1));
        EXPECT_EQ(g.H, R(0));
    }
}

TEST(GapProbability, SingleLevelClosedForm) {
    const auto g = juelab::gap_probability(WP{R(1), R(0.5)}, 1);
    EXPECT_LT(abs(g.prob - R(5) / 16), R("1e-60"));
}

TEST(GapProbability, HankelRouteAgrees) {
    const WP wp{R(1), R(0.1)};
    const R h = juelab::gap_probability(wp, 3).prob;
    EXPECT_LT(abs(h - juelab::hankel_gap_probability(wp, 3)) / h, R("1e-50"));
    EXPECT_THROW(juelab::hankel_gap_probability(wp, 13), juelab::InvalidArgument);
}

TEST(GapProbability, MonotoneAndBounded) {
    for (std::size_t n : {2u, 9u}) {
        R last = 2;
        for (double a : {0.05, 0.1, 0.2, 0.4, 0.6}) {
            const R p = juelab::gap_probability(WP{R(0.5), R(a)}, n).prob;
            EXPECT_GT(p, 0);
            EXPECT_LE(p, 1);
            EXPECT_LT(p, last);
            last = p;
        }
    }
}

TEST(GapProbability, LogDerivativeTwoRoutes) {
    const auto fam = juelab::build_family(WP{R(2.5), R(0.3)}, 12, juelab::default_fd_step<R>());
    const auto [fd, sum] = juelab::log_gap_derivative(fam, 12);
    EXPECT_LT(abs(fd - sum) / abs(sum), juelab::ulp_scaled<R>(200));
    const auto g = juelab::gap_from_tables(fam.center(), juelab::build_table(WP{R(2.5), R(0)}, 12), 12);
    const R a = R(0.3);
    EXPECT_LT(abs(g.H - a * (a * a - 1) * fd) / abs(g.H), juelab::ulp_scaled<R>(200));
}

TEST(HnOde, ResidualsAt512Bits) {
    const auto fam = juelab::build_family(juelab::WeightParams<R5>{R5(1), R5(0.2)}, 10, ldexp(R5(1), -80));
    const auto rep = juelab::hn_ode_report(fam, 8);
    EXPECT_LT(rep.res_equ4, R5("1e-20"));
    EXPECT_LT(rep.res_rna, R5("1e-12"));
    EXPECT_LT(rep.res_hna, R5("1e-10"));
    EXPECT_LT(rep.all.at("equ1"), R5("1e-30"));
    EXPECT_LT(rep.all.at("rnp4"), R5("1e-12"));
    EXPECT_LT(rep.all.at("rnp5"), R5("1e-12"));
    EXPECT_NE(rep.D_value, 0);
}

TEST(HnOde, NearZeroGapEqu4Collapses) {
    const auto fam = juelab::build_family(WP{R(1), R(ldexp(R(1), -10))}, 8, ldexp(R(1), -64));
    const auto rep = juelab::hn_ode_report(fam, 6);
    const auto j = juelab::fd_jet(fam, 6);
    EXPECT_LT(abs(j.r), R(0.01));
    EXPECT_LT(rep.res_equ4, R("1e-30"));
    EXPECT_LT(abs(j.a * rep.H_p - rep.H), R(0.01));
}

TEST(NdTranscription, MatchesIndependentElimination) {
    std::mt19937_64 gen(31337);
    std::uniform_real_distribution<double> ua(0.05, 0.9), ual(0.1, 3.0), uh(-3.0, 3.0);
    std::uniform_int_distribution<int> un(1, 40);
    for (int trial = 0; trial < 20; ++trial) {
        const R a = R(ua(gen)), al = R(ual(gen)), n = R(un(gen));
        const R H = R(uh(gen)), Hp = R(uh(gen)), Hpp = R(uh(gen));
        const auto lin = nd_oracle::reduce(a, n, al, H, Hp, Hpp);
        const R N = juelab::rna_numerator(a, n, al, H, Hp, Hpp);
        const R D = juelab::rna_denominator(a, n, al, H, Hp, Hpp);
        const R scale = abs(N * lin.c1) + abs(D * lin.c0);
        EXPECT_LT(abs(N * lin.c1 + D * lin.c0) / scale, R("1e-60")) << "trial " << trial;
    }
}

TEST(NdTranscription, DetectsACorruptedCoefficient) {
    const R a = R(0.3), al = R(1), n = R(5), H = R(0.7), Hp = R(-1.1), Hpp = R(2.3);
    const auto lin = nd_oracle::reduce(a, n, al, H, Hp, Hpp);
    const R N = juelab::rna_numerator(a, n, al, H, Hp, Hpp) * (1 + R("1e-6"));
    const R D = juelab::rna_denominator(a, n, al, H, Hp, Hpp);
    EXPECT_GT(abs(N * lin.c1 + D * lin.c0) / (abs(N * lin.c1) + abs(D * lin.c0)), R("1e-8"));
}

TEST(MonteCarlo, SingleLevelWithinThreeSigma) {
    const auto e = juelab::mc_gap_probability(WP{R(1), R(0.5)}, 1, 1000000, 7);
    EXPECT_LT(std::abs(e.estimate - 0.3125), 3 * e.stderr_);
    EXPECT_LT(e.stderr_, 2e-3);
}

TEST(MonteCarlo, TwoLevelsAgainstTables) {
    const WP wp{R(1), R(0.3)};
    const auto e = juelab::mc_gap_probability(wp, 2, 1000000, 11);
    const double ref = static_cast<double>(juelab::gap_probability(wp, 2).prob);
    EXPECT_LT(std::abs(e.estimate - ref), 3 * e.stderr_);
}

TEST(MonteCarlo, DeterministicAcrossThreadCounts) {
    const WP wp{R(0.5), R(0.2)};
    const auto a = juelab::mc_gap_probability(wp, 3, 200000, 99, 1);
    const auto b = juelab::mc_gap_probability(wp, 3, 200000, 99, 3);
    const auto c = juelab::mc_gap_probability(wp, 3, 200000, 99, 1);
    EXPECT_EQ(a.estimate, b.estimate);
    EXPECT_EQ(a.stderr_, b.stderr_);
    EXPECT_EQ(a.estimate, c.estimate);
    EXPECT_NE(a.estimate, juelab::mc_gap_probability(wp, 3, 200000, 100, 1).estimate);
}

TEST(MonteCarlo, RejectsBadArguments) {
    EXPECT_THROW(juelab::mc_gap_probability(WP{R(1), R(0.3)}, 5, 100000, 1), juelab::InvalidArgument);
    EXPECT_THROW(juelab::mc_gap_probability(WP{R(1), R(0.3)}, 2, 999, 1), juelab::InvalidArgument);
}
