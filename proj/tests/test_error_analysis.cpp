#include "fixtures.hpp"

#include <gtest/gtest.h>

#include <Eigen/SVD>

using namespace sphmimo;
using namespace fixtures;

TEST(SelectNTilde, Examples) {
    EXPECT_EQ(select_N_tilde(0.2, 0.2, 10000.0), 39);
    EXPECT_EQ(select_N_tilde(0.2, 0.04, 10000.0), 39);
    EXPECT_EQ(select_N_tilde(0.2, 0.2, 1e-9), 3);
    EXPECT_THROW(select_N_tilde(0.2, 0.2, 0.0), PreconditionError);
}

TEST(FrequencyGrid, EndpointsAndSpacing) {
    const FrequencyGrid g;
    const auto f = g.frequencies();
    ASSERT_EQ(f.size(), 200u);
    EXPECT_DOUBLE_EQ(f.front(), 30.0);
    EXPECT_DOUBLE_EQ(f.back(), 10000.0);
    EXPECT_NEAR(f[2] / f[1], f[1] / f[0], 1e-12);
    FrequencyGrid bad;
    bad.bins = 1;
    EXPECT_THROW(bad.validate(), PreconditionError);
}

TEST(ErrorCurves, ErrorFreeIsFloor) {
    const MimoModel m(gaussian_system(0.2, 3, 0.1, 3, 3), no_error());
    FrequencyGrid g{100, 3000, 12, Spacing::log};
    const auto c = error_curves(m, g);
    for (std::size_t i = 0; i < c.freqs.size(); ++i) {
        EXPECT_LT(c.delta[i], 1e-12);
        EXPECT_LT(c.delta_L[i], 1e-12);
        EXPECT_LT(c.delta_M[i], 1e-12);
        EXPECT_EQ(c.m_L[i], 0.0);
    }
    EXPECT_EQ(to_db(0.0), db_floor);
}

TEST(ErrorCurves, MismatchDominatesAtLowFrequency) {
    ErrorModel e;
    e.realizations = 5;
    const MimoModel m(design_system(0.2), e);
    FrequencyGrid g{30, 60, 2, Spacing::log};
    const auto c = error_curves(m, g);
    EXPECT_GT(to_db(c.m_M[0]), 0.0);
    EXPECT_GT(c.m_M[0], c.a_M[0]);
}

TEST(ErrorCurves, SystemNormMatchesFullSvd) {
    ErrorModel e;
    e.realizations = 2;
    e.snr_db = 10;
    const MimoModel m(design_system(0.04), e);
    for (double f : {50.0, 1000.0, 9000.0}) {
        const auto b = m.sh_transfer_vectors(m.k_of(f), 4, 1);
        const auto [Ph, P] = normalized_system_matrix(b);
        const double full = Eigen::JacobiSVD<Eigen::MatrixXcd>(Ph - P).singularValues()[0];
        EXPECT_NEAR(system_error_norm(b), full, 1e-10 * full);
    }
}

// Triangle-type bounds on random specs: per bin, with -1e-12 slack.
TEST(ErrorCurves, BoundInequalities) {
    std::mt19937_64 gen(7);
    std::uniform_real_distribution<double> rad(0.03, 0.3);
    for (int t = 0; t < 4; ++t) {
        const int NL = 2 + static_cast<int>(gen() % 3), NM = 2 + static_cast<int>(gen() % 3);
        auto s = gaussian_system(rad(gen), NL, rad(gen), NM, 8);
        s.sla.scheme = make_uniform_grid(2 * sh_count(NL));
        ErrorModel e;
        e.realizations = 3;
        e.rng_seed = gen();
        const MimoModel m(s, e);
        const FrequencyGrid grid{50, 5000, 10, Spacing::log};
        const auto c = error_curves(m, grid);
        const auto f = grid.frequencies();
        auto rel = [](double bound, double value) { return (bound - value) / std::max(bound, 1.0); };
        for (std::size_t i = 0; i < c.freqs.size(); ++i) {
            // the product bound holds per realization, not between averages
            const auto st = m.prepare_bin(m.k_of(f[i]), static_cast<int>(i));
            for (int r = 0; r < 3; ++r) {
                const auto b = bin_errors(m.realize(st, r));
                EXPECT_GE(rel(b.delta_L + b.delta_M + b.delta_L * b.delta_M, b.delta), -1e-12);
                EXPECT_GE(rel(b.a_L + b.m_L, b.delta_L), -1e-12);
            }
            EXPECT_GE(rel(c.a_L[i] + c.m_L[i], c.delta_L[i]), -1e-12);
            EXPECT_GE(rel(c.a_M[i] + c.m_M[i], c.delta_M[i]), -1e-12);
        }
    }
}

TEST(ErrorCurves, NoiseScalesWithSnr) {
    ErrorModel e;
    e.realizations = 3;
    const MimoModel a(design_system(0.2), e);
    e.snr_db -= 6.0;
    const MimoModel b(design_system(0.2), e);
    const FrequencyGrid g{200, 4000, 4, Spacing::log};
    const auto ca = error_curves(a, g), cb = error_curves(b, g);
    for (std::size_t i = 0; i < 4; ++i) {
        EXPECT_NEAR(cb.m_L[i] / ca.m_L[i], std::pow(10.0, 0.3), 1e-9);
        EXPECT_NEAR(cb.m_M[i] / ca.m_M[i], std::pow(10.0, 0.3), 1e-9);
        EXPECT_EQ(cb.a_M[i], ca.a_M[i]);
    }
}

TEST(ErrorCurves, ThreadCountInvariant) {
    ErrorModel e;
    e.realizations = 2;
    const MimoModel m(design_system(0.04), e);
    const FrequencyGrid g{30, 10000, 9, Spacing::log};
    const auto a = error_curves(m, g, 1), b = error_curves(m, g, 3);
    EXPECT_EQ(a.delta, b.delta);
    EXPECT_EQ(a.m_M, b.m_M);
}

TEST(Ofr, ExtractionAndInterpolation) {
    const std::vector<double> f{100, 200, 400, 800, 1600};
    const std::vector<double> db{10, -10, -10, -10, 10};
    std::vector<double> lin;
    for (double d : db) lin.push_back(std::pow(10.0, d / 20));
    const auto o = compute_ofr(f, lin, 0.0);
    ASSERT_EQ(o.intervals.size(), 1u);
    EXPECT_NEAR(o.intervals[0].lo, std::sqrt(100.0 * 200.0), 1e-9);
    EXPECT_NEAR(o.intervals[0].hi, std::sqrt(800.0 * 1600.0), 1e-9);

    const std::vector<double> above(5, 2.0);
    EXPECT_TRUE(compute_ofr(f, above, 0.0).empty());
    const std::vector<double> two{0.5, 2.0, 0.5, 2.0, 0.5};
    const auto t = compute_ofr(f, two, 0.0);
    EXPECT_EQ(t.intervals.size(), 3u);
    EXPECT_DOUBLE_EQ(t.intervals.front().lo, 100.0);
    EXPECT_DOUBLE_EQ(t.intervals.back().hi, 1600.0);
}

TEST(Ofr, SigmaMonotone) {
    ErrorModel e;
    e.realizations = 2;
    const MimoModel m(design_system(0.2), e);
    const auto c = error_curves(m, FrequencyGrid{30, 10000, 40, Spacing::log});
    const EndpointTolerance exact{Spacing::log, 1.0};
    for (double s : {-10.0, -5.0, 0.0, 5.0}) {
        const auto lo = compute_ofr(c.freqs, c.delta_L, s);
        const auto hi = compute_ofr(c.freqs, c.delta_L, s + 3.0);
        EXPECT_TRUE(ofr_subset(lo, hi, exact)) << s;
    }
}

TEST(Ofr, IntersectExamples) {
    OFRInterval a{{{900, 5000}}, 0}, b{{{1200, 3000}}, 0}, none{{}, 0};
    const auto x = intersect_ofr(a, b);
    ASSERT_EQ(x.intervals.size(), 1u);
    EXPECT_EQ(x.intervals[0].lo, 1200);
    EXPECT_EQ(x.intervals[0].hi, 3000);
    EXPECT_TRUE(intersect_ofr(a, none).empty());
    const auto s = intersect_ofr(a, a);
    EXPECT_EQ(s.intervals[0].lo, 900);
    EXPECT_EQ(s.intervals[0].hi, 5000);
    OFRInterval other{{{900, 5000}}, 3};
    EXPECT_THROW(intersect_ofr(a, other), PreconditionError);
}

TEST(Ofr, MatchedExamples) {
    const auto tol = EndpointTolerance::half_bin(FrequencyGrid{});
    OFRInterval l{{{900, 5000}}, 0}, m{{{1200, 3000}}, 0}, d{{{6000, 8000}}, 0}, none{{}, 0};
    EXPECT_TRUE(is_matched(l, m, tol));
    EXPECT_TRUE(is_matched(m, l, tol));
    EXPECT_FALSE(is_matched(l, d, tol));
    EXPECT_TRUE(is_matched(l, l, tol));
    EXPECT_FALSE(is_matched(l, none, tol));
    // half a log bin of slack on each endpoint
    OFRInterval nudged{{{899, 5010}}, 0};
    EXPECT_TRUE(is_matched(nudged, l, tol));
    OFRInterval far{{{800, 5000}}, 0};
    EXPECT_TRUE(is_matched(far, l, tol)); // l is inside far
    OFRInterval overlap{{{800, 4000}}, 0};
    EXPECT_FALSE(is_matched(overlap, l, tol));
}

TEST(MatchingCriterion, Examples) {
    EXPECT_EQ(matching_criterion(0.2, 8, 0.2, 8), 0.0);
    EXPECT_NEAR(matching_criterion(0.2, 8, 0.04, 8), 1.28, 1e-12);
    EXPECT_EQ(matching_criterion(0.3, 5, 0.1, 7), matching_criterion(0.1, 7, 0.3, 5));
}

TEST(ReduceOrder, Sys2Example) {
    const auto r = reduce_order(0.2, 8, 0.04, 8);
    EXPECT_EQ(r.side, ArrayRole::sma);
    EXPECT_EQ(r.order, 2);
    EXPECT_NEAR(r.residual, 0.08, 1e-12);
    EXPECT_THROW(reduce_order(0.2, 8, 0.2, 8), PreconditionError);
}

// r_M N_L = 0.8 < r_L N_M = 1.6: the sign rule picks the SMA, which can reach
// zero residual at order 4.
TEST(ReduceOrder, SignRuleFollowsSide) {
    const auto r = reduce_order(0.2, 8, 0.1, 8);
    EXPECT_EQ(r.side, ArrayRole::sma);
    EXPECT_EQ(r.order, 4);
    EXPECT_NEAR(r.residual, 0.0, 1e-12);
    const auto s = reduce_order(0.1, 8, 0.2, 8);
    EXPECT_EQ(s.side, ArrayRole::sla);
    EXPECT_EQ(s.order, 4);
}

TEST(ReduceOrder, AgreesWithExhaustiveScan) {
    std::mt19937_64 gen(11);
    std::uniform_real_distribution<double> rad(0.03, 0.3);
    for (int t = 0; t < 200; ++t) {
        const double rL = rad(gen), rM = rad(gen);
        const int NL = 1 + static_cast<int>(gen() % 10), NM = 1 + static_cast<int>(gen() % 10);
        const auto r = reduce_order(rL, NL, rM, NM);
        const bool sla = rM * NL > rL * NM;
        EXPECT_EQ(r.side, sla ? ArrayRole::sla : ArrayRole::sma);
        double best = INFINITY;
        int arg = -1;
        for (int c = (sla ? NL : NM); c >= 0; --c) {
            const double res = sla ? std::abs(rM * c - rL * NM) : std::abs(rM * NL - rL * c);
            if (res < best - 1e-12) {
                best = res;
                arg = c;
            }
        }
        EXPECT_EQ(r.order, arg);
        EXPECT_NEAR(r.residual, best, 1e-12);
        EXPECT_LE(r.residual, matching_criterion(rL, NL, rM, NM) + 1e-12);
    }
}

TEST(ReducedModel, MatchesFreshModelAtLowerOrder) {
    ErrorModel e;
    e.realizations = 2;
    const MimoModel full(design_system(0.04), e);
    const auto red = full.with_reduced_order(ArrayRole::sma, 2);
    EXPECT_EQ(red.spec().sma.order, 2);
    const auto b = red.sh_transfer_vectors(red.k_of(1000), 3, 1);
    EXPECT_EQ(b.psi_M.order, 2);
    const auto bf = full.sh_transfer_vectors(full.k_of(1000), 3, 1);
    EXPECT_EQ(b.psi_L_hat.coeffs, bf.psi_L_hat.coeffs);
    EXPECT_LT((b.psi_M.coeffs - bf.psi_M.coeffs.head(9)).norm(), 1e-15);
}
