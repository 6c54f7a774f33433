#include "uscqed/analytics.hpp"
#include "uscqed/born_oppenheimer.hpp"

#include <gtest/gtest.h>

using namespace uscqed;

TEST(Grid, Basics) {
    XGrid g;
    EXPECT_TRUE(g.is_symmetric());
    EXPECT_NEAR(g.spacing(), 0.006, 1e-15);
    auto wide = XGrid::default_for(ModelParams::dimensionless(4.0, 1e4, 0.0, 4));
    EXPECT_GT(wide.x_max, 6.0);
    EXPECT_NEAR(wide.spacing(), 0.006, 1e-5);
    EXPECT_THROW(XGrid(1.0, 0.0, 11), std::invalid_argument);
}

TEST(Adiabatic, SingletTripletSplittingAtOrigin) {
    for (double eps : {0.0, 0.05})
        for (double l2 : {0.2, 0.9}) {
            auto p = ModelParams::dimensionless(l2, 1e4, eps, 2);
            EXPECT_NEAR(triplet_energy(p, 0.0) - sector_energy(p, 0.0, 0.0, 0), (1 + eps) * l2, 1e-12);
        }
}

TEST(Adiabatic, BareQubitsAtZeroCoupling) {
    auto p = ModelParams::dimensionless(0.0, 1e4, 0.0, 3);
    auto e = adiabatic_qubit_eigen(0.7, p);
    RVec ref(8);
    ref << -1.5, -0.5, -0.5, -0.5, 0.5, 0.5, 0.5, 1.5;
    EXPECT_LE((e.energies - ref).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Adiabatic, TwoQubitClosedForm) {
    for (double eps : {0.0, 0.1, -0.3})
        for (double X : {0.0, 0.3, 1.7}) {
            auto p = ModelParams::dimensionless(0.7, 1e4, eps, 2);
            auto e = adiabatic_qubit_eigen(X, p);
            auto a = analytics::two_qubit_levels(X, p.lambda(), eps);
            std::vector<double> ref{a.singlet, a.triplet[0], a.triplet[1], a.triplet[2]};
            std::sort(ref.begin(), ref.end());
            for (int i = 0; i < 4; ++i) EXPECT_NEAR(e.energies(i), ref[i], 1e-10);
        }
}

TEST(Surfaces, OrderedSymmetricAndContinuous) {
    auto p = ModelParams::dimensionless(0.9, 1e4, 0.02, 3);
    XGrid g = XGrid::symmetric(4.0, 801);
    auto S = build_surfaces(g, p);
    for (int i = 0; i < g.points; ++i) {
        for (int n = 1; n < S.branch_count(); ++n) EXPECT_LE(S.branches(i, n - 1), S.branches(i, n));
        for (int n = 0; n < S.branch_count(); ++n)
            EXPECT_NEAR(S.branches(i, n), S.branches(g.points - 1 - i, n), 1e-10);
        if (i > 0)
            for (int n = 0; n < S.branch_count(); ++n) EXPECT_GE(S.states[i].col(n).dot(S.states[i - 1].col(n)), 0.0);
    }
}

TEST(Surfaces, LabelsForTwoQubits) {
    auto p = ModelParams::dimensionless(0.3, 1e4, 0.0, 2);
    auto S = build_surfaces(XGrid::symmetric(2.0, 201), p);
    ASSERT_EQ(S.labels.size(), 4u);
    EXPECT_EQ(S.labels[0], "s=1,k=0");
    EXPECT_EQ(S.labels[1], "s=0,k=0");
    EXPECT_EQ(S.labels[2], "s=1,k=1");
    EXPECT_EQ(S.labels[3], "s=1,k=2");
}

TEST(Surfaces, DickeClosedForm) {
    for (int N = 1; N <= 3; ++N) {
        auto p = ModelParams::dimensionless(1.4, 1e4, -1.0, N);
        XGrid g = XGrid::symmetric(6.0, 601);
        RVec V = sector_branch(p, g, 0.5 * N, 0);
        for (int i = 0; i < g.points; ++i)
            EXPECT_NEAR(V(i), analytics::dm_potential({0.5 * N, -0.5 * N}, g.x(i), p.lambda()), 1e-10);
    }
}

TEST(Surfaces, SingleQubitMinima) {
    auto p = ModelParams::dimensionless(1.5, 1e4, 0.0, 1);
    XGrid g = XGrid::symmetric(3.0, 60001);
    RVec V = sector_branch(p, g, 0.5, 0);
    Eigen::Index i;
    V.tail(g.points / 2).minCoeff(&i);
    const double x = g.x(static_cast<int>(i) + g.points - g.points / 2);
    EXPECT_NEAR(x, std::sqrt(1.5 * 1.5 - 1) / (std::sqrt(2.0) * std::sqrt(1.5)), 2e-4);
}

TEST(Surfaces, ThreeQubitTripleWell) {
    auto p = ModelParams::dimensionless(1.86, 1e4, 0.02, 3);
    XGrid g = XGrid::symmetric(4.0, 4001);
    RVec V = sector_branch(p, g, 1.5, 1);
    const int c = g.points / 2;
    Eigen::Index i;
    V.tail(c - 250).minCoeff(&i);
    const int io = static_cast<int>(i) + c + 251;
    const double outer = V(io), central = V(c);
    EXPECT_GT(g.x(io), 1.0);
    EXPECT_LT(outer, V(io - 1));
    EXPECT_LT(outer, V(io + 1));
    EXPECT_LT(central, V(c + 50));
    EXPECT_NEAR(outer, central, 1e-3);
}

TEST(Curvature, TripletTransition) {
    for (double eps : {0.0, 0.1}) {
        const double lc = analytics::triplet_lambda2_crit(eps);
        EXPECT_GT(curvature_at_zero(ModelParams::dimensionless(lc - 1e-3, 1e4, eps, 2), 1.0, 1), 0.0);
        EXPECT_LT(curvature_at_zero(ModelParams::dimensionless(lc + 1e-3, 1e4, eps, 2), 1.0, 1), 0.0);
    }
}

TEST(Curvature, MatchesFiniteDifference) {
    auto p = ModelParams::dimensionless(0.4, 1e4, 0.05, 2);
    const double h = 1e-3;
    const double fd = (triplet_energy(p, h) - 2 * triplet_energy(p, 0) + triplet_energy(p, -h)) / (h * h) + 1.0;
    EXPECT_NEAR(curvature_at_zero(p, 1.0, 1), fd, 1e-5);
}

TEST(BoundStates, HarmonicLadder) {
    const double mu = 1e4;
    XGrid g = XGrid::symmetric(1.0, 4001);
    RVec V = 0.5 * g.values().array().square();
    auto bs = solve_bound_states(V, g, mu, 6);
    for (int k = 1; k <= 5; ++k)
        EXPECT_NEAR((bs.energies(k) - bs.energies(0)) * std::sqrt(mu) / k, 1.0, 2e-5);
}

TEST(BoundStates, OrthonormalParityDirichlet) {
    auto p = ModelParams::dimensionless(0.6, 1e4, 0.0, 2);
    XGrid g = XGrid::default_for(p);
    auto bs = solve_bound_states(sector_branch(p, g, 1.0, 1), g, p.mu(), 8);
    RMat G = bs.functions.transpose() * bs.functions * g.spacing();
    EXPECT_LE((G - RMat::Identity(8, 8)).cwiseAbs().maxCoeff(), 1e-8);
    for (int k = 0; k < 8; ++k) {
        EXPECT_EQ(bs.functions(0, k), 0.0);
        EXPECT_EQ(bs.functions(g.points - 1, k), 0.0);
        const RVec f = bs.functions.col(k);
        const double even = (f - f.reverse()).cwiseAbs().maxCoeff(), odd = (f + f.reverse()).cwiseAbs().maxCoeff();
        EXPECT_LE(std::min(even, odd), 1e-8 * f.cwiseAbs().maxCoeff());
    }
}

TEST(BoundStates, GridTooNarrow) {
    XGrid g = XGrid::symmetric(0.05, 201);
    RVec V = 0.5 * g.values().array().square();
    try {
        solve_bound_states(V, g, 1e4, 2);
        FAIL();
    } catch (const std::runtime_error& e) {
        EXPECT_STREQ(e.what(), "grid too narrow");
    }
}

TEST(BoundStates, SecondOrderConvergence) {
    auto p = ModelParams::dimensionless(0.8, 1e4, 0.0, 2);
    std::vector<double> e;
    for (int m : {601, 1201, 2401, 4801}) {
        XGrid g = XGrid::symmetric(3.0, m);
        e.push_back(solve_bound_states(sector_branch(p, g, 1.0, 1), g, p.mu(), 3).energies(2));
    }
    const double r1 = (e[0] - e[1]) / (e[1] - e[2]), r2 = (e[1] - e[2]) / (e[2] - e[3]);
    EXPECT_NEAR(r1, 4.0, 0.2);
    EXPECT_NEAR(r2, 4.0, 0.2);
}

TEST(Splitting, HerringMatchesEigenvalueDifference) {
    auto p = ModelParams::dimensionless(1.1, 1e4, -1.0, 1);
    XGrid g = XGrid::symmetric(3.0, 3001);
    RVec V = sector_branch(p, g, 0.5, 0);
    auto bs = solve_bound_states(V, g, p.mu(), 2);
    EXPECT_NEAR(doublet_splitting(V, g, p.mu()) / (bs.energies(1) - bs.energies(0)), 1.0, 1e-6);
}

TEST(Splitting, CriticalCoupling) {
    for (double mu : {1e4, 1e5}) {
        auto p = ModelParams::dimensionless(1.0, mu, -1.0, 1);
        XGrid g = XGrid::symmetric(3.0, 6001);
        const double d = doublet_splitting(sector_branch(p, g, 0.5, 0), g, mu);
        EXPECT_NEAR(d / analytics::tunnel_splitting_critical(1.0, mu), 1.0, 0.10);
    }
}

TEST(Splitting, DeepWellAgainstFormula) {
    auto p = ModelParams::dimensionless(1.5, 1e4, -1.0, 1);
    XGrid g = XGrid::default_for(p);
    const double fd = std::log(doublet_splitting(sector_branch(p, g, 0.5, 0), g, p.mu()));
    const double an = analytics::log_tunnel_splitting(p.lambda(), 1.0, p.mu());
    EXPECT_LE(std::abs(fd - an), 0.15 * std::abs(an));
}

TEST(NonAdiabatic, VanishesWithoutCoupling) {
    auto p = ModelParams::dimensionless(0.0, 1e4, 0.0, 2);
    XGrid g = XGrid::symmetric(2.0, 801);
    auto S = build_surfaces(g, p);
    auto bs = solve_bound_states(S.branch(0), g, p.mu(), 1);
    EXPECT_EQ(nonadiabatic_coupling(S, bs, 0, 2, p), 0.0);
}

TEST(NonAdiabatic, SmallAndShrinkingWithMass) {
    auto c_at = [](double mu) {
        auto p = ModelParams::dimensionless(0.5, mu, 0.0, 2);
        XGrid g = XGrid::symmetric(2.0, 4001);
        auto S = build_surfaces(g, p);
        auto bs = solve_bound_states(S.branch(0), g, mu, 1);
        double c = 0;
        for (int m = 1; m < 4; ++m) c = std::max(c, nonadiabatic_coupling(S, bs, 0, m, p));
        return c;
    };
    const double a = c_at(1e4), b = c_at(1e6);
    EXPECT_LT(a, 0.05);
    EXPECT_GT(a / b, 10.0);
}

TEST(NonAdiabatic, QuasiDegenerateIsAnError) {
    auto p = ModelParams::dimensionless(1.0, 1e4, 0.0, 1);
    p.g = 0.0;
    p.epsilon = 0.0;
    XGrid g = XGrid::symmetric(2.0, 401);
    auto S = build_surfaces(g, p);
    // force two identical branches with a nonzero coupling
    S.branches.col(1) = S.branches.col(0);
    p.g = 0.1;
    auto bs = solve_bound_states(S.branch(0), g, p.mu(), 1);
    EXPECT_THROW(nonadiabatic_coupling(S, bs, 0, 1, p), std::runtime_error);
}

TEST(Composite, DecoupledLevelsExact) {
    ModelParams p;
    p.N = 2;
    XGrid g = XGrid::symmetric(2.0, 4001);
    auto bo = bo_eigenstate_energies(p, g, 5);
    RVec ex = lowest_eigenvalues(build_h_edm(p, 30), 5);
    // FD error of the harmonic ladder at this spacing is far below omega_r
    for (int i = 0; i < 5; ++i) EXPECT_NEAR(ex(i), bo[static_cast<std::size_t>(i)].energy - 0.5 * p.omega_r, 1e-5);
}

TEST(Composite, MatchesExactDiagonalization) {
    for (double eps : {0.0, -1.0}) {
        auto p = ModelParams::dimensionless(eps == 0.0 ? 0.3 : 0.8, 1e4, eps, 2);
        auto bo = bo_eigenstate_energies(p, XGrid::default_for(p), 12);
        RVec ex = lowest_eigenvalues(build_h_edm(p, 300), 10);
        for (int i = 0; i < 10; ++i)
            EXPECT_NEAR(ex(i), bo[static_cast<std::size_t>(i)].energy - 0.5 * p.omega_r, 0.05 * p.omega_r) << eps << " " << i;
    }
}
