#include "uscqed/circuit.hpp"

#include <gtest/gtest.h>

using namespace uscqed;
using namespace uscqed::circuit;

TEST(NormalModes, ReferenceCircuit) {
    auto d = normal_modes(CircuitParams{});
    EXPECT_NEAR(d.omega_minus, 0.049756, 2e-6);
    EXPECT_NEAR(d.omega_plus, 183.59, 0.02);
    EXPECT_NEAR(d.g_phi_minus / d.omega_minus, 7.1487, 1e-3);
    EXPECT_NEAR(d.g_Q_minus / d.omega_minus, 0.0604, 1e-4);
    EXPECT_NEAR(d.g_phi_plus / d.omega_plus, 0.01175, 1e-5);
    EXPECT_NEAR(d.g_Q_plus / d.omega_plus, 0.36653, 1e-4);
}

TEST(NormalModes, ClosedFormAgreesWithEigenproblem) {
    auto d = normal_modes(CircuitParams{});
    EXPECT_NEAR(d.closed_omega_minus / d.omega_minus, 1.0, 1e-9);
    EXPECT_NEAR(d.closed_omega_plus / d.omega_plus, 1.0, 1e-9);
}

TEST(NormalModes, LimitFormsClose) {
    auto d = normal_modes(CircuitParams{});
    EXPECT_LT(std::abs(d.limit_g_phi_minus / (d.g_phi_minus / d.omega_minus) - 1.0), 0.05);
    EXPECT_LT(std::abs(d.limit_g_Q_minus / (d.g_Q_minus / d.omega_minus) - 1.0), 0.05);
    EXPECT_LT(std::abs(d.limit_g_phi_plus / (d.g_phi_plus / d.omega_plus) - 1.0), 0.05);
    EXPECT_LT(std::abs(d.limit_g_Q_plus / (d.g_Q_plus / d.omega_plus) - 1.0), 0.05);
}

TEST(NormalModes, SmallParasiticsGiveBareResonator) {
    CircuitParams cp;
    cp.L_s /= 100.0;
    cp.C_s /= 100.0;
    auto d = normal_modes(cp);
    const double bare = 1.0 / std::sqrt(cp.L_si() * cp.C_si()) / (2.0 * std::numbers::pi) * 1e-9;
    EXPECT_NEAR(d.omega_minus / bare, 1.0, 1e-3);
    EXPECT_GT(d.omega_plus, 10.0 * normal_modes(CircuitParams{}).omega_plus);
}

TEST(NormalModes, RejectsInvalidParameters) {
    CircuitParams cp;
    cp.L = -1.0;
    EXPECT_THROW(normal_modes(cp), std::invalid_argument);
}

TEST(FluxQubit, ReferenceFrequencyAndConvergence) {
    auto q = flux_qubit_spectrum(CircuitParams{});
    EXPECT_NEAR(q.omega_q, 8.112, 2e-3);
    EXPECT_LT(q.convergence_shift, 1e-5);
    EXPECT_DOUBLE_EQ(q.energies(0), 0.0);
    EXPECT_NEAR(std::abs(q.phi(0, 1)), 1.4836, 1e-3);
}

TEST(FluxQubit, OperatorsHermitian) {
    auto q = flux_qubit_spectrum(CircuitParams{}, 7, 8);
    EXPECT_LT((q.phi - q.phi.adjoint()).cwiseAbs().maxCoeff(), 1e-10);
    EXPECT_LT((q.n - q.n.adjoint()).cwiseAbs().maxCoeff(), 1e-10);
    for (int i = 1; i < 8; ++i) EXPECT_GE(q.energies(i), q.energies(i - 1));
}

TEST(FluxQubit, FrequencyFallsWithJosephsonEnergy) {
    CircuitParams cp;
    double prev = qubit_frequency(cp);
    for (int i = 1; i <= 3; ++i) {
        cp.E_J *= 1.1;
        const double w = qubit_frequency(cp);
        EXPECT_LT(w, prev);
        prev = w;
    }
}

TEST(FluxQubit, SweetSpotIsMinimum) {
    CircuitParams cp;
    const double w0 = qubit_frequency(cp);
    cp.Phi_e = 0.505;
    const double w1 = qubit_frequency(cp);
    cp.Phi_e = 0.495;
    const double w2 = qubit_frequency(cp);
    EXPECT_GT(w1, w0);
    EXPECT_NEAR(w1, w2, 1e-8 * w0);
}

TEST(FluxQubit, CalibrateFlux) {
    CircuitParams cp;
    const double f = calibrate_flux(cp, 9.0);
    cp.Phi_e = f;
    EXPECT_NEAR(qubit_frequency(cp), 9.0, 1e-4);
    EXPECT_NEAR(calibrate_flux(CircuitParams{}, qubit_frequency(CircuitParams{})), 0.5, 1e-3);
}

TEST(FluxQubit, EffectiveMassScalesWithCapacitance) {
    CircuitParams cp;
    const double m0 = effective_mass(cp);
    EXPECT_NEAR(m0, 26581, 30);
    cp.C *= 4.0;
    EXPECT_NEAR(effective_mass(cp) / m0, 4.0, 0.02);
}

namespace {

std::vector<double> xs_sym(double half, int n) {
    std::vector<double> x;
    for (int i = 0; i < n; ++i) x.push_back(-half + 2.0 * half * i / (n - 1));
    return x;
}

}  // namespace

TEST(SingleMode, ReferenceCalibration) {
    auto ref = single_mode_reference(CircuitParams{}, 5.5172);
    EXPECT_NEAR(qubit_frequency(ref.params), 5.5172, 1e-6);
    EXPECT_NEAR(ref.C_J, 2.793, 5e-3);
}

TEST(SingleMode, ZeroCouplingGivesBareParabolas) {
    auto ref = single_mode_reference(CircuitParams{}, 5.5172);
    ref.g_phi = 0.0;
    TwoModeOptions opt;
    opt.M = 6;
    auto s = single_mode_surfaces(ref, xs_sym(1.5, 7), opt);
    for (int k = 0; k < opt.levels; ++k)
        for (std::size_t i = 0; i < s.x.size(); ++i)
            EXPECT_NEAR(s.branches(static_cast<Eigen::Index>(i), k) - 0.5 * s.x[i] * s.x[i], s.branches(3, k), 1e-10);
}

TEST(SingleMode, SymmetricInX) {
    auto ref = single_mode_reference(CircuitParams{}, 5.5172);
    TwoModeOptions opt;
    opt.M = 8;
    auto s = single_mode_surfaces(ref, xs_sym(1.5, 7), opt);
    for (int k = 0; k < opt.levels; ++k)
        for (int i = 0; i < 3; ++i) EXPECT_NEAR(s.branches(i, k), s.branches(6 - i, k), 1e-9);
}

TEST(SingleMode, ProjectedLevelConvergence) {
    auto ref = single_mode_reference(CircuitParams{}, 5.5172);
    TwoModeOptions a, b;
    a.M = 16;
    b.M = 24;
    const std::vector<double> xs{0.0, 0.7, 1.4};
    auto sa = single_mode_surfaces(ref, xs, a), sb = single_mode_surfaces(ref, xs, b);
    EXPECT_LT((sa.branches - sb.branches).cwiseAbs().maxCoeff(), 1e-3);
}

TEST(TwoMode, MappingAndSymmetry) {
    TwoModeOptions opt;
    opt.M = 8;
    opt.fock_plus = 3;
    auto s = two_mode_bo_surfaces(CircuitParams{}, {-1.0, 0.0, 1.0}, opt);
    EXPECT_GT(s.lambda2, 0.5);
    EXPECT_LT(s.p_term_bound, 1e-4);
    EXPECT_GT(s.mu, 1e4);
    for (int k = 0; k < opt.levels; ++k) EXPECT_NEAR(s.branches(0, k), s.branches(2, k), 1e-9);
    for (int k = 1; k < opt.levels; ++k) EXPECT_GE(s.branches(1, k), s.branches(1, k - 1));
}

TEST(TwoMode, DeviationOfIdenticalSurfacesIsZero) {
    auto ref = single_mode_reference(CircuitParams{}, 5.5172);
    TwoModeOptions opt;
    opt.M = 6;
    auto s = single_mode_surfaces(ref, xs_sym(1.0, 5), opt);
    EXPECT_DOUBLE_EQ(surface_deviation(s, s, opt.levels, 1.0), 0.0);
    auto t = s;
    t.branches.array() += 0.3;
    EXPECT_NEAR(surface_deviation(s, t, opt.levels, 1.0), 0.0, 1e-12);
}
