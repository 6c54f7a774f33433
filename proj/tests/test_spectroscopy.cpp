#include "uscqed/spectroscopy.hpp"

#include <gtest/gtest.h>

#include <numeric>

using namespace uscqed;

namespace {

SpectrumConfig config(double lo, double hi, int n, int fock) {
    SpectrumConfig c;
    c.omega_grid = SpectrumConfig::linspace(lo, hi, n);
    c.fock_cutoff = fock;
    return c;
}

const Peak& tallest(const std::vector<Peak>& p) {
    return *std::max_element(p.begin(), p.end(), [](const Peak& a, const Peak& b) { return a.height < b.height; });
}

}  // namespace

TEST(Config, Validation) {
    SpectrumConfig c;
    EXPECT_THROW(c.validate(), std::invalid_argument);
    c.omega_grid = {0.0, 1.0, 0.5};
    EXPECT_THROW(c.validate(), std::invalid_argument);
    c.omega_grid = {0.0, 0.5, 1.0};
    c.gamma = 0;
    EXPECT_THROW(c.validate(), std::invalid_argument);
}

TEST(Peaks, SyntheticLorentzian) {
    auto x = SpectrumConfig::linspace(0.9, 1.1, 40001);
    std::vector<double> y;
    for (double w : x) y.push_back(lorentzian_line(w, 1.00123, 0.005, 2.0));
    auto p = find_peaks(x, y, 1e-3);
    ASSERT_EQ(p.size(), 1u);
    EXPECT_NEAR(p[0].center, 1.00123, 1e-6);
    EXPECT_NEAR(p[0].width, 0.005, 1e-6);
    EXPECT_NEAR(p[0].height, 2.0, 1e-6);
}

TEST(Ground, BareQubitLine) {
    ModelParams p;
    p.N = 2;
    auto c = config(0.9, 1.1, 4001, 5);
    auto s = spectrum_ground(p, c);
    ASSERT_EQ(s.peaks.size(), 1u);
    EXPECT_NEAR(s.peaks[0].center, 1.0, 1e-9);
    EXPECT_NEAR(s.peaks[0].width, c.gamma, 1e-6);
    for (double v : s.values) EXPECT_GE(v, 0.0);
}

TEST(Ground, ResonantSidePeaks) {
    ModelParams p;
    p.N = 2;
    p.omega_r = 1.0;
    p.g = 0.04;
    auto s = spectrum_ground(p, config(0.85, 1.15, 6001, 15));
    std::vector<double> c;
    const double h = tallest(s.peaks).height;
    for (const auto& k : s.peaks)
        if (k.height > 0.1 * h) c.push_back(k.center);
    ASSERT_GE(c.size(), 2u);
    EXPECT_NEAR(c.back() - c.front(), std::sqrt(2.0) * p.g, 0.5 * 0.005);
}

TEST(Ground, DispersiveLines) {
    auto p = ModelParams::dimensionless(0.3, 1e4, 0.0, 2);
    auto s = spectrum_ground(p, config(0.8, 1.8, 4001, 200));
    const double v0 = sector_energy(p, 0, 1.0, 0);
    std::vector<double> targets{sector_energy(p, 0, 1.0, 1) - v0, sector_energy(p, 0, 0.0, 0) - v0};
    for (double t : targets) {
        double best = 1e9;
        for (const auto& k : s.peaks)
            if (k.height > 0.1 * tallest(s.peaks).height) best = std::min(best, std::abs(k.center - t));
        EXPECT_LT(best, 0.0025);
    }
}

TEST(Ground, InsufficientEigenpairs) {
    auto p = ModelParams::dimensionless(0.3, 1e4, 0.0, 2);
    auto c = config(0.8, 1.8, 101, 100);
    c.eigenpair_count = 3;
    try {
        spectrum_ground(p, c);
        FAIL();
    } catch (const std::runtime_error& e) {
        EXPECT_STREQ(e.what(), "insufficient eigenpairs");
    }
}

TEST(Ground, SumRule) {
    auto p = ModelParams::dimensionless(0.3, 1e4, 0.0, 2);
    auto c = config(-20.0, 22.0, 400001, 150);
    auto s = spectrum_ground(p, c);
    double total = 0;
    for (const auto& t : s.transitions) total += t.weight;
    const double h = c.omega_grid[1] - c.omega_grid[0];
    const double area = h * std::accumulate(s.values.begin(), s.values.end(), 0.0);
    EXPECT_NEAR(area / (std::numbers::pi * c.gamma / 2.0 * total), 1.0, 0.02);
}

TEST(Ground, ShiftInvariance) {
    // line positions are eigenvalue differences, unchanged by a constant added to H
    auto p = ModelParams::dimensionless(0.5, 400, 0.0, 2);
    RMat H = build_h_edm(p, 60).real_matrix();
    RVec e1 = eigh(H, 20, false).values;
    RVec e2 = eigh(RMat(H + 3.7 * RMat::Identity(H.rows(), H.cols())), 20, false).values;
    EXPECT_LE(((e2.array() - e2(0)) - (e1.array() - e1(0))).abs().maxCoeff(), 1e-10);
}

TEST(Thermal, LowTemperatureLimit) {
    auto p = ModelParams::dimensionless(0.3, 400, 0.0, 2);
    auto c = config(0.5, 2.0, 1501, 80);
    auto g = spectrum_ground(p, c);
    c.temperature = 1e-4;
    auto t = spectrum_thermal(p, c);
    EXPECT_EQ(t.initial_states, 1);
    for (std::size_t i = 0; i < g.values.size(); ++i) EXPECT_NEAR(g.values[i], t.values[i], 1e-8);
}

TEST(Thermal, ConvergesMonotonically) {
    auto p = ModelParams::dimensionless(0.3, 400, 0.0, 2);
    auto c = config(0.5, 2.0, 751, 80);
    auto g = spectrum_ground(p, c);
    double prev = 1e9;
    for (double T : {0.05, 0.02, 0.01, 0.005}) {
        c.temperature = T;
        auto t = spectrum_thermal(p, c);
        double d = 0;
        for (std::size_t i = 0; i < g.values.size(); ++i) d = std::max(d, std::abs(g.values[i] - t.values[i]));
        EXPECT_LT(d, prev);
        prev = d;
    }
}

TEST(Thermal, RequiresTemperatureAndClosure) {
    auto p = ModelParams::dimensionless(0.3, 400, 0.0, 2);
    auto c = config(0.5, 2.0, 101, 40);
    EXPECT_THROW(spectrum_thermal(p, c), std::invalid_argument);
    c.temperature = 0.5;
    c.eigenpair_count = 10;
    EXPECT_THROW(spectrum_thermal(p, c), std::runtime_error);
}

TEST(Thermal, TripletLineSplits) {
    auto p = ModelParams::dimensionless(1.0, 1e4, 0.0, 2);
    auto c = config(1.25, 1.7, 1801, 300);
    c.temperature = 0.1;
    auto s = spectrum_thermal(p, c);
    auto peaks = s.peaks;
    std::sort(peaks.begin(), peaks.end(), [](const Peak& a, const Peak& b) { return a.prominence > b.prominence; });
    ASSERT_GE(peaks.size(), 2u);
    EXPECT_GT(std::abs(peaks[0].center - peaks[1].center), 0.1);
}

TEST(FranckCondon, ZeroCoupling) {
    ModelParams p;
    p.N = 2;
    BOSpectrumInput in;
    in.grid = XGrid::symmetric(1.0, 2001);
    in.bound_states = 20;
    auto s = spectrum_bo_approx(p, config(0.9, 1.1, 2001, 10), in);
    ASSERT_EQ(s.peaks.size(), 1u);
    EXPECT_NEAR(s.peaks[0].center, 1.0, 1e-6);
}

TEST(FranckCondon, MatchesExactSpectrum) {
    auto p = ModelParams::dimensionless(0.3, 1e4, 0.0, 2);
    auto c = config(1.0, 1.6, 6001, 250);
    auto ex = spectrum_ground(p, c);
    BOSpectrumInput in;
    in.grid = XGrid::default_for(p);
    in.bound_states = 60;
    auto bo = spectrum_bo_approx(p, c, in);
    const auto& a = tallest(ex.peaks);
    const auto& b = tallest(bo.peaks);
    EXPECT_NEAR(a.center, b.center, c.gamma / 4);
    EXPECT_NEAR(b.height / a.height, 1.0, 0.05);
}

TEST(FranckCondon, SidebandsAboveTransition) {
    auto line = [](double l2) {
        auto p = ModelParams::dimensionless(l2, 1e4, 0.0, 2);
        const double vt = triplet_energy(p, 0) - sector_energy(p, 0, 1.0, 0);
        auto c = config(vt - 0.15, vt + 0.05, 2001, 10);
        BOSpectrumInput in;
        in.grid = XGrid::default_for(p);
        in.bound_states = 80;
        return spectrum_bo_approx(p, c, in);
    };
    auto below = line(0.45), above = line(0.6);
    EXPECT_LT(tallest(above.peaks).height, tallest(below.peaks).height);
    EXPECT_GT(above.peaks.size(), below.peaks.size());
}

TEST(StrongCoupling, Condition) {
    ModelParams p;
    p.g = 0.0;
    EXPECT_FALSE(strong_coupling_condition(p, 0.005).passed);
    p.g = 0.01;
    auto r = strong_coupling_condition(p, 0.005);
    EXPECT_NEAR(r.ratio, std::sqrt(2.0), 1e-12);
    EXPECT_TRUE(r.passed);
    p.g = std::sqrt(0.005 * 0.01);
    r = strong_coupling_condition(p, 0.005);
    EXPECT_NEAR(r.ratio, 1.0, 1e-12);
    EXPECT_TRUE(r.boundary);
}
