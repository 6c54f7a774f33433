#pragma once

// End-to-end acceptance checks, shared by the acceptance test binary and `uscqed validate`.

#include "uscqed/uscqed.hpp"

#include <chrono>
#include <cstdarg>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

namespace uscqed::acceptance {

struct CriterionResult {
    int id{0};
    std::string name;
    bool passed{false};
    std::string detail;
    double seconds{0};
};

namespace detail {

inline std::string fmt(const char* f, ...) {
    char buf[1024];
    va_list ap;
    va_start(ap, f);
    std::vsnprintf(buf, sizeof buf, f, ap);
    va_end(ap);
    return buf;
}

inline void append(std::string& s, const std::string& t) {
    if (!s.empty()) s += "; ";
    s += t;
}

// Root of f on [lo, hi] by bisection; f must change sign.
inline double bisect(const std::function<double(double)>& f, double lo, double hi, double tol = 1e-9) {
    double flo = f(lo);
    if (flo * f(hi) > 0) throw std::runtime_error("no sign change in bracket");
    while (hi - lo > tol) {
        const double mid = 0.5 * (lo + hi);
        const double fm = f(mid);
        if ((fm < 0) == (flo < 0)) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

// Centers of the n most prominent peaks.
inline std::vector<double> dominant_peaks(std::vector<Peak> peaks, std::size_t n) {
    std::sort(peaks.begin(), peaks.end(), [](const Peak& a, const Peak& b) { return a.prominence > b.prominence; });
    std::vector<double> c;
    for (std::size_t i = 0; i < std::min(n, peaks.size()); ++i) c.push_back(peaks[i].center);
    return c;
}

// Largest distance from each target to its own dominant peak, targets and peaks paired in order.
inline double paired_offset(std::vector<double> peaks, std::vector<double> targets) {
    if (peaks.size() < targets.size()) return 1e300;
    std::sort(peaks.begin(), peaks.end());
    std::sort(targets.begin(), targets.end());
    double worst = 0;
    for (std::size_t i = 0; i < targets.size(); ++i) worst = std::max(worst, std::abs(peaks[i] - targets[i]));
    return worst;
}

inline double max_height(const std::vector<Peak>& peaks) {
    double m = 0;
    for (const auto& p : peaks) m = std::max(m, p.height);
    return m;
}

}  // namespace detail

using detail::fmt;

inline CriterionResult dicke_potentials() {
    CriterionResult r{1, "Dicke potentials match closed form", true, "", 0};
    double worst = 0;
    XGrid g = XGrid::symmetric(6.0, 2001);
    for (int N = 1; N <= 3; ++N)
        for (double l2 : {0.3, 1.0, 2.0}) {
            auto p = ModelParams::dimensionless(l2, 1e4, -1.0, N);
            auto S = build_surfaces(g, p);
            const auto& sec = SpinSectors::get(N);
            for (int i = 0; i < g.points; ++i) {
                std::vector<double> ref;
                for (std::size_t j = 0; j < sec.s.size(); ++j) {
                    const int size = static_cast<int>(2 * sec.s[j] + 1.5);
                    const int mult = static_cast<int>(sec.basis[j].cols()) / size;
                    for (int k = 0; k < size; ++k)
                        for (int c = 0; c < mult; ++c)
                            ref.push_back(analytics::dm_potential({sec.s[j], -sec.s[j] + k}, g.x(i), p.lambda()));
                }
                std::sort(ref.begin(), ref.end());
                for (std::size_t n = 0; n < ref.size(); ++n)
                    worst = std::max(worst, std::abs(ref[n] - S.branches(i, static_cast<Eigen::Index>(n))));
            }
        }
    r.passed = worst <= 1e-10;
    r.detail = fmt("max |V_num - V_DM| = %.3e over N=1..3, lambda^2 in {0.3,1,2}", worst);
    return r;
}

inline CriterionResult ground_transition() {
    CriterionResult r{2, "ground-branch critical coupling 1/N", true, "", 0};
    for (int N = 1; N <= 4; ++N) {
        auto curv = [N](double l2) {
            return curvature_at_zero(ModelParams::dimensionless(l2, 1e4, -1.0, N), 0.5 * N, 0);
        };
        const double root = detail::bisect(curv, 0.05, 2.0);
        const double err = std::abs(root - 1.0 / N);
        if (err > 1e-3) r.passed = false;
        detail::append(r.detail, fmt("N=%d: %.6f vs %.6f", N, root, 1.0 / N));
    }
    return r;
}

inline CriterionResult excited_transition() {
    CriterionResult r{3, "triplet-branch critical coupling", true, "", 0};
    for (double eps : {0.0, 0.02, 0.1}) {
        auto curv = [eps](double l2) { return curvature_at_zero(ModelParams::dimensionless(l2, 1e4, eps, 2), 1.0, 1); };
        const double root = detail::bisect(curv, 0.1, 1.0);
        const double ref = analytics::triplet_lambda2_crit(eps);
        if (std::abs(root - ref) > 1e-3) r.passed = false;
        detail::append(r.detail, fmt("eps=%g: %.6f vs %.6f", eps, root, ref));
    }
    return r;
}

inline CriterionResult critical_splitting() {
    CriterionResult r{4, "critical tunnel splitting", true, "", 0};
    XGrid g = XGrid::symmetric(3.0, 6001);
    for (double mu : {1e4, 1e5}) {
        auto p = ModelParams::dimensionless(1.0, mu, -1.0, 1);
        RVec V = sector_branch(p, g, 0.5, 0);
        const double fd = doublet_splitting(V, g, mu);
        const double ref = analytics::tunnel_splitting_critical(1.0, mu);
        const double rel = std::abs(fd / ref - 1.0);
        if (rel > 0.10) r.passed = false;
        detail::append(r.detail, fmt("mu=%.0e: FD %.5e vs %.5e (%.1f%%)", mu, fd, ref, 100 * rel));
    }
    return r;
}

inline CriterionResult deep_splitting() {
    CriterionResult r{5, "deep-well splitting and scaling", true, "", 0};
    const double mu = 1e4;
    std::vector<double> l2s{1.3, 1.5, 1.8}, lfd, lan;
    for (double l2 : l2s) {
        auto p = ModelParams::dimensionless(l2, mu, -1.0, 1);
        XGrid g = XGrid::default_for(p);
        RVec V = sector_branch(p, g, 0.5, 0);
        const double fd = std::log(doublet_splitting(V, g, mu));
        const double an = analytics::log_tunnel_splitting(std::sqrt(l2), 1.0, mu);
        lfd.push_back(fd);
        lan.push_back(an);
        const double rel = std::abs(fd - an) / std::abs(an);
        if (rel > 0.15) r.passed = false;
        detail::append(r.detail, fmt("l2=%.1f: ln FD %.3f vs %.3f (%.1f%%)", l2, fd, an, 100 * rel));
    }
    auto slope = [&](const std::vector<double>& y) {
        double mx = 0, my = 0;
        for (std::size_t i = 0; i < y.size(); ++i) {
            mx += l2s[i];
            my += y[i];
        }
        mx /= y.size();
        my /= y.size();
        double sxy = 0, sxx = 0;
        for (std::size_t i = 0; i < y.size(); ++i) {
            sxy += (l2s[i] - mx) * (y[i] - my);
            sxx += (l2s[i] - mx) * (l2s[i] - mx);
        }
        return sxy / sxx;
    };
    const double trend = analytics::deep_well_log_slope(mu, 1);
    const double s_an = slope(lan), s_fd = slope(lfd);
    const double rel = std::abs(s_an / trend - 1.0);
    if (rel > 0.10) r.passed = false;
    detail::append(r.detail, fmt("slope of ln(splitting formula) %.2f vs trend %.2f (%.1f%%), FD slope %.2f", s_an, trend,
                                 100 * rel, s_fd));
    return r;
}

inline CriterionResult bo_vs_exact() {
    CriterionResult r{6, "BO levels vs exact diagonalization", true, "", 0};
    for (double l2 : {0.3, 0.8}) {
        auto p = ModelParams::dimensionless(l2, 1e4, 0.0, 2);
        XGrid g = XGrid::default_for(p);
        auto bo = bo_eigenstate_energies(p, g, 12);
        RVec ex = lowest_eigenvalues(build_h_edm(p, 300), 10);
        double worst = 0;
        for (int i = 0; i < 10; ++i)
            worst = std::max(worst, std::abs(ex(i) - (bo[static_cast<std::size_t>(i)].energy * p.omega_q - 0.5 * p.omega_r)));
        auto S = build_surfaces(g, p);
        auto bs = solve_bound_states(S.branch(0), g, p.mu(), 1);
        double cmax = 0;
        for (int m = 1; m < S.branch_count(); ++m) cmax = std::max(cmax, nonadiabatic_coupling(S, bs, 0, m, p));
        if (worst > 0.05 * p.omega_r || cmax >= 0.05) r.passed = false;
        detail::append(r.detail, fmt("l2=%.1f: max level error %.2e omega_r, max|C| %.2e", l2, worst / p.omega_r, cmax));
    }
    return r;
}

inline CriterionResult dispersive_lines() {
    CriterionResult r{7, "spectrum tracks singlet/triplet gaps", true, "", 0};
    SpectrumConfig cfg;
    cfg.gamma = 0.005;
    cfg.omega_grid = SpectrumConfig::linspace(0.5, 2.0, 6001);
    cfg.fock_cutoff = 300;
    double worst = 0;
    for (int i = 1; i <= 9; ++i) {
        ModelParams p;
        p.omega_r = 0.01;
        p.N = 2;
        p.g = 0.01 * i;
        auto sp = spectrum_ground(p, cfg);
        const double v0 = sector_energy(p, 0.0, 1.0, 0);
        const double vt = sector_energy(p, 0.0, 1.0, 1);
        const double vs = sector_energy(p, 0.0, 0.0, 0);
        worst = std::max(worst, detail::paired_offset(detail::dominant_peaks(sp.peaks, 2), {vt - v0, vs - v0}));
    }
    if (worst > 0.5 * cfg.gamma) r.passed = false;
    detail::append(r.detail, fmt("g/omega_q=0.01..0.09: max peak offset %.2e (limit %.2e)", worst, 0.5 * cfg.gamma));
    double wst = 0;
    for (double eps : {0.0, 0.02, 0.1})
        for (double l2 : {0.2, 0.8}) {
            auto p = ModelParams::dimensionless(l2, 1e4, eps, 2);
            const double split = sector_energy(p, 0.0, 1.0, 1) - sector_energy(p, 0.0, 0.0, 0);
            wst = std::max(wst, std::abs(split / ((1 + eps) * l2) - 1.0));
        }
    if (wst > 0.01) r.passed = false;
    detail::append(r.detail, fmt("singlet-triplet splitting max rel err %.2e", wst));
    return r;
}

inline CriterionResult rabi_fan() {
    CriterionResult r{8, "resonant Rabi splitting sqrt(2) g", true, "", 0};
    SpectrumConfig cfg;
    cfg.gamma = 0.005;
    cfg.omega_grid = SpectrumConfig::linspace(0.85, 1.15, 6001);
    cfg.fock_cutoff = 20;
    double worst = 0;
    for (double g : {0.01, 0.02, 0.03, 0.04, 0.05}) {
        ModelParams p;
        p.omega_r = 1.0;
        p.N = 2;
        p.g = g;
        auto sp = spectrum_ground(p, cfg);
        const double hmin = 0.1 * detail::max_height(sp.peaks);
        std::vector<double> c;
        for (const auto& pk : sp.peaks)
            if (pk.height >= hmin) c.push_back(pk.center);
        double sep = c.size() >= 2 ? c.back() - c.front() : 0.0;
        const double d = std::abs(sep - std::sqrt(2.0) * g);
        worst = std::max(worst, d);
        detail::append(r.detail, fmt("g=%.2f: %.4f vs %.4f", g, sep, std::sqrt(2.0) * g));
    }
    if (worst > 0.5 * cfg.gamma) r.passed = false;
    return r;
}

inline CriterionResult thermal_branches() {
    CriterionResult r{9, "thermal triplet branches", true, "", 0};
    SpectrumConfig cfg;
    cfg.gamma = 0.005;
    cfg.temperature = 0.1;
    cfg.fock_cutoff = 300;
    for (double l2 : {0.7, 0.8, 1.0}) {
        auto p = ModelParams::dimensionless(l2, 1e4, 0.0, 2);
        XGrid g = XGrid::default_for(p);
        RVec VT = sector_branch(p, g, 1.0, 1), V0 = sector_branch(p, g, 1.0, 0);
        Eigen::Index im;
        VT.minCoeff(&im);
        const double xm = std::abs(g.x(static_cast<int>(im)));
        const double at0 = VT(g.points / 2) - V0(g.points / 2);
        const double atm = VT(im) - V0(im);
        cfg.omega_grid = SpectrumConfig::linspace(atm - 0.15, at0 + 0.1, 2001);
        auto sp = spectrum_thermal(p, cfg);
        // each branch is a comb of vibrational lines; its position is the most prominent tooth
        auto c = detail::dominant_peaks(sp.peaks, 2);
        std::sort(c.begin(), c.end());
        const double off = detail::paired_offset(c, {at0, atm});
        if (off > cfg.gamma) r.passed = false;
        detail::append(r.detail, fmt("l2=%.1f X_min=%.3f: branches %.4f/%.4f vs gaps %.4f/%.4f (max offset %.4f)", l2, xm,
                                     c.size() > 1 ? c[1] : 0.0, c.empty() ? 0.0 : c[0], at0, atm, off));
    }
    return r;
}

struct RamseyRun {
    double contrast;
    double modulation;
    std::vector<double> revivals;
    double fidelity;
};

inline RamseyRun ramsey_run(double l2, double tau_max, double step, int n_max = 200) {
    auto p = ModelParams::dimensionless(l2, 1e4, 0.0, 2);
    auto sys = make_ramsey_system(p, n_max);
    auto cal = calibrate_pi_half(sys, 5.0 * p.omega_r_tilde());
    const double theta = calibrate_theta(sys, cal.pulse);
    std::vector<double> tau;
    for (double t = 0; t <= tau_max + 1e-9; t += step) tau.push_back(t);
    auto tr = ramsey_scan(sys, cal, tau, theta);
    auto f = analyze_trace(tau, tr.p0);
    return {f.contrast, f.modulation_frequency, f.revival_heights, cal.fidelity};
}

inline CriterionResult ramsey_discriminator() {
    CriterionResult r{10, "Ramsey discriminator", true, "", 0};
    auto a = ramsey_run(0.4, 1200, 1.0);
    auto b = ramsey_run(0.8, 2200, 2.0);
    auto c = ramsey_run(1.0, 2200, 2.0);
    const bool c1 = a.contrast < 0.05, c2 = b.contrast > 0.3, c3 = c.modulation > b.modulation && b.modulation > 0;
    const bool c4 = b.revivals.size() >= 2 && b.revivals[1] < b.revivals[0];
    const bool c5 = std::abs(b.fidelity - 0.95) <= 0.03;
    r.passed = c1 && c2 && c3 && c4 && c5;
    r.detail = fmt("contrast %.3f (l2=0.4), %.3f (l2=0.8); modulation %.5f -> %.5f; revivals ", a.contrast, b.contrast,
                   b.modulation, c.modulation);
    for (double h : b.revivals) r.detail += fmt("%.3f ", h);
    r.detail += fmt("; fidelity %.3f", b.fidelity);
    return r;
}

inline CriterionResult circuit_benchmarks() {
    CriterionResult r{11, "circuit benchmarks", true, "", 0};
    circuit::CircuitParams cp;
    auto nm = circuit::normal_modes(cp);
    auto q = circuit::flux_qubit_spectrum(cp, 7, 5);
    const double mu = circuit::effective_mass(cp);
    const double l2 = std::pow(nm.g_phi_minus * std::abs(q.phi(0, 1)), 2) / (nm.omega_minus * q.omega_q);
    struct Item {
        const char* name;
        double value, target, tol;
    };
    const Item items[] = {
        {"omega_q/2pi [GHz]", q.omega_q, 8.0, 0.05},
        {"omega_-/2pi [MHz]", nm.omega_minus * 1e3, 50.0, 0.01},
        {"mu", mu, 2.5e4, 0.10},
        {"g_phi-/omega_-", nm.g_phi_minus / nm.omega_minus, 7.15, 0.02},
        {"g_Q-/omega_-", nm.g_Q_minus / nm.omega_minus, 0.06, 0.10},
        {"omega_+/2pi [GHz]", nm.omega_plus, 160.0, 0.05},
        {"g_Q+/omega_+", nm.g_Q_plus / nm.omega_plus, 0.37, 0.05},
        {"g_phi+/omega_+", nm.g_phi_plus / nm.omega_plus, 0.01, 0.20},
        {"single-mode lambda^2", l2, 0.7, 0.05},
    };
    for (const auto& it : items) {
        const double rel = std::abs(it.value / it.target - 1.0);
        const bool ok = rel <= it.tol;
        if (!ok) r.passed = false;
        detail::append(r.detail, fmt("%s %.5g vs %.5g (%.1f%%%s)", it.name, it.value, it.target, 100 * rel, ok ? "" : " FAIL"));
    }
    return r;
}

inline CriterionResult two_mode_surfaces() {
    CriterionResult r{12, "two-mode vs single-mode surfaces", true, "", 0};
    circuit::CircuitParams cp;
    std::vector<double> xs;
    for (int i = 0; i <= 80; ++i) xs.push_back(-2.0 + 0.05 * i);
    auto two = circuit::two_mode_bo_surfaces(cp, xs);
    auto ref = circuit::single_mode_reference(cp, two.omega_unit);
    auto one = circuit::single_mode_surfaces(ref, xs);
    const double dev = circuit::surface_deviation(two, one, 3, 2.0);
    r.passed = dev < 0.1;
    r.detail = fmt("max deviation %.4f omega_q over |X|<=2 (dressed omega_q %.4f GHz, reference C_J %.3f fF, lambda^2 %.3f/%.3f)",
                   dev, two.omega_unit, ref.C_J, two.lambda2, one.lambda2);
    return r;
}

inline CriterionResult stark_limit() {
    CriterionResult r{13, "Stark Hamiltonian vs EDM", true, "", 0};
    for (int N : {1, 2}) {
        auto p = ModelParams::dimensionless(0.01, 1e4, 0.0, N);
        RVec a = lowest_eigenvalues(build_h_stark(p, 40), 5);
        RVec b = lowest_eigenvalues(build_h_edm(p, 40), 5);
        const double d = (a - b).cwiseAbs().maxCoeff();
        const double lim = 10.0 * p.lambda2() * p.lambda2() * p.omega_q;
        if (d >= lim) r.passed = false;
        detail::append(r.detail, fmt("N=%d: %.2e (limit %.2e)", N, d, lim));
    }
    return r;
}

inline CriterionResult property_suite() {
    CriterionResult r{14, "property suites", true, "", 0};
    auto check = [&](bool ok, const std::string& what) {
        if (!ok) r.passed = false;
        detail::append(r.detail, what + (ok ? " ok" : " FAIL"));
    };
    // parity
    {
        double worst = 0;
        for (int N : {1, 2, 3}) {
            auto p = ModelParams::dimensionless(0.8, 1e4, 0.1, N);
            auto H = build_h_edm(p, 30);
            auto P = parity_operator(H.basis());
            worst = std::max(worst, commutator(H, P).cwiseAbs().maxCoeff() / H.matrix().cwiseAbs().maxCoeff());
        }
        check(worst <= 1e-10, fmt("parity %.1e", worst));
    }
    // hermiticity
    {
        bool ok = true;
        for (int N : {1, 2, 3}) {
            BasisDescriptor b(N, 5);
            for (int s = 1; s <= N; ++s)
                for (Axis a : {Axis::x, Axis::y, Axis::z}) ok = ok && pauli_on_site(b, s, a).is_hermitian();
            ok = ok && build_h_edm(ModelParams::dimensionless(0.5, 1e4, 0.0, N), 20).is_hermitian();
        }
        check(ok, "hermiticity");
    }
    // spin algebra
    {
        double worst = 0;
        for (int N = 1; N <= 6; ++N) {
            BasisDescriptor b(N, 0);
            auto sx = collective_spin(b, Axis::x), sy = collective_spin(b, Axis::y), sz = collective_spin(b, Axis::z);
            worst = std::max(worst, (commutator(sx, sy) - cplx(0, 1) * sz.matrix()).cwiseAbs().maxCoeff());
        }
        check(worst <= 1e-12, fmt("spin algebra %.1e", worst));
    }
    // norm conservation
    {
        auto p = ModelParams::dimensionless(0.8, 1e4, 0.0, 2);
        auto sys = make_ramsey_system(p, 60);
        PulseSpec pulse;
        pulse.drive_frequency = sys.omega_d;
        pulse.duration = 20.0;
        CVec psi = apply_pulse(sys, pulse, sys.ground, 0.0);
        const double drift = std::abs(psi.squaredNorm() - 1.0);
        check(drift <= 1e-8, fmt("norm drift %.1e", drift));
    }
    // FD convergence, harmonic branch
    {
        const double mu = 1e4;
        std::vector<double> err;
        for (int m : {401, 801, 1601}) {
            XGrid g = XGrid::symmetric(1.0, m);
            RVec V = 0.5 * g.values().array().square();
            auto bs = solve_bound_states(V, g, mu, 3);
            err.push_back(std::abs(bs.energies(2) - 2.5 / std::sqrt(mu)));
        }
        const double r1 = err[0] / err[1], r2 = err[1] / err[2];
        check(r1 > 3.5 && r1 < 4.5 && r2 > 3.5 && r2 < 4.5, fmt("FD ratios %.2f %.2f", r1, r2));
    }
    // orthonormality
    {
        auto p = ModelParams::dimensionless(0.8, 1e4, 0.0, 2);
        XGrid g = XGrid::default_for(p);
        auto bs = solve_bound_states(sector_branch(p, g, 1.0, 1), g, p.mu(), 10);
        RMat G = bs.functions.transpose() * bs.functions * g.spacing();
        const double err = (G - RMat::Identity(G.rows(), G.cols())).cwiseAbs().maxCoeff();
        check(err <= 1e-8, fmt("orthonormality %.1e", err));
    }
    return r;
}

using CriterionFn = CriterionResult (*)();

inline const std::vector<CriterionFn>& all_criteria() {
    static const std::vector<CriterionFn> v{dicke_potentials, ground_transition, excited_transition, critical_splitting,
                                            deep_splitting,   bo_vs_exact,       dispersive_lines,   rabi_fan,
                                            thermal_branches, ramsey_discriminator, circuit_benchmarks,
                                            two_mode_surfaces, stark_limit,       property_suite};
    return v;
}

inline CriterionResult run_criterion(int id) {
    const auto& v = all_criteria();
    if (id < 1 || id > static_cast<int>(v.size())) throw std::out_of_range("no such criterion");
    auto t0 = std::chrono::steady_clock::now();
    CriterionResult r;
    try {
        r = v[static_cast<std::size_t>(id - 1)]();
    } catch (const std::exception& e) {
        r.id = id;
        r.passed = false;
        r.detail = std::string("error: ") + e.what();
    }
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return r;
}

inline std::string format_line(const CriterionResult& r) {
    return fmt("[%s] %2d %s (%.1f s): ", r.passed ? "PASS" : "FAIL", r.id, r.name.c_str(), r.seconds) + r.detail;
}

}  // namespace uscqed::acceptance
