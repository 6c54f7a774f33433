#pragma once

// Ramsey sequence on the EDM: driven pi/2 pulse, free evolution, second pulse, qubit readout.
// Pulses are integrated in the lab frame without rotating-wave approximation.

#include "uscqed/born_oppenheimer.hpp"

#include <Eigen/Sparse>
#include <boost/math/tools/minima.hpp>
#include <boost/numeric/odeint.hpp>

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <stdexcept>
#include <vector>

namespace uscqed {

using SpMat = Eigen::SparseMatrix<double>;

struct PulseSpec {
    double rabi_amplitude{0.05};
    double drive_frequency{1.0};
    double phase{0.0};
    double duration{1.0};

    void validate() const {
        if (!(rabi_amplitude > 0)) throw std::invalid_argument("rabi amplitude must be > 0");
        if (!(duration > 0)) throw std::invalid_argument("pulse duration must be > 0");
    }
};

struct PropagatorOptions {
    double abs_tol{1e-10};
    double rel_tol{1e-10};
    double initial_step{1e-2};
};

using StateVec = std::vector<cplx>;

// Integrates i d psi/dt = H(t) psi from t0 to t1; rhs(t, psi) must return H(t) psi.
inline CVec propagate(const CVec& psi0, const std::function<CVec(double, const CVec&)>& apply_h, double t0, double t1,
                      const PropagatorOptions& opt = {}) {
    namespace ode = boost::numeric::odeint;
    if (t1 <= t0) return psi0;
    const std::size_t n = static_cast<std::size_t>(psi0.size());
    StateVec x(psi0.data(), psi0.data() + n);
    auto rhs = [&](const StateVec& y, StateVec& dydt, double t) {
        Eigen::Map<const CVec> ym(y.data(), static_cast<Eigen::Index>(n));
        CVec hy = apply_h(t, ym);
        dydt.resize(n);
        for (std::size_t i = 0; i < n; ++i) dydt[i] = cplx(hy[i].imag(), -hy[i].real());
    };
    auto stepper = ode::make_controlled(opt.abs_tol, opt.rel_tol, ode::runge_kutta_dopri5<StateVec>());
    double t = t0;
    double dt = std::min(opt.initial_step, t1 - t0);
    const double dt_min = 1e-13 * std::max(1.0, std::abs(t1 - t0));
    while (t < t1) {
        if (t + dt > t1) dt = t1 - t;
        auto res = stepper.try_step(rhs, x, t, dt);
        if (res == ode::fail) {
            if (dt < dt_min) throw std::runtime_error("stiff segment");
        }
    }
    return Eigen::Map<CVec>(x.data(), static_cast<Eigen::Index>(n));
}

struct RamseyTarget {
    double s{-1};
    int k{-1};
};

// Everything the protocol needs at one parameter point.
struct RamseySystem {
    ModelParams params;
    BasisDescriptor basis;
    SpMat H;
    SpMat sigma_x;
    RVec energies;
    RMat vectors;
    CVec ground;
    RVec chi0;          // adiabatic qubit ground state at X = 0
    RVec chiT;          // target qubit state at X = 0
    double omega_d{0};  // drive frequency V_T(0) - V_0(0)
    double coupling{0}; // <chi_T|sigma_x|chi_0>
};

inline RamseyTarget default_target(int N) {
    if (N == 2) return {1.0, 1};
    return {0.5 * N, 1};
}

inline RamseySystem make_ramsey_system(const ModelParams& p, int n_max, RamseyTarget target = {}, int probe_site = 1) {
    if (target.s < 0) target = default_target(p.N);
    RamseySystem sys;
    sys.params = p;
    sys.basis = BasisDescriptor(p.N, n_max);
    auto Hop = build_h_edm(p, n_max);
    RMat Hd = Hop.real_matrix();
    sys.H = Hd.sparseView(0.0, 0.0);
    sys.sigma_x = pauli_on_site(sys.basis, probe_site, Axis::x).matrix().real().sparseView(0.0, 0.0);
    auto ep = eigh(Hd);
    sys.energies = ep.values;
    sys.vectors = std::move(ep.vectors);
    sys.ground = sys.vectors.col(0).cast<cplx>();

    const auto& sec = SpinSectors::get(p.N);
    RMat Hq = adiabatic_qubit_hamiltonian(0.0, p);
    auto state_in = [&](double s, int k, double& energy) {
        for (std::size_t j = 0; j < sec.s.size(); ++j)
            if (std::abs(sec.s[j] - s) < 1e-9) {
                const RMat& Q = sec.basis[j];
                RMat h = Q.transpose() * Hq * Q;
                auto e = eigh(RMat(0.5 * (h + h.transpose())));
                energy = e.values(k);
                return RVec(Q * e.vectors.col(k));
            }
        throw std::invalid_argument("spin sector not present for this N");
    };
    double e0 = 0, eT = 0;
    sys.chi0 = state_in(0.5 * p.N, 0, e0);
    sys.chiT = state_in(target.s, target.k, eT);
    sys.omega_d = (eT - e0) * p.omega_q;
    RMat sxq = detail::real_site(p.N, probe_site, detail::sigma_x_real());
    sys.coupling = sys.chiT.dot(sxq * sys.chi0);
    return sys;
}

inline CVec drive_rhs(const RamseySystem& sys, const PulseSpec& pulse, double t, const CVec& psi) {
    CVec out = sys.H * psi;
    out.noalias() += (pulse.rabi_amplitude * std::cos(pulse.drive_frequency * t + pulse.phase)) * (sys.sigma_x * psi);
    return out;
}

inline CVec apply_pulse(const RamseySystem& sys, const PulseSpec& pulse, const CVec& psi, double t_start,
                        const PropagatorOptions& opt = {}) {
    pulse.validate();
    return propagate(psi, [&](double t, const CVec& y) { return drive_rhs(sys, pulse, t, y); }, t_start,
                     t_start + pulse.duration, opt);
}

inline CVec free_evolve(const RamseySystem& sys, const CVec& psi, double tau) {
    CVec c = sys.vectors.transpose() * psi;
    for (Eigen::Index i = 0; i < c.size(); ++i) c(i) *= std::exp(cplx(0.0, -sys.energies(i) * tau));
    return sys.vectors * c;
}

inline CMat reduced_qubit_density(const BasisDescriptor& b, const CVec& psi) {
    const Eigen::Index nf = b.fock_dimension(), dq = b.qubit_dimension();
    Eigen::Map<const CMat> m(psi.data(), nf, dq);   // m(n, q) = psi(q, n)
    return m.transpose() * m.conjugate();
}

struct QubitReadout {
    double p0;
    double pT;
    double fidelity;   // best equal-superposition fidelity over the relative phase
};

inline QubitReadout readout(const RamseySystem& sys, const CVec& psi) {
    CMat rho = reduced_qubit_density(sys.basis, psi);
    CVec c0 = sys.chi0.cast<cplx>(), cT = sys.chiT.cast<cplx>();
    const double p0 = (c0.adjoint() * rho * c0)(0, 0).real();
    const double pT = (cT.adjoint() * rho * cT)(0, 0).real();
    const cplx coh = (c0.adjoint() * rho * cT)(0, 0);
    return {p0, pT, 0.5 * (p0 + pT) + std::abs(coh)};
}

struct Calibration {
    PulseSpec pulse;
    double fidelity{0};
    double nominal_duration{0};
};

// Scans the pulse length around pi/(2 Omega |<chi_T|sigma_x|chi_0>|) for the best preparation fidelity.
inline Calibration calibrate_pi_half(const RamseySystem& sys, double rabi_amplitude, double detuning = 0.0,
                                     int scan_points = 81, const PropagatorOptions& opt = {}) {
    if (std::abs(sys.coupling) < 1e-12) throw std::runtime_error("calibration failed: dark transition");
    Calibration cal;
    cal.pulse.rabi_amplitude = rabi_amplitude;
    cal.pulse.drive_frequency = sys.omega_d + detuning;
    cal.pulse.phase = 0.0;
    cal.nominal_duration = std::numbers::pi / (2.0 * rabi_amplitude * std::abs(sys.coupling));
    const double lo = 0.5 * cal.nominal_duration, hi = 1.5 * cal.nominal_duration;
    // one sweep through the scan window, reading out at each checkpoint
    PulseSpec drive = cal.pulse;
    drive.duration = hi;
    CVec psi = propagate(sys.ground, [&](double t, const CVec& y) { return drive_rhs(sys, drive, t, y); }, 0.0, lo, opt);
    double best_t = lo, best_f = readout(sys, psi).fidelity, t = lo;
    const double step = (hi - lo) / (scan_points - 1);
    for (int i = 1; i < scan_points; ++i) {
        psi = propagate(psi, [&](double tt, const CVec& y) { return drive_rhs(sys, drive, tt, y); }, t, t + step, opt);
        t += step;
        const double f = readout(sys, psi).fidelity;
        if (f > best_f) {
            best_f = f;
            best_t = t;
        }
    }
    auto neg_fid = [&](double tau) {
        PulseSpec pp = cal.pulse;
        pp.duration = tau;
        return -readout(sys, apply_pulse(sys, pp, sys.ground, 0.0, opt)).fidelity;
    };
    auto res = boost::math::tools::brent_find_minima(neg_fid, std::max(lo, best_t - step), std::min(hi, best_t + step), 30);
    cal.pulse.duration = res.first;
    cal.fidelity = -res.second;
    if (cal.fidelity < best_f) {
        cal.pulse.duration = best_t;
        cal.fidelity = best_f;
    }
    if (cal.fidelity < 0.8) throw std::runtime_error("calibration failed");
    return cal;
}

inline double ramsey_point(const RamseySystem& sys, const PulseSpec& pulse, const CVec& after_first, double tau_w,
                           double theta, const PropagatorOptions& opt = {}) {
    CVec psi = free_evolve(sys, after_first, tau_w);
    PulseSpec second = pulse;
    second.phase = theta;
    psi = apply_pulse(sys, second, psi, pulse.duration + tau_w, opt);
    return readout(sys, psi).p0;
}

// Second-pulse phase maximizing P_0 at the reference waiting time.
inline double calibrate_theta(const RamseySystem& sys, const PulseSpec& pulse, double tau_ref = 0.0, int scan_points = 72,
                              const PropagatorOptions& opt = {}) {
    CVec first = apply_pulse(sys, pulse, sys.ground, 0.0, opt);
    const double two_pi = 2.0 * std::numbers::pi;
    double best_th = 0, best = -1;
    for (int i = 0; i < scan_points; ++i) {
        const double th = two_pi * i / scan_points;
        const double v = ramsey_point(sys, pulse, first, tau_ref, th, opt);
        if (v > best) {
            best = v;
            best_th = th;
        }
    }
    const double w = two_pi / scan_points;
    auto res = boost::math::tools::brent_find_minima(
        [&](double th) { return -ramsey_point(sys, pulse, first, tau_ref, th, opt); }, best_th - w, best_th + w, 30);
    double th = -res.second > best ? res.first : best_th;
    th = std::fmod(th, two_pi);
    return th < 0 ? th + two_pi : th;
}

// Average rotation rate of the qubit coherence <chi_0|rho|chi_T> in the frame of the drive, from a
// |coherence|^2-weighted linear fit of its unwrapped phase over [0, tau_max]. Advancing the second-pulse
// phase at this rate removes the trivial fringe from the ground/excited energy offset.
inline double phase_rate(const RamseySystem& sys, const CVec& after_first, double drive_frequency, double tau_max,
                         double step = 1.0) {
    if (!(tau_max > 0)) return 0.0;
    const CVec c = sys.vectors.transpose() * after_first;
    const CVec c0 = sys.chi0.cast<cplx>(), cT = sys.chiT.cast<cplx>();
    const int n = static_cast<int>(std::ceil(tau_max / step));
    double prev = 0, unwrapped = 0;
    double sw = 0, st = 0, sp = 0, stt = 0, stp = 0;
    for (int i = 0; i <= n; ++i) {
        const double t = std::min(tau_max, i * step);
        CVec ci = c;
        for (Eigen::Index k = 0; k < ci.size(); ++k) ci(k) *= std::exp(cplx(0.0, -sys.energies(k) * t));
        const CVec psi = sys.vectors * ci;
        const CMat rho = reduced_qubit_density(sys.basis, psi);
        const cplx a = (c0.adjoint() * rho * cT)(0, 0) * std::exp(cplx(0.0, -drive_frequency * t));
        const double ph = std::arg(a);
        if (i == 0) {
            unwrapped = ph;
        } else {
            unwrapped += std::remainder(ph - prev, 2.0 * std::numbers::pi);
        }
        prev = ph;
        const double w = std::norm(a);
        sw += w;
        st += w * t;
        sp += w * unwrapped;
        stt += w * t * t;
        stp += w * t * unwrapped;
    }
    const double den = sw * stt - st * st;
    return den > 0 ? (sw * stp - st * sp) / den : 0.0;
}

struct RamseyTrace {
    std::vector<double> tau_w;
    std::vector<double> p0;
    PulseSpec pulse;
    double theta{0};
    double phase_rate{0};
    double theta_reference_tau{0};
    double fidelity{0};
    double max_norm_drift{0};
};

// Second-pulse phase is theta + rate * tau_w; pass compensate = false to keep it fixed.
inline RamseyTrace ramsey_scan(const RamseySystem& sys, const Calibration& cal, const std::vector<double>& tau_grid,
                               double theta, bool compensate = true, const PropagatorOptions& opt = {}) {
    RamseyTrace tr;
    tr.tau_w = tau_grid;
    tr.pulse = cal.pulse;
    tr.theta = theta;
    tr.fidelity = cal.fidelity;
    CVec first = apply_pulse(sys, cal.pulse, sys.ground, 0.0, opt);
    const double tau_max = tau_grid.empty() ? 0.0 : *std::max_element(tau_grid.begin(), tau_grid.end());
    tr.phase_rate = compensate ? phase_rate(sys, first, cal.pulse.drive_frequency, tau_max) : 0.0;
    tr.p0.assign(tau_grid.size(), 0.0);
    std::vector<double> drift(tau_grid.size(), 0.0);
    parallel_for(tau_grid.size(), [&](std::size_t i) {
        CVec psi = free_evolve(sys, first, tau_grid[i]);
        PulseSpec second = cal.pulse;
        second.phase = theta + tr.phase_rate * tau_grid[i];
        psi = apply_pulse(sys, second, psi, cal.pulse.duration + tau_grid[i], opt);
        drift[i] = std::abs(psi.squaredNorm() - 1.0);
        tr.p0[i] = readout(sys, psi).p0;
    });
    for (double d : drift) tr.max_norm_drift = std::max(tr.max_norm_drift, d);
    return tr;
}

struct TraceFeatures {
    double contrast{0};
    std::vector<double> smoothed;
    double first_minimum_time{-1};
    std::vector<double> revival_times;
    std::vector<double> revival_heights;
    double modulation_frequency{0};   // 2 pi / first revival time
};

// Moving-average smoothing removes the fast qubit beat; revivals are smoothed maxima following a dip.
inline TraceFeatures analyze_trace(const std::vector<double>& tau, const std::vector<double>& p0, double window = 30.0,
                                   double min_depth = 0.05) {
    TraceFeatures f;
    const std::size_t n = p0.size();
    if (n < 3) return f;
    auto [mn, mx] = std::minmax_element(p0.begin(), p0.end());
    f.contrast = *mx - *mn;
    f.smoothed.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        double s = 0;
        int c = 0;
        for (std::size_t j = 0; j < n; ++j)
            if (std::abs(tau[j] - tau[i]) <= 0.5 * window) {
                s += p0[j];
                ++c;
            }
        f.smoothed[i] = s / c;
    }
    const auto& y = f.smoothed;
    // alternate between looking for a dip and a revival, each at least min_depth deep
    bool seeking_min = true;
    double ext = y[0];
    std::size_t ext_i = 0;
    for (std::size_t i = 1; i < n; ++i) {
        if (seeking_min) {
            if (y[i] < ext) {
                ext = y[i];
                ext_i = i;
            } else if (y[i] > ext + min_depth) {
                if (f.first_minimum_time < 0) f.first_minimum_time = tau[ext_i];
                seeking_min = false;
                ext = y[i];
                ext_i = i;
            }
        } else {
            if (y[i] > ext) {
                ext = y[i];
                ext_i = i;
            } else if (y[i] < ext - min_depth) {
                f.revival_times.push_back(tau[ext_i]);
                f.revival_heights.push_back(y[ext_i]);
                seeking_min = true;
                ext = y[i];
                ext_i = i;
            }
        }
    }
    if (!f.revival_times.empty()) f.modulation_frequency = 2.0 * std::numbers::pi / f.revival_times.front();
    return f;
}

// Small-oscillation frequency sqrt(V''(X_min)/mu) at the lowest point of a branch.
inline double bottom_frequency(const RVec& V, const XGrid& g, double mu) {
    Eigen::Index imin;
    V.minCoeff(&imin);
    if (imin == 0 || imin + 1 >= V.size()) throw std::runtime_error("minimum on the grid boundary");
    const double h = g.spacing();
    const double curv = (V(imin + 1) - 2.0 * V(imin) + V(imin - 1)) / (h * h);
    return std::sqrt(std::max(0.0, curv) / mu);
}

struct Snapshot {
    std::vector<double> x;
    std::vector<double> density;   // normalized to unit area
    double projection_norm{0};
};

// Harmonic-oscillator eigenfunctions of the rescaled quadrature; vacuum variance 1/(2 sqrt(mu)).
inline RMat fock_wavefunctions(const std::vector<double>& xs, int n_max, double mu) {
    const double s = std::pow(mu, 0.25);
    const double norm0 = std::pow(std::sqrt(mu) / std::numbers::pi, 0.25);
    RMat h(static_cast<Eigen::Index>(xs.size()), n_max + 1);
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double xi = s * xs[i];
        double prev = 0.0, cur = norm0 * std::exp(-0.5 * xi * xi);
        h(i, 0) = cur;
        for (int n = 0; n < n_max; ++n) {
            const double next = std::sqrt(2.0 / (n + 1)) * xi * cur - std::sqrt(static_cast<double>(n) / (n + 1)) * prev;
            prev = cur;
            cur = next;
            h(i, n + 1) = cur;
        }
    }
    return h;
}

inline Snapshot wavepacket_snapshot(const BasisDescriptor& b, const CVec& psi, const RVec& qubit_state,
                                    const std::vector<double>& xs, double mu) {
    const Eigen::Index nf = b.fock_dimension(), dq = b.qubit_dimension();
    if (qubit_state.size() != dq) throw std::invalid_argument("qubit state dimension mismatch");
    Eigen::Map<const CMat> m(psi.data(), nf, dq);
    CVec c = m * qubit_state.cast<cplx>();
    Snapshot out;
    out.x = xs;
    out.projection_norm = c.norm();
    if (out.projection_norm < 1e-6) throw std::runtime_error("no excited component");
    c /= out.projection_norm;
    RMat h = fock_wavefunctions(xs, static_cast<int>(nf) - 1, mu);
    CVec amp = h.cast<cplx>() * c;
    out.density.resize(xs.size());
    for (std::size_t i = 0; i < xs.size(); ++i) out.density[i] = std::norm(amp(static_cast<Eigen::Index>(i)));
    return out;
}

}  // namespace uscqed
