#pragma once

// Two-mode lumped circuit: LC resonator with parasitic L_s, C_s and two three-junction
// flux qubits. Laboratory inputs (fF, pF, nH, GHz); frequencies reported as f = omega/2pi in GHz.

#include "uscqed/linalg.hpp"

#include <Eigen/Sparse>
#include <boost/math/tools/minima.hpp>
#include <boost/math/tools/roots.hpp>

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <vector>

namespace uscqed::circuit {

namespace si {
inline constexpr double e = 1.602176634e-19;
inline constexpr double h = 6.62607015e-34;
inline constexpr double hbar = h / (2.0 * std::numbers::pi);
inline constexpr double phi0 = hbar / (2.0 * e);     // reduced flux quantum
inline constexpr double R_Q = h / (4.0 * e * e);     // ~6453 Ohm
}  // namespace si

inline constexpr double two_pi = 2.0 * std::numbers::pi;

struct CircuitParams {
    double C_J{2.21};      // fF
    double E_J{336.8};     // GHz (E_J/h)
    double alpha{0.74};
    double C{79.58};       // pF
    double L{127.3};       // nH
    double C_s{1.06};      // fF
    double L_s{1.27};      // nH
    double Phi_e{0.5};     // flux through the qubit loop in units of h/2e

    double C_J_si() const { return C_J * 1e-15; }
    double C_si() const { return C * 1e-12; }
    double L_si() const { return L * 1e-9; }
    double C_s_si() const { return C_s * 1e-15; }
    double L_s_si() const { return L_s * 1e-9; }
    double C_q_si() const { return C_J_si() * (alpha + 0.5); }
    double C_minus_si() const { return 0.5 * C_J_si(); }
    double C_b_si() const { return C_s_si() * C_q_si() / (C_q_si() + 2.0 * C_s_si()); }
    double phase_e() const { return two_pi * Phi_e; }
    // inductive energy phi0^2 / L in GHz
    double E_L() const { return si::phi0 * si::phi0 / L_si() / si::h * 1e-9; }

    void validate() const {
        for (double v : {C_J, E_J, C, L, C_s, L_s})
            if (!(v > 0)) throw std::invalid_argument("circuit element values must be > 0");
    }
    bool alpha_typical() const { return alpha > 0 && alpha < 1; }
};

struct NormalModeData {
    // exact normal modes, GHz
    double omega_minus{0}, omega_plus{0};
    double g_Q_plus{0}, g_Q_minus{0}, g_phi_plus{0}, g_phi_minus{0};
    double xi{0};
    double Z{0}, Z_b{0};   // Ohm
    // closed form from bare modes with L_b = L || L_s, Z_a = sqrt(L_s/C), Z_b' = sqrt(L_b/C_b)
    double omega_a{0}, omega_b{0}, g_ab{0};
    double closed_omega_minus{0}, closed_omega_plus{0};
    // weak-parasitics limit forms, ratios g/omega
    double limit_g_phi_minus{0}, limit_g_Q_minus{0}, limit_g_phi_plus{0}, limit_g_Q_plus{0};

    double ratio(double g, double w) const { return g / w; }
};

inline NormalModeData normal_modes(const CircuitParams& cp) {
    cp.validate();
    const double C = cp.C_si(), L = cp.L_si(), Ls = cp.L_s_si(), Cb = cp.C_b_si(), Cq = cp.C_q_si();
    // node fluxes (resonator node a, qubit node b): capacitance diag(C, C_b), inductance matrix K
    Eigen::Matrix2d K;
    K << 1.0 / Ls, -1.0 / Ls, -1.0 / Ls, 1.0 / Ls + 1.0 / L;
    Eigen::Vector2d cdiag(C, Cb);
    Eigen::Matrix2d Cih = cdiag.cwiseSqrt().cwiseInverse().asDiagonal();
    Eigen::Matrix2d Ch = cdiag.cwiseSqrt().asDiagonal();
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(Cih * K * Cih);
    Eigen::Vector2d w = es.eigenvalues().cwiseSqrt();
    Eigen::Matrix2d U = es.eigenvectors();
    Eigen::Matrix2d flux_map = Cih * U, charge_map = Ch * U;

    NormalModeData d;
    double gphi[2], gq[2];
    for (int m = 0; m < 2; ++m) {
        const double phib = flux_map(1, m) * std::sqrt(si::hbar / (2.0 * w(m)));
        const double qb = charge_map(1, m) * std::sqrt(si::hbar * w(m) / 2.0);
        gphi[m] = 2.0 * si::phi0 * std::abs(phib) / (L * si::hbar) / two_pi * 1e-9;
        gq[m] = 4.0 * si::e * std::abs(qb) / (Cq * si::hbar) / two_pi * 1e-9;
    }
    d.omega_minus = w(0) / two_pi * 1e-9;
    d.omega_plus = w(1) / two_pi * 1e-9;
    d.g_phi_minus = gphi[0];
    d.g_phi_plus = gphi[1];
    d.g_Q_minus = gq[0];
    d.g_Q_plus = gq[1];
    d.Z = std::sqrt(L / C);
    d.Z_b = std::sqrt(Ls / Cb);

    const double Lb = L * Ls / (L + Ls);
    const double wa = 1.0 / std::sqrt(Ls * C), wb = 1.0 / std::sqrt(Lb * Cb);
    const double Za = std::sqrt(Ls / C), Zbb = std::sqrt(Lb / Cb);
    const double gab = std::sqrt(Zbb / Za) * wa;
    const double disc = std::sqrt(std::pow(wa * wa - wb * wb, 2) + 4.0 * gab * gab * wa * wb);
    d.omega_a = wa / two_pi * 1e-9;
    d.omega_b = wb / two_pi * 1e-9;
    d.g_ab = gab / two_pi * 1e-9;
    d.closed_omega_plus = std::sqrt(0.5 * (wa * wa + wb * wb + disc)) / two_pi * 1e-9;
    d.closed_omega_minus = std::sqrt(0.5 * (wa * wa + wb * wb - disc)) / two_pi * 1e-9;
    d.xi = 0.5 * std::atan2(-2.0 * gab * std::sqrt(wa * wb), wa * wa - wb * wb);

    const double pi = std::numbers::pi;
    d.limit_g_phi_minus = std::sqrt(si::R_Q / (pi * d.Z));
    d.limit_g_Q_minus = 2.0 * std::sqrt(pi * d.Z / si::R_Q) * Cb / Cq;
    d.limit_g_phi_plus = std::sqrt(si::R_Q / (pi * d.Z_b)) * Ls / L;
    d.limit_g_Q_plus = 2.0 * std::sqrt(pi * d.Z_b / si::R_Q) * Cb / Cq;
    return d;
}

struct FluxQubitSpectrum {
    RVec energies;     // lowest M, GHz, ground at 0
    CMat phi;          // phase across the two series junctions, kept eigenbasis
    CMat n;            // conjugate charge (n1 + n2)/2
    double omega_q{0}; // E_1 - E_0, GHz
    double convergence_shift{0};
    int charge_cutoff{0};
};

namespace detail {

struct QubitOperators {
    CMat H, phi, n;
};

inline QubitOperators qubit_operators(const CircuitParams& cp, int K, bool inductive = true) {
    const int d = 2 * K + 1;
    const double ECq = si::e * si::e / (2.0 * cp.C_q_si()) / si::h * 1e-9;
    const double ECm = si::e * si::e / (2.0 * cp.C_minus_si()) / si::h * 1e-9;
    RMat N = RMat::Zero(d, d), cosop = RMat::Zero(d, d), shift = RMat::Zero(d, d);
    CMat saw = CMat::Zero(d, d);
    RMat saw2 = RMat::Zero(d, d);
    for (int i = 0; i < d; ++i) {
        N(i, i) = i - K;
        if (i + 1 < d) {
            cosop(i, i + 1) = cosop(i + 1, i) = 0.5;
            shift(i + 1, i) = 1.0;   // e^{i phi}|n> = |n+1>
        }
        for (int j = 0; j < d; ++j) {
            const int k = i - j;
            const double sgn = (k % 2 == 0) ? 1.0 : -1.0;
            if (k != 0) {
                saw(i, j) = cplx(0.0, sgn / k);
                saw2(i, j) = 2.0 * sgn / (static_cast<double>(k) * k);
            } else {
                saw2(i, j) = std::numbers::pi * std::numbers::pi / 3.0;
            }
        }
    }
    RMat I = RMat::Identity(d, d);
    RMat n = 0.5 * (kron(N, I) + kron(I, N));
    RMat nm = 0.5 * (kron(N, I) - kron(I, N));
    CMat phi = kron(saw, CMat(I.cast<cplx>())) + kron(CMat(I.cast<cplx>()), saw);
    CMat phi2 = (kron(saw2, I) + kron(I, saw2)).cast<cplx>() + 2.0 * kron(saw, saw);
    CMat e12 = kron(shift, shift).cast<cplx>() * std::exp(cplx(0.0, cp.phase_e()));
    CMat H = (4.0 * ECq * n * n + 4.0 * ECm * nm * nm - cp.E_J * (kron(cosop, I) + kron(I, cosop))).cast<cplx>();
    H -= 0.5 * cp.alpha * cp.E_J * (e12 + CMat(e12.adjoint()));
    if (inductive) H += 0.5 * cp.E_L() * phi2;
    return {0.5 * (H + CMat(H.adjoint())), phi, n.cast<cplx>()};
}

inline RVec qubit_levels(const CircuitParams& cp, int K, int M) {
    auto ops = qubit_operators(cp, K);
    RVec e = eigh(ops.H, M, false).values;
    return e.array() - e(0);
}

}  // namespace detail

inline FluxQubitSpectrum flux_qubit_spectrum(const CircuitParams& cp, int K = 7, int M = 5, bool check = true,
                                             double tol = 1e-4) {
    cp.validate();
    auto ops = detail::qubit_operators(cp, K);
    auto ep = eigh(ops.H, M, true);
    FluxQubitSpectrum out;
    out.charge_cutoff = K;
    out.energies = ep.values.array() - ep.values(0);
    out.omega_q = out.energies(1);
    out.phi = ep.vectors.adjoint() * ops.phi * ep.vectors;
    out.n = ep.vectors.adjoint() * ops.n * ep.vectors;
    if (check) {
        const int Mc = std::min<int>(M, 2);
        RVec bigger = detail::qubit_levels(cp, K + 2, Mc);
        out.convergence_shift = (bigger - out.energies.head(Mc)).cwiseAbs().maxCoeff();
        if (out.convergence_shift > tol * out.omega_q) throw std::runtime_error("flux qubit basis not converged");
    }
    return out;
}

inline double qubit_frequency(const CircuitParams& cp, int K = 7) { return detail::qubit_levels(cp, K, 2)(1); }

// Flux bias in [lo, hi] whose qubit frequency is closest to target_GHz.
inline double calibrate_flux(CircuitParams cp, double target_GHz, double lo = 0.45, double hi = 0.55, int K = 7) {
    auto miss = [&](double f) {
        cp.Phi_e = f;
        return std::abs(qubit_frequency(cp, K) - target_GHz);
    };
    double best = lo, bv = miss(lo);
    const int n = 40;
    for (int i = 1; i <= n; ++i) {
        const double f = lo + (hi - lo) * i / n;
        const double v = miss(f);
        if (v < bv) {
            bv = v;
            best = f;
        }
    }
    const double w = (hi - lo) / n;
    auto res = boost::math::tools::brent_find_minima(miss, std::max(lo, best - w), std::min(hi, best + w), 40);
    return res.second <= bv ? res.first : best;
}

inline double effective_mass(const CircuitParams& cp, int K = 7) {
    const double wq = qubit_frequency(cp, K);
    const double wm = normal_modes(cp).omega_minus;
    return (wq / wm) * (wq / wm);
}

struct TwoModeOptions {
    int M{16};              // projected levels per qubit
    int fock_plus{6};       // Fock states of the + mode (1 disables the mode)
    int charge_cutoff{7};
    int levels{4};          // surfaces returned
};

struct TwoModeSurfaces {
    std::vector<double> x;
    RMat branches;            // points x levels, units of omega_unit, includes X^2/2
    double omega_unit{0};     // GHz; dressed single-qubit frequency
    double omega_slow{0};     // GHz; frequency of the slow mode
    double g_phi_slow{0};     // GHz
    double phi01{0};
    double lambda2{0};        // single-mode mapping (g phi01)^2 / (omega_slow omega_unit)
    double mu{0};
    double p_term_bound{0};   // (g_Q,-/omega_q)^2
};

namespace detail {

struct CoupledModel {
    CMat H0, Hx;               // H(X) = H0 + X Hx in GHz
    Eigen::SparseMatrix<double> sym, anti;   // qubit-exchange symmetry blocks
};

inline CMat fock_lower(int nf) {
    CMat a = CMat::Zero(nf, nf);
    for (int k = 1; k < nf; ++k) a(k - 1, k) = std::sqrt(static_cast<double>(k));
    return a;
}

// Orthonormal exchange-even and -odd combinations of |i j f>.
inline void exchange_blocks(int M, int nf, Eigen::SparseMatrix<double>& sym, Eigen::SparseMatrix<double>& anti) {
    const int dim = M * M * nf;
    std::vector<Eigen::Triplet<double>> ts, ta;
    int cs = 0, ca = 0;
    const double r = 1.0 / std::sqrt(2.0);
    for (int i = 0; i < M; ++i)
        for (int j = i; j < M; ++j)
            for (int f = 0; f < nf; ++f) {
                const int a = (i * M + j) * nf + f, b = (j * M + i) * nf + f;
                if (i == j) {
                    ts.emplace_back(a, cs++, 1.0);
                } else {
                    ts.emplace_back(a, cs, r);
                    ts.emplace_back(b, cs++, r);
                    ta.emplace_back(a, ca, r);
                    ta.emplace_back(b, ca++, -r);
                }
            }
    sym.resize(dim, cs);
    sym.setFromTriplets(ts.begin(), ts.end());
    anti.resize(dim, ca);
    anti.setFromTriplets(ta.begin(), ta.end());
}

inline CoupledModel coupled_model(const FluxQubitSpectrum& q, double E_L, int nf, double omega_plus, double g_phi_plus,
                                  double g_Q_plus, double x_coupling) {
    const int M = static_cast<int>(q.energies.size());
    CMat Iq = CMat::Identity(M, M), If = CMat::Identity(nf, nf);
    CMat E = q.energies.cast<cplx>().asDiagonal();
    auto k3 = [](const CMat& a, const CMat& b, const CMat& c) { return CMat(kron(kron(a, b), c)); };
    CMat phq = k3(q.phi, Iq, If) + k3(Iq, q.phi, If);
    CoupledModel m;
    m.H0 = k3(E, Iq, If) + k3(Iq, E, If) + E_L * k3(q.phi, q.phi, If);
    if (nf > 1) {
        CMat a = fock_lower(nf);
        CMat ad = a.adjoint();
        CMat x = a + ad, p = cplx(0.0, 1.0) * (ad - a);
        m.H0 += omega_plus * k3(Iq, Iq, CMat(ad * a));
        m.H0 += 0.5 * g_phi_plus * (k3(q.phi, Iq, x) + k3(Iq, q.phi, x));
        m.H0 += 0.5 * g_Q_plus * (k3(q.n, Iq, p) + k3(Iq, q.n, p));
    }
    m.H0 = 0.5 * (m.H0 + CMat(m.H0.adjoint()));
    m.Hx = x_coupling * phq;
    m.Hx = 0.5 * (m.Hx + CMat(m.Hx.adjoint()));
    exchange_blocks(M, nf, m.sym, m.anti);
    return m;
}

inline RVec lowest_levels(const CoupledModel& m, double X, int k) {
    CMat H = m.H0 + X * m.Hx;
    CMat hs = m.sym.transpose().cast<cplx>() * H * m.sym.cast<cplx>();
    CMat ha = m.anti.transpose().cast<cplx>() * H * m.anti.cast<cplx>();
    RVec es = eigh(hs, k, false).values, ea = eigh(ha, k, false).values;
    std::vector<double> all(es.data(), es.data() + es.size());
    all.insert(all.end(), ea.data(), ea.data() + ea.size());
    std::sort(all.begin(), all.end());
    RVec out(k);
    for (int i = 0; i < k; ++i) out(i) = all[static_cast<std::size_t>(i)];
    return out;
}

inline double dressed_frequency(const FluxQubitSpectrum& q, int nf, double omega_plus, double g_phi_plus, double g_Q_plus) {
    if (nf <= 1) return q.omega_q;
    const int M = static_cast<int>(q.energies.size());
    CMat If = CMat::Identity(nf, nf), Iq = CMat::Identity(M, M);
    CMat a = fock_lower(nf);
    CMat A = kron(Iq, a), Ad = A.adjoint();
    CMat P = kron(q.phi, If), Nq = kron(q.n, If);
    CMat H = kron(CMat(q.energies.cast<cplx>().asDiagonal()), If) + omega_plus * (Ad * A) + 0.5 * g_phi_plus * (A + Ad) * P +
             cplx(0.0, 0.5 * g_Q_plus) * (Ad - A) * Nq;
    RVec e = eigh(CMat(0.5 * (H + CMat(H.adjoint()))), 2, false).values;
    return e(1) - e(0);
}

inline double dressed_phi01(const FluxQubitSpectrum& q, int nf, double omega_plus, double g_phi_plus, double g_Q_plus) {
    if (nf <= 1) return std::abs(q.phi(0, 1));
    const int M = static_cast<int>(q.energies.size());
    CMat If = CMat::Identity(nf, nf), Iq = CMat::Identity(M, M);
    CMat a = fock_lower(nf);
    CMat A = kron(Iq, a), Ad = A.adjoint();
    CMat P = kron(q.phi, If), Nq = kron(q.n, If);
    CMat H = kron(CMat(q.energies.cast<cplx>().asDiagonal()), If) + omega_plus * (Ad * A) + 0.5 * g_phi_plus * (A + Ad) * P +
             cplx(0.0, 0.5 * g_Q_plus) * (Ad - A) * Nq;
    auto ep = eigh(CMat(0.5 * (H + CMat(H.adjoint()))), 2, true);
    return std::abs((ep.vectors.col(0).adjoint() * P * ep.vectors.col(1))(0, 0));
}

}  // namespace detail

// BO surfaces of two projected qubits plus the + mode, with the slow mode as a classical quadrature X.
inline TwoModeSurfaces two_mode_bo_surfaces(const CircuitParams& cp, const std::vector<double>& xs,
                                            const TwoModeOptions& opt = {}) {
    auto nm = normal_modes(cp);
    auto q = flux_qubit_spectrum(cp, opt.charge_cutoff, opt.M);
    TwoModeSurfaces out;
    out.x = xs;
    out.omega_slow = nm.omega_minus;
    out.g_phi_slow = nm.g_phi_minus;
    out.omega_unit = detail::dressed_frequency(q, opt.fock_plus, nm.omega_plus, nm.g_phi_plus, nm.g_Q_plus);
    out.phi01 = detail::dressed_phi01(q, opt.fock_plus, nm.omega_plus, nm.g_phi_plus, nm.g_Q_plus);
    out.mu = std::pow(out.omega_unit / nm.omega_minus, 2);
    out.lambda2 = std::pow(nm.g_phi_minus * out.phi01, 2) / (nm.omega_minus * out.omega_unit);
    out.p_term_bound = std::pow(nm.g_Q_minus / q.omega_q, 2);
    const double xc = 0.5 * nm.g_phi_minus * std::sqrt(2.0 * out.omega_unit / nm.omega_minus);
    auto model = detail::coupled_model(q, cp.E_L(), opt.fock_plus, nm.omega_plus, nm.g_phi_plus, nm.g_Q_plus, xc);
    out.branches.resize(static_cast<Eigen::Index>(xs.size()), opt.levels);
    parallel_for(xs.size(), [&](std::size_t i) {
        RVec e = detail::lowest_levels(model, xs[i], opt.levels);
        out.branches.row(static_cast<Eigen::Index>(i)) =
            (e.array() / out.omega_unit + 0.5 * xs[i] * xs[i]).transpose();
    });
    return out;
}

struct SingleModeReference {
    CircuitParams params;    // C_J recalibrated, parasitics irrelevant
    double omega{0};         // GHz, 1/sqrt(LC)
    double g_phi{0};         // GHz
    double C_J{0};           // fF
};

// Single LC mode with its own qubit capacitance chosen so the bare qubit frequency equals target_GHz.
inline SingleModeReference single_mode_reference(const CircuitParams& cp, double target_GHz, int K = 7) {
    SingleModeReference r;
    r.params = cp;
    auto f = [&](double cj) {
        CircuitParams c = cp;
        c.C_J = cj;
        return qubit_frequency(c, K) - target_GHz;
    };
    double lo = 0.5 * cp.C_J, hi = 4.0 * cp.C_J;
    if (f(lo) * f(hi) > 0) throw std::runtime_error("qubit capacitance calibration failed");
    boost::uintmax_t iters = 100;
    auto root = boost::math::tools::toms748_solve(f, lo, hi, boost::math::tools::eps_tolerance<double>(40), iters);
    r.C_J = 0.5 * (root.first + root.second);
    r.params.C_J = r.C_J;
    const double L = cp.L_si(), C = cp.C_si();
    r.omega = 1.0 / std::sqrt(L * C) / two_pi * 1e-9;
    r.g_phi = std::sqrt(si::R_Q / (std::numbers::pi * std::sqrt(L / C))) * r.omega;
    return r;
}

inline TwoModeSurfaces single_mode_surfaces(const SingleModeReference& ref, const std::vector<double>& xs,
                                            const TwoModeOptions& opt = {}) {
    auto q = flux_qubit_spectrum(ref.params, opt.charge_cutoff, opt.M);
    TwoModeSurfaces out;
    out.x = xs;
    out.omega_unit = q.omega_q;
    out.omega_slow = ref.omega;
    out.g_phi_slow = ref.g_phi;
    out.phi01 = std::abs(q.phi(0, 1));
    out.mu = std::pow(q.omega_q / ref.omega, 2);
    out.lambda2 = std::pow(ref.g_phi * out.phi01, 2) / (ref.omega * q.omega_q);
    const double xc = 0.5 * ref.g_phi * std::sqrt(2.0 * q.omega_q / ref.omega);
    auto model = detail::coupled_model(q, ref.params.E_L(), 1, 0.0, 0.0, 0.0, xc);
    out.branches.resize(static_cast<Eigen::Index>(xs.size()), opt.levels);
    parallel_for(xs.size(), [&](std::size_t i) {
        RVec e = detail::lowest_levels(model, xs[i], opt.levels);
        out.branches.row(static_cast<Eigen::Index>(i)) = (e.array() / q.omega_q + 0.5 * xs[i] * xs[i]).transpose();
    });
    return out;
}

// Largest difference of the lowest `levels` surfaces after shifting each set so its ground minimum is 0.
inline double surface_deviation(const TwoModeSurfaces& a, const TwoModeSurfaces& b, int levels, double x_window) {
    const double ma = a.branches.col(0).minCoeff(), mb = b.branches.col(0).minCoeff();
    double dev = 0.0;
    for (std::size_t i = 0; i < a.x.size(); ++i) {
        if (std::abs(a.x[i]) > x_window + 1e-12) continue;
        for (int k = 0; k < levels; ++k)
            dev = std::max(dev, std::abs((a.branches(static_cast<Eigen::Index>(i), k) - ma) -
                                         (b.branches(static_cast<Eigen::Index>(i), k) - mb)));
    }
    return dev;
}

}  // namespace uscqed::circuit
