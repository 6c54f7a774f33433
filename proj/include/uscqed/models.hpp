#pragma once

// Cavity-QED Hamiltonians: general N-qubit form, extended Dicke model (EDM) and
// the weak-coupling Stark form. Energies in the units of the supplied frequencies.

#include "uscqed/operators.hpp"

#include <cmath>
#include <iostream>
#include <stdexcept>
#include <vector>

namespace uscqed {

struct GeneralCQEDParams {
    double omega_r{1.0};
    std::vector<double> omega_q;   // one per qubit
    std::vector<double> g;         // one per qubit
    RMat J;                        // N x N symmetric, diagonal unused

    int qubit_count() const { return static_cast<int>(omega_q.size()); }

    void validate() const {
        const auto N = omega_q.size();
        if (N == 0) throw std::invalid_argument("no qubits");
        if (g.size() != N) throw std::invalid_argument("inconsistent list lengths: g");
        if (J.size() != 0 && (J.rows() != static_cast<Eigen::Index>(N) || J.cols() != static_cast<Eigen::Index>(N)))
            throw std::invalid_argument("inconsistent list lengths: J");
        if (omega_r <= 0) throw std::invalid_argument("omega_r must be > 0");
        for (double w : omega_q)
            if (w <= 0) throw std::invalid_argument("omega_q must be > 0");
        if (J.size() != 0 && (J - J.transpose()).cwiseAbs().maxCoeff() > 1e-14)
            throw std::invalid_argument("J must be symmetric");
    }
};

struct ModelParams {
    double omega_r{0.01};
    double omega_q{1.0};
    double g{0.0};
    double epsilon{0.0};   // -1: Dicke model, 0: non-interacting qubits
    int N{2};

    double lambda() const { return std::sqrt(g * g / (omega_r * omega_q)); }
    double lambda2() const { return g * g / (omega_r * omega_q); }
    double mu() const { return (omega_q / omega_r) * (omega_q / omega_r); }
    double lambda_c() const { return 1.0 / std::sqrt(static_cast<double>(N)); }
    double omega_r_tilde() const { return omega_r / omega_q; }

    void validate() const {
        if (omega_r <= 0 || omega_q <= 0) throw std::invalid_argument("frequencies must be > 0");
        if (epsilon < -1.0) throw std::invalid_argument("epsilon must be >= -1");
        if (N < 1) throw std::invalid_argument("N must be >= 1");
    }

    // omega_q = 1, omega_r = 1/sqrt(mu), g from lambda^2.
    static ModelParams dimensionless(double lambda2, double mu, double epsilon, int N) {
        ModelParams p;
        p.omega_q = 1.0;
        p.omega_r = 1.0 / std::sqrt(mu);
        p.g = std::sqrt(lambda2 * p.omega_r * p.omega_q);
        p.epsilon = epsilon;
        p.N = N;
        p.validate();
        return p;
    }

    GeneralCQEDParams general() const {
        GeneralCQEDParams gp;
        gp.omega_r = omega_r;
        gp.omega_q.assign(N, omega_q);
        gp.g.assign(N, g);
        gp.J = RMat::Constant(N, N, epsilon * g * g / (4.0 * omega_r));
        gp.J.diagonal().setZero();
        return gp;
    }
};

namespace detail {

inline RMat fock_number(int n_max) {
    RMat m = RMat::Zero(n_max + 1, n_max + 1);
    for (int n = 0; n <= n_max; ++n) m(n, n) = n;
    return m;
}

inline RMat fock_quadrature(int n_max) {
    RMat m = RMat::Zero(n_max + 1, n_max + 1);
    for (int n = 1; n <= n_max; ++n) m(n - 1, n) = m(n, n - 1) = std::sqrt(static_cast<double>(n));
    return m;
}

inline RMat real_site(int N, int site, const RMat& op) {
    RMat out = RMat::Identity(1, 1);
    for (int i = 1; i <= N; ++i) out = kron(out, i == site ? op : RMat(RMat::Identity(2, 2)));
    return out;
}

inline RMat sigma_x_real() {
    RMat s(2, 2);
    s << 0, 1, 1, 0;
    return s;
}
inline RMat sigma_z_real() {
    RMat s(2, 2);
    s << 1, 0, 0, -1;
    return s;
}

inline RMat spin_x_real(int N) {
    const Eigen::Index d = Eigen::Index(1) << N;
    RMat s = RMat::Zero(d, d);
    for (int i = 1; i <= N; ++i) s += real_site(N, i, sigma_x_real());
    return 0.5 * s;
}
inline RMat spin_z_real(int N) {
    const Eigen::Index d = Eigen::Index(1) << N;
    RMat s = RMat::Zero(d, d);
    for (int i = 1; i <= N; ++i) s += real_site(N, i, sigma_z_real());
    return 0.5 * s;
}

}  // namespace detail

inline HermitianOperator build_h_cqed(const GeneralCQEDParams& p, int n_max) {
    p.validate();
    if (n_max < 1) throw std::invalid_argument("n_max must be >= 1");
    const int N = p.qubit_count();
    BasisDescriptor b(N, n_max);
    const Eigen::Index dq = b.qubit_dimension();
    RMat iq = RMat::Identity(dq, dq);
    RMat iff = RMat::Identity(n_max + 1, n_max + 1);
    RMat quad = detail::fock_quadrature(n_max);

    RMat qubit = RMat::Zero(dq, dq);
    RMat coupling = RMat::Zero(dq, dq);
    std::vector<RMat> sx(N);
    for (int i = 0; i < N; ++i) {
        sx[i] = detail::real_site(N, i + 1, detail::sigma_x_real());
        qubit += 0.5 * p.omega_q[i] * detail::real_site(N, i + 1, detail::sigma_z_real());
        coupling += 0.5 * p.g[i] * sx[i];
    }
    for (int i = 0; i < N; ++i)
        for (int j = 0; j < N; ++j) {
            double Jij = (i != j && p.J.size() != 0) ? p.J(i, j) : 0.0;
            qubit += (p.g[i] * p.g[j] / (4.0 * p.omega_r) + Jij) * sx[i] * sx[j];
        }
    RMat H = p.omega_r * kron(iq, detail::fock_number(n_max)) + kron(qubit, iff) + kron(coupling, quad);
    return {b, H.cast<cplx>()};
}

inline HermitianOperator build_h_edm(const ModelParams& p, int n_max) {
    p.validate();
    if (n_max < 1) throw std::invalid_argument("n_max must be >= 1");
    BasisDescriptor b(p.N, n_max);
    RMat Sx = detail::spin_x_real(p.N);
    RMat Sz = detail::spin_z_real(p.N);
    const Eigen::Index dq = b.qubit_dimension();
    RMat iq = RMat::Identity(dq, dq);
    RMat iff = RMat::Identity(n_max + 1, n_max + 1);
    RMat qubit = p.omega_q * Sz + (1.0 + p.epsilon) * (p.g * p.g / p.omega_r) * Sx * Sx;
    RMat H = p.omega_r * kron(iq, detail::fock_number(n_max)) + kron(qubit, iff) +
             p.g * kron(Sx, detail::fock_quadrature(n_max));
    return {b, H.cast<cplx>()};
}

inline bool stark_valid(const ModelParams& p) { return p.g * p.g / (2.0 * p.omega_q) < p.omega_r; }

inline HermitianOperator build_h_stark(const ModelParams& p, int n_max) {
    p.validate();
    if (n_max < 1) throw std::invalid_argument("n_max must be >= 1");
    if (!stark_valid(p))
        std::cerr << "warning: Stark form outside its validity range (g^2/(2 omega_q) >= omega_r)\n";
    BasisDescriptor b(p.N, n_max);
    const Eigen::Index dq = b.qubit_dimension();
    RMat Sz = detail::spin_z_real(p.N);
    RMat S2 = total_spin_squared_qubits(p.N).real();
    RMat iq = RMat::Identity(dq, dq);
    RMat iff = RMat::Identity(n_max + 1, n_max + 1);
    RMat num = detail::fock_number(n_max);
    const double g2 = p.g * p.g;
    RMat H = p.omega_r * kron(iq, num) + p.omega_q * kron(Sz, iff) +
             (g2 / (4.0 * p.omega_q)) * kron(Sz, RMat(2.0 * num + iff)) +
             ((1.0 + p.epsilon) * g2 / (2.0 * p.omega_r) - g2 / (4.0 * p.omega_q)) * kron(RMat(S2 - Sz * Sz), iff);
    return {b, H.cast<cplx>()};
}

// exp(i pi (a^dag a + S_z + N/2)): diagonal with entries (-1)^(n + number of excited qubits)
inline HermitianOperator parity_operator(const BasisDescriptor& b) {
    const Eigen::Index dq = b.qubit_dimension(), nf = b.fock_dimension();
    CMat P = CMat::Zero(b.dimension(), b.dimension());
    for (Eigen::Index q = 0; q < dq; ++q) {
        // bit value 0 is |e>, so excited count = N - popcount(q)
        int excited = b.qubit_count - __builtin_popcountll(static_cast<unsigned long long>(q));
        for (Eigen::Index n = 0; n < nf; ++n) P(q * nf + n, q * nf + n) = ((excited + n) % 2 == 0) ? 1.0 : -1.0;
    }
    return {b, P};
}

inline RVec lowest_eigenvalues(const HermitianOperator& H, int k) {
    if (H.is_real()) return eigh(H.real_matrix(), k, false).values;
    return eigh(H.matrix(), k, false).values;
}

struct TruncationReport {
    int n_max{0};
    int n_max_check{0};
    int k_levels{0};
    double max_shift{0.0};
    double tolerance{0.0};
    bool passed{false};
};

inline TruncationReport validate_truncation(const ModelParams& p, int n_max, int k_levels) {
    TruncationReport r;
    r.n_max = n_max;
    r.n_max_check = n_max + std::max(1, static_cast<int>(std::ceil(0.25 * n_max)));
    r.k_levels = k_levels;
    r.tolerance = 1e-8 * p.omega_r;
    RVec e1 = lowest_eigenvalues(build_h_edm(p, n_max), k_levels);
    RVec e2 = lowest_eigenvalues(build_h_edm(p, r.n_max_check), k_levels);
    const Eigen::Index k = std::min(e1.size(), e2.size());
    r.max_shift = (e1.head(k) - e2.head(k)).cwiseAbs().maxCoeff();
    r.passed = r.max_shift < r.tolerance;
    return r;
}

// Smallest cutoff on the grid start, start+step, ... that passes validate_truncation.
inline int minimal_cutoff(const ModelParams& p, int k_levels, int start = 10, int step = 10, int limit = 1000) {
    for (int n = std::max(start, k_levels); n <= limit; n += step)
        if (validate_truncation(p, n, k_levels).passed) return n;
    throw std::runtime_error("no adequate Fock cutoff below " + std::to_string(limit));
}

}  // namespace uscqed
