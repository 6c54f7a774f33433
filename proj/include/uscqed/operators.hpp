#pragma once

// Qubit register plus one truncated bosonic mode.
// Tensor order is fixed: qubit 1 (most significant) ... qubit N, boson last.
// Single-qubit basis is {|e>, |g>}, so sigma_z = diag(1, -1).

#include "uscqed/linalg.hpp"

#include <stdexcept>
#include <utility>

namespace uscqed {

enum class Axis { x, y, z };

struct BasisDescriptor {
    int qubit_count{1};   // N >= 1
    int fock_cutoff{0};   // n_max, 0 means no bosonic factor

    BasisDescriptor() = default;
    BasisDescriptor(int n, int n_max) : qubit_count(n), fock_cutoff(n_max) {
        if (n < 1) throw std::invalid_argument("qubit_count must be >= 1");
        if (n > 12) throw std::invalid_argument("qubit_count too large for dense operators");
        if (n_max < 0) throw std::invalid_argument("fock_cutoff must be >= 0");
    }

    bool has_boson() const { return fock_cutoff > 0; }
    Eigen::Index qubit_dimension() const { return Eigen::Index(1) << qubit_count; }
    Eigen::Index fock_dimension() const { return has_boson() ? fock_cutoff + 1 : 1; }
    Eigen::Index dimension() const { return qubit_dimension() * fock_dimension(); }

    bool operator==(const BasisDescriptor&) const = default;
};

class HermitianOperator {
public:
    HermitianOperator(BasisDescriptor basis, CMat matrix) : basis_(basis), matrix_(std::move(matrix)) {
        if (matrix_.rows() != basis_.dimension() || matrix_.cols() != basis_.dimension())
            throw std::invalid_argument("operator dimension does not match basis");
    }

    const BasisDescriptor& basis() const { return basis_; }
    const CMat& matrix() const { return matrix_; }
    Eigen::Index dimension() const { return matrix_.rows(); }

    double hermiticity_error() const {
        double scale = matrix_.cwiseAbs().maxCoeff();
        if (scale == 0.0) return 0.0;
        return (matrix_ - matrix_.adjoint()).cwiseAbs().maxCoeff() / scale;
    }
    bool is_hermitian(double tol = 1e-12) const { return hermiticity_error() <= tol; }

    bool is_real() const { return matrix_.imag().cwiseAbs().maxCoeff() == 0.0; }
    RMat real_matrix() const {
        if (!is_real()) throw std::logic_error("operator has an imaginary part");
        return matrix_.real();
    }

    HermitianOperator& operator+=(const HermitianOperator& o) {
        require_same(o);
        matrix_ += o.matrix_;
        return *this;
    }
    HermitianOperator& operator-=(const HermitianOperator& o) {
        require_same(o);
        matrix_ -= o.matrix_;
        return *this;
    }
    HermitianOperator& operator*=(double s) {
        matrix_ *= s;
        return *this;
    }

    void require_same(const HermitianOperator& o) const {
        if (!(basis_ == o.basis_)) throw std::invalid_argument("basis mismatch");
    }

private:
    BasisDescriptor basis_;
    CMat matrix_;
};

inline HermitianOperator operator+(HermitianOperator a, const HermitianOperator& b) { return a += b; }
inline HermitianOperator operator-(HermitianOperator a, const HermitianOperator& b) { return a -= b; }
inline HermitianOperator operator*(double s, HermitianOperator a) { return a *= s; }

// Hermitian product (a*b + b*a)/2, used for squares and anticommutators.
inline HermitianOperator symmetric_product(const HermitianOperator& a, const HermitianOperator& b) {
    a.require_same(b);
    return {a.basis(), 0.5 * (a.matrix() * b.matrix() + b.matrix() * a.matrix())};
}

inline CMat commutator(const HermitianOperator& a, const HermitianOperator& b) {
    a.require_same(b);
    return a.matrix() * b.matrix() - b.matrix() * a.matrix();
}

inline CMat pauli(Axis axis) {
    CMat s(2, 2);
    switch (axis) {
        case Axis::x: s << 0, 1, 1, 0; break;
        case Axis::y: s << 0, cplx(0, -1), cplx(0, 1), 0; break;
        case Axis::z: s << 1, 0, 0, -1; break;
    }
    return s;
}

namespace detail {

// op acting on the qubit register, lifted to the full basis
inline CMat lift_qubit(const BasisDescriptor& b, const CMat& q) {
    if (!b.has_boson()) return q;
    return kron(q, CMat::Identity(b.fock_dimension(), b.fock_dimension()));
}

inline CMat qubit_site(int N, int site, const CMat& op) {
    CMat out = CMat::Identity(1, 1);
    for (int i = 1; i <= N; ++i) out = kron(out, i == site ? op : CMat::Identity(2, 2));
    return out;
}

}  // namespace detail

inline HermitianOperator pauli_on_site(const BasisDescriptor& b, int site, Axis axis) {
    if (site < 1 || site > b.qubit_count) throw std::out_of_range("invalid site");
    return {b, detail::lift_qubit(b, detail::qubit_site(b.qubit_count, site, pauli(axis)))};
}

// Collective spin on the qubit register only (2^N x 2^N).
inline CMat collective_spin_qubits(int N, Axis axis) {
    const Eigen::Index d = Eigen::Index(1) << N;
    CMat s = CMat::Zero(d, d);
    for (int i = 1; i <= N; ++i) s += detail::qubit_site(N, i, pauli(axis));
    return 0.5 * s;
}

inline HermitianOperator collective_spin(const BasisDescriptor& b, Axis axis) {
    return {b, detail::lift_qubit(b, collective_spin_qubits(b.qubit_count, axis))};
}

inline CMat total_spin_squared_qubits(int N) {
    CMat sx = collective_spin_qubits(N, Axis::x);
    CMat sy = collective_spin_qubits(N, Axis::y);
    CMat sz = collective_spin_qubits(N, Axis::z);
    return sx * sx + sy * sy + sz * sz;
}

inline HermitianOperator total_spin_squared(const BasisDescriptor& b) {
    CMat s2 = total_spin_squared_qubits(b.qubit_count);
    return {b, detail::lift_qubit(b, 0.5 * (s2 + s2.adjoint()))};
}

struct BosonOps {
    CMat a;
    CMat a_dag;
    HermitianOperator number;
};

inline BosonOps boson_ops(const BasisDescriptor& b) {
    if (!b.has_boson()) throw std::invalid_argument("no bosonic factor");
    const Eigen::Index nf = b.fock_dimension();
    CMat a = CMat::Zero(nf, nf);
    for (Eigen::Index n = 1; n < nf; ++n) a(n - 1, n) = std::sqrt(static_cast<double>(n));
    CMat iq = CMat::Identity(b.qubit_dimension(), b.qubit_dimension());
    CMat A = kron(iq, a);
    CMat Ad = A.adjoint();
    CMat num = Ad * A;
    return {A, Ad, HermitianOperator(b, num)};
}

inline HermitianOperator identity(const BasisDescriptor& b) {
    return {b, CMat::Identity(b.dimension(), b.dimension())};
}

// Orthonormal basis of the total-spin sector with S^2 = s(s+1), as columns (2^N x dim).
inline RMat spin_sector_basis(int N, double s) {
    RMat s2 = total_spin_squared_qubits(N).real();
    auto ep = eigh(s2);
    const double target = s * (s + 1.0);
    std::vector<Eigen::Index> cols;
    for (Eigen::Index i = 0; i < ep.values.size(); ++i)
        if (std::abs(ep.values(i) - target) < 1e-8) cols.push_back(i);
    RMat out(s2.rows(), static_cast<Eigen::Index>(cols.size()));
    for (std::size_t j = 0; j < cols.size(); ++j) out.col(static_cast<Eigen::Index>(j)) = ep.vectors.col(cols[j]);
    return out;
}

// Allowed total spins for N spin-1/2 particles, largest first.
inline std::vector<double> spin_values(int N) {
    std::vector<double> out;
    for (double s = 0.5 * N; s >= -1e-12; s -= 1.0) out.push_back(s < 0 ? 0.0 : s);
    return out;
}

}  // namespace uscqed
