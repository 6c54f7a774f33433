#pragma once

// Born-Oppenheimer treatment of the EDM in the low-frequency limit.
// X is the rescaled resonator quadrature, energies are in units of omega_q,
// and the slow mode has mass mu = (omega_q/omega_r)^2.

#include "uscqed/models.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace uscqed {

struct XGrid {
    double x_min{-6.0};
    double x_max{6.0};
    int points{2001};

    XGrid() = default;
    XGrid(double lo, double hi, int m) : x_min(lo), x_max(hi), points(m) {
        if (m < 3) throw std::invalid_argument("grid needs at least 3 points");
        if (!(hi > lo)) throw std::invalid_argument("grid bounds must be increasing");
    }

    static XGrid symmetric(double half_width, int m) { return {-half_width, half_width, m}; }

    // [-6, 6] with 2001 points, widened for strong coupling so outer wells fit at fixed spacing.
    static XGrid default_for(const ModelParams& p) {
        double half = 6.0;
        if (p.lambda2() > 1.5) half = std::max(half, std::sqrt(2.0) * p.lambda() * 0.5 * p.N + 4.0);
        int m = static_cast<int>(std::lround(half / 0.006)) * 2 + 1;
        return symmetric(half, m);
    }

    double spacing() const { return (x_max - x_min) / (points - 1); }
    double x(int i) const { return x_min + i * spacing(); }
    bool is_symmetric() const { return std::abs(x_min + x_max) <= 1e-12 * std::max(1.0, x_max); }
    RVec values() const {
        RVec v(points);
        for (int i = 0; i < points; ++i) v(i) = x(i);
        return v;
    }
};

// Adiabatic qubit Hamiltonian at fixed X: S_z + sqrt(2) lambda X S_x + (1+eps) lambda^2 S_x^2.
inline RMat adiabatic_qubit_hamiltonian(double X, const ModelParams& p) {
    RMat Sx = detail::spin_x_real(p.N);
    RMat Sz = detail::spin_z_real(p.N);
    const double l2 = p.lambda2();
    return Sz + std::sqrt(2.0 * l2) * X * Sx + (1.0 + p.epsilon) * l2 * Sx * Sx;
}

struct AdiabaticEigen {
    RVec energies;        // ascending
    RMat states;          // columns
    std::vector<double> spin;       // total spin s of each state
    std::vector<int> sector_index;  // rank of the state within its spin sector
};

// Spin-sector projectors, cached per N.
struct SpinSectors {
    int N{0};
    std::vector<double> s;
    std::vector<RMat> basis;

    static const SpinSectors& get(int N) {
        static thread_local std::map<int, SpinSectors> cache;
        auto it = cache.find(N);
        if (it != cache.end()) return it->second;
        SpinSectors ss;
        ss.N = N;
        for (double s : spin_values(N)) {
            ss.s.push_back(s);
            ss.basis.push_back(spin_sector_basis(N, s));
        }
        return cache.emplace(N, std::move(ss)).first->second;
    }
};

// Diagonalizes sector by sector so that exact crossings between spin sectors keep clean labels.
inline AdiabaticEigen adiabatic_qubit_eigen(double X, const ModelParams& p) {
    const RMat H = adiabatic_qubit_hamiltonian(X, p);
    const auto& sec = SpinSectors::get(p.N);
    struct Item {
        double e;
        double s;
        int rank;
        RVec v;
    };
    std::vector<Item> items;
    for (std::size_t k = 0; k < sec.s.size(); ++k) {
        const RMat& Q = sec.basis[k];
        RMat h = Q.transpose() * H * Q;
        auto ep = eigh(RMat(0.5 * (h + h.transpose())));
        for (Eigen::Index i = 0; i < ep.values.size(); ++i)
            items.push_back({ep.values(i), sec.s[k], static_cast<int>(i), Q * ep.vectors.col(i)});
    }
    std::stable_sort(items.begin(), items.end(), [](const Item& a, const Item& b) {
        if (a.e != b.e) return a.e < b.e;
        return a.s > b.s;
    });
    AdiabaticEigen out;
    const Eigen::Index d = H.rows();
    out.energies.resize(d);
    out.states.resize(d, d);
    for (Eigen::Index i = 0; i < d; ++i) {
        out.energies(i) = items[i].e;
        out.states.col(i) = items[i].v;
        out.spin.push_back(items[i].s);
        out.sector_index.push_back(items[i].rank);
    }
    return out;
}

struct PotentialSurfaceSet {
    XGrid grid;
    RMat branches;                  // points x K, energy ordered, includes X^2/2
    std::vector<RMat> states;       // per grid point, 2^N x K
    RMat spin;                      // points x K, total spin of each branch point
    RMat sector_index;              // points x K
    std::vector<std::string> labels;   // diabatic tags at X = 0

    int branch_count() const { return static_cast<int>(branches.cols()); }
    RVec branch(int n) const { return branches.col(n); }
};

inline std::string spin_label(double s, int rank) {
    char buf[48];
    std::snprintf(buf, sizeof buf, "s=%g,k=%d", s, rank);
    return buf;
}

inline PotentialSurfaceSet build_surfaces(const XGrid& grid, const ModelParams& p) {
    if (!grid.is_symmetric()) throw std::invalid_argument("grid must be symmetric about 0");
    const int M = grid.points;
    const Eigen::Index d = Eigen::Index(1) << p.N;
    PotentialSurfaceSet out;
    out.grid = grid;
    out.branches.resize(M, d);
    out.spin.resize(M, d);
    out.sector_index.resize(M, d);
    out.states.resize(M);
    std::vector<AdiabaticEigen> eig(M);
    parallel_for(static_cast<std::size_t>(M), [&](std::size_t i) { eig[i] = adiabatic_qubit_eigen(grid.x(static_cast<int>(i)), p); });
    for (int i = 0; i < M; ++i) {
        const double X = grid.x(i);
        out.branches.row(i) = (eig[i].energies.array() + 0.5 * X * X).transpose();
        out.states[i] = eig[i].states;
        for (Eigen::Index n = 0; n < d; ++n) {
            out.spin(i, n) = eig[i].spin[n];
            out.sector_index(i, n) = eig[i].sector_index[n];
        }
        if (i > 0) {
            for (Eigen::Index n = 0; n < d; ++n)
                if (out.states[i].col(n).dot(out.states[i - 1].col(n)) < 0) out.states[i].col(n) *= -1.0;
        }
    }
    const int c = M / 2;
    for (Eigen::Index n = 0; n < d; ++n)
        out.labels.push_back(spin_label(out.spin(c, n), static_cast<int>(out.sector_index(c, n))));
    return out;
}

// k-th lowest curve within total-spin sector s, continuous through crossings with other sectors.
inline RVec sector_branch(const ModelParams& p, const XGrid& grid, double s, int k) {
    const auto& sec = SpinSectors::get(p.N);
    std::size_t idx = sec.s.size();
    for (std::size_t j = 0; j < sec.s.size(); ++j)
        if (std::abs(sec.s[j] - s) < 1e-9) idx = j;
    if (idx == sec.s.size()) throw std::invalid_argument("spin sector not present for this N");
    const RMat& Q = sec.basis[idx];
    if (k < 0 || k >= Q.cols()) throw std::out_of_range("sector branch index out of range");
    RVec out(grid.points);
    for (int i = 0; i < grid.points; ++i) {
        const double X = grid.x(i);
        RMat h = Q.transpose() * adiabatic_qubit_hamiltonian(X, p) * Q;
        out(i) = eigh(RMat(0.5 * (h + h.transpose())), k + 1, false).values(k) + 0.5 * X * X;
    }
    return out;
}

// Adiabatic energy of the k-th state of sector s at one X (no X^2/2 term).
inline double sector_energy(const ModelParams& p, double X, double s, int k) {
    XGrid g(X, X + 1.0, 3);
    return sector_branch(p, g, s, k)(0) - 0.5 * X * X;
}

// The N=2 branch that is the |T0> triplet state at X = 0.
inline double triplet_energy(const ModelParams& p, double X) {
    if (p.N != 2) throw std::invalid_argument("triplet branch defined for N=2");
    return sector_energy(p, X, 1.0, 1);
}

// Second derivative of an adiabatic curve at X=0 by second-order perturbation theory in X.
inline double curvature_at_zero(const ModelParams& p, double s, int k) {
    const auto& sec = SpinSectors::get(p.N);
    std::size_t idx = sec.s.size();
    for (std::size_t j = 0; j < sec.s.size(); ++j)
        if (std::abs(sec.s[j] - s) < 1e-9) idx = j;
    if (idx == sec.s.size()) throw std::invalid_argument("spin sector not present for this N");
    const RMat& Q = sec.basis[idx];
    RMat h = Q.transpose() * adiabatic_qubit_hamiltonian(0.0, p) * Q;
    auto ep = eigh(RMat(0.5 * (h + h.transpose())));
    RMat V = Q.transpose() * detail::spin_x_real(p.N) * Q;
    RMat Vx = ep.vectors.transpose() * V * ep.vectors;
    const double c = std::sqrt(2.0 * p.lambda2());
    double second = 0.0;
    for (Eigen::Index m = 0; m < ep.values.size(); ++m) {
        if (m == k) continue;
        const double coup = c * Vx(m, k);
        if (std::abs(coup) < 1e-14) continue;
        const double gap = ep.values(k) - ep.values(m);
        if (std::abs(gap) < 1e-12) throw std::runtime_error("degenerate level at X=0");
        second += 2.0 * coup * coup / gap;
    }
    return 1.0 + second;
}

struct BoundStateSet {
    int branch{0};
    RVec energies;     // dimensionless, units of omega_q
    RMat functions;    // grid points x k, trapezoid-normalized, zero at both ends
    double mu{1.0};
    XGrid grid;
};

// Lowest k_max eigenpairs of -(1/2mu) d^2/dX^2 + V(X), second-order FD, Dirichlet ends.
inline BoundStateSet solve_bound_states(const RVec& V, const XGrid& grid, double mu, int k_max, int branch = 0) {
    if (V.size() != grid.points) throw std::invalid_argument("potential does not match grid");
    if (k_max < 1) throw std::invalid_argument("k_max must be >= 1");
    const int M = grid.points;
    const int n = M - 2;
    const double h = grid.spacing();
    const double t = 1.0 / (2.0 * mu * h * h);
    RVec d = V.segment(1, n).array() + 2.0 * t;
    RVec e = RVec::Constant(n - 1, -t);
    auto ep = eigh_tridiagonal(d, e, k_max);
    BoundStateSet out;
    out.branch = branch;
    out.mu = mu;
    out.grid = grid;
    out.energies = ep.values;
    out.functions = RMat::Zero(M, ep.values.size());
    for (Eigen::Index k = 0; k < ep.values.size(); ++k) {
        RVec f = RVec::Zero(M);
        f.segment(1, n) = ep.vectors.col(k);
        double peak = f.cwiseAbs().maxCoeff();
        if (std::abs(f(1)) > 1e-8 * peak || std::abs(f(M - 2)) > 1e-8 * peak)
            throw std::runtime_error("grid too narrow");
        // fix sign: first significant lobe positive
        for (int i = 0; i < M; ++i)
            if (std::abs(f(i)) > 1e-3 * peak) {
                if (f(i) < 0) f = -f;
                break;
            }
        f /= std::sqrt(f.squaredNorm() * h);   // trapezoid with zero ends
        out.functions.col(k) = f;
    }
    return out;
}

inline double trapezoid(const RVec& f, double h) {
    if (f.size() < 2) return 0.0;
    return h * (f.sum() - 0.5 * (f(0) + f(f.size() - 1)));
}

// Ground-doublet splitting of a symmetric double well from the exact discrete Green identity
// between the even and odd half-grid problems; resolves splittings far below machine epsilon.
inline double doublet_splitting(const RVec& V, const XGrid& grid, double mu) {
    if (!grid.is_symmetric() || grid.points % 2 == 0)
        throw std::invalid_argument("doublet splitting needs a symmetric grid with a centre point");
    const int M = grid.points;
    const int c = M / 2;
    const double h = grid.spacing();
    const double t = 1.0 / (2.0 * mu * h * h);
    // odd states: psi_c = 0, unknowns c+1 .. M-2
    const int no = M - 2 - c;
    RVec dodd = V.segment(c + 1, no).array() + 2.0 * t;
    auto odd = eigh_tridiagonal(dodd, RVec::Constant(no - 1, -t), 1);
    // even states: unknowns c .. M-2, centre row symmetrized by u_c = psi_c / sqrt(2)
    const int ne = no + 1;
    RVec deven = V.segment(c, ne).array() + 2.0 * t;
    RVec eeven = RVec::Constant(ne - 1, -t);
    eeven(0) = -std::sqrt(2.0) * t;
    auto even = eigh_tridiagonal(deven, eeven, 1);
    RVec po = odd.vectors.col(0);
    RVec pe = even.vectors.col(0);
    pe(0) *= std::sqrt(2.0);
    const double overlap = po.dot(pe.tail(no));
    return std::abs(t * po(0) * pe(0) / overlap);
}

// max_X |C_{n,m}(X)| over the window, using the FD derivative of bound state k on branch n.
inline double nonadiabatic_coupling(const PotentialSurfaceSet& S, const BoundStateSet& bs, int n, int m,
                                    const ModelParams& p, int k = 0, double window = -1.0) {
    if (n == m) throw std::invalid_argument("n and m must differ");
    const XGrid& g = S.grid;
    if (window <= 0) window = g.x_max;
    const double h = g.spacing();
    const double c = std::sqrt(2.0 * p.lambda2());
    RMat Sx = detail::spin_x_real(p.N);
    const RVec& phi = bs.functions.col(k);
    double best = 0.0;
    for (int i = 1; i + 1 < g.points; ++i) {
        const double X = g.x(i);
        if (std::abs(X) > window) continue;
        const double gap = S.branches(i, n) - S.branches(i, m);
        const double me = S.states[i].col(m).dot(Sx * S.states[i].col(n));
        if (std::abs(gap) < 1e-6) {
            if (std::abs(me) < 1e-12) continue;   // different symmetry sectors do not couple
            throw std::runtime_error("quasi-degenerate branches");
        }
        const double dphi = (phi(i + 1) - phi(i - 1)) / (2.0 * h);
        best = std::max(best, std::abs(dphi * c * me / (bs.mu * gap)));
    }
    return best;
}

struct BOLevel {
    double energy;   // units of omega_q
    double s;
    int sector_rank;
    int k;
};

// Composite BO levels from every spin-sector branch, merged and sorted.
inline std::vector<BOLevel> bo_eigenstate_energies(const ModelParams& p, const XGrid& grid, int k_per_branch) {
    const auto& sec = SpinSectors::get(p.N);
    std::vector<BOLevel> out;
    const double mu = p.mu();
    for (std::size_t j = 0; j < sec.s.size(); ++j) {
        const int mult = static_cast<int>(sec.basis[j].cols() / static_cast<Eigen::Index>(2.0 * sec.s[j] + 1.0 + 0.5));
        const int size = static_cast<int>(2.0 * sec.s[j] + 1.0 + 0.5);
        for (int r = 0; r < size; ++r) {
            RVec V = sector_branch(p, grid, sec.s[j], r * mult);
            auto bs = solve_bound_states(V, grid, mu, k_per_branch);
            for (int copy = 0; copy < mult; ++copy)
                for (Eigen::Index k = 0; k < bs.energies.size(); ++k)
                    out.push_back({bs.energies(k), sec.s[j], r, static_cast<int>(k)});
        }
    }
    std::sort(out.begin(), out.end(), [](const BOLevel& a, const BOLevel& b) { return a.energy < b.energy; });
    return out;
}

}  // namespace uscqed
