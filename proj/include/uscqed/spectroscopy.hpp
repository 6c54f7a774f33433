#pragma once

// Single-qubit excitation spectra from exact eigenpairs of the EDM, at zero and finite
// temperature, plus the Franck-Condon form built from BO surfaces.

#include "uscqed/born_oppenheimer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

namespace uscqed {

struct SpectrumConfig {
    double gamma{0.005};
    std::vector<double> omega_grid;
    double temperature{0.0};      // k_B T, same units as the frequencies
    int probe_site{1};
    int eigenpair_count{-1};      // -1: all
    int fock_cutoff{300};
    double prominence{1e-3};      // relative to the global maximum

    static std::vector<double> linspace(double lo, double hi, int n) {
        std::vector<double> v(n);
        for (int i = 0; i < n; ++i) v[i] = lo + (hi - lo) * i / (n - 1);
        return v;
    }

    void validate() const {
        if (!(gamma > 0)) throw std::invalid_argument("gamma must be > 0");
        if (omega_grid.size() < 3) throw std::invalid_argument("omega grid too short");
        for (std::size_t i = 1; i < omega_grid.size(); ++i)
            if (!(omega_grid[i] > omega_grid[i - 1])) throw std::invalid_argument("omega grid must be increasing");
        if (temperature < 0) throw std::invalid_argument("temperature must be >= 0");
    }
};

struct Peak {
    double center;
    double height;
    double width;        // full width at half maximum
    double prominence;
};

struct Transition {
    double frequency;
    double weight;       // |<f|sigma_x|i>|^2 times the initial-state population
};

struct SpectrumResult {
    std::vector<double> omega;
    std::vector<double> values;
    std::vector<Peak> peaks;
    std::vector<Transition> transitions;
    double completeness{1.0};      // captured fraction of <i|sigma_x sigma_x|i>
    double thermal_weight{1.0};    // captured Boltzmann weight
    int initial_states{1};
};

inline double lorentzian_line(double omega, double center, double gamma, double weight) {
    const double d = omega - center;
    return 0.25 * gamma * gamma * weight / (d * d + 0.25 * gamma * gamma);
}

// Local maxima whose prominence exceeds rel_prominence times the global maximum.
inline std::vector<Peak> find_peaks(const std::vector<double>& x, const std::vector<double>& y, double rel_prominence) {
    std::vector<Peak> out;
    const std::size_t n = y.size();
    if (n < 3) return out;
    const double gmax = *std::max_element(y.begin(), y.end());
    if (!(gmax > 0)) return out;
    for (std::size_t i = 1; i + 1 < n; ++i) {
        if (!(y[i] > y[i - 1] && y[i] >= y[i + 1])) continue;
        double lmin = y[i], rmin = y[i];
        std::size_t j = i;
        while (j > 0 && y[j - 1] <= y[i]) lmin = std::min(lmin, y[--j]);
        j = i;
        while (j + 1 < n && y[j + 1] <= y[i]) rmin = std::min(rmin, y[++j]);
        const double prom = y[i] - std::max(lmin, rmin);
        if (prom < rel_prominence * gmax) continue;
        // parabolic refinement of the vertex
        const double y0 = y[i - 1], y1 = y[i], y2 = y[i + 1];
        const double den = y0 - 2.0 * y1 + y2;
        double shift = den != 0 ? 0.5 * (y0 - y2) / den : 0.0;
        shift = std::clamp(shift, -0.5, 0.5);
        const double h = x[i + 1] - x[i];
        const double center = x[i] + shift * h;
        const double height = y1 - 0.25 * (y0 - y2) * shift;
        const double half = 0.5 * height;
        auto crossing = [&](int dir) {
            std::size_t k = i;
            while (true) {
                if ((dir < 0 && k == 0) || (dir > 0 && k + 1 >= n)) return x[k];
                std::size_t nk = dir < 0 ? k - 1 : k + 1;
                if (y[nk] < half) {
                    const double f = (half - y[nk]) / (y[k] - y[nk]);
                    return x[nk] + f * (x[k] - x[nk]);
                }
                k = nk;
            }
        };
        out.push_back({center, height, crossing(+1) - crossing(-1), prom});
    }
    return out;
}

namespace detail {

struct ExactSystem {
    RVec energies;
    RMat vectors;
    RMat probe;     // sigma_x on the probe site in the eigenbasis (rows: final, cols: initial)
};

inline ExactSystem exact_system(const ModelParams& p, const SpectrumConfig& cfg, int initial_needed) {
    auto H = build_h_edm(p, cfg.fock_cutoff);
    const int dim = static_cast<int>(H.dimension());
    int k = cfg.eigenpair_count < 0 ? dim : std::min(cfg.eigenpair_count, dim);
    auto ep = eigh(H.real_matrix(), k, true);
    BasisDescriptor b(p.N, cfg.fock_cutoff);
    RMat sx = pauli_on_site(b, cfg.probe_site, Axis::x).matrix().real();
    RMat init = ep.vectors.leftCols(std::min<Eigen::Index>(initial_needed, ep.vectors.cols()));
    ExactSystem s;
    s.energies = ep.values;
    s.probe = ep.vectors.transpose() * (sx * init);
    s.vectors = std::move(ep.vectors);
    return s;
}

inline std::vector<double> evaluate(const std::vector<double>& omega, const std::vector<Transition>& tr, double gamma) {
    std::vector<double> v(omega.size(), 0.0);
    for (std::size_t i = 0; i < omega.size(); ++i) {
        double s = 0.0;
        for (const auto& t : tr) s += lorentzian_line(omega[i], t.frequency, gamma, t.weight);
        v[i] = s;
    }
    return v;
}

}  // namespace detail

inline SpectrumResult spectrum_ground(const ModelParams& p, const SpectrumConfig& cfg) {
    cfg.validate();
    auto sys = detail::exact_system(p, cfg, 1);
    SpectrumResult r;
    r.omega = cfg.omega_grid;
    double captured = 0.0;
    for (Eigen::Index f = 0; f < sys.energies.size(); ++f) {
        const double w = sys.probe(f, 0) * sys.probe(f, 0);
        captured += w;
        if (f > 0 && w > 1e-16) r.transitions.push_back({sys.energies(f) - sys.energies(0), w});
    }
    r.completeness = captured;   // <GS|sigma_x^2|GS> = 1
    if (captured < 0.999) throw std::runtime_error("insufficient eigenpairs");
    r.values = detail::evaluate(r.omega, r.transitions, cfg.gamma);
    r.peaks = find_peaks(r.omega, r.values, cfg.prominence);
    return r;
}

inline SpectrumResult spectrum_thermal(const ModelParams& p, const SpectrumConfig& cfg) {
    cfg.validate();
    if (!(cfg.temperature > 0)) throw std::invalid_argument("temperature must be > 0");
    auto H = build_h_edm(p, cfg.fock_cutoff);
    const int dim = static_cast<int>(H.dimension());
    const int k = cfg.eigenpair_count < 0 ? dim : std::min(cfg.eigenpair_count, dim);
    auto ep = eigh(H.real_matrix(), k, true);
    const RVec& E = ep.values;
    RVec boltz = (-(E.array() - E(0)) / cfg.temperature).exp();
    const double Z = boltz.sum();
    // states beyond the computed set must carry negligible weight
    if (k < dim && boltz(k - 1) / Z > 1e-9) throw std::runtime_error("insufficient eigenpairs for thermal closure");
    int n_init = 0;
    double cum = 0.0;
    while (n_init < k && cum < 1.0 - 1e-6) cum += boltz(n_init++) / Z;
    if (cum < 1.0 - 1e-6) throw std::runtime_error("insufficient eigenpairs for thermal closure");

    BasisDescriptor b(p.N, cfg.fock_cutoff);
    RMat sx = pauli_on_site(b, cfg.probe_site, Axis::x).matrix().real();
    RMat amp = ep.vectors.transpose() * (sx * ep.vectors.leftCols(n_init));

    SpectrumResult r;
    r.omega = cfg.omega_grid;
    r.thermal_weight = cum;
    r.initial_states = n_init;
    double captured = 0.0;
    for (int i = 0; i < n_init; ++i) {
        const double pi = boltz(i) / Z;
        double col = 0.0;
        for (Eigen::Index f = 0; f < k; ++f) {
            const double w = amp(f, i) * amp(f, i);
            col += w;
            if (f != i && w * pi > 1e-14) r.transitions.push_back({E(f) - E(i), w * pi});
        }
        captured += pi * col;
    }
    r.completeness = captured / cum;
    r.values = detail::evaluate(r.omega, r.transitions, cfg.gamma);
    r.peaks = find_peaks(r.omega, r.values, cfg.prominence);
    return r;
}

struct BOSpectrumInput {
    double s_initial{-1};      // spin sector of the initial branch, default N/2
    int k_initial{0};          // rank in sector
    int bound_states{200};     // vibrational levels kept per excited branch
    XGrid grid{};
};

// Franck-Condon spectrum: weights |<chi_b(0)|sigma_x|chi_0(0)>|^2/4 times |<phi_{b,k}|phi_{0,0}>|^2,
// summed over every excited spin-sector branch b with a nonzero electronic factor.
inline SpectrumResult spectrum_bo_approx(const ModelParams& p, const SpectrumConfig& cfg, const BOSpectrumInput& in) {
    cfg.validate();
    const auto& sec = SpinSectors::get(p.N);
    const double s0 = in.s_initial < 0 ? 0.5 * p.N : in.s_initial;
    const XGrid& g = in.grid;
    const double mu = p.mu();
    const double h = g.spacing();
    RVec V0 = sector_branch(p, g, s0, in.k_initial);
    auto bs0 = solve_bound_states(V0, g, mu, 1);
    const RVec phi0 = bs0.functions.col(0);

    // electronic states at X=0
    RMat Hq = adiabatic_qubit_hamiltonian(0.0, p);
    auto sector_states = [&](std::size_t j) {
        const RMat& Q = sec.basis[j];
        RMat hh = Q.transpose() * Hq * Q;
        auto ep = eigh(RMat(0.5 * (hh + hh.transpose())));
        return std::make_pair(ep.values, RMat(Q * ep.vectors));
    };
    std::size_t j0 = 0;
    for (std::size_t j = 0; j < sec.s.size(); ++j)
        if (std::abs(sec.s[j] - s0) < 1e-9) j0 = j;
    RVec chi0 = sector_states(j0).second.col(in.k_initial);
    RMat sx = detail::real_site(p.N, cfg.probe_site, detail::sigma_x_real());

    SpectrumResult r;
    r.omega = cfg.omega_grid;
    const double omega_q = p.omega_q;
    for (std::size_t j = 0; j < sec.s.size(); ++j) {
        auto [vals, vecs] = sector_states(j);
        const int size = static_cast<int>(2.0 * sec.s[j] + 1.5);
        const int mult = static_cast<int>(vecs.cols()) / size;
        for (int rr = 0; rr < size; ++rr) {
            if (std::abs(sec.s[j] - s0) < 1e-9 && rr * mult == in.k_initial) continue;
            // electronic factor summed over degenerate copies
            double C = 0.0;
            for (int c = 0; c < mult; ++c) {
                const double m = vecs.col(rr * mult + c).dot(sx * chi0);
                C += m * m;
            }
            C *= 0.25;
            if (C < 1e-14) continue;
            RVec Vb = sector_branch(p, g, sec.s[j], rr * mult);
            auto bs = solve_bound_states(Vb, g, mu, in.bound_states);
            for (Eigen::Index k = 0; k < bs.energies.size(); ++k) {
                const double ov = trapezoid(RVec(bs.functions.col(k).cwiseProduct(phi0)), h);
                const double w = 4.0 * C * ov * ov;   // lorentzian_line carries the 1/4
                if (w < 1e-14) continue;
                r.transitions.push_back({(bs.energies(k) - bs0.energies(0)) * omega_q, w});
            }
        }
    }
    r.values = detail::evaluate(r.omega, r.transitions, cfg.gamma);
    r.peaks = find_peaks(r.omega, r.values, cfg.prominence);
    return r;
}

struct StrongCouplingCheck {
    double ratio;      // g / sqrt(gamma omega_r)
    bool passed;
    bool boundary;
};

inline StrongCouplingCheck strong_coupling_condition(const ModelParams& p, double gamma) {
    const double ratio = p.g / std::sqrt(gamma * p.omega_r);
    return {ratio, ratio > 1.0, std::abs(ratio - 1.0) < 1e-12};
}

}  // namespace uscqed
