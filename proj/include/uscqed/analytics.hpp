#pragma once

// Closed-form results for the adiabatic potentials: Dicke-model curves, double-well
// minima and tunnel splittings, strong-coupling parabolas, and the N=2 quartic expansion.

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace uscqed::analytics {

struct SpinSector {
    double s{0.5};
    double m{0.5};

    SpinSector() = default;
    SpinSector(double s_, double m_) : s(s_), m(m_) {
        const double two_s = 2.0 * s, two_m = 2.0 * m;
        if (s < 0 || std::abs(m) > s + 1e-12) throw std::invalid_argument("invalid spin sector");
        if (std::abs(two_s - std::round(two_s)) > 1e-12 || std::abs(two_m - std::round(two_m)) > 1e-12 ||
            (static_cast<long>(std::round(two_s - two_m)) % 2) != 0)
            throw std::invalid_argument("invalid spin sector");
    }
};

inline double lambda_c(int N) { return 1.0 / std::sqrt(static_cast<double>(N)); }

// Dicke-model (eps = -1) potential: X^2/2 + m_z sqrt(1 + 2 lambda^2 X^2)
inline double dm_potential(const SpinSector& sec, double X, double lambda) {
    return 0.5 * X * X + sec.m * std::sqrt(1.0 + 2.0 * lambda * lambda * X * X);
}

inline double dm_curvature_at_zero(double m_z, double lambda) { return 1.0 + 2.0 * lambda * lambda * m_z; }

// Positive minimum position of the ground double well.
inline double ground_minimum(double lambda, double lc) {
    if (lambda <= lc) throw std::domain_error("single-well regime");
    const double l4 = std::pow(lambda, 4), c4 = std::pow(lc, 4);
    return std::sqrt(l4 - c4) / (std::sqrt(2.0) * lambda * lc * lc);
}

struct TunnelTerms {
    double S0;
    double A;
    double splitting;
};

inline TunnelTerms tunnel_terms(double lambda, double lc, double mu) {
    if (lambda <= lc) throw std::domain_error("use tunnel_splitting_critical at or below lambda_c");
    const double l2 = lambda * lambda, c2 = lc * lc;
    const double S0 = (2.0 / 3.0) * std::sqrt(mu * std::pow(l2 - c2, 3) * (l2 + c2)) / (l2 * c2 * c2);
    const double A = std::pow(std::pow(l2 - c2, 5) / (mu * (l2 + c2)), 0.25) / (lambda * c2);
    return {S0, A, 8.0 / std::sqrt(std::numbers::pi) * A * std::exp(-S0)};
}

inline double tunnel_splitting(double lambda, double lc, double mu) { return tunnel_terms(lambda, lc, mu).splitting; }

// Natural log of the splitting, usable where the splitting underflows.
inline double log_tunnel_splitting(double lambda, double lc, double mu) {
    auto t = tunnel_terms(lambda, lc, mu);
    return std::log(8.0 / std::sqrt(std::numbers::pi) * t.A) - t.S0;
}

inline constexpr double critical_splitting_prefactor = 1.1;

inline double tunnel_splitting_critical(double lc, double mu, double c = critical_splitting_prefactor) {
    return c * std::cbrt(lc * lc / (mu * mu));
}

// Deep-well exponent slope d ln(splitting) / d lambda^2 = -2 sqrt(mu) N^2 / 3.
inline double deep_well_log_slope(double mu, int N) { return -2.0 * std::sqrt(mu) * N * N / 3.0; }

// Strong-coupling zeroth order: parabola centred at -sqrt(2) lambda m_x with offset eps lambda^2 m_x^2.
inline double displaced_parabola(const SpinSector& sec, double X, double lambda, double eps) {
    const double c = X + std::sqrt(2.0) * lambda * sec.m;
    return 0.5 * c * c + eps * lambda * lambda * sec.m * sec.m;
}

// Crossing of neighbouring parabolas m_x and m_x + 1 at eps = 0.
inline double parabola_crossing(double m_x, double lambda) { return -lambda * (2.0 * m_x + 1.0) / std::sqrt(2.0); }

inline double s_plus(const SpinSector& sec) { return std::sqrt(sec.s * (sec.s + 1.0) - sec.m * (sec.m + 1.0)); }
inline double s_minus(const SpinSector& sec) { return std::sqrt(sec.s * (sec.s + 1.0) - sec.m * (sec.m - 1.0)); }

struct StrongCouplingCorrection {
    double well_shift;       // simplified form
    double well_shift_full;  // eps-dependent form with s_+ and s_- terms
    double crossing_gap;     // splitting at the m_x / m_x+1 crossing
};

inline StrongCouplingCorrection strong_coupling_corrections(const SpinSector& sec, double lambda, double eps) {
    const double l2 = lambda * lambda;
    const double m = sec.m, s = sec.s;
    StrongCouplingCorrection out;
    out.well_shift = ((1.0 - 3.0 * eps) * m * m - (1.0 - eps) * s * (s + 1.0)) / (2.0 * l2);
    const double sp = s_plus(sec), sm = s_minus(sec);
    out.well_shift_full =
        -(1.0 / (4.0 * l2)) * (sp * sp / (1.0 + (2.0 * m + 1.0) * eps) + sm * sm / (1.0 - (2.0 * m - 1.0) * eps));
    out.crossing_gap = sp;
    return out;
}

struct QuarticTriplet {
    double energy;          // E_T(X) through fourth order
    double lambda2_crit;    // 1 / (2 sqrt(1+eps))
};

inline double triplet_lambda2_crit(double eps) { return 1.0 / (2.0 * std::sqrt(1.0 + eps)); }

inline QuarticTriplet two_qubit_quartic(double X, double lambda, double eps) {
    const double eb = 1.0 + eps;
    const double l2 = lambda * lambda, l4 = l2 * l2, l6 = l4 * l2;
    const double X2 = X * X;
    const double e = eb * l2 + 0.5 * X2 * (1.0 - 4.0 * eb * l4) + 4.0 * X2 * X2 * eb * l6 * (1.0 + eb * eb * l4);
    return {e, triplet_lambda2_crit(eps)};
}

// Exact eigenvalues of the N=2 adiabatic Hamiltonian (without X^2/2): singlet 0 and the
// three triplet-sector roots of the cubic, ascending. At X=0 these are
// eb l^2/2 - sqrt(1 + eb^2 l^4/4), eb l^2, eb l^2/2 + sqrt(1 + eb^2 l^4/4).
struct TwoQubitLevels {
    double singlet;
    std::array<double, 3> triplet;
};

inline TwoQubitLevels two_qubit_levels(double X, double lambda, double eps) {
    const double eb = 1.0 + eps;
    const double l2 = lambda * lambda;
    const double b = lambda * X;
    const double a = 0.5 * eb * l2;
    // triplet block minus a*I in |1,1>,|1,0>,|1,-1>
    const double k11 = 1.0, k22 = a, k33 = -1.0, k12 = b, k13 = a, k23 = b;
    const double tr = k11 + k22 + k33;
    const double c2 = k11 * k22 + k11 * k33 + k22 * k33 - k12 * k12 - k13 * k13 - k23 * k23;
    const double det = k11 * (k22 * k33 - k23 * k23) - k12 * (k12 * k33 - k23 * k13) + k13 * (k12 * k23 - k22 * k13);
    const double q = tr / 3.0;
    const double p1 = (tr * tr - 3.0 * c2) / 9.0;
    const double r = (2.0 * tr * tr * tr - 9.0 * tr * c2 + 27.0 * det) / 54.0;
    std::array<double, 3> t{};
    if (p1 <= 0) {
        t = {q, q, q};
    } else {
        const double sp = std::sqrt(p1);
        double arg = r / (sp * sp * sp);
        arg = std::max(-1.0, std::min(1.0, arg));
        const double th = std::acos(arg);
        for (int k = 0; k < 3; ++k) t[k] = q + 2.0 * sp * std::cos((th - 2.0 * std::numbers::pi * k) / 3.0);
    }
    std::sort(t.begin(), t.end());
    return {0.0, {t[0] + a, t[1] + a, t[2] + a}};
}

}  // namespace uscqed::analytics
