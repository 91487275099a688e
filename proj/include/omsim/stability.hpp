#pragma once

// Linear stability of an operating point. The semiclassical equations are
// linearized in the real coordinates (Q, P, Re a1, Im a1, Re a2, Im a2) and the
// verdict is taken from the Routh array of the characteristic polynomial.
// An eigenvalue route is kept alongside as an independent check.

#include <algorithm>
#include <array>
#include <cmath>
#include <vector>

#include <Eigen/Dense>

#include "omsim/constants.hpp"
#include "omsim/error.hpp"
#include "omsim/params.hpp"
#include "omsim/steady_state.hpp"

namespace omsim {

using Matrix6 = Eigen::Matrix<double, 6, 6>;

struct LinearizedSystem {
    Matrix6 jacobian;
    OperatingPoint op;
    double omega_scale = 1.0; // omega_m; used to non-dimensionalize the polynomial
};

/// Jacobian of
///   Qdot = omega_m P
///   Pdot = g1 |a1|^2 - g2 |a2|^2 - omega_m Q - gamma_m P
///   a1dot = -i(omega_1 - omega_L - g1 Q) a1 - kappa1 a1 + E_L
///   a2dot = -i(omega_2 - omega_R + g2 Q) a2 - kappa2 a2 + E_R
/// at the operating point. The cavity-2 force enters with a minus sign: the shared
/// mirror lengthens one cavity while shortening the other.
inline LinearizedSystem linearize(const SystemParams& p, const OperatingPoint& op) {
    const double x1 = op.a10.real();
    const double y1 = op.a10.imag();
    const double x2 = op.a20.real();
    const double y2 = op.a20.imag();
    const double D1 = op.Delta1;
    const double D2 = op.Delta2;

    Matrix6 J = Matrix6::Zero();
    J(0, 1) = p.omega_m;

    J(1, 0) = -p.omega_m;
    J(1, 1) = -p.gamma_m;
    J(1, 2) = 2.0 * p.g1 * x1;
    J(1, 3) = 2.0 * p.g1 * y1;
    J(1, 4) = -2.0 * p.g2 * x2;
    J(1, 5) = -2.0 * p.g2 * y2;

    J(2, 0) = -p.g1 * y1;
    J(2, 2) = -p.kappa1;
    J(2, 3) = D1;
    J(3, 0) = p.g1 * x1;
    J(3, 2) = -D1;
    J(3, 3) = -p.kappa1;

    J(4, 0) = p.g2 * y2;
    J(4, 4) = -p.kappa2;
    J(4, 5) = D2;
    J(5, 0) = -p.g2 * x2;
    J(5, 4) = -D2;
    J(5, 5) = -p.kappa2;

    return {J, op, p.omega_m};
}

/// Monic characteristic polynomial det(lambda I - A), coefficients in descending
/// powers: c[0] = 1, ..., c[6] = det(-A). Faddeev-LeVerrier in long double.
inline std::array<double, 7> characteristic_polynomial(const Matrix6& a) {
    using Mat = Eigen::Matrix<long double, 6, 6>;
    const Mat A = a.cast<long double>();
    std::array<long double, 7> c{};
    c[0] = 1.0L;
    Mat M = Mat::Zero();
    for (int k = 1; k <= 6; ++k) {
        M = A * M + c[static_cast<std::size_t>(k - 1)] * Mat::Identity();
        c[static_cast<std::size_t>(k)] = -(A * M).trace() / static_cast<long double>(k);
    }
    std::array<double, 7> out{};
    for (std::size_t i = 0; i < 7; ++i) out[i] = static_cast<double>(c[i]);
    return out;
}

enum class StabilityVerdict { stable, unstable, marginal };

inline const char* to_string(StabilityVerdict v) {
    switch (v) {
    case StabilityVerdict::stable: return "stable";
    case StabilityVerdict::unstable: return "unstable";
    case StabilityVerdict::marginal: return "marginal";
    }
    return "unknown";
}

struct RouthReport {
    StabilityVerdict verdict = StabilityVerdict::marginal;
    double margin = 0.0; // smallest first-column entry
    std::array<double, 7> coefficients{};
    std::vector<double> first_column;
    bool epsilon_substituted = false;
};

/// Routh-Hurwitz test on a polynomial given in descending powers. A derived row
/// whose entries are all below 1e-12 of the two rows above counts as a zero row.
inline RouthReport routh_hurwitz(const std::array<double, 7>& coeffs) {
    RouthReport rep;
    rep.coefficients = coeffs;
    constexpr std::size_t n = 6;
    const double sign = coeffs[0] < 0.0 ? -1.0 : 1.0;
    double scale = 0.0;
    for (double c : coeffs) scale = std::max(scale, std::abs(c));
    const double eps = 1e-12 * (scale > 0.0 ? scale : 1.0);

    // rows[i] holds the Routh row for power n - i.
    std::vector<std::vector<double>> rows(n + 1, std::vector<double>(n / 2 + 1, 0.0));
    for (std::size_t j = 0; j <= n; ++j) rows[j % 2][j / 2] = sign * coeffs[j];

    for (std::size_t i = 0; i <= n; ++i) {
        if (i >= 2) {
            const auto& a = rows[i - 2];
            const auto& b = rows[i - 1];
            for (std::size_t j = 0; j + 1 < a.size(); ++j)
                rows[i][j] = (b[0] * a[j + 1] - a[0] * b[j + 1]) / b[0];
        }
        auto& row = rows[i];
        double reference = 0.0;
        for (std::size_t k = (i >= 2 ? i - 2 : i); k < i; ++k)
            for (double v : rows[k]) reference = std::max(reference, std::abs(v));
        const double zero_tol = 1e-12 * reference;
        const bool all_zero =
            i >= 2 && std::all_of(row.begin(), row.end(), [&](double v) { return std::abs(v) <= zero_tol; });
        if (all_zero) {
            rep.verdict = StabilityVerdict::marginal;
            rep.first_column.push_back(0.0);
            rep.margin = 0.0;
            return rep;
        }
        if (row[0] == 0.0) {
            row[0] = eps;
            rep.epsilon_substituted = true;
        }
        rep.first_column.push_back(row[0]);
    }
    rep.margin = *std::min_element(rep.first_column.begin(), rep.first_column.end());
    rep.verdict = rep.margin > 0.0 ? StabilityVerdict::stable : StabilityVerdict::unstable;
    return rep;
}

/// Verdict from the Routh array of the characteristic polynomial of J / omega_m.
inline RouthReport is_stable_routh_hurwitz(const LinearizedSystem& sys) {
    return routh_hurwitz(characteristic_polynomial(sys.jacobian / sys.omega_scale));
}

struct EigenReport {
    bool stable = false;
    double max_real = 0.0;
    std::array<cplx, 6> eigenvalues{};
};

/// Stable iff every eigenvalue has real part below -1e-9 omega_m.
inline EigenReport is_stable_eigen(const LinearizedSystem& sys) {
    Eigen::EigenSolver<Matrix6> solver(sys.jacobian, false);
    if (solver.info() != Eigen::Success) throw NumericalError("eigensolver did not converge");
    EigenReport rep;
    const auto& ev = solver.eigenvalues();
    std::array<cplx, 6> vals{};
    for (int i = 0; i < 6; ++i) vals[static_cast<std::size_t>(i)] = ev(i);
    // Deterministic order: descending real part, then imaginary part.
    std::sort(vals.begin(), vals.end(), [](const cplx& a, const cplx& b) {
        return a.real() != b.real() ? a.real() > b.real() : a.imag() > b.imag();
    });
    rep.eigenvalues = vals;
    rep.max_real = vals[0].real();
    rep.stable = rep.max_real < -1e-9 * sys.omega_scale;
    return rep;
}

} // namespace omsim
