#pragma once

// Zeroth-order operating point and first-order probe response of the
// two-cavity system, plus the derived output spectra.
//
// Sideband convention: "plus" multiplies exp(-i delta t) (frequency omega + delta),
// "minus" multiplies exp(+i delta t).

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "omsim/constants.hpp"
#include "omsim/error.hpp"
#include "omsim/params.hpp"

namespace omsim {

struct OperatingPoint {
    cplx a10;
    cplx a20;
    double Q0 = 0.0;
    double Delta1 = 0.0; // omega_1 - omega_L - g1 Q0
    double Delta2 = 0.0; // omega_2 - omega_R + g2 Q0
    int iterations = 0;
};

struct FixedPointOptions {
    double relaxation = 0.5;
    int max_iterations = 10000;
    double tolerance = 1e-12;
};

namespace detail {

inline double static_displacement(const SystemParams& p, double bare1, double bare2, double n1_drive,
                                  double n2_drive, double Q) {
    const double d1 = bare1 - p.g1 * Q;
    const double d2 = bare2 + p.g2 * Q;
    const double n1 = n1_drive / (p.kappa1 * p.kappa1 + d1 * d1);
    const double n2 = n2_drive / (p.kappa2 * p.kappa2 + d2 * d2);
    return (p.g1 * n1 - p.g2 * n2) / p.omega_m;
}

inline OperatingPoint finish_operating_point(const SystemParams& p, double bare1, double bare2, cplx E_L, cplx E_R,
                                             double Q0, int iterations) {
    OperatingPoint op;
    op.Q0 = Q0;
    op.Delta1 = bare1 - p.g1 * Q0;
    op.Delta2 = bare2 + p.g2 * Q0;
    op.a10 = E_L / cplx(p.kappa1, op.Delta1);
    op.a20 = E_R / cplx(p.kappa2, op.Delta2);
    op.iterations = iterations;
    return op;
}

} // namespace detail

/// Self-consistent (a10, a20, Q0) for constant pumps, given bare detunings.
/// Q0 is found by damped fixed-point iteration from Q0 = 0.
inline OperatingPoint solve_operating_point(const SystemParams& p, double bare1, double bare2, cplx E_L, cplx E_R,
                                            const FixedPointOptions& opt = {}) {
    const double n1_drive = std::norm(E_L);
    const double n2_drive = std::norm(E_R);
    double Q = 0.0;
    double previous = 0.0;
    for (int it = 1; it <= opt.max_iterations; ++it) {
        const double rhs = detail::static_displacement(p, bare1, bare2, n1_drive, n2_drive, Q);
        const double next = (1.0 - opt.relaxation) * Q + opt.relaxation * rhs;
        if (!std::isfinite(next)) break;
        const double step = std::abs(next - Q);
        previous = Q;
        Q = next;
        if (step <= opt.tolerance * std::abs(Q) || (Q == 0.0 && step == 0.0))
            return detail::finish_operating_point(p, bare1, bare2, E_L, E_R, Q, it);
    }
    throw BistableError("operating point did not converge (possibly bistable): last Q0 iterates " +
                            std::to_string(Q) + ", " + std::to_string(previous),
                        Q, previous);
}

inline OperatingPoint solve_operating_point(const SystemParams& p, const DriveConfig& d,
                                            const FixedPointOptions& opt = {}) {
    const auto bare = bare_detunings(p, d);
    const auto amp = peak_amplitudes(p, d);
    return solve_operating_point(p, bare.cavity1, bare.cavity2, amp.left, amp.right, opt);
}

/// Operating point from prescribed effective detunings. No iteration: the photon
/// numbers follow directly, and the bare detunings that realize them are
/// Delta1 + g1 Q0 and Delta2 - g2 Q0.
struct EffectiveOperatingPoint {
    OperatingPoint op;
    double bare1;
    double bare2;
};

inline EffectiveOperatingPoint operating_point_from_effective(const SystemParams& p, double Delta1, double Delta2,
                                                              cplx E_L, cplx E_R) {
    EffectiveOperatingPoint r;
    r.op.Delta1 = Delta1;
    r.op.Delta2 = Delta2;
    r.op.a10 = E_L / cplx(p.kappa1, Delta1);
    r.op.a20 = E_R / cplx(p.kappa2, Delta2);
    r.op.Q0 = (p.g1 * std::norm(r.op.a10) - p.g2 * std::norm(r.op.a20)) / p.omega_m;
    r.bare1 = Delta1 + p.g1 * r.op.Q0;
    r.bare2 = Delta2 - p.g2 * r.op.Q0;
    return r;
}

/// Relative residual of the Q0 self-consistency relation.
inline double self_consistency_residual(const OperatingPoint& op, const SystemParams& p, double bare1, double bare2,
                                        cplx E_L, cplx E_R) {
    const double rhs = detail::static_displacement(p, bare1, bare2, std::norm(E_L), std::norm(E_R), op.Q0);
    const double scale = std::max(std::abs(op.Q0), std::abs(rhs));
    return scale == 0.0 ? 0.0 : std::abs(rhs - op.Q0) / scale;
}

/// d(delta): sum_i 2 Delta_i g_i^2 |a_i0|^2 / ((kappa_i - i delta)^2 + Delta_i^2) - (omega_m^2 - delta^2 - i delta gamma_m) / omega_m
inline cplx denominator(const OperatingPoint& op, const SystemParams& p, double delta) {
    const cplx k1 = cplx(p.kappa1, -delta);
    const cplx k2 = cplx(p.kappa2, -delta);
    const cplx term1 =
        2.0 * op.Delta1 * p.g1 * p.g1 * std::norm(op.a10) / (k1 * k1 + op.Delta1 * op.Delta1);
    const cplx term2 =
        2.0 * op.Delta2 * p.g2 * p.g2 * std::norm(op.a20) / (k2 * k2 + op.Delta2 * op.Delta2);
    const cplx mech = cplx(p.omega_m * p.omega_m - delta * delta, -delta * p.gamma_m) / p.omega_m;
    return term1 + term2 - mech;
}

/// kappa_i + i(Delta_i -/+ delta): the cavity responses at the two sidebands.
struct SidebandDenominators {
    cplx cavity1_plus;
    cplx cavity1_minus;
    cplx cavity2_plus;
    cplx cavity2_minus;
};

inline SidebandDenominators sideband_denominators(const OperatingPoint& op, const SystemParams& p, double delta) {
    return {cplx(p.kappa1, op.Delta1 - delta), cplx(p.kappa1, op.Delta1 + delta), cplx(p.kappa2, op.Delta2 - delta),
            cplx(p.kappa2, op.Delta2 + delta)};
}

struct ProbeResponse {
    double delta = 0.0;
    cplx probe; // E_p used
    cplx Qplus;
    cplx d;
    cplx a1plus;
    cplx a1minus;
    cplx a2plus;
    cplx a2minus;
    bool near_singular = false; // |d| < 1e-6 omega_m
    bool strong_probe = false;  // |E_p| > 0.1 max(|E_L|, |E_R|)
};

inline ProbeResponse probe_response(const OperatingPoint& op, const SystemParams& p, cplx E_p, double delta) {
    ProbeResponse r;
    r.delta = delta;
    r.probe = E_p;
    r.d = denominator(op, p, delta);
    const auto den = sideband_denominators(op, p, delta);
    r.Qplus = -p.g1 * std::conj(op.a10) * E_p / (r.d * den.cavity1_plus);
    r.a1plus = (I * p.g1 * op.a10 * r.Qplus + E_p) / den.cavity1_plus;
    r.a1minus = I * p.g1 * op.a10 * std::conj(r.Qplus) / den.cavity1_minus;
    r.a2plus = -I * p.g2 * op.a20 * r.Qplus / den.cavity2_plus;
    r.a2minus = -I * p.g2 * op.a20 * std::conj(r.Qplus) / den.cavity2_minus;
    r.near_singular = std::abs(r.d) < 1e-6 * p.omega_m;
    return r;
}

inline ProbeResponse probe_response(const OperatingPoint& op, const SystemParams& p, const DriveConfig& d) {
    const auto amp = peak_amplitudes(p, d);
    auto r = probe_response(op, p, amp.probe, d.delta);
    r.strong_probe = std::abs(amp.probe) > 0.1 * std::max(std::abs(amp.left), std::abs(amp.right));
    return r;
}

struct OutputComponents {
    cplx left_plus;   // at omega_L + delta (= omega_p): 2 kappa1 a1plus - E_p
    cplx left_minus;  // at omega_L - delta: 2 kappa1 a1minus
    cplx right_plus;  // at omega_R + delta (anti-Stokes): 2 kappa2 a2plus
    cplx right_minus; // at omega_R - delta (Stokes): 2 kappa2 a2minus
    double omega_left_plus = 0.0;
    double omega_left_minus = 0.0;
    double omega_right_plus = 0.0;
    double omega_right_minus = 0.0;
};

inline OutputComponents output_fields(const ProbeResponse& r, const SystemParams& p, const DriveConfig& d) {
    OutputComponents o;
    o.left_plus = 2.0 * p.kappa1 * r.a1plus - r.probe;
    o.left_minus = 2.0 * p.kappa1 * r.a1minus;
    o.right_plus = 2.0 * p.kappa2 * r.a2plus;
    o.right_minus = 2.0 * p.kappa2 * r.a2minus;
    o.omega_left_plus = d.omega_L + r.delta;
    o.omega_left_minus = d.omega_L - r.delta;
    o.omega_right_plus = d.omega_R + r.delta;
    o.omega_right_minus = d.omega_R - r.delta;
    return o;
}

/// gamma_m/2 + g1^2 |a10|^2 / kappa1
inline double eit_width(const OperatingPoint& op, const SystemParams& p) {
    return 0.5 * p.gamma_m + p.g1 * p.g1 * std::norm(op.a10) / p.kappa1;
}

struct SpectrumRow {
    double delta = 0.0;
    std::optional<ProbeResponse> response;
    std::optional<OutputComponents> outputs;
    std::string error; // empty on success

    bool ok() const { return response.has_value(); }
    /// |output at omega_p|^2 / |E_p|^2
    double left_probe_power() const { return std::norm(outputs->left_plus) / std::norm(response->probe); }
    double right_antistokes_power() const { return std::norm(outputs->right_plus) / std::norm(response->probe); }
    double right_stokes_power() const { return std::norm(outputs->right_minus) / std::norm(response->probe); }
};

/// Uniform sweep of delta over [delta_lo, delta_hi]. The probe frequency follows
/// delta, so E_p is recomputed per row. Failures are recorded per row.
inline std::vector<SpectrumRow> spectrum_sweep(const SystemParams& p, const DriveConfig& d, double delta_lo,
                                               double delta_hi, int n_points) {
    if (n_points < 1) throw InvalidParameter("spectrum_sweep: n_points must be >= 1");
    if (!(delta_hi >= delta_lo)) throw InvalidParameter("spectrum_sweep: delta range must be increasing");
    if (n_points == 1 && delta_hi != delta_lo) throw InvalidParameter("spectrum_sweep: one point needs an empty range");

    std::vector<SpectrumRow> rows(static_cast<std::size_t>(n_points));
    std::optional<OperatingPoint> op;
    std::string op_error;
    try {
        op = solve_operating_point(p, d);
    } catch (const Error& e) {
        op_error = e.what();
    }
    const double step = n_points > 1 ? (delta_hi - delta_lo) / (n_points - 1) : 0.0;
    for (int i = 0; i < n_points; ++i) {
        auto& row = rows[static_cast<std::size_t>(i)];
        row.delta = i + 1 == n_points ? delta_hi : delta_lo + step * i;
        if (!op) {
            row.error = op_error;
            continue;
        }
        try {
            DriveConfig di = d;
            di.delta = row.delta;
            di.omega_p = d.omega_L + row.delta;
            di.validate();
            auto r = probe_response(*op, p, di);
            auto o = output_fields(r, p, di);
            if (!std::isfinite(std::abs(r.Qplus)) || !std::isfinite(std::abs(o.left_plus)))
                throw NumericalError("non-finite response");
            row.response = r;
            row.outputs = o;
        } catch (const Error& e) {
            row.error = e.what();
        }
    }
    return rows;
}

struct TransparencyDip {
    double center = 0.0;   // delta at the minimum of the left probe-frequency power
    double minimum = 0.0;  // normalized power at the minimum
    double baseline = 0.0; // largest normalized power in the sweep
    double fwhm = 0.0;     // full width at half depth (rad/s), linear interpolation
};

/// Locates the transparency dip in |(2 kappa1 a1plus - E_p)/E_p|^2. Returns
/// nothing when the minimum sits on the sweep edge or no half-depth crossing exists.
inline std::optional<TransparencyDip> measure_transparency_dip(const std::vector<SpectrumRow>& rows) {
    std::vector<double> x;
    std::vector<double> y;
    for (const auto& r : rows) {
        if (!r.ok()) continue;
        x.push_back(r.delta);
        y.push_back(r.left_probe_power());
    }
    if (y.size() < 3) return std::nullopt;
    const auto imin = static_cast<std::size_t>(std::min_element(y.begin(), y.end()) - y.begin());
    if (imin == 0 || imin + 1 == y.size()) return std::nullopt;
    TransparencyDip dip;
    dip.center = x[imin];
    dip.minimum = y[imin];
    dip.baseline = *std::max_element(y.begin(), y.end());
    const double half = 0.5 * (dip.baseline + dip.minimum);
    auto crossing = [&](std::size_t a, std::size_t b) {
        return x[a] + (half - y[a]) * (x[b] - x[a]) / (y[b] - y[a]);
    };
    std::optional<double> lo;
    std::optional<double> hi;
    for (std::size_t i = imin; i > 0; --i) {
        if (y[i - 1] >= half) {
            lo = crossing(i - 1, i);
            break;
        }
    }
    for (std::size_t i = imin; i + 1 < y.size(); ++i) {
        if (y[i + 1] >= half) {
            hi = crossing(i, i + 1);
            break;
        }
    }
    if (!lo || !hi) return std::nullopt;
    dip.fwhm = *hi - *lo;
    return dip;
}

} // namespace omsim
