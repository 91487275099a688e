#pragma once

// Device constants, drive descriptions and the small closed-form helpers that
// turn laboratory quantities (powers, lengths, pulse widths) into model inputs.
// All frequencies here are angular (rad/s); conversion from Hz happens in the
// config layer.

#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "omsim/constants.hpp"
#include "omsim/error.hpp"

namespace omsim {

namespace detail {

inline void require_finite(double v, const char* name) {
    if (!std::isfinite(v)) throw InvalidParameter(std::string(name) + " is not finite");
}

inline void require_positive(double v, const char* name) {
    require_finite(v, name);
    if (!(v > 0.0)) throw InvalidParameter(std::string(name) + " must be > 0");
}

inline void require_nonnegative(double v, const char* name) {
    require_finite(v, name);
    if (v < 0.0) throw InvalidParameter(std::string(name) + " must be >= 0");
}

} // namespace detail

struct SystemParams {
    double mass = 0.0;    // kg
    double omega_m = 0.0; // mechanical frequency
    double gamma_m = 0.0; // mechanical momentum damping
    double kappa1 = 0.0;  // amplitude decay rates; photon leakage is 2 kappa
    double kappa2 = 0.0;
    double g1 = 0.0; // optomechanical couplings
    double g2 = 0.0;
    double omega1 = 0.0; // bare cavity frequencies
    double omega2 = 0.0;

    void validate() const {
        detail::require_positive(mass, "mass");
        detail::require_positive(omega_m, "omega_m");
        detail::require_positive(gamma_m, "gamma_m");
        detail::require_positive(kappa1, "kappa1");
        detail::require_positive(kappa2, "kappa2");
        detail::require_nonnegative(g1, "g1");
        detail::require_nonnegative(g2, "g2");
        detail::require_positive(omega1, "omega1");
        detail::require_positive(omega2, "omega2");
    }

    /// Non-fatal regime diagnostics.
    std::vector<std::string> regime_warnings() const {
        std::vector<std::string> out;
        const double kmax = kappa1 > kappa2 ? kappa1 : kappa2;
        if (!(omega_m > 10.0 * kmax))
            out.emplace_back("not in the resolved-sideband regime: omega_m <= 10 * max(kappa1, kappa2)");
        return out;
    }
};

/// Unit-peak shape of a one- or two-lobe (super-)Gaussian pulse train.
struct PulseShape {
    double t_write = 0.0;
    std::optional<double> t_read;
    double tau = 0.0;
    int beta = 2;

    void validate() const {
        detail::require_finite(t_write, "t_write");
        if (t_read) detail::require_finite(*t_read, "t_read");
        detail::require_positive(tau, "tau");
        if (beta < 2 || beta % 2 != 0) throw InvalidParameter("pulse shape exponent beta must be even and >= 2");
    }
};

enum class Lobe { write, read, both };

/// exp(-1/2 ((t - center)/tau)^beta) for even beta.
inline double pulse_lobe(double t, double center, double tau, int beta) {
    const double u = (t - center) / tau;
    const double u2 = u * u;
    double p = u2;
    for (int k = 2; k < beta; k += 2) p *= u2;
    return std::exp(-0.5 * p);
}

struct PulseEnvelope {
    double peak_amplitude = 0.0; // s^-1
    double t_write = 0.0;
    std::optional<double> t_read;
    double tau = 0.0;
    int beta = 2;

    PulseEnvelope() = default;
    PulseEnvelope(double peak, const PulseShape& s)
        : peak_amplitude(peak), t_write(s.t_write), t_read(s.t_read), tau(s.tau), beta(s.beta) {}

    PulseShape shape() const { return {t_write, t_read, tau, beta}; }
    void validate() const {
        detail::require_finite(peak_amplitude, "peak_amplitude");
        shape().validate();
    }
};

/// Envelope amplitude at time t. With beta = 2 this is the Gaussian pulse pair,
/// beta = 4 the flat-topped super-Gaussian.
inline double envelope(double t, const PulseEnvelope& env, Lobe which = Lobe::both) {
    double s = 0.0;
    if (which != Lobe::read) s += pulse_lobe(t, env.t_write, env.tau, env.beta);
    if (which != Lobe::write && env.t_read) s += pulse_lobe(t, *env.t_read, env.tau, env.beta);
    return env.peak_amplitude * s;
}

/// Integral of one squared unit lobe over time: 2 tau Gamma(1 + 1/beta).
inline double lobe_on_time(double tau, int beta) { return 2.0 * tau * std::tgamma(1.0 + 1.0 / beta); }

struct DriveConfig {
    double omega_L = 0.0;
    double omega_R = 0.0;
    double omega_p = 0.0;
    double power_L = 0.0; // W
    double power_R = 0.0;
    double power_p = 0.0;
    double delta = 0.0; // omega_p - omega_L
    double phase_L = 0.0;
    double phase_R = 0.0;
    std::optional<PulseShape> pulse_L;
    std::optional<PulseShape> pulse_R;
    std::optional<PulseShape> pulse_p;

    /// Builds a constant-drive configuration with omega_p = omega_L + delta.
    static DriveConfig make(double omega_L, double omega_R, double delta, double power_L, double power_R,
                            double power_p) {
        DriveConfig d;
        d.omega_L = omega_L;
        d.omega_R = omega_R;
        d.delta = delta;
        d.omega_p = omega_L + delta;
        d.power_L = power_L;
        d.power_R = power_R;
        d.power_p = power_p;
        d.validate();
        return d;
    }

    bool pulsed() const { return pulse_L || pulse_R || pulse_p; }

    void validate() const {
        detail::require_positive(omega_L, "omega_L");
        detail::require_positive(omega_R, "omega_R");
        detail::require_positive(omega_p, "omega_p");
        detail::require_nonnegative(power_L, "power_L");
        detail::require_nonnegative(power_R, "power_R");
        detail::require_nonnegative(power_p, "power_p");
        detail::require_finite(delta, "delta");
        detail::require_finite(phase_L, "phase_L");
        detail::require_finite(phase_R, "phase_R");
        // delta is stored redundantly; omega_p - omega_L is only exact to a few ulps of omega_p.
        const double ulp = std::nextafter(omega_p, std::numeric_limits<double>::infinity()) - omega_p;
        if (std::abs(delta - (omega_p - omega_L)) > 4.0 * ulp)
            throw InvalidParameter("delta must equal omega_p - omega_L");
        if (pulse_L) pulse_L->validate();
        if (pulse_R) pulse_R->validate();
        if (pulse_p) pulse_p->validate();
    }
};

/// sqrt(2 kappa P / (hbar omega)); intracavity |a|^2 is then a photon number.
inline double drive_amplitude(double kappa, double power, double omega) {
    detail::require_finite(kappa, "kappa");
    detail::require_finite(power, "power");
    detail::require_finite(omega, "omega");
    if (kappa <= 0.0 || omega <= 0.0) throw InvalidParameter("drive_amplitude: kappa and omega must be > 0");
    if (power < 0.0) throw InvalidParameter("drive_amplitude: power must be >= 0");
    return std::sqrt(2.0 * kappa * power / (hbar * omega));
}

/// g_i = (omega_i / L_i) sqrt(hbar / (2 m omega_m)).
inline double coupling_from_geometry(double omega_i, double length, double mass, double omega_m) {
    detail::require_positive(omega_i, "omega_i");
    detail::require_positive(length, "length");
    detail::require_positive(mass, "mass");
    detail::require_positive(omega_m, "omega_m");
    return (omega_i / length) * std::sqrt(hbar / (2.0 * mass * omega_m));
}

/// Angular bandwidth of a Fourier-limited Gaussian pulse, time-bandwidth product 0.44.
inline double pulse_bandwidth(double tau_p) {
    detail::require_positive(tau_p, "tau_p");
    return 0.44 / tau_p;
}

/// Angular frequency of light with vacuum wavelength lambda.
inline double angular_frequency_from_wavelength(double lambda) {
    detail::require_positive(lambda, "wavelength");
    return two_pi * speed_of_light / lambda;
}

/// Constant (peak) complex drive amplitudes derived from powers.
struct DriveAmplitudes {
    cplx left;
    cplx right;
    cplx probe;
};

inline DriveAmplitudes peak_amplitudes(const SystemParams& p, const DriveConfig& d) {
    return {std::polar(drive_amplitude(p.kappa1, d.power_L, d.omega_L), d.phase_L),
            std::polar(drive_amplitude(p.kappa2, d.power_R, d.omega_R), d.phase_R),
            cplx(drive_amplitude(p.kappa1, d.power_p, d.omega_p), 0.0)};
}

/// Time-dependent drive amplitudes E_L(t), E_R(t), E_p(t). Unpulsed drives are constant.
class DriveField {
public:
    DriveField(const SystemParams& p, const DriveConfig& d) : peak_(peak_amplitudes(p, d)) {
        if (d.pulse_L) left_ = PulseEnvelope(1.0, *d.pulse_L);
        if (d.pulse_R) right_ = PulseEnvelope(1.0, *d.pulse_R);
        if (d.pulse_p) probe_ = PulseEnvelope(1.0, *d.pulse_p);
    }

    cplx left(double t) const { return left_ ? peak_.left * envelope(t, *left_) : peak_.left; }
    cplx right(double t) const { return right_ ? peak_.right * envelope(t, *right_) : peak_.right; }
    cplx probe(double t) const { return probe_ ? peak_.probe * envelope(t, *probe_) : peak_.probe; }
    const DriveAmplitudes& peak() const { return peak_; }

private:
    DriveAmplitudes peak_;
    std::optional<PulseEnvelope> left_;
    std::optional<PulseEnvelope> right_;
    std::optional<PulseEnvelope> probe_;
};

/// omega_1 - omega_L and omega_2 - omega_R, evaluated once so every module uses the same doubles.
struct BareDetunings {
    double cavity1;
    double cavity2;
};

inline BareDetunings bare_detunings(const SystemParams& p, const DriveConfig& d) {
    return {p.omega1 - d.omega_L, p.omega2 - d.omega_R};
}

} // namespace omsim
