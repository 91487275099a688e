#pragma once

// Cross-checks between independent routes through the model: closed-form steady
// state against long-time envelope integration, envelope against the full
// nonlinear equations, and Routh-Hurwitz against eigenvalues.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "omsim/envelope.hpp"
#include "omsim/error.hpp"
#include "omsim/full_model.hpp"
#include "omsim/params.hpp"
#include "omsim/stability.hpp"
#include "omsim/steady_state.hpp"

namespace omsim {

/// Reference device: 20 ng membrane, g/2pi = 1.55 kHz, gamma_m/2pi = 41 kHz,
/// omega_m/2pi = 51.8 MHz, kappa/2pi = 1.5 MHz, both cavities red-detuned by omega_m
/// from 775 nm pumps.
inline SystemParams reference_system() {
    const double wL = angular_frequency_from_wavelength(775e-9);
    SystemParams p;
    p.mass = 20e-12;
    p.omega_m = two_pi * 51.8e6;
    p.gamma_m = two_pi * 41e3;
    p.kappa1 = two_pi * 1.5e6;
    p.kappa2 = two_pi * 1.5e6;
    p.g1 = two_pi * 1.55e3;
    p.g2 = two_pi * 1.55e3;
    p.omega1 = wL + p.omega_m;
    p.omega2 = wL + p.omega_m;
    return p;
}

/// Constant drives at 775 nm with delta = omega_m.
inline DriveConfig reference_drives(double power_L, double power_R, double power_p) {
    const double wL = angular_frequency_from_wavelength(775e-9);
    return DriveConfig::make(wL, wL, two_pi * 51.8e6, power_L, power_R, power_p);
}

struct Configuration {
    SystemParams params;
    DriveConfig drives;
};

/// Random constant-drive configuration scattered around a centre:
/// pump powers x[0.3, 2], kappa and g x[0.8, 1.2], bare detunings x[0.9, 1.1],
/// delta x[0.95, 1.05], random pump phases.
inline Configuration jitter_configuration(const SystemParams& p0, const DriveConfig& d0, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    auto range = [&](double lo, double hi) { return lo + (hi - lo) * u(rng); };
    const auto bare = bare_detunings(p0, d0);

    Configuration c{p0, d0};
    c.drives.pulse_L.reset();
    c.drives.pulse_R.reset();
    c.drives.pulse_p.reset();
    c.drives.power_L = d0.power_L * range(0.3, 2.0);
    c.drives.power_R = d0.power_R * range(0.3, 2.0);
    c.drives.phase_L = range(-M_PI, M_PI);
    c.drives.phase_R = range(-M_PI, M_PI);
    c.drives.delta = d0.delta * range(0.95, 1.05);
    c.drives.omega_p = c.drives.omega_L + c.drives.delta;
    c.params.kappa1 = p0.kappa1 * range(0.8, 1.2);
    c.params.kappa2 = p0.kappa2 * range(0.8, 1.2);
    c.params.g1 = p0.g1 * range(0.8, 1.2);
    c.params.g2 = p0.g2 * range(0.8, 1.2);
    c.params.omega1 = d0.omega_L + bare.cavity1 * range(0.9, 1.1);
    c.params.omega2 = d0.omega_R + bare.cavity2 * range(0.9, 1.1);
    return c;
}

struct ComponentMismatch {
    std::string component;
    double analytic = 0.0; // |value|
    double relative_error = 0.0;
};

struct SteadyStateComparison {
    double max_relative_error = 0.0;
    std::string worst_component;
    double t_final = 0.0;
    double decay_rate = 0.0; // -max Re(lambda)
    std::vector<ComponentMismatch> components;
};

/// Integrates the envelope equations from the empty state for 30 slowest-mode
/// decay times and compares every component with the closed-form steady state.
/// Components that vanish analytically are measured against the scale of their
/// partner (P0 against Q0).
inline SteadyStateComparison compare_analytic_envelope(const SystemParams& p, const DriveConfig& d,
                                                       double decay_times = 30.0) {
    if (d.pulsed()) throw InvalidParameter("steady-state comparison needs constant drives");
    const auto op = solve_operating_point(p, d);
    const auto eig = is_stable_eigen(linearize(p, op));
    if (!eig.stable) throw UnstableError("steady-state comparison needs a stable operating point");
    const auto resp = probe_response(op, p, d);
    const auto target = EnvelopeState::from_steady_state(op, resp, p);

    SteadyStateComparison out;
    out.decay_rate = -eig.max_real;
    out.t_final = decay_times / out.decay_rate;
    const EnvelopeModel model(p, d);
    const auto final = advance_rk4(EnvelopeState{}, 0.0, out.t_final, default_envelope_dt(p, d), model);

    for (std::size_t i = 0; i < EnvelopeState::size; ++i) {
        double scale = std::abs(target[i]);
        if (i == EnvelopeState::P0) scale = std::abs(target[EnvelopeState::Q0]);
        if (scale == 0.0) scale = 1.0;
        const double err = std::abs(final[i] - target[i]) / scale;
        out.components.push_back({EnvelopeState::names[i], std::abs(target[i]), err});
        if (err >= out.max_relative_error) {
            out.max_relative_error = err;
            out.worst_component = EnvelopeState::names[i];
        }
    }
    return out;
}

struct SteadyStateSuite {
    int configurations = 0;
    int rejected = 0; // unstable or bistable draws that were redrawn
    double max_relative_error = 0.0;
    std::string worst_component;
    std::vector<SteadyStateComparison> runs;
};

inline SteadyStateSuite analytic_envelope_suite(const SystemParams& p0, const DriveConfig& d0, int count,
                                                std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    SteadyStateSuite s;
    while (s.configurations < count) {
        if (s.rejected > 100 * count) throw NumericalError("too few stable configurations in the sampled range");
        const auto c = jitter_configuration(p0, d0, rng);
        try {
            auto r = compare_analytic_envelope(c.params, c.drives);
            if (r.max_relative_error >= s.max_relative_error) {
                s.max_relative_error = r.max_relative_error;
                s.worst_component = r.worst_component;
            }
            s.runs.push_back(std::move(r));
            ++s.configurations;
        } catch (const UnstableError&) {
            ++s.rejected;
        } catch (const BistableError&) {
            ++s.rejected;
        }
    }
    return s;
}

struct SidebandComparison {
    std::string component;
    double max_error = 0.0; // max |full - envelope| / max |envelope| over the window
    double peak = 0.0;
};

struct FullEnvelopeComparison {
    double window_start = 0.0;
    double window_end = 0.0;
    double dt = 0.0;
    std::size_t steps = 0;
    std::vector<SidebandComparison> sidebands; // a1plus, Qplus, a1minus
};

/// Write stage of a pulsed run: the coupling keeps only its write lobe, the full
/// equations run over t_write +- 5 tau_L on the beat-resolving
/// step, and the sidebands recovered by harmonic cancellation are compared with
/// the envelope integrated on the same grid over t_write +- 3 tau_L.
inline FullEnvelopeComparison compare_envelope_full(const SystemParams& p, DriveConfig d, double dt = 0.0) {
    if (!d.pulse_L || !d.pulse_p) throw InvalidParameter("full-model comparison needs pulsed coupling and probe");
    PulseShape write = *d.pulse_L;
    write.t_read.reset();
    d.pulse_L = write;
    d.pulse_R.reset();
    d.power_R = 0.0;

    FullEnvelopeComparison out;
    out.dt = dt > 0.0 ? dt : default_full_dt(d);
    out.window_start = write.t_write - 3.0 * write.tau;
    out.window_end = write.t_write + 3.0 * write.tau;
    const double t0 = write.t_write - 5.0 * write.tau;
    const double t1 = write.t_write + 5.0 * write.tau;
    out.steps = step_count(t0, t1, out.dt);

    const auto full = simulate_full(p, d, out.dt, t0, t1);
    IntegrationOptions io;
    io.record_every = 1;
    io.max_rows = out.steps + 2;
    const auto env = integrate_rk4(EnvelopeState{}, t0, t1, out.dt, EnvelopeModel(p, d), io);

    const double period = two_pi / std::abs(d.delta);
    const auto a1 = separate_sidebands(full.t, full.a1, d.delta, 3.0 * period);
    const auto q = separate_sidebands(full.t, as_complex(full.Q), d.delta, 3.0 * period);

    auto compare = [&](const char* name, const Demodulated& dm, const std::vector<cplx>& channel,
                       EnvelopeState::Index idx) {
        SidebandComparison c;
        c.component = name;
        double err = 0.0;
        for (std::size_t i = 0; i < dm.t.size(); ++i) {
            if (dm.t[i] < out.window_start || dm.t[i] > out.window_end) continue;
            const std::size_t k = dm.first_index + i;
            c.peak = std::max(c.peak, std::abs(env.states[k][idx]));
            err = std::max(err, std::abs(channel[i] - env.states[k][idx]));
        }
        c.max_error = c.peak > 0.0 ? err / c.peak : err;
        out.sidebands.push_back(c);
    };
    if (a1.t.front() > out.window_start || a1.t.back() < out.window_end)
        throw InvalidParameter("comparison window not covered by the demodulated series");
    compare("a1plus", a1, a1.plus, EnvelopeState::A1p);
    compare("Qplus", q, q.plus, EnvelopeState::Qp);
    compare("a1minus", a1, a1.minus, EnvelopeState::A1m);
    return out;
}

struct StabilityComparison {
    int draws = 0;
    int stable = 0;
    int unstable = 0;
    int marginal_band = 0;            // |max Re lambda| <= band * omega_m, excluded
    int disagreements = 0;            // outside the band
    int disagreements_in_band = 0;
    int blue_high_power = 0;          // a pump red of its cavity (Delta < 0) at >= 1 mW
    double band = 1e-6;
};

/// Random operating points built from prescribed effective detunings (no
/// bistability issue): Delta1, Delta2 in [-2, 2] omega_m, pump powers up to
/// 5 mW on a log scale, kappa and g x[0.5, 2], random pump phases.
inline StabilityComparison compare_routh_eigen(const SystemParams& p0, const DriveConfig& d0, int draws,
                                               std::uint64_t seed, double band = 1e-6) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    auto range = [&](double lo, double hi) { return lo + (hi - lo) * u(rng); };
    StabilityComparison out;
    out.band = band;
    for (int i = 0; i < draws; ++i) {
        SystemParams p = p0;
        p.kappa1 = p0.kappa1 * std::exp2(range(-1.0, 1.0));
        p.kappa2 = p0.kappa2 * std::exp2(range(-1.0, 1.0));
        p.g1 = p0.g1 * std::exp2(range(-1.0, 1.0));
        p.g2 = p0.g2 * std::exp2(range(-1.0, 1.0));
        const double PL = 5e-3 * std::pow(10.0, range(-3.0, 0.0));
        const double PR = u(rng) < 0.25 ? 0.0 : 5e-3 * std::pow(10.0, range(-3.0, 0.0));
        const cplx EL = std::polar(drive_amplitude(p.kappa1, PL, d0.omega_L), range(-M_PI, M_PI));
        const cplx ER = std::polar(drive_amplitude(p.kappa2, PR, d0.omega_R), range(-M_PI, M_PI));
        const double D1 = p.omega_m * range(-2.0, 2.0);
        const double D2 = p.omega_m * range(-2.0, 2.0);
        const auto eff = operating_point_from_effective(p, D1, D2, EL, ER);
        const auto sys = linearize(p, eff.op);
        const auto routh = is_stable_routh_hurwitz(sys);
        const auto eig = is_stable_eigen(sys);
        ++out.draws;
        if ((D1 < 0.0 && PL >= 1e-3) || (D2 < 0.0 && PR >= 1e-3)) ++out.blue_high_power;
        const bool in_band = std::abs(eig.max_real) <= band * p.omega_m;
        const bool agree = (routh.verdict == StabilityVerdict::stable) == eig.stable;
        if (in_band) {
            ++out.marginal_band;
            if (!agree) ++out.disagreements_in_band;
            continue;
        }
        eig.stable ? ++out.stable : ++out.unstable;
        if (!agree) ++out.disagreements;
    }
    return out;
}

} // namespace omsim
