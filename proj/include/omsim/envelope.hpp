#pragma once

// Slowly varying envelope dynamics. Every variable is expanded as
//   X(t) = X_0(t) + X_+(t) exp(-i delta t) + X_-(t) exp(+i delta t)
// and the equations are kept to zeroth order in the pumps and first order in
// the probe. Q and P are real, so Q_- = conj(Q_+) and P_- = conj(P_+).

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <functional>
#include <string>
#include <vector>

#include "omsim/constants.hpp"
#include "omsim/error.hpp"
#include "omsim/params.hpp"
#include "omsim/steady_state.hpp"

namespace omsim {

struct EnvelopeState {
    enum Index : std::size_t { Q0, P0, Qp, Pp, A10, A1p, A1m, A20, A2p, A2m, size };
    static constexpr std::array<const char*, size> names{"Q0", "P0", "Qplus", "Pplus", "a10",
                                                         "a1plus", "a1minus", "a20", "a2plus", "a2minus"};

    std::array<cplx, size> v{};

    cplx& operator[](std::size_t i) { return v[i]; }
    const cplx& operator[](std::size_t i) const { return v[i]; }

    EnvelopeState& operator+=(const EnvelopeState& o) {
        for (std::size_t i = 0; i < size; ++i) v[i] += o.v[i];
        return *this;
    }
    friend EnvelopeState operator+(EnvelopeState a, const EnvelopeState& b) { return a += b; }
    friend EnvelopeState operator-(EnvelopeState a, const EnvelopeState& b) {
        for (std::size_t i = 0; i < size; ++i) a.v[i] -= b.v[i];
        return a;
    }
    friend EnvelopeState operator*(double s, EnvelopeState a) {
        for (auto& x : a.v) x *= s;
        return a;
    }

    bool finite() const {
        return std::all_of(v.begin(), v.end(),
                           [](const cplx& x) { return std::isfinite(x.real()) && std::isfinite(x.imag()); });
    }

    double max_abs() const {
        double m = 0.0;
        for (const auto& x : v) m = std::max(m, std::abs(x));
        return m;
    }

    /// Stationary envelope equal to the analytic steady state.
    static EnvelopeState from_steady_state(const OperatingPoint& op, const ProbeResponse& r,
                                           const SystemParams& p) {
        EnvelopeState s;
        s[Q0] = op.Q0;
        s[P0] = 0.0;
        s[Qp] = r.Qplus;
        s[Pp] = -I * r.delta * r.Qplus / p.omega_m;
        s[A10] = op.a10;
        s[A1p] = r.a1plus;
        s[A1m] = r.a1minus;
        s[A20] = op.a20;
        s[A2p] = r.a2plus;
        s[A2m] = r.a2minus;
        return s;
    }
};

/// Classical fourth-order Runge-Kutta step for any state with +, and scalar *.
template <class State, class Field>
State rk4_step(const Field& f, double t, const State& y, double h) {
    const State k1 = f(y, t);
    const State k2 = f(y + (0.5 * h) * k1, t + 0.5 * h);
    const State k3 = f(y + (0.5 * h) * k2, t + 0.5 * h);
    const State k4 = f(y + h * k3, t + h);
    return y + (h / 6.0) * (k1 + 2.0 * (k2 + k3) + k4);
}

class EnvelopeModel {
public:
    EnvelopeModel(const SystemParams& p, const DriveConfig& d)
        : p_(p), field_(p, d), bare_(bare_detunings(p, d)), delta_(d.delta) {}

    const SystemParams& params() const { return p_; }
    const DriveField& field() const { return field_; }
    double delta() const { return delta_; }

    EnvelopeState operator()(const EnvelopeState& s, double t) const { return derivative(s, t); }

    EnvelopeState derivative(const EnvelopeState& s, double t) const {
        using E = EnvelopeState;
        const cplx EL = field_.left(t);
        const cplx ER = field_.right(t);
        const cplx EP = field_.probe(t);
        const double wm = p_.omega_m;
        const double gm = p_.gamma_m;
        const double g1 = p_.g1;
        const double g2 = p_.g2;
        const double k1 = p_.kappa1;
        const double k2 = p_.kappa2;
        const cplx idelta{0.0, delta_};

        const cplx a10 = s[E::A10];
        const cplx a20 = s[E::A20];
        const cplx Qp = s[E::Qp];
        // -i Delta_i - kappa_i with the instantaneous static displacement
        const cplx r1 = -I * (bare_.cavity1 - g1 * s[E::Q0]) - k1;
        const cplx r2 = -I * (bare_.cavity2 + g2 * s[E::Q0]) - k2;

        E ds;
        ds[E::Q0] = wm * s[E::P0];
        ds[E::P0] = g1 * std::norm(a10) - g2 * std::norm(a20) - wm * s[E::Q0] - gm * s[E::P0];
        ds[E::Qp] = idelta * Qp + wm * s[E::Pp];
        ds[E::Pp] = idelta * s[E::Pp] +
                    g1 * (std::conj(a10) * s[E::A1p] + a10 * std::conj(s[E::A1m])) -
                    g2 * (std::conj(a20) * s[E::A2p] + a20 * std::conj(s[E::A2m])) - wm * Qp - gm * s[E::Pp];
        ds[E::A10] = r1 * a10 + EL;
        ds[E::A1p] = (idelta + r1) * s[E::A1p] + I * g1 * a10 * Qp + EP;
        ds[E::A1m] = (r1 - idelta) * s[E::A1m] + I * g1 * a10 * std::conj(Qp);
        ds[E::A20] = r2 * a20 + ER;
        ds[E::A2p] = (idelta + r2) * s[E::A2p] - I * g2 * a20 * Qp;
        ds[E::A2m] = (r2 - idelta) * s[E::A2m] - I * g2 * a20 * std::conj(Qp);
        return ds;
    }

private:
    SystemParams p_;
    DriveField field_;
    BareDetunings bare_;
    double delta_;
};

/// Free-function form of the envelope vector field.
inline EnvelopeState envelope_derivatives(const EnvelopeState& s, double t, const SystemParams& p,
                                          const DriveConfig& d) {
    return EnvelopeModel(p, d).derivative(s, t);
}

/// Powers normalized to the peak probe power |E_p^peak|^2.
struct DerivedPowers {
    double left = 0.0;       // |2 kappa1 a1plus - E_p(t)|^2
    double phonon = 0.0;     // |kappa1 Qplus|^2
    double stokes = 0.0;     // |2 kappa2 a2minus|^2
    double antistokes = 0.0; // |2 kappa2 a2plus|^2
};

inline DerivedPowers derived_powers(const EnvelopeState& s, double t, const EnvelopeModel& m) {
    using E = EnvelopeState;
    const auto& p = m.params();
    const double norm = std::norm(m.field().peak().probe);
    DerivedPowers d;
    d.left = std::norm(2.0 * p.kappa1 * s[E::A1p] - m.field().probe(t)) / norm;
    d.phonon = std::norm(p.kappa1 * s[E::Qp]) / norm;
    d.stokes = std::norm(2.0 * p.kappa2 * s[E::A2m]) / norm;
    d.antistokes = std::norm(2.0 * p.kappa2 * s[E::A2p]) / norm;
    return d;
}

struct Trajectory {
    std::vector<double> t;
    std::vector<EnvelopeState> states;
    std::vector<DerivedPowers> powers;

    std::size_t size() const { return t.size(); }
};

struct IntegrationOptions {
    std::size_t record_every = 0; // 0: automatic (>= 1000 samples)
    std::size_t max_rows = 1000000;
};

/// min(tau_p, 1/kappa_max, 1/omega_m) / 50
inline double default_envelope_dt(const SystemParams& p, const DriveConfig& d) {
    double scale = std::min(1.0 / std::max(p.kappa1, p.kappa2), 1.0 / p.omega_m);
    if (d.pulse_p) scale = std::min(scale, d.pulse_p->tau);
    return scale / 50.0;
}

inline std::size_t step_count(double t0, double t1, double dt) {
    if (!(dt > 0.0) || !std::isfinite(dt)) throw InvalidParameter("dt must be > 0");
    if (!(t1 > t0)) throw InvalidParameter("integration span must satisfy t1 > t0");
    const double n = std::ceil((t1 - t0) / dt * (1.0 - 1e-12));
    if (n > 1e8) throw InvalidParameter("more than 1e8 integration steps requested");
    return static_cast<std::size_t>(std::max(1.0, n));
}

inline std::size_t resolve_stride(std::size_t steps, const IntegrationOptions& opt) {
    std::size_t stride = opt.record_every > 0 ? opt.record_every : std::max<std::size_t>(1, steps / 1000);
    while ((steps / stride + 2) > opt.max_rows) ++stride;
    return stride;
}

/// Fixed-step RK4 on the uniform grid t_k = t0 + k (t1 - t0)/n, n = ceil((t1 - t0)/dt).
/// The observer sees every step (including the initial state); the trajectory keeps
/// every record_every-th sample plus the final one.
template <class Observer>
Trajectory integrate_rk4(const EnvelopeState& initial, double t0, double t1, double dt, const EnvelopeModel& model,
                         const IntegrationOptions& opt, Observer&& observe) {
    const std::size_t n = step_count(t0, t1, dt);
    const double h = (t1 - t0) / static_cast<double>(n);
    const std::size_t stride = resolve_stride(n, opt);

    Trajectory tr;
    tr.t.reserve(n / stride + 2);
    tr.states.reserve(n / stride + 2);
    tr.powers.reserve(n / stride + 2);

    EnvelopeState y = initial;
    for (std::size_t k = 0;; ++k) {
        const double t = k == n ? t1 : t0 + h * static_cast<double>(k);
        if (!y.finite()) throw DivergedError("envelope integration diverged at t = " + std::to_string(t) + " s", t);
        const DerivedPowers pw = derived_powers(y, t, model);
        observe(t, y, pw);
        if (k % stride == 0 || k == n) {
            tr.t.push_back(t);
            tr.states.push_back(y);
            tr.powers.push_back(pw);
        }
        if (k == n) break;
        y = rk4_step(model, t, y, h);
    }
    return tr;
}

inline Trajectory integrate_rk4(const EnvelopeState& initial, double t0, double t1, double dt,
                                const EnvelopeModel& model, const IntegrationOptions& opt = {}) {
    return integrate_rk4(initial, t0, t1, dt, model, opt, [](double, const EnvelopeState&, const DerivedPowers&) {});
}

/// Final state only; no recording.
inline EnvelopeState advance_rk4(const EnvelopeState& initial, double t0, double t1, double dt,
                                 const EnvelopeModel& model) {
    const std::size_t n = step_count(t0, t1, dt);
    const double h = (t1 - t0) / static_cast<double>(n);
    EnvelopeState y = initial;
    for (std::size_t k = 0; k < n; ++k) {
        y = rk4_step(model, t0 + h * static_cast<double>(k), y, h);
        if (!y.finite()) {
            const double t = t0 + h * static_cast<double>(k + 1);
            throw DivergedError("envelope integration diverged at t = " + std::to_string(t) + " s", t);
        }
    }
    return y;
}

} // namespace omsim
