#pragma once

// Pulse protocols: write/store/read memory in cavity 1, and transduction where
// the stored phonons are read out through cavity 2.

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "omsim/envelope.hpp"
#include "omsim/error.hpp"
#include "omsim/params.hpp"
#include "omsim/stability.hpp"
#include "omsim/steady_state.hpp"

namespace omsim {

struct ProtocolOptions {
    double dt = 0.0; // 0: default_envelope_dt
    IntegrationOptions integration{};
    /// Unstable stages are tolerated while the linearized growth over one pulse,
    /// max Re(lambda) * on-time, stays at or below this exponent.
    double max_transient_gain = 5.0;
};

/// Linear stability of one protocol stage, evaluated at the peak pump powers.
struct StageStability {
    std::string stage;
    OperatingPoint op;
    RouthReport routh;
    EigenReport eigen;
    double on_time = 0.0;       // s; infinite for constant drives
    double gain_exponent = 0.0; // max(0, max Re lambda) * on_time
};

inline StageStability check_stage(const std::string& name, const SystemParams& p, const BareDetunings& bare, cplx E_L,
                                  cplx E_R, std::optional<PulseShape> pulse) {
    StageStability s;
    s.stage = name;
    s.op = solve_operating_point(p, bare.cavity1, bare.cavity2, E_L, E_R);
    const auto sys = linearize(p, s.op);
    s.routh = is_stable_routh_hurwitz(sys);
    s.eigen = is_stable_eigen(sys);
    s.on_time = pulse ? lobe_on_time(pulse->tau, pulse->beta) : std::numeric_limits<double>::infinity();
    s.gain_exponent = s.eigen.max_real > 0.0 ? s.eigen.max_real * s.on_time : 0.0;
    return s;
}

inline void enforce_stability(const StageStability& s, double max_gain) {
    if (s.routh.verdict == StabilityVerdict::stable) return;
    if (s.gain_exponent <= max_gain) return;
    std::ostringstream os;
    os << s.stage << " stage refused: Routh-Hurwitz verdict " << to_string(s.routh.verdict) << " (margin "
       << s.routh.margin << "), max Re(lambda) = " << s.eigen.max_real << " 1/s, growth exponent over the pulse "
       << s.gain_exponent << " > " << max_gain;
    throw UnstableError(os.str());
}

struct MemoryResult {
    Trajectory trajectory;
    double retrieval_efficiency = 0.0; // peak normalized left output inside the read window
    double storage_peak = 0.0;         // peak normalized phonon signal
    double t_write = 0.0;
    double t_read = 0.0;
    double read_window_start = 0.0;
    double read_window_end = 0.0;
    double eit_width = 0.0; // at peak coupling
    std::vector<StageStability> stability;
    std::vector<std::string> warnings;
};

/// Single-cavity memory: a two-lobe coupling pulse on cavity 1 (write at t_write,
/// read at t_read) and a Gaussian probe at t_write. Runs from a cold start at
/// t_write - 5 tau_L to t_read + 5 tau_L.
inline MemoryResult run_memory(const SystemParams& p, const DriveConfig& d, const ProtocolOptions& opt = {}) {
    p.validate();
    d.validate();
    if (!d.pulse_L || !d.pulse_L->t_read) throw InvalidParameter("memory protocol needs a write/read coupling pulse pair");
    if (!d.pulse_p) throw InvalidParameter("memory protocol needs a probe pulse");
    if (d.power_R != 0.0) throw InvalidParameter("memory protocol is single-cavity: power_R must be 0");

    const PulseShape& cp = *d.pulse_L;
    MemoryResult res;
    res.t_write = cp.t_write;
    res.t_read = *cp.t_read;
    res.read_window_start = res.t_read - 3.0 * cp.tau;
    res.read_window_end = res.t_read + 3.0 * cp.tau;

    const auto amp = peak_amplitudes(p, d);
    const auto bare = bare_detunings(p, d);
    auto stage = check_stage("write/read", p, bare, amp.left, 0.0, cp);
    res.stability.push_back(stage);
    enforce_stability(stage, opt.max_transient_gain);

    res.eit_width = eit_width(stage.op, p);
    if (!(1.0 / d.pulse_p->tau < res.eit_width))
        res.warnings.emplace_back("probe bandwidth 1/tau_p exceeds the transparency width");
    if (std::abs(stage.op.Delta1 - p.omega_m) > 0.1 * p.omega_m)
        res.warnings.emplace_back("coupling is not red-detuned by about omega_m");
    for (auto& w : p.regime_warnings()) res.warnings.push_back(w);

    const EnvelopeModel model(p, d);
    const double t0 = res.t_write - 5.0 * cp.tau;
    const double t1 = res.t_read + 5.0 * cp.tau;
    const double dt = opt.dt > 0.0 ? opt.dt : default_envelope_dt(p, d);
    res.trajectory = integrate_rk4(EnvelopeState{}, t0, t1, dt, model, opt.integration,
                                   [&](double t, const EnvelopeState&, const DerivedPowers& pw) {
                                       res.storage_peak = std::max(res.storage_peak, pw.phonon);
                                       if (t >= res.read_window_start && t <= res.read_window_end)
                                           res.retrieval_efficiency = std::max(res.retrieval_efficiency, pw.left);
                                   });
    return res;
}

enum class DetuningCase { red, resonant, blue };

inline const char* to_string(DetuningCase c) {
    switch (c) {
    case DetuningCase::red: return "red";
    case DetuningCase::resonant: return "resonant";
    case DetuningCase::blue: return "blue";
    }
    return "unknown";
}

inline std::optional<DetuningCase> parse_detuning_case(const std::string& s) {
    if (s == "red") return DetuningCase::red;
    if (s == "resonant") return DetuningCase::resonant;
    if (s == "blue") return DetuningCase::blue;
    return std::nullopt;
}

/// Bare omega_2 - omega_R for each case: omega_m, 0, -omega_m.
inline double case_detuning(DetuningCase c, const SystemParams& p) {
    switch (c) {
    case DetuningCase::red: return p.omega_m;
    case DetuningCase::resonant: return 0.0;
    case DetuningCase::blue: return -p.omega_m;
    }
    return 0.0;
}

struct TransductionResult {
    Trajectory trajectory;
    std::optional<DetuningCase> detuning_case; // empty: detuning taken from the parameters
    double stokes_peak = 0.0;     // max |2 kappa2 a2minus / E_p|^2
    double antistokes_peak = 0.0; // max |2 kappa2 a2plus / E_p|^2
    double omega_antistokes = 0.0; // omega_R + delta
    double omega_stokes = 0.0;     // omega_R - delta
    double phonon_peak_write = 0.0;
    double phonon_peak_read = 0.0;
    double phonon_at_read_start = 0.0;
    double t_write = 0.0;
    double t_read = 0.0;
    std::vector<StageStability> stability;
    std::vector<std::string> warnings;
};

/// Write through cavity 1 at t_write, read through cavity 2 at t_read. The
/// cavity-1 coupling keeps only its write lobe; cavity 2 is pumped by a single
/// lobe at t_read (width from pulse_R, else that of the coupling pulse).
inline TransductionResult run_transduction(SystemParams p, DriveConfig d, std::optional<DetuningCase> which,
                                           const ProtocolOptions& opt = {}) {
    if (which) p.omega2 = d.omega_R + case_detuning(*which, p);
    p.validate();
    d.validate();
    if (!d.pulse_L || !d.pulse_L->t_read) throw InvalidParameter("transduction needs write and read times");
    if (!d.pulse_p) throw InvalidParameter("transduction needs a probe pulse");

    TransductionResult res;
    res.detuning_case = which;
    res.t_write = d.pulse_L->t_write;
    res.t_read = *d.pulse_L->t_read;
    PulseShape write = *d.pulse_L;
    write.t_read.reset();
    PulseShape read = d.pulse_R ? *d.pulse_R : *d.pulse_L;
    read.t_write = res.t_read;
    read.t_read.reset();
    d.pulse_L = write;
    d.pulse_R = read;

    const auto amp = peak_amplitudes(p, d);
    const auto bare = bare_detunings(p, d);
    res.stability.push_back(check_stage("write", p, bare, amp.left, 0.0, write));
    res.stability.push_back(check_stage("read", p, bare, 0.0, amp.right, read));
    for (const auto& s : res.stability) enforce_stability(s, opt.max_transient_gain);
    for (auto& w : p.regime_warnings()) res.warnings.push_back(w);

    res.omega_antistokes = d.omega_R + d.delta;
    res.omega_stokes = d.omega_R - d.delta;

    const EnvelopeModel model(p, d);
    const double t0 = res.t_write - 5.0 * write.tau;
    const double t1 = res.t_read + 5.0 * read.tau;
    const double write_end = res.t_write + 3.0 * write.tau;
    const double read_start = res.t_read - 3.0 * read.tau;
    const double read_end = res.t_read + 3.0 * read.tau;
    const double dt = opt.dt > 0.0 ? opt.dt : default_envelope_dt(p, d);
    bool read_started = false;
    res.trajectory = integrate_rk4(EnvelopeState{}, t0, t1, dt, model, opt.integration,
                                   [&](double t, const EnvelopeState&, const DerivedPowers& pw) {
                                       res.stokes_peak = std::max(res.stokes_peak, pw.stokes);
                                       res.antistokes_peak = std::max(res.antistokes_peak, pw.antistokes);
                                       if (t <= write_end) res.phonon_peak_write = std::max(res.phonon_peak_write, pw.phonon);
                                       if (t >= read_start && t <= read_end) {
                                           if (!read_started) {
                                               res.phonon_at_read_start = pw.phonon;
                                               read_started = true;
                                           }
                                           res.phonon_peak_read = std::max(res.phonon_peak_read, pw.phonon);
                                       }
                                   });
    return res;
}

} // namespace omsim
