#pragma once

// Batch front end: resolves a run configuration, dispatches one subcommand and
// writes CSV files named after a hash of the resolved configuration.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "omsim/config.hpp"
#include "omsim/envelope.hpp"
#include "omsim/error.hpp"
#include "omsim/full_model.hpp"
#include "omsim/params.hpp"
#include "omsim/protocols.hpp"
#include "omsim/stability.hpp"
#include "omsim/steady_state.hpp"
#include "omsim/verification.hpp"

namespace omsim {

enum ExitCode : int {
    exit_ok = 0,
    exit_config = 2,
    exit_unstable = 3,
    exit_diverged = 4,
    exit_verification = 5,
};

struct AppOptions {
    std::string subcommand;
    std::string config_path;
    std::string out_dir = ".";
    std::optional<double> dt;
    std::vector<std::string> overrides;
    bool plot_data = false;
};

inline constexpr std::array<std::string_view, 6> subcommands{"spectrum", "stability", "memory",
                                                             "transduce", "scan",      "verify"};

namespace detail {

inline std::uint64_t fnv1a64(std::string_view s) {
    std::uint64_t h = 14695981039346656037ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

inline std::string hex64(std::uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

inline std::string fmt(const char* spec, double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    std::snprintf(buf, sizeof buf, spec, v);
    return buf;
}

inline std::string num(double v) { return fmt("%.17g", v); }
inline std::string sci(double v) { return fmt("%.8e", v); }

class CsvWriter {
public:
    explicit CsvWriter(const std::filesystem::path& path) : path_(path), out_(path, std::ios::binary) {
        if (!out_) throw ConfigError("cannot write '" + path.string() + "'", 0);
    }
    template <class... Cells>
    void row(const Cells&... cells) {
        bool first = true;
        ((out_ << (first ? "" : ",") << cells, first = false), ...);
        out_ << '\n';
    }
    void row(const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i) out_ << (i ? "," : "") << cells[i];
        out_ << '\n';
    }
    const std::filesystem::path& path() const { return path_; }

private:
    std::filesystem::path path_;
    std::ofstream out_;
};

/// Defaults that need the other keys: sweep range, integration steps.
inline void apply_computed_defaults(RunConfig& cfg) {
    const double center = cfg.number("delta_hz");
    const double half = 4.0 * cfg.number("kappa1_hz");
    cfg.set_default("sweep_start_hz", num(center - half));
    cfg.set_default("sweep_stop_hz", num(center + half));
    const auto p = cfg.system();
    const auto d = cfg.drives();
    cfg.set_default("dt_s", num(default_envelope_dt(p, d)));
    if (d.delta != 0.0) cfg.set_default("full_dt_s", num(default_full_dt(d)));
}

inline RunConfig resolve(RunConfig cfg) {
    cfg.validate();
    apply_computed_defaults(cfg);
    return cfg;
}

inline ProtocolOptions protocol_options(const RunConfig& cfg) {
    ProtocolOptions o;
    o.dt = cfg.number("dt_s");
    o.integration.record_every = static_cast<std::size_t>(cfg.integer("record_every"));
    o.max_transient_gain = cfg.number("max_transient_gain");
    return o;
}

inline void write_trajectory(const std::filesystem::path& path, const Trajectory& tr) {
    CsvWriter w(path);
    std::vector<std::string> header{"t_s"};
    for (const char* n : EnvelopeState::names) {
        header.push_back(std::string("re_") + n);
        header.push_back(std::string("im_") + n);
    }
    for (const char* n : {"p_left_norm", "p_phonon_norm", "p_stokes_norm", "p_antistokes_norm"}) header.push_back(n);
    w.row(header);
    std::vector<std::string> cells;
    for (std::size_t k = 0; k < tr.size(); ++k) {
        cells.clear();
        cells.push_back(sci(tr.t[k]));
        for (std::size_t i = 0; i < EnvelopeState::size; ++i) {
            cells.push_back(sci(tr.states[k][i].real()));
            cells.push_back(sci(tr.states[k][i].imag()));
        }
        const auto& pw = tr.powers[k];
        for (double v : {pw.left, pw.phonon, pw.stokes, pw.antistokes}) cells.push_back(sci(v));
        w.row(cells);
    }
}

/// At most 500 evenly strided rows of time and the four derived powers.
inline void write_plot_data(const std::filesystem::path& path, const Trajectory& tr) {
    CsvWriter w(path);
    w.row("t_s", "p_left_norm", "p_phonon_norm", "p_stokes_norm", "p_antistokes_norm");
    const std::size_t stride = std::max<std::size_t>(1, (tr.size() + 499) / 500);
    for (std::size_t k = 0; k < tr.size(); k += stride) {
        const auto& pw = tr.powers[k];
        w.row(sci(tr.t[k]), sci(pw.left), sci(pw.phonon), sci(pw.stokes), sci(pw.antistokes));
    }
}

struct Context {
    const AppOptions& opt;
    RunConfig raw; // file plus overrides, before defaults
    RunConfig cfg; // resolved
    std::string stem;
    std::ostream& out;
    std::ostream& err;

    std::filesystem::path file(const std::string& suffix) const {
        return std::filesystem::path(opt.out_dir) / (stem + suffix);
    }
    void announce(const std::filesystem::path& p) const { out << "wrote " << p.string() << '\n'; }
    void warn(const std::vector<std::string>& ws) const {
        for (const auto& w : ws) err << "warning: " << w << '\n';
    }
};

inline int run_spectrum(Context& c) {
    const auto p = c.cfg.system();
    const auto d = c.cfg.drives();
    c.warn(p.regime_warnings());
    const auto rows = spectrum_sweep(p, d, two_pi * c.cfg.number("sweep_start_hz"),
                                     two_pi * c.cfg.number("sweep_stop_hz"),
                                     static_cast<int>(c.cfg.integer("sweep_points")));
    const auto path = c.file(".csv");
    {
        CsvWriter w(path);
        w.row("delta_rad_s", "re_qplus", "im_qplus", "re_d", "im_d", "re_a1p", "im_a1p", "re_a1m", "im_a1m", "re_a2p",
              "im_a2p", "re_a2m", "im_a2m", "p_out_left_probe_norm", "p_out_right_as_norm", "p_out_right_s_norm");
        const double nan = std::numeric_limits<double>::quiet_NaN();
        for (const auto& r : rows) {
            std::vector<std::string> cells{num(r.delta)};
            if (r.ok()) {
                const auto& s = *r.response;
                for (cplx v : {s.Qplus, s.d, s.a1plus, s.a1minus, s.a2plus, s.a2minus}) {
                    cells.push_back(num(v.real()));
                    cells.push_back(num(v.imag()));
                }
                cells.push_back(num(r.left_probe_power()));
                cells.push_back(num(r.right_antistokes_power()));
                cells.push_back(num(r.right_stokes_power()));
            } else {
                cells.resize(16, num(nan));
                c.err << "warning: delta = " << num(r.delta) << " rad/s: " << r.error << '\n';
            }
            w.row(cells);
        }
    }
    c.announce(path);
    if (c.opt.plot_data) {
        const auto plot = c.file("_plot.csv");
        CsvWriter w(plot);
        w.row("delta_rad_s", "p_out_left_probe_norm", "p_out_right_as_norm", "p_out_right_s_norm");
        const std::size_t stride = std::max<std::size_t>(1, (rows.size() + 499) / 500);
        for (std::size_t i = 0; i < rows.size(); i += stride) {
            const auto& r = rows[i];
            if (!r.ok()) continue;
            w.row(num(r.delta), num(r.left_probe_power()), num(r.right_antistokes_power()),
                  num(r.right_stokes_power()));
        }
        c.announce(plot);
    }
    if (const auto dip = measure_transparency_dip(rows)) {
        c.out << "transparency dip: center " << num(dip->center) << " rad/s, fwhm " << num(dip->fwhm)
              << " rad/s, depth " << num(dip->baseline - dip->minimum) << '\n';
    } else {
        c.out << "transparency dip: none found in the swept range\n";
    }
    return exit_ok;
}

inline int run_stability(Context& c) {
    const auto p = c.cfg.system();
    const auto d = c.cfg.drives();
    const auto op = solve_operating_point(p, d);
    const auto sys = linearize(p, op);
    const auto routh = is_stable_routh_hurwitz(sys);
    const auto eig = is_stable_eigen(sys);
    const auto path = c.file(".csv");
    {
        CsvWriter w(path);
        w.row("verdict", "margin", "eig_index", "re", "im");
        for (std::size_t i = 0; i < eig.eigenvalues.size(); ++i)
            w.row(to_string(routh.verdict), num(routh.margin), i, num(eig.eigenvalues[i].real()),
                  num(eig.eigenvalues[i].imag()));
    }
    c.announce(path);
    c.out << "verdict " << to_string(routh.verdict) << ", margin " << num(routh.margin) << ", max Re(lambda) "
          << num(eig.max_real) << " 1/s\n";
    return exit_ok;
}

inline int run_memory_command(Context& c) {
    const auto res = run_memory(c.cfg.system(), c.cfg.drives(), protocol_options(c.cfg));
    c.warn(res.warnings);
    const auto path = c.file(".csv");
    {
        CsvWriter w(path);
        w.row("retrieval_efficiency", "storage_peak", "t_write_s", "t_read_s", "read_window_start_s",
              "read_window_end_s");
        w.row(num(res.retrieval_efficiency), num(res.storage_peak), num(res.t_write), num(res.t_read),
              num(res.read_window_start), num(res.read_window_end));
    }
    c.announce(path);
    const auto traj = c.file("_trajectory.csv");
    write_trajectory(traj, res.trajectory);
    c.announce(traj);
    if (c.opt.plot_data) {
        write_plot_data(c.file("_plot.csv"), res.trajectory);
        c.announce(c.file("_plot.csv"));
    }
    c.out << "retrieval efficiency " << num(res.retrieval_efficiency) << '\n';
    return exit_ok;
}

inline std::optional<DetuningCase> configured_case(const RunConfig& cfg) {
    return parse_detuning_case(cfg.text("detuning_case"));
}

inline int run_transduce_command(Context& c) {
    const auto res =
        run_transduction(c.cfg.system(), c.cfg.drives(), configured_case(c.cfg), protocol_options(c.cfg));
    c.warn(res.warnings);
    const auto path = c.file(".csv");
    {
        CsvWriter w(path);
        w.row("detuning_case", "stokes_peak", "antistokes_peak", "omega_stokes_rad_s", "omega_antistokes_rad_s",
              "phonon_peak_write", "phonon_peak_read");
        w.row(res.detuning_case ? to_string(*res.detuning_case) : "config", num(res.stokes_peak),
              num(res.antistokes_peak), num(res.omega_stokes), num(res.omega_antistokes),
              num(res.phonon_peak_write), num(res.phonon_peak_read));
    }
    c.announce(path);
    const auto traj = c.file("_trajectory.csv");
    write_trajectory(traj, res.trajectory);
    c.announce(traj);
    if (c.opt.plot_data) {
        write_plot_data(c.file("_plot.csv"), res.trajectory);
        c.announce(c.file("_plot.csv"));
    }
    c.out << "stokes peak " << num(res.stokes_peak) << ", anti-stokes peak " << num(res.antistokes_peak) << '\n';
    return exit_ok;
}

struct ScanPoint {
    double value = 0.0;
    std::string status = "ok";
    double retrieval_efficiency = std::numeric_limits<double>::quiet_NaN();
    double storage_peak = std::numeric_limits<double>::quiet_NaN();
    double stokes_peak = std::numeric_limits<double>::quiet_NaN();
    double antistokes_peak = std::numeric_limits<double>::quiet_NaN();
};

inline unsigned scan_threads(std::size_t jobs) {
    unsigned n = std::max(1u, std::thread::hardware_concurrency());
    if (const char* env = std::getenv("OMSIM_THREADS")) {
        const auto v = parse_integer(env);
        if (!v || *v < 1) throw ConfigError("OMSIM_THREADS must be a positive integer", 0);
        n = std::min<unsigned>(n, static_cast<unsigned>(std::min<long long>(*v, 1024)));
    }
    return std::max(1u, std::min<unsigned>(n, static_cast<unsigned>(jobs)));
}

inline ScanPoint scan_one(const RunConfig& raw, const std::string& key, double value, bool transduce) {
    ScanPoint pt;
    pt.value = value;
    try {
        RunConfig cfg = raw;
        cfg.set_number(key, value);
        cfg = resolve(std::move(cfg));
        // Only the peak metrics are tabulated, so the trajectory keeps its end points.
        auto popt = protocol_options(cfg);
        popt.integration.record_every = std::numeric_limits<std::size_t>::max() / 4;
        popt.integration.max_rows = std::numeric_limits<std::size_t>::max();
        if (transduce) {
            const auto r = run_transduction(cfg.system(), cfg.drives(), configured_case(cfg), popt);
            pt.stokes_peak = r.stokes_peak;
            pt.antistokes_peak = r.antistokes_peak;
            pt.storage_peak = std::max(r.phonon_peak_write, r.phonon_peak_read);
        } else {
            const auto r = run_memory(cfg.system(), cfg.drives(), popt);
            pt.retrieval_efficiency = r.retrieval_efficiency;
            pt.storage_peak = r.storage_peak;
        }
    } catch (const UnstableError&) {
        pt.status = "unstable";
    } catch (const BistableError&) {
        pt.status = "bistable";
    } catch (const DivergedError&) {
        pt.status = "diverged";
    } catch (const Error& e) {
        pt.status = std::string(to_string(e.kind()));
    }
    return pt;
}

inline int run_scan(Context& c) {
    if (!c.cfg.has("scan_key") || !c.cfg.has("scan_values"))
        throw ConfigError("scan needs scan_key and scan_values", 0);
    const std::string key = c.cfg.text("scan_key");
    const auto values = c.cfg.numbers("scan_values");
    const bool transduce = c.cfg.text("scan_protocol") == "transduce";

    // Keys whose defaults derive from the scanned key are re-resolved per point.
    RunConfig raw = c.raw;
    if (!raw.has("scan_key")) raw.set("scan_key", key);

    std::vector<ScanPoint> points(values.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < values.size(); i = next++) points[i] = scan_one(raw, key, values[i], transduce);
    };
    const unsigned n = scan_threads(values.size());
    std::vector<std::thread> pool;
    for (unsigned i = 1; i < n; ++i) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();

    const auto path = c.file(".csv");
    {
        CsvWriter w(path);
        w.row("scan_key", "value", "status", "retrieval_efficiency", "storage_peak", "stokes_peak", "antistokes_peak");
        for (const auto& pt : points)
            w.row(key, num(pt.value), pt.status, num(pt.retrieval_efficiency), num(pt.storage_peak),
                  num(pt.stokes_peak), num(pt.antistokes_peak));
    }
    c.announce(path);
    return exit_ok;
}

inline int run_verify(Context& c) {
    const auto p = c.cfg.system();
    const auto d = c.cfg.drives();
    const auto seed = static_cast<std::uint64_t>(c.cfg.integer("seed"));
    struct Row {
        std::string check;
        std::string metric;
        double value;
        double tolerance;
        bool pass;
    };
    std::vector<Row> rows;

    DriveConfig cw = d;
    cw.pulse_L.reset();
    cw.pulse_R.reset();
    cw.pulse_p.reset();
    const auto steady = analytic_envelope_suite(p, cw, 5, seed);
    rows.push_back({"analytic_vs_envelope", "max_relative_error", steady.max_relative_error, 1e-6,
                    steady.max_relative_error <= 1e-6});

    DriveConfig pulsed = d;
    if (!pulsed.pulse_L || !pulsed.pulse_p) {
        pulsed.pulse_L = PulseShape{0.0, std::nullopt, 0.3e-6, 2};
        pulsed.pulse_p = PulseShape{0.0, std::nullopt, 0.3e-6, 2};
    }
    const auto full = compare_envelope_full(p, pulsed, c.cfg.number("full_dt_s"));
    for (const auto& s : full.sidebands) {
        if (s.component == "a1minus") continue;
        rows.push_back({"envelope_vs_full", s.component + "_max_error", s.max_error, 0.01, s.max_error <= 0.01});
    }

    const auto st = compare_routh_eigen(p, cw, static_cast<int>(c.cfg.integer("verify_draws")), seed);
    rows.push_back({"routh_vs_eigen", "disagreements", static_cast<double>(st.disagreements), 0.0,
                    st.disagreements == 0});

    const auto path = c.file(".csv");
    bool ok = true;
    {
        CsvWriter w(path);
        w.row("check", "metric", "value", "tolerance", "status");
        for (const auto& r : rows) {
            w.row(r.check, r.metric, num(r.value), num(r.tolerance), r.pass ? "pass" : "fail");
            ok = ok && r.pass;
        }
    }
    c.announce(path);
    for (const auto& r : rows)
        c.out << (r.pass ? "pass " : "FAIL ") << r.check << ' ' << r.metric << ' ' << num(r.value) << '\n';
    if (!ok) throw VerificationFailure("one or more oracle checks failed");
    return exit_ok;
}

inline int exit_code_for(const Error& e) {
    switch (e.kind()) {
    case ErrorKind::config:
    case ErrorKind::invalid_parameter: return exit_config;
    case ErrorKind::unstable:
    case ErrorKind::bistable: return exit_unstable;
    case ErrorKind::diverged:
    case ErrorKind::numerical: return exit_diverged;
    case ErrorKind::verification: return exit_verification;
    }
    return exit_diverged;
}

inline std::string quoted(std::string_view s) {
    std::string out = "\"";
    for (char ch : s) {
        if (ch == '"' || ch == '\\') out += '\\';
        out += ch == '\n' ? ' ' : ch;
    }
    return out + "\"";
}

} // namespace detail

/// Runs one subcommand. Returns the process exit status; failures are reported
/// on `err` as a single `error kind=... exit=... line=... message="..."` line.
inline int run_app(const AppOptions& opt, std::ostream& out, std::ostream& err) {
    try {
        if (std::find(subcommands.begin(), subcommands.end(), opt.subcommand) == subcommands.end())
            throw ConfigError("unknown subcommand '" + opt.subcommand + "'", 0);
        RunConfig raw = RunConfig::load(opt.config_path);
        for (const auto& kv : opt.overrides) raw.apply_override(kv);
        if (opt.dt) raw.set_number("dt_s", *opt.dt);
        RunConfig cfg = detail::resolve(raw);

        std::filesystem::create_directories(opt.out_dir);
        const std::string resolved = cfg.resolved_text();
        {
            std::ofstream f(std::filesystem::path(opt.out_dir) / "resolved_config.txt", std::ios::binary);
            if (!f) throw ConfigError("cannot write resolved_config.txt in '" + opt.out_dir + "'", 0);
            f << resolved;
        }
        detail::Context c{opt, raw, cfg, opt.subcommand + "_" + detail::hex64(detail::fnv1a64(resolved)), out, err};
        if (opt.subcommand == "spectrum") return detail::run_spectrum(c);
        if (opt.subcommand == "stability") return detail::run_stability(c);
        if (opt.subcommand == "memory") return detail::run_memory_command(c);
        if (opt.subcommand == "transduce") return detail::run_transduce_command(c);
        if (opt.subcommand == "scan") return detail::run_scan(c);
        return detail::run_verify(c);
    } catch (const Error& e) {
        const int code = detail::exit_code_for(e);
        err << "error kind=" << to_string(e.kind()) << " exit=" << code;
        if (const auto* ce = dynamic_cast<const ConfigError*>(&e); ce && ce->line() > 0) err << " line=" << ce->line();
        err << " message=" << detail::quoted(e.what()) << '\n';
        return code;
    } catch (const std::filesystem::filesystem_error& e) {
        err << "error kind=config exit=" << exit_config << " message=" << detail::quoted(e.what()) << '\n';
        return exit_config;
    }
}

} // namespace omsim
