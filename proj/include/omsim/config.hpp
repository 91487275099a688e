#pragma once

// Flat `key = value` run configuration. Frequencies are given in Hz and turned
// into angular frequencies when the physical parameters are built; the raw text
// of every value is kept so that the resolved echo re-parses bit-identically.

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "omsim/error.hpp"
#include "omsim/params.hpp"

namespace omsim {

enum class KeyKind { real, integer, text, real_list };
enum class Constraint { none, positive, nonnegative, even_ge2, at_least_one };

struct KeySpec {
    std::string_view name;
    KeyKind kind;
    bool required;
    Constraint constraint;
    std::string_view fixed_default; // empty: none, or computed elsewhere
    std::string_view allowed;       // '|'-separated for text keys
};

inline constexpr std::array<KeySpec, 35> config_keys{{
    {"mass_kg", KeyKind::real, true, Constraint::positive, "", ""},
    {"omega_m_hz", KeyKind::real, true, Constraint::positive, "", ""},
    {"gamma_m_hz", KeyKind::real, true, Constraint::positive, "", ""},
    {"kappa1_hz", KeyKind::real, true, Constraint::positive, "", ""},
    {"kappa2_hz", KeyKind::real, true, Constraint::positive, "", ""},
    {"g1_hz", KeyKind::real, true, Constraint::nonnegative, "", ""},
    {"g2_hz", KeyKind::real, true, Constraint::nonnegative, "", ""},
    {"lambda_l_m", KeyKind::real, true, Constraint::positive, "", ""},
    {"lambda_r_m", KeyKind::real, false, Constraint::positive, "", ""},
    {"power_l_w", KeyKind::real, true, Constraint::nonnegative, "", ""},
    {"power_r_w", KeyKind::real, true, Constraint::nonnegative, "", ""},
    {"power_p_w", KeyKind::real, true, Constraint::nonnegative, "", ""},
    {"delta_hz", KeyKind::real, true, Constraint::none, "", ""},
    {"detuning1_hz", KeyKind::real, true, Constraint::none, "", ""},
    {"detuning2_hz", KeyKind::real, true, Constraint::none, "", ""},
    {"tau_p_s", KeyKind::real, false, Constraint::positive, "", ""},
    {"tau_l_s", KeyKind::real, false, Constraint::positive, "", ""},
    {"tau_r_s", KeyKind::real, false, Constraint::positive, "", ""},
    {"t_write_s", KeyKind::real, false, Constraint::none, "0", ""},
    {"t_read_s", KeyKind::real, false, Constraint::none, "", ""},
    {"shape", KeyKind::text, false, Constraint::none, "gaussian", "gaussian|supergaussian"},
    {"beta", KeyKind::integer, false, Constraint::even_ge2, "", ""},
    {"dt_s", KeyKind::real, false, Constraint::positive, "", ""},
    {"full_dt_s", KeyKind::real, false, Constraint::positive, "", ""},
    {"record_every", KeyKind::integer, false, Constraint::nonnegative, "0", ""},
    {"sweep_start_hz", KeyKind::real, false, Constraint::none, "", ""},
    {"sweep_stop_hz", KeyKind::real, false, Constraint::none, "", ""},
    {"sweep_points", KeyKind::integer, false, Constraint::at_least_one, "401", ""},
    {"detuning_case", KeyKind::text, false, Constraint::none, "config", "red|resonant|blue|config"},
    {"scan_key", KeyKind::text, false, Constraint::none, "", ""},
    {"scan_values", KeyKind::real_list, false, Constraint::none, "", ""},
    {"scan_protocol", KeyKind::text, false, Constraint::none, "memory", "memory|transduce"},
    {"seed", KeyKind::integer, false, Constraint::nonnegative, "1", ""},
    {"verify_draws", KeyKind::integer, false, Constraint::at_least_one, "200", ""},
    {"max_transient_gain", KeyKind::real, false, Constraint::positive, "5", ""},
}};

/// t_read - t_write when t_read_s is not given.
inline constexpr double default_read_delay = 1.5e-6;

inline const KeySpec* find_key(std::string_view name) {
    for (const auto& k : config_keys)
        if (k.name == name) return &k;
    return nullptr;
}

namespace detail {

inline std::string_view trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

inline std::optional<double> parse_double(std::string_view s) {
    s = trim(s);
    if (!s.empty() && s.front() == '+') s.remove_prefix(1);
    if (s.empty()) return std::nullopt;
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(v)) return std::nullopt;
    return v;
}

inline std::optional<long long> parse_integer(std::string_view s) {
    s = trim(s);
    if (!s.empty() && s.front() == '+') s.remove_prefix(1);
    if (s.empty()) return std::nullopt;
    long long v = 0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size()) return std::nullopt;
    return v;
}

inline std::size_t edit_distance(std::string_view a, std::string_view b) {
    std::vector<std::size_t> prev(b.size() + 1), cur(b.size() + 1);
    for (std::size_t j = 0; j <= b.size(); ++j) prev[j] = j;
    for (std::size_t i = 1; i <= a.size(); ++i) {
        cur[0] = i;
        for (std::size_t j = 1; j <= b.size(); ++j)
            cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + (a[i - 1] == b[j - 1] ? 0u : 1u)});
        prev.swap(cur);
    }
    return prev[b.size()];
}

inline constexpr std::array<std::string_view, 5> unit_suffixes{"_hz", "_s", "_w", "_m", "_kg"};

inline std::pair<std::string_view, std::string_view> split_unit(std::string_view key) {
    for (auto suf : unit_suffixes)
        if (key.size() > suf.size() && key.substr(key.size() - suf.size()) == suf)
            return {key.substr(0, key.size() - suf.size()), suf};
    return {key, {}};
}

inline std::string format_exact(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

} // namespace detail

/// Error for an unknown key: unit-suffix mismatch if the stem matches a known
/// key, otherwise the closest known key is suggested.
inline ConfigError unknown_key_error(std::string_view key, int line) {
    const auto [stem, suffix] = detail::split_unit(key);
    if (!suffix.empty()) {
        for (const auto& k : config_keys) {
            const auto [kstem, ksuffix] = detail::split_unit(k.name);
            if (kstem == stem && !ksuffix.empty())
                return ConfigError("unit suffix mismatch for '" + std::string(key) + "': expected '" +
                                       std::string(k.name) + "'",
                                   line);
        }
    }
    std::string_view best;
    std::size_t best_d = 1000;
    for (const auto& k : config_keys) {
        const auto dist = detail::edit_distance(key, k.name);
        if (dist < best_d) {
            best_d = dist;
            best = k.name;
        }
    }
    std::string msg = "unknown key '" + std::string(key) + "'";
    if (best_d <= 3) msg += "; did you mean '" + std::string(best) + "'?";
    return ConfigError(msg, line);
}

class RunConfig {
public:
    struct Entry {
        std::string value;
        int line = 0; // 0: override or default
    };

    static RunConfig parse(std::string_view text) {
        RunConfig cfg;
        int line_no = 0;
        std::size_t pos = 0;
        while (pos <= text.size()) {
            const auto end = text.find('\n', pos);
            std::string_view line = text.substr(pos, end == std::string_view::npos ? text.size() - pos : end - pos);
            ++line_no;
            pos = end == std::string_view::npos ? text.size() + 1 : end + 1;
            if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
            line = detail::trim(line);
            if (line.empty()) continue;
            const auto eq = line.find('=');
            if (eq == std::string_view::npos) throw ConfigError("expected 'key = value'", line_no);
            cfg.assign(detail::trim(line.substr(0, eq)), detail::trim(line.substr(eq + 1)), line_no, false);
        }
        cfg.last_line_ = line_no;
        return cfg;
    }

    static RunConfig load(const std::string& path) {
        std::ifstream in(path, std::ios::binary);
        if (!in) throw ConfigError("cannot read config file '" + path + "'", 0);
        std::ostringstream ss;
        ss << in.rdbuf();
        return parse(ss.str());
    }

    /// `key=value` from the command line; replaces any file value.
    void apply_override(std::string_view kv) {
        const auto eq = kv.find('=');
        if (eq == std::string_view::npos) throw ConfigError("override must be key=value: '" + std::string(kv) + "'", 0);
        assign(detail::trim(kv.substr(0, eq)), detail::trim(kv.substr(eq + 1)), 0, true);
    }

    void set(std::string_view key, std::string value) { assign(key, value, 0, true); }
    void set_number(std::string_view key, double v) { set(key, detail::format_exact(v)); }
    void set_default(std::string_view key, std::string value) {
        if (!has(key)) set(key, std::move(value));
    }
    void erase(std::string_view key) { entries_.erase(std::string(key)); }

    bool has(std::string_view key) const { return entries_.count(std::string(key)) != 0; }

    double number(std::string_view key) const {
        const auto& e = entry(key);
        return *detail::parse_double(e.value);
    }
    std::optional<double> maybe_number(std::string_view key) const {
        if (!has(key)) return std::nullopt;
        return number(key);
    }
    long long integer(std::string_view key) const { return *detail::parse_integer(entry(key).value); }
    const std::string& text(std::string_view key) const { return entry(key).value; }
    std::vector<double> numbers(std::string_view key) const {
        std::vector<double> out;
        std::string_view s = entry(key).value;
        while (!s.empty()) {
            const auto comma = s.find(',');
            out.push_back(*detail::parse_double(s.substr(0, comma)));
            if (comma == std::string_view::npos) break;
            s.remove_prefix(comma + 1);
        }
        return out;
    }

    const Entry& entry(std::string_view key) const {
        const auto it = entries_.find(std::string(key));
        if (it == entries_.end()) throw ConfigError("missing key '" + std::string(key) + "'", 0);
        return it->second;
    }

    /// Required keys present, fixed defaults applied, cross-key rules checked.
    void validate() {
        for (const auto& k : config_keys) {
            if (k.required && !has(k.name))
                throw ConfigError("missing required key '" + std::string(k.name) + "'", last_line_);
            if (!k.fixed_default.empty()) set_default(k.name, std::string(k.fixed_default));
        }
        const bool has_tl = has("tau_l_s");
        const bool has_tp = has("tau_p_s");
        if (has_tl != has_tp)
            throw ConfigError("pulsed drives need both tau_l_s and tau_p_s", line_of(has_tl ? "tau_l_s" : "tau_p_s"));
        const bool super = text("shape") == "supergaussian";
        set_default("beta", super ? "4" : "2");
        if (!super && integer("beta") != 2) throw ConfigError("shape = gaussian requires beta = 2", line_of("beta"));
        set_default("lambda_r_m", text("lambda_l_m"));
        if (has_tl) {
            set_default("t_read_s", detail::format_exact(number("t_write_s") + default_read_delay));
            set_default("tau_r_s", text("tau_l_s"));
        }
        if (has("scan_key")) {
            const auto* k = find_key(text("scan_key"));
            if (!k || k->kind != KeyKind::real || k->name.substr(0, 5) == "scan_")
                throw ConfigError("scan_key must name a numeric config key", line_of("scan_key"));
        }
    }

    bool pulsed() const { return has("tau_l_s"); }

    double omega_L() const { return angular_frequency_from_wavelength(number("lambda_l_m")); }
    double omega_R() const {
        return angular_frequency_from_wavelength(has("lambda_r_m") ? number("lambda_r_m") : number("lambda_l_m"));
    }

    SystemParams system() const {
        SystemParams p;
        p.mass = number("mass_kg");
        p.omega_m = two_pi * number("omega_m_hz");
        p.gamma_m = two_pi * number("gamma_m_hz");
        p.kappa1 = two_pi * number("kappa1_hz");
        p.kappa2 = two_pi * number("kappa2_hz");
        p.g1 = two_pi * number("g1_hz");
        p.g2 = two_pi * number("g2_hz");
        p.omega1 = omega_L() + two_pi * number("detuning1_hz");
        p.omega2 = omega_R() + two_pi * number("detuning2_hz");
        p.validate();
        return p;
    }

    DriveConfig drives() const {
        auto d = DriveConfig::make(omega_L(), omega_R(), two_pi * number("delta_hz"), number("power_l_w"),
                                   number("power_r_w"), number("power_p_w"));
        if (pulsed()) {
            const int beta = static_cast<int>(integer("beta"));
            const double tw = number("t_write_s");
            const double tr = number("t_read_s");
            d.pulse_L = PulseShape{tw, tr, number("tau_l_s"), beta};
            d.pulse_R = PulseShape{tr, std::nullopt, number("tau_r_s"), beta};
            d.pulse_p = PulseShape{tw, std::nullopt, number("tau_p_s"), 2};
        }
        d.validate();
        return d;
    }

    /// Every key, registry order, one `key = value` per line.
    std::string resolved_text() const {
        std::string out = "# resolved configuration\n";
        for (const auto& k : config_keys) {
            const auto it = entries_.find(std::string(k.name));
            if (it == entries_.end()) continue;
            out += std::string(k.name) + " = " + it->second.value + "\n";
        }
        return out;
    }

    int line_of(std::string_view key) const {
        const auto it = entries_.find(std::string(key));
        return it == entries_.end() ? 0 : it->second.line;
    }

private:
    void assign(std::string_view key, std::string_view value, int line, bool replace) {
        const KeySpec* spec = find_key(key);
        if (!spec) throw unknown_key_error(key, line);
        if (!replace && has(key)) throw ConfigError("duplicate key '" + std::string(key) + "'", line);
        check_value(*spec, value, line);
        entries_[std::string(key)] = Entry{std::string(value), line};
    }

    static void check_value(const KeySpec& k, std::string_view value, int line) {
        const std::string name(k.name);
        auto bad = [&](const std::string& why) { return ConfigError(name + ": " + why, line); };
        auto check_number = [&](double v) {
            switch (k.constraint) {
            case Constraint::positive:
                if (!(v > 0.0)) throw bad("must be > 0");
                break;
            case Constraint::nonnegative:
                if (v < 0.0) throw bad("must be >= 0");
                break;
            case Constraint::even_ge2:
                if (v < 2.0 || std::fmod(v, 2.0) != 0.0) throw bad("must be an even integer >= 2");
                break;
            case Constraint::at_least_one:
                if (v < 1.0) throw bad("must be >= 1");
                break;
            case Constraint::none: break;
            }
        };
        switch (k.kind) {
        case KeyKind::real: {
            const auto v = detail::parse_double(value);
            if (!v) throw bad("cannot parse number '" + std::string(value) + "'");
            check_number(*v);
            break;
        }
        case KeyKind::integer: {
            const auto v = detail::parse_integer(value);
            if (!v) throw bad("cannot parse integer '" + std::string(value) + "'");
            check_number(static_cast<double>(*v));
            break;
        }
        case KeyKind::text: {
            if (value.empty()) throw bad("empty value");
            if (!k.allowed.empty()) {
                std::string_view rest = k.allowed;
                bool ok = false;
                while (!rest.empty()) {
                    const auto bar = rest.find('|');
                    if (rest.substr(0, bar) == value) ok = true;
                    if (bar == std::string_view::npos) break;
                    rest.remove_prefix(bar + 1);
                }
                if (!ok) throw bad("must be one of " + std::string(k.allowed));
            }
            break;
        }
        case KeyKind::real_list: {
            std::string_view s = value;
            if (s.empty()) throw bad("empty list");
            while (true) {
                const auto comma = s.find(',');
                if (!detail::parse_double(s.substr(0, comma)))
                    throw bad("cannot parse list entry '" + std::string(detail::trim(s.substr(0, comma))) + "'");
                if (comma == std::string_view::npos) break;
                s.remove_prefix(comma + 1);
            }
            break;
        }
        }
    }

    std::map<std::string, Entry> entries_;
    int last_line_ = 0;
};

} // namespace omsim
