#pragma once

#include <cmath>
#include <string>

#include "omsim/omsim.hpp"

namespace omsim::testing {

/// Relative difference, safe at zero.
inline double rel(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

inline const std::string minimal_config = R"(# reference device
mass_kg      = 20e-12
omega_m_hz   = 51.8e6
gamma_m_hz   = 41e3
kappa1_hz    = 1.5e6
kappa2_hz    = 1.5e6
g1_hz        = 1.55e3
g2_hz        = 1.55e3
lambda_l_m   = 775e-9
power_l_w    = 1e-3
power_r_w    = 0
power_p_w    = 1e-7
delta_hz     = 51.8e6
detuning1_hz = 51.8e6
detuning2_hz = 51.8e6
)";

inline std::string config_file(const std::string& name) { return std::string(OMSIM_CONFIG_DIR) + "/" + name; }

inline DriveConfig pulsed(DriveConfig d, double tau_L, double tau_p, double t_read, int beta = 2) {
    d.pulse_L = PulseShape{0.0, t_read, tau_L, beta};
    d.pulse_p = PulseShape{0.0, std::nullopt, tau_p, 2};
    return d;
}

} // namespace omsim::testing
