#pragma once

#include <complex>
#include <numbers>

namespace omsim {

using cplx = std::complex<double>;

inline constexpr double hbar = 1.0545718e-34;          // J s
inline constexpr double speed_of_light = 2.99792458e8; // m / s
inline constexpr double two_pi = 2.0 * std::numbers::pi;
inline constexpr cplx I{0.0, 1.0};

} // namespace omsim
