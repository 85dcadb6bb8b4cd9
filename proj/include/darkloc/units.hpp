// units.hpp — frequency/length conversions used at the I/O boundary
#pragma once

#include <numbers>

namespace darkloc::units {

inline constexpr double two_pi = 2.0 * std::numbers::pi;

// internal unit is angular frequency (rad/s); files talk f in GHz
constexpr double ghz_to_rad(double f_ghz) noexcept { return two_pi * 1e9 * f_ghz; }
constexpr double rad_to_ghz(double omega) noexcept { return omega / (two_pi * 1e9); }
constexpr double mhz_to_rad(double f_mhz) noexcept { return two_pi * 1e6 * f_mhz; }
constexpr double rad_to_mhz(double omega) noexcept { return omega / (two_pi * 1e6); }
constexpr double khz_to_rad(double f_khz) noexcept { return two_pi * 1e3 * f_khz; }
constexpr double rad_to_khz(double omega) noexcept { return omega / (two_pi * 1e3); }

constexpr double um_to_m(double x_um) noexcept { return 1e-6 * x_um; }
constexpr double m_to_um(double x_m) noexcept { return 1e6 * x_m; }

} // namespace darkloc::units
