#pragma once

#include <cmath>
#include <numbers>

#include "pap/common.hpp"
#include "pap/geometry.hpp"

namespace pap {

/// Multi-rotor airframe. Defaults describe a 2.5 kg quadrotor.
struct UavParams {
    double weight_n = 24.5;
    int rotors = 4;
    double tip_speed = 102.0;
    double fuselage_area = 0.038;
    double drag_coefficient = 0.9;
    double rotor_area = 0.06;
    double profile_drag = 0.002;
    double solidity = 0.05;
    double sea_level_density = 1.225;

    void validate() const
    {
        require_positive(weight_n, "weight");
        require(rotors > 0, "rotor count must be positive");
        require_positive(tip_speed, "tip speed");
        require_positive(fuselage_area, "fuselage area");
        require_positive(drag_coefficient, "drag coefficient");
        require_positive(rotor_area, "rotor disc area");
        require_positive(profile_drag, "profile drag coefficient");
        require_positive(solidity, "rotor solidity");
        require_positive(sea_level_density, "sea-level density");
    }
};

// Mode boundaries: below these the command counts as hover / axial.
inline constexpr double kHoverSpeedTolerance = 1e-9;
inline constexpr double kAxialAngleTolerance = 1e-9;

/// Troposphere density model scaled to the sea-level density.
inline double air_density(double z, const UavParams& p)
{
    require(z >= 0.0 && z < 44330.0, "altitude outside the density model range");
    return p.sea_level_density * std::pow(1.0 - 2.2558e-5 * z, 4.2577);
}

/// Profile power of a single rotor at zero advance speed.
inline double rotor_profile_power(double z, const UavParams& p)
{
    return p.profile_drag / 8.0 * air_density(z, p) * p.solidity * p.rotor_area * std::pow(p.tip_speed, 3);
}

/// Blade profile power summed over all rotors.
inline double blade_profile_power(double z, const UavParams& p)
{
    return p.rotors * rotor_profile_power(z, p);
}

inline double forward_power(double v, double elevation, double z, const UavParams& p)
{
    if (!(v > 0.0))
        throw contract_error("forward_power needs a positive speed; use hover_power");
    if (std::abs(elevation) < kAxialAngleTolerance)
        throw contract_error("forward_power called for an axial climb; use vertical_power");
    const double rho = air_density(z, p);
    const double nr = p.rotors;
    const double blade = blade_profile_power(z, p) * (1.0 + 3.0 * v * v / square(p.tip_speed));
    const double fuselage = 0.5 * p.drag_coefficient * p.fuselage_area * rho * v * v * v;
    const double hover_term = square(p.weight_n) / (4.0 * nr * nr * rho * rho * square(p.rotor_area));
    const double induced =
        p.weight_n * (std::sqrt(std::sqrt(hover_term + std::pow(v, 4) / 4.0) - v * v / 2.0) + std::cos(elevation));
    return blade + fuselage + induced;
}

inline double hover_power(double z, const UavParams& p)
{
    return blade_profile_power(z, p) +
           std::pow(p.weight_n, 1.5) / std::sqrt(4.0 * p.rotors * air_density(z, p) * p.rotor_area);
}

/// Axial climb power; also used for axial descent with the speed magnitude.
inline double vertical_power(double v, double z, const UavParams& p)
{
    require(v > 0.0, "vertical_power needs a positive speed");
    const double rho = air_density(z, p);
    return p.weight_n / 2.0 * (v + std::sqrt(v * v + 2.0 * p.weight_n / (p.rotors * rho * p.rotor_area))) +
           blade_profile_power(z, p);
}

enum class FlightMode { hover, axial, forward };

inline FlightMode flight_mode(const VelocityVector& v)
{
    if (std::abs(v.speed) < kHoverSpeedTolerance)
        return FlightMode::hover;
    if (std::abs(v.elevation) < kAxialAngleTolerance || std::abs(v.elevation - std::numbers::pi) < kAxialAngleTolerance)
        return FlightMode::axial;
    return FlightMode::forward;
}

/// Propulsion power for one slot flown with velocity `v` starting at altitude `z`.
inline double total_power(const VelocityVector& v, double z, const UavParams& p)
{
    switch (flight_mode(v)) {
    case FlightMode::hover:
        return hover_power(z, p);
    case FlightMode::axial:
        return vertical_power(std::abs(v.speed), z, p);
    case FlightMode::forward:
        break;
    }
    return forward_power(v.speed, v.elevation, z, p);
}

/// Level-flight speed with the least power, by grid search over (0, v_max].
inline double min_power_speed(double z, double v_max, const UavParams& p, int grid = 24000)
{
    double best_v = v_max;
    double best_p = forward_power(v_max, std::numbers::pi / 2, z, p);
    for (int k = 1; k < grid; ++k) {
        const double v = v_max * k / grid;
        const double pw = forward_power(v, std::numbers::pi / 2, z, p);
        if (pw < best_p) {
            best_p = pw;
            best_v = v;
        }
    }
    return best_v;
}

} // namespace pap
