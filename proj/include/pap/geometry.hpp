#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <optional>
#include <vector>

#include "pap/common.hpp"

namespace pap {

/// Cartesian position in meters; z is altitude above ground.
struct Position3 {
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;

    friend constexpr Position3 operator+(const Position3& a, const Position3& b) { return {a.x + b.x, a.y + b.y, a.z + b.z}; }
    friend constexpr Position3 operator-(const Position3& a, const Position3& b) { return {a.x - b.x, a.y - b.y, a.z - b.z}; }
    friend constexpr Position3 operator*(double k, const Position3& a) { return {k * a.x, k * a.y, k * a.z}; }
    friend constexpr bool operator==(const Position3&, const Position3&) = default;
};

inline double norm(const Position3& p) { return std::sqrt(p.x * p.x + p.y * p.y + p.z * p.z); }
inline double distance(const Position3& a, const Position3& b) { return norm(a - b); }
inline double horizontal_distance(const Position3& a, const Position3& b) { return std::hypot(a.x - b.x, a.y - b.y); }
inline Position3 midpoint(const Position3& a, const Position3& b) { return 0.5 * (a + b); }

/// Spherical motion command. Elevation is measured from the +z axis:
/// 0 is an axial climb, pi/2 level flight, pi an axial descent.
struct VelocityVector {
    double speed = 0.0;
    double azimuth = 0.0;
    double elevation = std::numbers::pi / 2;

    friend constexpr bool operator==(const VelocityVector&, const VelocityVector&) = default;
};

/// Displacement produced by flying `v` for `dt` seconds.
inline Position3 displacement(const VelocityVector& v, double dt)
{
    const double step = dt * v.speed;
    return {step * std::sin(v.elevation) * std::cos(v.azimuth),
            step * std::sin(v.elevation) * std::sin(v.azimuth),
            step * std::cos(v.elevation)};
}

/// Velocity that carries `from` to `to` in exactly `dt` seconds.
inline VelocityVector velocity_between(const Position3& from, const Position3& to, double dt)
{
    const Position3 d = to - from;
    const double len = norm(d);
    if (len == 0.0)
        return {};
    return {len / dt, std::atan2(d.y, d.x), std::atan2(std::hypot(d.x, d.y), d.z)};
}

struct MotionConfig {
    double delta_t = 1.0;
    double v_max = 24.0;
    double z_min = 20.0;
    double z_max = 100.0;
    Position3 u_init{0.0, 0.0, 20.0};
    Position3 u_final{1000.0, 1000.0, 20.0};
    // Distance below which path loss is treated as stationary; only asserted when set.
    std::optional<double> stationarity_distance;

    void validate() const
    {
        require_positive(delta_t, "delta_t");
        require_positive(v_max, "v_max");
        require(z_min > 0.0 && z_min <= z_max, "altitude bounds need 0 < z_min <= z_max");
        require(std::isfinite(z_max), "z_max must be finite");
        if (stationarity_distance)
            require(delta_t * v_max <= *stationarity_distance, "delta_t * v_max exceeds the stationarity distance");
    }

    double max_step() const { return delta_t * v_max; }
};

using Action = std::array<double, 3>;

/// Maps a normalized action cube point to a velocity; the speed scale is v_max / 3.
inline VelocityVector action_to_velocity(const Action& a, const MotionConfig& cfg)
{
    for (double c : a)
        require(std::isfinite(c) && c >= -1.0 && c <= 1.0, "action components must lie in [-1, 1]");
    const double horizontal = std::hypot(a[0], a[1]);
    const double magnitude = std::sqrt(horizontal * horizontal + a[2] * a[2]);
    if (magnitude == 0.0)
        return {};
    return {magnitude * cfg.v_max / 3.0, std::atan2(a[1], a[0]), std::atan2(horizontal, a[2])};
}

/// Moves `p` by one slot and clamps altitude to [z_min, z_max].
inline Position3 apply_motion(const Position3& p, const VelocityVector& v, const MotionConfig& cfg)
{
    require(v.speed >= 0.0 && std::isfinite(v.speed), "speed must be nonnegative");
    Position3 next = p + displacement(v, cfg.delta_t);
    next.z = std::clamp(next.z, cfg.z_min, cfg.z_max);
    return next;
}

inline double min_return_time(const Position3& p, const MotionConfig& cfg)
{
    return distance(p, cfg.u_final) / cfg.v_max;
}

/// One slot of a straight-line transit.
struct PathSlot {
    VelocityVector velocity;
    Position3 start;
    Position3 end;
};

/// Slices the segment from -> to into dt-long slots flown at `speed`; the last
/// slot covers the remainder at reduced speed and ends exactly on `to`.
inline std::vector<PathSlot> straight_path(const Position3& from, const Position3& to, double speed, double dt)
{
    require_positive(speed, "transit speed");
    std::vector<PathSlot> slots;
    const double total = distance(from, to);
    if (total == 0.0)
        return slots;
    const double step = speed * dt;
    const auto full = static_cast<std::size_t>(std::floor(total / step));
    const Position3 dir = (1.0 / total) * (to - from);
    const VelocityVector cruise = velocity_between(from, from + step * dir, dt);
    Position3 cur = from;
    for (std::size_t k = 0; k < full; ++k) {
        // Positions are parametrized from `from` to keep rounding from accumulating.
        Position3 next = (k + 1 == full && total - full * step <= 1e-9 * total)
                             ? to
                             : from + (static_cast<double>(k + 1) * step) * dir;
        slots.push_back({cruise, cur, next});
        cur = next;
    }
    if (!(cur == to)) {
        slots.push_back({velocity_between(cur, to, dt), cur, to});
    }
    return slots;
}

} // namespace pap
