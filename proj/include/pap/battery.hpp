#pragma once

// Peukert-effect discharge of a series Li-ion pack.
//
// Each slot: the draw current follows from the slot power and the present
// terminal voltage; the remaining discharge time is re-evaluated for that
// current (rated-capacity law on the first slot, incremental Peukert law
// afterwards); then the terminal voltage drops along a current-dependent
// slope fitted to datasheet points. The pack dies when the remaining time
// reaches the floor or the voltage falls below cutoff.

#include <cmath>
#include <cstddef>
#include <fstream>
#include <limits>
#include <span>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "pap/common.hpp"

namespace pap {

struct BatteryConfig {
    double rated_capacity_ah = 4.5; // per cell
    double rated_time_h = 3.0;
    double nominal_voltage = 3.7;
    double cutoff_voltage = 2.5;
    int cells = 6; // in series
    double peukert = 1.05;
    double slope_coeff = 0.2941;     // V/Ah at 1 A
    double slope_exponent = 0.06888;
    double min_remaining_time_s = 0.0;

    void validate() const
    {
        require_positive(rated_capacity_ah, "rated capacity");
        require_positive(rated_time_h, "rated discharge time");
        require_positive(nominal_voltage, "nominal voltage");
        require(cutoff_voltage < nominal_voltage, "cutoff voltage must be below nominal voltage");
        require(cells > 0, "cell count must be positive");
        require(peukert >= 1.0 && std::isfinite(peukert), "Peukert coefficient must be >= 1");
        require_positive(slope_coeff, "slope coefficient");
        require(std::isfinite(slope_exponent), "slope exponent must be finite");
        require(min_remaining_time_s >= 0.0, "remaining-time floor must be nonnegative");
    }

    /// Pack energy at nominal voltage and rated capacity, joules.
    double nominal_energy_j() const { return cells * nominal_voltage * rated_capacity_ah * 3600.0; }
};

enum class BatteryStatus { alive, time_exhausted, voltage_cutoff };

struct BatteryState {
    double voltage_v = 0.0;        // per-cell terminal voltage at the start of the next slot
    double remaining_time_h = 0.0; // discharge time left at the last slot's current
    double capacity_ah = 0.0;      // remaining_time_h * last_current_a once started
    double last_current_a = 0.0;
    double last_drain_ah = 0.0;    // charge drawn during the last slot, applied at the next one
    bool started = false;
    BatteryStatus status = BatteryStatus::alive;

    static BatteryState fresh(const BatteryConfig& cfg)
    {
        BatteryState s;
        s.voltage_v = cfg.nominal_voltage;
        s.remaining_time_h = cfg.rated_time_h;
        s.capacity_ah = cfg.rated_capacity_ah;
        return s;
    }

    bool alive() const { return status == BatteryStatus::alive; }
    double remaining_time_s() const { return remaining_time_h * 3600.0; }

    friend bool operator==(const BatteryState&, const BatteryState&) = default;
};

/// Terminal-voltage slope (V/Ah) as a power law of the draw current.
inline double discharge_slope(double current_a, const BatteryConfig& cfg)
{
    if (!(current_a > 0.0))
        throw model_domain_error("discharge slope needs a positive current");
    return cfg.slope_coeff * std::pow(current_a, cfg.slope_exponent);
}

inline double current_draw(double power_w, const BatteryState& state, const BatteryConfig& cfg)
{
    require(power_w >= 0.0 && std::isfinite(power_w), "power draw must be finite and nonnegative");
    if (!(state.voltage_v > 0.0))
        throw model_domain_error("battery is dead: terminal voltage is not positive");
    return power_w / (cfg.cells * state.voltage_v);
}

/// Discharge time of a fresh cell at constant current `i1` (Peukert's law).
inline double init_discharge_time(double i1, const BatteryConfig& cfg)
{
    require(i1 > 0.0, "initial current must be positive");
    return cfg.rated_time_h * std::pow(cfg.rated_capacity_ah / (i1 * cfg.rated_time_h), cfg.peukert);
}

/// Advances the pack through one slot drawing `power_w` for `dt_s` seconds.
inline BatteryState discharge_step(const BatteryState& state, double power_w, double dt_s, const BatteryConfig& cfg)
{
    require(state.alive(), "discharge_step on a dead battery");
    require_positive(dt_s, "slot length");
    const double i = current_draw(power_w, state, cfg);
    if (i == 0.0)
        return state;

    const double dt_h = dt_s / 3600.0;
    double t_h = 0.0;
    if (!state.started) {
        t_h = init_discharge_time(i, cfg);
    } else {
        const double residual = state.capacity_ah - state.last_drain_ah;
        const double base = residual / (i * state.remaining_time_h);
        t_h = base > 0.0 ? state.remaining_time_h * std::pow(base, cfg.peukert) : 0.0;
    }

    BatteryState next = state;
    next.started = true;
    next.remaining_time_h = t_h;
    next.last_current_a = i;
    next.capacity_ah = t_h * i;
    if (t_h * 3600.0 <= cfg.min_remaining_time_s) {
        next.status = BatteryStatus::time_exhausted;
        return next;
    }
    next.last_drain_ah = i * dt_h;
    next.voltage_v = state.voltage_v - discharge_slope(i, cfg) * i * dt_h;
    if (next.voltage_v < cfg.cutoff_voltage)
        next.status = BatteryStatus::voltage_cutoff;
    return next;
}

inline constexpr std::size_t kUnboundedSlots = 100'000'000;

/// Air-time (seconds) for a power profile indexed by 0-based slot, starting
/// from `start`. Stops early after `max_slots` slots and reports that horizon.
template <typename Profile>
double estimate_airtime(Profile&& power_profile, const BatteryConfig& cfg, double dt_s, const BatteryState& start,
                        std::size_t max_slots = kUnboundedSlots)
{
    if (!start.alive())
        return 0.0;
    BatteryState state = start;
    for (std::size_t m = 1; m <= max_slots; ++m) {
        const double p = power_profile(m - 1);
        require(std::isfinite(p) && p >= 0.0, "power profile must be finite and nonnegative");
        state = discharge_step(state, p, dt_s, cfg);
        if (state.status == BatteryStatus::time_exhausted)
            return static_cast<double>(m - 1) * dt_s;
        if (state.status == BatteryStatus::voltage_cutoff)
            return static_cast<double>(m) * dt_s;
    }
    return static_cast<double>(max_slots) * dt_s;
}

template <typename Profile>
double estimate_airtime(Profile&& power_profile, const BatteryConfig& cfg, double dt_s = 1.0)
{
    return estimate_airtime(std::forward<Profile>(power_profile), cfg, dt_s, BatteryState::fresh(cfg));
}

/// Energy/power estimate that ignores the Peukert effect, seconds.
inline double naive_airtime(double power_w, const BatteryConfig& cfg)
{
    require_positive(power_w, "power");
    return cfg.nominal_energy_j() / power_w;
}

/// True when the pack stays alive through every slot of `powers`.
inline bool sustains(const BatteryState& start, std::span<const double> powers, double dt_s, const BatteryConfig& cfg)
{
    BatteryState s = start;
    for (double p : powers) {
        if (!s.alive())
            return false;
        s = discharge_step(s, p, dt_s, cfg);
    }
    return s.alive();
}

struct SlopeFit {
    double coeff = 0.0;
    double exponent = 0.0;
};

/// Least-squares power-law fit slope = coeff * current^exponent in log-log space.
inline SlopeFit fit_discharge_slope(std::span<const std::pair<double, double>> points)
{
    require(points.size() >= 2, "slope fit needs at least two points");
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (auto [i, s] : points) {
        if (!(i > 0.0) || !(s > 0.0))
            throw model_domain_error("slope fit points must be positive");
        const double x = std::log(i), y = std::log(s);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    const double n = static_cast<double>(points.size());
    const double den = n * sxx - sx * sx;
    if (!(std::abs(den) > 0.0))
        throw model_domain_error("slope fit needs at least two distinct currents");
    const double exponent = (n * sxy - sx * sy) / den;
    return {std::exp((sy - exponent * sx) / n), exponent};
}

/// Reads "current slope" pairs, one per line; '#' starts a comment.
inline std::vector<std::pair<double, double>> read_slope_points(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw std::runtime_error("cannot open slope data file '" + path + "'");
    std::vector<std::pair<double, double>> pts;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (auto hash = line.find('#'); hash != std::string::npos)
            line.erase(hash);
        for (char& c : line)
            if (c == ',' || c == ';' || c == '\t')
                c = ' ';
        std::istringstream ls(line);
        double i = 0, s = 0;
        if (!(ls >> i))
            continue;
        if (!(ls >> s))
            throw std::runtime_error(path + ":" + std::to_string(lineno) + ": expected two numeric columns");
        pts.emplace_back(i, s);
    }
    return pts;
}

} // namespace pap
