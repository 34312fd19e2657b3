#pragma once

// Probabilistic LoS/NLoS air-to-ground link model. Path loss is free-space
// loss plus a mean excess loss per propagation group; the LoS probability is
// a logistic function of the elevation angle in degrees.

#include <cmath>
#include <numbers>
#include <string>

#include "pap/common.hpp"
#include "pap/geometry.hpp"

namespace pap {

inline double dbm_to_watts(double dbm) { return std::pow(10.0, (dbm - 30.0) / 10.0); }

/// Thermal noise power over `bandwidth_hz` for a spectral density given in dBm/Hz.
inline double noise_power_watts(double density_dbm_per_hz, double bandwidth_hz)
{
    return std::pow(10.0, (density_dbm_per_hz + 10.0 * std::log10(bandwidth_hz) - 30.0) / 10.0);
}

struct RadioConfig {
    double carrier_hz = 5.8e9;
    double light_speed = 3.0e8;
    // Per-node bandwidth; TDMA serves one node at a time over the full band.
    double bandwidth_hz = 40.0e6;
    double tx_power_w = dbm_to_watts(23.0);
    double noise_power_w = noise_power_watts(-174.0, 40.0e6);

    void validate() const
    {
        require_positive(carrier_hz, "carrier frequency");
        require_positive(light_speed, "speed of light");
        require_positive(bandwidth_hz, "bandwidth");
        require_positive(tx_power_w, "transmit power");
        require_positive(noise_power_w, "noise power");
    }
};

struct EnvironmentProfile {
    std::string name;
    double a = 0.0;
    double b = 0.0;
    double eta_los = 0.0;
    double eta_nlos = 0.0;

    static EnvironmentProfile suburban() { return {"suburban", 4.88, 0.43, 0.2, 24.0}; }
    static EnvironmentProfile urban() { return {"urban", 9.61, 0.16, 1.2, 23.0}; }
    static EnvironmentProfile dense_urban() { return {"dense-urban", 12.08, 0.11, 1.8, 26.0}; }

    static EnvironmentProfile from_name(const std::string& name)
    {
        if (name == "suburban")
            return suburban();
        if (name == "urban")
            return urban();
        if (name == "dense-urban")
            return dense_urban();
        throw contract_error("unknown environment profile '" + name + "' (expected suburban, urban or dense-urban)");
    }

    void validate() const
    {
        require(a > 0.0 && b > 0.0, "profile parameters a and b must be positive");
        require(eta_los >= 0.0 && eta_nlos >= eta_los, "profile needs eta_nlos >= eta_los >= 0");
    }
};

inline double path_loss_db(double d3, const RadioConfig& cfg, double eta_db)
{
    if (!(d3 > 0.0))
        throw model_domain_error("path loss needs a positive 3D distance");
    return 20.0 * std::log10(d3) + 20.0 * std::log10(cfg.carrier_hz) +
           20.0 * std::log10(4.0 * std::numbers::pi / cfg.light_speed) + eta_db;
}

inline double los_probability(double elevation_deg, const EnvironmentProfile& env)
{
    return 1.0 / (1.0 + env.a * std::exp(-env.b * (elevation_deg - env.a)));
}

/// Elevation angle of the PAP seen from the ground node, in degrees; 90 when overhead.
inline double elevation_deg(const Position3& pap, const Position3& gn)
{
    const double d2 = horizontal_distance(pap, gn);
    if (d2 == 0.0)
        return 90.0;
    return std::atan(pap.z / d2) * 180.0 / std::numbers::pi;
}

/// Shannon spectral efficiency for a given path loss.
inline double spectral_efficiency(double loss_db, const RadioConfig& cfg)
{
    const double snr = cfg.tx_power_w / (cfg.noise_power_w * std::pow(10.0, loss_db / 10.0));
    return std::log2(1.0 + snr);
}

struct LinkBudget {
    double los_probability = 0.0;
    double se_los = 0.0;
    double se_nlos = 0.0;
    double expected_se = 0.0;
};

inline LinkBudget link_budget(const Position3& pap, const Position3& gn, const RadioConfig& cfg,
                              const EnvironmentProfile& env)
{
    require(pap.z > 0.0, "PAP altitude must be positive");
    const double d3 = std::hypot(horizontal_distance(pap, gn), pap.z);
    LinkBudget lb;
    lb.los_probability = los_probability(elevation_deg(pap, gn), env);
    lb.se_los = spectral_efficiency(path_loss_db(d3, cfg, env.eta_los), cfg);
    lb.se_nlos = spectral_efficiency(path_loss_db(d3, cfg, env.eta_nlos), cfg);
    lb.expected_se = lb.los_probability * lb.se_los + (1.0 - lb.los_probability) * lb.se_nlos;
    return lb;
}

/// Expected spectral efficiency (bits/s/Hz) averaged over the LoS/NLoS groups.
inline double expected_spectral_efficiency(const Position3& pap, const Position3& gn, const RadioConfig& cfg,
                                           const EnvironmentProfile& env)
{
    return link_budget(pap, gn, cfg, env).expected_se;
}

} // namespace pap
