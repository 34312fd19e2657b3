#pragma once

// Run configuration: presets, INI files and the snapshot written next to outputs.

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "pap/common.hpp"
#include "pap/env.hpp"
#include "pap/td3.hpp"

namespace pap {

struct config_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class RunMode { train_offline, train_online, eval, baseline };

inline std::string to_string(RunMode m)
{
    switch (m) {
    case RunMode::train_offline:
        return "train-offline";
    case RunMode::train_online:
        return "train-online";
    case RunMode::eval:
        return "eval";
    case RunMode::baseline:
        return "baseline";
    }
    return "?";
}

inline RunMode parse_mode(const std::string& s)
{
    for (RunMode m : {RunMode::train_offline, RunMode::train_online, RunMode::eval, RunMode::baseline})
        if (to_string(m) == s)
            return m;
    throw config_error("unknown mode '" + s + "' (expected train-offline, train-online, eval or baseline)");
}

struct RunConfig {
    RunMode mode = RunMode::train_offline;
    std::string scale = "paper";
    Scenario scenario;
    std::size_t grid_per_side = 4; // fixed layout for offline training and eval
    Td3Config td3;
    std::size_t episodes = 1000;
    std::size_t eval_every = 10;
    std::size_t n_eval = 16;
    std::size_t n_seed = 16;
    std::size_t n_test = 512;
    std::uint64_t seed = 1;
    std::string out_dir = "out";
    std::string checkpoint; // eval mode: actor to load

    void validate() const
    {
        try {
            scenario.validate();
            td3.validate();
        } catch (const std::invalid_argument& e) {
            throw config_error(e.what());
        }
        if (grid_per_side == 0)
            throw config_error("grid_per_side must be positive");
        if (eval_every == 0 || n_eval == 0 || n_seed == 0 || n_test == 0)
            throw config_error("eval_every, n_eval, n_seed and n_test must be positive");
        if (scale != "paper" && scale != "desk")
            throw config_error("scale must be 'paper' or 'desk'");
    }
};

/// Full-size setting: 1000 m square, 16 nodes on a 4x4 grid, Table III networks.
inline RunConfig paper_preset(RunMode mode = RunMode::train_offline)
{
    RunConfig c;
    c.mode = mode;
    c.scale = "paper";
    c.grid_per_side = 4;
    c.scenario.area_side = 1000.0;
    c.scenario.motion.u_final = {1000.0, 1000.0, 20.0};
    c.scenario.ground_nodes = grid_layout(4, 1000.0);
    c.episodes = 1000;
    c.n_seed = mode == RunMode::train_online ? 8 : 16;
    return c;
}

/// Small setting for quick experiments: 200 m square, 2x2 nodes, a 0.3 Ah
/// pack so episodes last roughly 150 slots, and narrow networks.
inline RunConfig desk_preset(RunMode mode = RunMode::train_offline)
{
    RunConfig c;
    c.mode = mode;
    c.scale = "desk";
    c.grid_per_side = 2;
    c.scenario.area_side = 200.0;
    c.scenario.motion.u_final = {200.0, 200.0, 20.0};
    c.scenario.ground_nodes = grid_layout(2, 200.0);
    c.scenario.battery.rated_capacity_ah = 0.3;
    // About 150 slots per episode, so kappa_f = 150 still keeps the summed
    // position rewards at or below the terminal reward.
    c.scenario.kappa_f = 150.0;
    c.td3.hidden = {32, 32};
    c.td3.tau = 0.02;
    c.td3.expl_noise_sigma = 0.2;
    c.td3.reward_scale = 1e-3;
    c.td3.warmup_steps = 2000;
    c.td3.updates_per_step = 8;
    c.td3.buffer_capacity = 50'000;
    c.episodes = 200;
    c.n_eval = 8;
    c.n_seed = 3;
    c.n_test = 64;
    return c;
}

inline RunConfig preset(const std::string& scale, RunMode mode)
{
    if (scale == "paper")
        return paper_preset(mode);
    if (scale == "desk")
        return desk_preset(mode);
    throw config_error("scale must be 'paper' or 'desk'");
}

namespace detail {

inline std::string join_sizes(const std::vector<std::size_t>& v)
{
    std::ostringstream os;
    for (std::size_t i = 0; i < v.size(); ++i)
        os << (i ? "," : "") << v[i];
    return os.str();
}

inline std::vector<std::size_t> parse_sizes(const std::string& s)
{
    std::vector<std::size_t> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item.find_first_not_of(" \t") == std::string::npos)
            continue;
        try {
            out.push_back(std::stoul(item));
        } catch (const std::exception&) {
            throw config_error("bad layer width '" + item + "'");
        }
    }
    return out;
}

inline std::string fmt(double v)
{
    std::ostringstream os;
    os.precision(std::numeric_limits<double>::max_digits10);
    os << v;
    return os.str();
}

// Visits every configurable key with a uniform getter/setter pair so the
// reader and the snapshot writer cannot drift apart.
template <typename Visitor>
void visit_keys(RunConfig& c, Visitor&& v)
{
    auto& s = c.scenario;
    v.num("scenario.area_side", s.area_side);
    v.num("scenario.kappa_f", s.kappa_f);
    v.num("scenario.reward_fee_unit", s.reward_fee_unit);
    v.flag("scenario.serve_during_return", s.serve_during_return);
    v.count("scenario.grid_per_side", c.grid_per_side);
    v.num("profile.a", s.profile.a);
    v.num("profile.b", s.profile.b);
    v.num("profile.eta_los", s.profile.eta_los);
    v.num("profile.eta_nlos", s.profile.eta_nlos);
    v.num("radio.carrier_hz", s.radio.carrier_hz);
    v.num("radio.light_speed", s.radio.light_speed);
    v.num("radio.bandwidth_hz", s.radio.bandwidth_hz);
    v.num("radio.tx_power_w", s.radio.tx_power_w);
    v.num("radio.noise_power_w", s.radio.noise_power_w);
    v.num("motion.delta_t", s.motion.delta_t);
    v.num("motion.v_max", s.motion.v_max);
    v.num("motion.z_min", s.motion.z_min);
    v.num("motion.z_max", s.motion.z_max);
    v.num("motion.init_x", s.motion.u_init.x);
    v.num("motion.init_y", s.motion.u_init.y);
    v.num("motion.init_z", s.motion.u_init.z);
    v.num("motion.final_x", s.motion.u_final.x);
    v.num("motion.final_y", s.motion.u_final.y);
    v.num("motion.final_z", s.motion.u_final.z);
    v.num("battery.rated_capacity_ah", s.battery.rated_capacity_ah);
    v.num("battery.rated_time_h", s.battery.rated_time_h);
    v.num("battery.nominal_voltage", s.battery.nominal_voltage);
    v.num("battery.cutoff_voltage", s.battery.cutoff_voltage);
    v.integer("battery.cells", s.battery.cells);
    v.num("battery.peukert", s.battery.peukert);
    v.num("battery.slope_coeff", s.battery.slope_coeff);
    v.num("battery.slope_exponent", s.battery.slope_exponent);
    v.num("battery.min_remaining_time_s", s.battery.min_remaining_time_s);
    v.num("uav.weight_n", s.uav.weight_n);
    v.integer("uav.rotors", s.uav.rotors);
    v.num("uav.tip_speed", s.uav.tip_speed);
    v.num("uav.fuselage_area", s.uav.fuselage_area);
    v.num("uav.drag_coefficient", s.uav.drag_coefficient);
    v.num("uav.rotor_area", s.uav.rotor_area);
    v.num("uav.profile_drag", s.uav.profile_drag);
    v.num("uav.solidity", s.uav.solidity);
    v.num("uav.sea_level_density", s.uav.sea_level_density);
    auto& t = c.td3;
    v.num("td3.gamma", t.gamma);
    v.num("td3.tau", t.tau);
    v.integer("td3.policy_delay", t.policy_delay);
    v.num("td3.expl_noise_sigma", t.expl_noise_sigma);
    v.num("td3.smooth_noise_sigma", t.smooth_noise_sigma);
    v.num("td3.smooth_clip", t.smooth_clip);
    v.num("td3.actor_lr", t.actor_lr);
    v.num("td3.critic_lr", t.critic_lr);
    v.count("td3.batch_size", t.batch_size);
    v.count("td3.buffer_capacity", t.buffer_capacity);
    v.count("td3.warmup_steps", t.warmup_steps);
    v.sizes("td3.hidden", t.hidden);
    v.flag("td3.critic_relu_output", t.critic_relu_output);
    v.flag("td3.critic_uses_policy_action", t.critic_action);
    v.num("td3.reward_scale", t.reward_scale);
    v.count("td3.updates_per_step", t.updates_per_step);
    v.count("run.episodes", c.episodes);
    v.count("run.eval_every", c.eval_every);
    v.count("run.n_eval", c.n_eval);
    v.count("run.n_seed", c.n_seed);
    v.count("run.n_test", c.n_test);
    v.u64("run.seed", c.seed);
    v.text("run.out", c.out_dir);
    v.text("run.checkpoint", c.checkpoint);
}

struct Reader {
    const boost::property_tree::ptree& pt;

    std::optional<std::string> get(const std::string& key) const
    {
        if (auto v = pt.get_optional<std::string>(key))
            return *v;
        return std::nullopt;
    }
    template <typename T>
    T parse(const std::string& key, const std::string& raw) const
    {
        std::istringstream is(raw);
        T out{};
        if (!(is >> out) || !(is >> std::ws).eof())
            throw config_error("config key '" + key + "': cannot parse '" + raw + "'");
        return out;
    }
    void num(const std::string& k, double& x) const
    {
        if (auto r = get(k))
            x = parse<double>(k, *r);
    }
    void integer(const std::string& k, int& x) const
    {
        if (auto r = get(k))
            x = parse<int>(k, *r);
    }
    void count(const std::string& k, std::size_t& x) const
    {
        if (auto r = get(k)) {
            const long long v = parse<long long>(k, *r);
            if (v < 0)
                throw config_error("config key '" + k + "' must be nonnegative");
            x = std::size_t(v);
        }
    }
    void u64(const std::string& k, std::uint64_t& x) const
    {
        if (auto r = get(k))
            x = parse<std::uint64_t>(k, *r);
    }
    void text(const std::string& k, std::string& x) const
    {
        if (auto r = get(k))
            x = *r;
    }
    bool parse_flag(const std::string& k, const std::string& r) const
    {
        if (r == "true" || r == "1" || r == "yes")
            return true;
        if (r == "false" || r == "0" || r == "no")
            return false;
        throw config_error("config key '" + k + "': expected true/false, got '" + r + "'");
    }
    void flag(const std::string& k, bool& x) const
    {
        if (auto r = get(k))
            x = parse_flag(k, *r);
    }
    void flag(const std::string& k, CriticActionSource& x) const
    {
        if (auto r = get(k))
            x = parse_flag(k, *r) ? CriticActionSource::policy : CriticActionSource::stored;
    }
    void sizes(const std::string& k, std::vector<std::size_t>& x) const
    {
        if (auto r = get(k))
            x = parse_sizes(*r);
    }
};

struct Writer {
    boost::property_tree::ptree& pt;

    void num(const std::string& k, double x) { pt.put(k, fmt(x)); }
    void integer(const std::string& k, int x) { pt.put(k, std::to_string(x)); }
    void count(const std::string& k, std::size_t x) { pt.put(k, std::to_string(x)); }
    void u64(const std::string& k, std::uint64_t x) { pt.put(k, std::to_string(x)); }
    void text(const std::string& k, const std::string& x) { pt.put(k, x); }
    void flag(const std::string& k, bool x) { pt.put(k, x ? "true" : "false"); }
    void flag(const std::string& k, CriticActionSource x) { flag(k, x == CriticActionSource::policy); }
    void sizes(const std::string& k, const std::vector<std::size_t>& x) { pt.put(k, join_sizes(x)); }
};

} // namespace detail

/// Applies `[section] key = value` overrides from an INI stream. The run mode,
/// scale and profile are taken from [run] when present.
inline void apply_ini(RunConfig& c, std::istream& in)
{
    boost::property_tree::ptree pt;
    try {
        boost::property_tree::read_ini(in, pt);
    } catch (const boost::property_tree::ini_parser_error& e) {
        throw config_error(std::string("config parse error: ") + e.what());
    }
    if (auto p = pt.get_optional<std::string>("profile.name"))
        c.scenario.profile = EnvironmentProfile::from_name(*p);
    detail::visit_keys(c, detail::Reader{pt});
    if (pt.get_optional<std::string>("scenario.grid_per_side") || pt.get_optional<std::string>("scenario.area_side"))
        c.scenario.ground_nodes = grid_layout(c.grid_per_side, c.scenario.area_side);
}

/// Starts from the preset named in the file's [run] section (default paper),
/// then applies every other key.
inline RunConfig load_config(const std::string& path, std::optional<RunMode> mode = std::nullopt)
{
    std::ifstream in(path);
    if (!in)
        throw config_error("cannot open config file '" + path + "'");
    std::stringstream buf;
    buf << in.rdbuf();
    boost::property_tree::ptree pt;
    try {
        boost::property_tree::read_ini(buf, pt);
    } catch (const boost::property_tree::ini_parser_error& e) {
        throw config_error(path + ": " + e.what());
    }
    const RunMode m = mode ? *mode : parse_mode(pt.get<std::string>("run.mode", "train-offline"));
    RunConfig c = preset(pt.get<std::string>("run.scale", "paper"), m);
    buf.clear();
    buf.seekg(0);
    apply_ini(c, buf);
    return c;
}

inline void write_config(const RunConfig& c, std::ostream& os)
{
    boost::property_tree::ptree pt;
    pt.put("run.mode", to_string(c.mode));
    pt.put("run.scale", c.scale);
    pt.put("profile.name", c.scenario.profile.name);
    RunConfig copy = c;
    detail::visit_keys(copy, detail::Writer{pt});
    boost::property_tree::write_ini(os, pt);
}

inline void write_config_snapshot(const RunConfig& c, const std::filesystem::path& dir)
{
    std::filesystem::create_directories(dir);
    const auto path = dir / "config.ini";
    std::ofstream os(path);
    if (!os)
        throw std::runtime_error("cannot write '" + path.string() + "'");
    write_config(c, os);
}

} // namespace pap
