#pragma once

// Trajectory CSV and line-delimited JSON metrics.

#include <algorithm>
#include <charconv>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <system_error>
#include <vector>

#include <nlohmann/json.hpp>

#include "pap/metrics.hpp"

namespace pap {

struct TrajectoryRow {
    std::size_t slot = 0;
    double t_s = 0.0;
    double x = 0.0, y = 0.0, z = 0.0; // slot start position
    double speed = 0.0, elevation_rad = 0.0, azimuth_rad = 0.0;
    double power_w = 0.0;
    double voltage_v = 0.0;        // after the slot
    double remaining_time_s = 0.0; // after the slot
    double energy_j = 0.0;         // cumulative, after the slot
    std::vector<double> cumulative_bits;

    friend bool operator==(const TrajectoryRow&, const TrajectoryRow&) = default;
};

inline std::vector<TrajectoryRow> trajectory_rows(const EpisodeRecord& r, double delta_t)
{
    std::vector<TrajectoryRow> rows;
    std::vector<double> bits(r.node_count(), 0.0);
    double energy = 0.0;
    for (std::size_t m = 0; m < r.slots.size(); ++m) {
        const SlotRecord& s = r.slots[m];
        energy += s.power_w * delta_t;
        for (std::size_t n = 0; n < bits.size(); ++n)
            bits[n] += s.node_bits[n];
        TrajectoryRow row;
        row.slot = m;
        row.t_s = static_cast<double>(m) * delta_t;
        row.x = r.positions.at(m).x;
        row.y = r.positions.at(m).y;
        row.z = r.positions.at(m).z;
        row.speed = s.velocity.speed;
        row.elevation_rad = s.velocity.elevation;
        row.azimuth_rad = s.velocity.azimuth;
        row.power_w = s.power_w;
        row.voltage_v = r.battery_trace.at(m + 1).voltage_v;
        row.remaining_time_s = r.battery_trace.at(m + 1).remaining_time_s();
        row.energy_j = energy;
        row.cumulative_bits = bits;
        rows.push_back(std::move(row));
    }
    return rows;
}

namespace detail {

inline std::string shortest(double v)
{
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

inline double parse_double(std::string_view s, const std::string& where)
{
    double v = 0.0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc{} || res.ptr != s.data() + s.size())
        throw std::runtime_error(where + ": bad number '" + std::string(s) + "'");
    return v;
}

inline std::ofstream open_out(const std::filesystem::path& path)
{
    if (path.has_parent_path())
        std::filesystem::create_directories(path.parent_path());
    std::ofstream os(path, std::ios::binary);
    if (!os)
        throw std::runtime_error("cannot write '" + path.string() + "'");
    return os;
}

} // namespace detail

inline std::vector<std::string> trajectory_header(std::size_t nodes)
{
    std::vector<std::string> h = {"slot",        "t_s",          "x",       "y",       "z",
                                  "speed",       "elevation_rad", "azimuth_rad", "power_W", "voltage_V",
                                  "remaining_time_s", "energy_J"};
    for (std::size_t n = 0; n < nodes; ++n)
        h.push_back("bits_" + std::to_string(n));
    return h;
}

inline void write_trajectory(std::ostream& os, const std::vector<TrajectoryRow>& rows, std::size_t nodes)
{
    const auto header = trajectory_header(nodes);
    for (std::size_t i = 0; i < header.size(); ++i)
        os << (i ? "," : "") << header[i];
    os << '\n';
    using detail::shortest;
    for (const auto& r : rows) {
        os << r.slot << ',' << shortest(r.t_s) << ',' << shortest(r.x) << ',' << shortest(r.y) << ','
           << shortest(r.z) << ',' << shortest(r.speed) << ',' << shortest(r.elevation_rad) << ','
           << shortest(r.azimuth_rad) << ',' << shortest(r.power_w) << ',' << shortest(r.voltage_v) << ','
           << shortest(r.remaining_time_s) << ',' << shortest(r.energy_j);
        for (double b : r.cumulative_bits)
            os << ',' << shortest(b);
        os << '\n';
    }
}

/// Writes `record` as CSV; `nodes` fixes the bit columns for an empty record.
inline void export_trajectory(const EpisodeRecord& record, double delta_t, const std::filesystem::path& path,
                              std::size_t nodes = 0)
{
    auto os = detail::open_out(path);
    write_trajectory(os, trajectory_rows(record, delta_t), record.slots.empty() ? nodes : record.node_count());
    if (!os)
        throw std::runtime_error("write failed for '" + path.string() + "'");
}

inline std::vector<TrajectoryRow> read_trajectory(std::istream& in, const std::string& name = "trajectory")
{
    std::string line;
    if (!std::getline(in, line))
        throw std::runtime_error(name + ": missing header");
    const std::size_t cols = std::size_t(std::count(line.begin(), line.end(), ',')) + 1;
    if (cols < 12)
        throw std::runtime_error(name + ": header has fewer than 12 columns");
    std::vector<TrajectoryRow> rows;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty())
            continue;
        std::vector<std::string_view> f;
        std::string_view rest(line);
        for (;;) {
            const auto comma = rest.find(',');
            f.push_back(rest.substr(0, comma));
            if (comma == std::string_view::npos)
                break;
            rest.remove_prefix(comma + 1);
        }
        const std::string where = name + ":" + std::to_string(lineno);
        if (f.size() != cols)
            throw std::runtime_error(where + ": expected " + std::to_string(cols) + " fields");
        auto d = [&](std::size_t i) { return detail::parse_double(f[i], where); };
        TrajectoryRow r;
        std::size_t slot = 0;
        const auto res = std::from_chars(f[0].data(), f[0].data() + f[0].size(), slot);
        if (res.ec != std::errc{})
            throw std::runtime_error(where + ": bad slot index");
        r.slot = slot;
        r.t_s = d(1);
        r.x = d(2);
        r.y = d(3);
        r.z = d(4);
        r.speed = d(5);
        r.elevation_rad = d(6);
        r.azimuth_rad = d(7);
        r.power_w = d(8);
        r.voltage_v = d(9);
        r.remaining_time_s = d(10);
        r.energy_j = d(11);
        for (std::size_t i = 12; i < cols; ++i)
            r.cumulative_bits.push_back(d(i));
        rows.push_back(std::move(r));
    }
    return rows;
}

inline std::vector<TrajectoryRow> read_trajectory(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in)
        throw std::runtime_error("cannot open '" + path.string() + "'");
    return read_trajectory(in, path.string());
}

enum class Phase { train, eval, test, baseline };

inline const char* to_string(Phase p)
{
    switch (p) {
    case Phase::train:
        return "train";
    case Phase::eval:
        return "eval";
    case Phase::test:
        return "test";
    case Phase::baseline:
        return "baseline";
    }
    return "?";
}

struct MetricsRecord {
    std::size_t episode = 0;
    Phase phase = Phase::train;
    EpisodeMetrics metrics;
    std::uint64_t seed = 0;
    std::uint64_t scenario_hash = 0;
    std::string label; // optional: baseline name, profile, eval slot, ...
};

inline nlohmann::json to_json(const MetricsRecord& r)
{
    nlohmann::json j;
    j["episode"] = r.episode;
    j["phase"] = to_string(r.phase);
    j["fee"] = r.metrics.fee;
    j["fi"] = r.metrics.fairness;
    j["ee"] = r.metrics.energy_efficiency;
    j["airtime_s"] = r.metrics.airtime_s;
    j["steps"] = r.metrics.steps;
    j["completed"] = r.metrics.completed;
    j["seed"] = r.seed;
    j["scenario_hash"] = r.scenario_hash;
    if (!r.label.empty())
        j["label"] = r.label;
    return j;
}

inline MetricsRecord metrics_from_json(const nlohmann::json& j)
{
    MetricsRecord r;
    r.episode = j.at("episode").get<std::size_t>();
    const auto phase = j.at("phase").get<std::string>();
    for (Phase p : {Phase::train, Phase::eval, Phase::test, Phase::baseline})
        if (phase == to_string(p))
            r.phase = p;
    r.metrics.fee = j.at("fee").get<double>();
    r.metrics.fairness = j.at("fi").get<double>();
    r.metrics.energy_efficiency = j.at("ee").get<double>();
    r.metrics.airtime_s = j.at("airtime_s").get<double>();
    r.metrics.steps = j.at("steps").get<std::size_t>();
    r.metrics.completed = j.at("completed").get<bool>();
    r.seed = j.at("seed").get<std::uint64_t>();
    r.scenario_hash = j.at("scenario_hash").get<std::uint64_t>();
    r.label = j.value("label", std::string{});
    return r;
}

/// Append-only JSONL sink.
class MetricsLog {
public:
    explicit MetricsLog(const std::filesystem::path& path) : path_(path), os_(detail::open_out(path)) {}

    void append(const MetricsRecord& r)
    {
        os_ << to_json(r).dump() << '\n';
        os_.flush();
        if (!os_)
            throw std::runtime_error("write failed for '" + path_.string() + "'");
    }

private:
    std::filesystem::path path_;
    std::ofstream os_;
};

inline void export_metrics(const std::vector<MetricsRecord>& records, const std::filesystem::path& path)
{
    MetricsLog log(path);
    for (const auto& r : records)
        log.append(r);
}

inline std::vector<MetricsRecord> read_metrics(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in)
        throw std::runtime_error("cannot open '" + path.string() + "'");
    std::vector<MetricsRecord> out;
    std::string line;
    while (std::getline(in, line))
        if (!line.empty())
            out.push_back(metrics_from_json(nlohmann::json::parse(line)));
    return out;
}

} // namespace pap
