#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <span>
#include <vector>

#include "pap/battery.hpp"
#include "pap/common.hpp"
#include "pap/geometry.hpp"

namespace pap {

struct SlotRecord {
    VelocityVector velocity;
    double power_w = 0.0;
    std::vector<double> node_time_s; // TDMA share per node, sums to delta_t
    std::vector<double> node_bits;
    bool serving = true; // false for pure-transit slots (forced return)
};

struct EpisodeRecord {
    std::vector<SlotRecord> slots;
    std::vector<Position3> positions;      // slots.size() + 1 entries
    std::vector<BatteryState> battery_trace; // slots.size() + 1 entries

    std::size_t node_count() const { return slots.empty() ? 0 : slots.front().node_bits.size(); }
};

/// Splits `delta_t` across nodes in proportion to their spectral efficiency.
/// Falls back to an equal split when every efficiency is zero.
inline std::vector<double> tdma_allocation(std::span<const double> se, double delta_t)
{
    require(!se.empty(), "TDMA allocation needs at least one node");
    for (double r : se)
        require(r >= 0.0 && std::isfinite(r), "spectral efficiencies must be finite and nonnegative");
    const double total = std::accumulate(se.begin(), se.end(), 0.0);
    std::vector<double> t(se.size());
    if (total == 0.0) {
        std::fill(t.begin(), t.end(), delta_t / static_cast<double>(se.size()));
    } else {
        for (std::size_t n = 0; n < se.size(); ++n)
            t[n] = delta_t * se[n] / total;
    }
    // The last nonzero share absorbs the rounding residue of the shares before
    // it, so the left-to-right sum of the schedule is exactly delta_t.
    std::size_t r = t.size() - 1;
    while (r > 0 && t[r] == 0.0)
        --r;
    const double head = std::accumulate(t.begin(), t.begin() + std::ptrdiff_t(r), 0.0);
    t[r] = std::max(0.0, delta_t - head);
    for (int pass = 0; pass < 8 && head + t[r] != delta_t; ++pass)
        t[r] = std::nextafter(t[r], head + t[r] < delta_t ? delta_t : 0.0);
    return t;
}

inline std::vector<double> slot_bits(double bandwidth_hz, std::span<const double> times, std::span<const double> se)
{
    require(times.size() == se.size(), "slot_bits needs matching time and efficiency vectors");
    std::vector<double> bits(times.size());
    for (std::size_t n = 0; n < times.size(); ++n)
        bits[n] = bandwidth_hz * times[n] * se[n];
    return bits;
}

/// Jain's index of the per-node average bits; the all-zero vector scores 0.
inline double fairness_index(std::span<const double> avg_bits)
{
    require(!avg_bits.empty(), "fairness index of an empty vector");
    double sum = 0.0, sum_sq = 0.0;
    for (double d : avg_bits) {
        require(d >= 0.0 && std::isfinite(d), "bit counts must be finite and nonnegative");
        sum += d;
        sum_sq += d * d;
    }
    if (sum_sq == 0.0)
        return 0.0;
    return sum * sum / (static_cast<double>(avg_bits.size()) * sum_sq);
}

/// Running sums for fairness-weighted energy efficiency over an episode prefix.
class FeeAccumulator {
public:
    explicit FeeAccumulator(std::size_t nodes = 0) : bits_(nodes, 0.0) {}

    void add_slot(std::span<const double> node_bits, double power_w, double delta_t)
    {
        require(node_bits.size() == bits_.size(), "slot bit vector has the wrong node count");
        for (std::size_t n = 0; n < bits_.size(); ++n)
            bits_[n] += node_bits[n];
        energy_j_ += delta_t * power_w;
        ++slots_;
    }

    const std::vector<double>& cumulative_bits() const { return bits_; }
    double energy_j() const { return energy_j_; }
    std::size_t slots() const { return slots_; }
    double total_bits() const { return std::accumulate(bits_.begin(), bits_.end(), 0.0); }

    /// Per-node average bits per slot.
    std::vector<double> average_bits() const
    {
        std::vector<double> avg(bits_);
        if (slots_ > 0)
            for (double& d : avg)
                d /= static_cast<double>(slots_);
        return avg;
    }

    double fairness() const { return bits_.empty() ? 0.0 : fairness_index(average_bits()); }

    /// Energy efficiency in bits/J without the fairness weight.
    double energy_efficiency() const
    {
        if (!(energy_j_ > 0.0))
            throw model_domain_error("energy efficiency of a zero-energy episode is undefined");
        return total_bits() / energy_j_;
    }

    /// Fair energy efficiency in bits/J.
    double fee() const
    {
        if (!(energy_j_ > 0.0))
            throw model_domain_error("FEE of a zero-energy episode is undefined");
        return fairness() * total_bits() / energy_j_;
    }

    /// FEE of the prefix so far, 0 before any energy has been spent.
    double fee_or_zero() const { return energy_j_ > 0.0 ? fee() : 0.0; }

private:
    std::vector<double> bits_;
    double energy_j_ = 0.0;
    std::size_t slots_ = 0;
};

inline FeeAccumulator accumulate(const EpisodeRecord& episode, double delta_t)
{
    FeeAccumulator acc(episode.node_count());
    for (const auto& s : episode.slots)
        acc.add_slot(s.node_bits, s.power_w, delta_t);
    return acc;
}

/// Fair energy efficiency (bits/J) of a whole episode.
inline double fee(const EpisodeRecord& episode, double delta_t)
{
    require(!episode.slots.empty(), "FEE of an empty episode");
    return accumulate(episode, delta_t).fee();
}

struct EpisodeMetrics {
    double fee = 0.0; // bits/J
    double fairness = 0.0;
    double energy_efficiency = 0.0; // bits/J
    double airtime_s = 0.0;
    std::size_t steps = 0;
    bool completed = false;
};

inline EpisodeMetrics summarize(const EpisodeRecord& episode, double delta_t, bool completed)
{
    EpisodeMetrics m;
    m.steps = episode.slots.size();
    m.airtime_s = static_cast<double>(m.steps) * delta_t;
    m.completed = completed;
    if (episode.slots.empty())
        return m;
    const FeeAccumulator acc = accumulate(episode, delta_t);
    if (acc.energy_j() > 0.0) {
        m.fairness = acc.fairness();
        m.energy_efficiency = acc.energy_efficiency();
        m.fee = m.fairness * m.energy_efficiency;
    }
    return m;
}

} // namespace pap
