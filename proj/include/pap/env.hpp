#pragma once

// PAP service episode as a deterministic MDP.
//
// Observation: PAP position relative to the destination, cell voltage,
// energy spent, ground-node offsets from the PAP's horizontal projection and
// cumulative bits per node (5 + 3N values). Action: a point of [-1, 1]^3
// mapped to a velocity. An action is discarded when the battery could no
// longer bring the PAP home from where the action would leave it; the PAP
// then flies straight to the destination at v_max and the episode ends.

#include <algorithm>
#include <cstdint>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "pap/battery.hpp"
#include "pap/channel.hpp"
#include "pap/common.hpp"
#include "pap/geometry.hpp"
#include "pap/metrics.hpp"
#include "pap/power.hpp"

namespace pap {

struct Scenario {
    std::vector<Position3> ground_nodes;
    EnvironmentProfile profile = EnvironmentProfile::suburban();
    RadioConfig radio;
    MotionConfig motion;
    BatteryConfig battery;
    UavParams uav;
    double kappa_f = 1000.0;
    double area_side = 1000.0;
    // Rewards express FEE in units of this many bits per joule.
    double reward_fee_unit = 1.0e6;
    bool serve_during_return = false;

    std::size_t node_count() const { return ground_nodes.size(); }
    std::size_t observation_dim() const { return 5 + 3 * node_count(); }

    void validate() const
    {
        require(!ground_nodes.empty(), "scenario needs at least one ground node");
        require_positive(area_side, "area side");
        for (const auto& g : ground_nodes)
            require(g.z == 0.0 && g.x >= 0.0 && g.x <= area_side && g.y >= 0.0 && g.y <= area_side,
                    "ground nodes must sit at z = 0 inside the service square");
        profile.validate();
        radio.validate();
        motion.validate();
        battery.validate();
        uav.validate();
        require(kappa_f >= 0.0, "kappa_f must be nonnegative");
        require_positive(reward_fee_unit, "reward FEE unit");
        for (const auto* p : {&motion.u_init, &motion.u_final})
            require(p->z >= motion.z_min && p->z <= motion.z_max, "start and destination must respect the altitude bounds");
    }

    /// Stable fingerprint of every parameter that affects the physics.
    std::uint64_t fingerprint() const
    {
        std::ostringstream os;
        os.precision(17);
        os << profile.name << ' ' << profile.a << ' ' << profile.b << ' ' << profile.eta_los << ' ' << profile.eta_nlos
           << '|' << radio.carrier_hz << ' ' << radio.light_speed << ' ' << radio.bandwidth_hz << ' ' << radio.tx_power_w
           << ' ' << radio.noise_power_w << '|' << motion.delta_t << ' ' << motion.v_max << ' ' << motion.z_min << ' '
           << motion.z_max << ' ' << motion.u_init.x << ' ' << motion.u_init.y << ' ' << motion.u_init.z << ' '
           << motion.u_final.x << ' ' << motion.u_final.y << ' ' << motion.u_final.z << '|' << battery.rated_capacity_ah
           << ' ' << battery.rated_time_h << ' ' << battery.nominal_voltage << ' ' << battery.cutoff_voltage << ' '
           << battery.cells << ' ' << battery.peukert << ' ' << battery.slope_coeff << ' ' << battery.slope_exponent
           << ' ' << battery.min_remaining_time_s << '|' << uav.weight_n << ' ' << uav.rotors << ' ' << uav.tip_speed
           << ' ' << uav.fuselage_area << ' ' << uav.drag_coefficient << ' ' << uav.rotor_area << ' ' << uav.profile_drag
           << ' ' << uav.solidity << ' ' << uav.sea_level_density << '|' << kappa_f << ' ' << area_side << ' '
           << reward_fee_unit << ' ' << serve_during_return << '|';
        for (const auto& g : ground_nodes)
            os << g.x << ',' << g.y << ';';
        return fnv1a(os.str());
    }
};

/// per_side x per_side nodes uniformly spaced over the square, cell-centered.
inline std::vector<Position3> grid_layout(std::size_t per_side, double side)
{
    std::vector<Position3> nodes;
    nodes.reserve(per_side * per_side);
    const double pitch = side / static_cast<double>(per_side);
    for (std::size_t i = 0; i < per_side; ++i)
        for (std::size_t j = 0; j < per_side; ++j)
            nodes.push_back({pitch * (static_cast<double>(j) + 0.5), pitch * (static_cast<double>(i) + 0.5), 0.0});
    return nodes;
}

template <typename Rng>
std::vector<Position3> random_layout(std::size_t count, double side, Rng& rng)
{
    std::uniform_real_distribution<double> coord(0.0, side);
    std::vector<Position3> nodes(count);
    for (auto& g : nodes) {
        g.x = coord(rng);
        g.y = coord(rng);
    }
    return nodes;
}

/// Raw (unnormalized) MDP state.
struct EnvState {
    Position3 rel_position;      // u_m - u_F
    double voltage_v = 0.0;
    double energy_j = 0.0;
    std::vector<double> rel_gn;  // 2N: (g_x - u_x, g_y - u_y) per node
    std::vector<double> bits_sum; // N

    std::size_t dim() const { return 5 + rel_gn.size() + bits_sum.size(); }

    /// Network input: lengths over the area side, voltage over nominal,
    /// energy over nominal pack energy, bits over the current per-node maximum.
    std::vector<double> observation(const Scenario& s) const
    {
        std::vector<double> obs;
        obs.reserve(dim());
        const double side = s.area_side;
        obs.push_back(rel_position.x / side);
        obs.push_back(rel_position.y / side);
        obs.push_back(rel_position.z / side);
        obs.push_back(voltage_v / s.battery.nominal_voltage);
        obs.push_back(energy_j / s.battery.nominal_energy_j());
        for (double d : rel_gn)
            obs.push_back(d / side);
        const double top = bits_sum.empty() ? 0.0 : *std::max_element(bits_sum.begin(), bits_sum.end());
        for (double b : bits_sum)
            obs.push_back(top > 0.0 ? b / top : 0.0);
        return obs;
    }
};

struct StepInfo {
    double power_w = 0.0;
    std::vector<double> node_bits;
    double fairness_so_far = 0.0;
    double prefix_fee = 0.0; // bits/J
    bool forced_return = false;
};

struct StepOutcome {
    EnvState next_state;
    double reward = 0.0;
    bool done = false;
    StepInfo info;
};

/// Reward for one transition, with FEE values in reward units.
inline double reward_of(double prefix_fee_before, double prefix_fee_after, bool is_terminal, double final_fee,
                        double kappa_f)
{
    if (is_terminal)
        return kappa_f * final_fee;
    return prefix_fee_after > prefix_fee_before ? prefix_fee_after : 0.0;
}

/// Per-node expected spectral efficiency with the PAP at `where`.
inline std::vector<double> node_spectral_efficiencies(const Scenario& s, const Position3& where)
{
    std::vector<double> se;
    se.reserve(s.node_count());
    for (const auto& g : s.ground_nodes)
        se.push_back(expected_spectral_efficiency(where, g, s.radio, s.profile));
    return se;
}

/// TDMA schedule and delivered bits for one slot flown from -> to. Channel
/// quality over the slot is evaluated at the segment midpoint.
inline SlotRecord service_slot(const Scenario& s, const VelocityVector& v, const Position3& from, const Position3& to,
                               double power, bool deliver)
{
    SlotRecord slot;
    slot.velocity = v;
    slot.power_w = power;
    slot.serving = deliver;
    const auto se = node_spectral_efficiencies(s, midpoint(from, to));
    slot.node_time_s = tdma_allocation(se, s.motion.delta_t);
    if (deliver)
        slot.node_bits = slot_bits(s.radio.bandwidth_hz, slot.node_time_s, se);
    else
        slot.node_bits.assign(se.size(), 0.0);
    return slot;
}

/// Straight flight home at v_max: per-slot velocity, start/end point and power.
struct ReturnSlot {
    PathSlot path;
    double power_w = 0.0;
};

inline std::vector<ReturnSlot> return_profile(const Position3& from, const Scenario& s)
{
    std::vector<ReturnSlot> out;
    for (const auto& ps : straight_path(from, s.motion.u_final, s.motion.v_max, s.motion.delta_t))
        out.push_back({ps, total_power(ps.velocity, ps.start.z, s.uav)});
    return out;
}

/// Remaining air-time (s) from `battery` while flying the return profile;
/// evaluated only as far as needed to decide whether the return fits.
inline double remaining_airtime_for_return(const std::vector<ReturnSlot>& profile, const BatteryState& battery,
                                           const Scenario& s)
{
    const double tail = hover_power(s.motion.u_final.z, s.uav);
    return estimate_airtime([&](std::size_t k) { return k < profile.size() ? profile[k].power_w : tail; }, s.battery,
                            s.motion.delta_t, battery, profile.size() + 1);
}

/// True when the return from `pos` fits in the air-time left in `battery`.
/// The slot in which a cutoff would be crossed is not counted as usable.
inline bool return_is_feasible(const Position3& pos, const BatteryState& battery, const Scenario& s)
{
    if (!battery.alive())
        return false;
    const auto profile = return_profile(pos, s);
    const double airtime = remaining_airtime_for_return(profile, battery, s);
    return airtime - s.motion.delta_t >= min_return_time(pos, s.motion);
}

class PapEnv {
public:
    explicit PapEnv(Scenario scenario) : scenario_(std::move(scenario))
    {
        scenario_.validate();
        reset();
    }

    const Scenario& scenario() const { return scenario_; }
    const EpisodeRecord& record() const { return record_; }
    bool done() const { return done_; }
    std::uint64_t seed() const { return seed_; }
    const Position3& position() const { return position_; }
    const BatteryState& battery() const { return battery_; }
    std::size_t observation_dim() const { return scenario_.observation_dim(); }

    EnvState reset(std::uint64_t seed = 0)
    {
        seed_ = seed;
        position_ = scenario_.motion.u_init;
        battery_ = BatteryState::fresh(scenario_.battery);
        acc_ = FeeAccumulator(scenario_.node_count());
        record_ = EpisodeRecord{};
        record_.positions.push_back(position_);
        record_.battery_trace.push_back(battery_);
        done_ = false;
        stranded_ = false;
        return state();
    }

    EnvState state() const
    {
        EnvState st;
        st.rel_position = position_ - scenario_.motion.u_final;
        st.voltage_v = battery_.voltage_v;
        st.energy_j = acc_.energy_j();
        st.rel_gn.reserve(2 * scenario_.node_count());
        for (const auto& g : scenario_.ground_nodes) {
            st.rel_gn.push_back(g.x - position_.x);
            st.rel_gn.push_back(g.y - position_.y);
        }
        st.bits_sum = acc_.cumulative_bits();
        return st;
    }

    std::vector<double> observation() const { return state().observation(scenario_); }

    StepOutcome step(const Action& action)
    {
        require(!done_, "step called on a finished episode");
        const MotionConfig& mc = scenario_.motion;
        const VelocityVector v = action_to_velocity(action, mc);
        const Position3 next = apply_motion(position_, v, mc);
        const double power = total_power(v, position_.z, scenario_.uav);
        const BatteryState next_battery = discharge_step(battery_, power, mc.delta_t, scenario_.battery);

        StepOutcome out;
        if (!return_is_feasible(next, next_battery, scenario_)) {
            out.info.forced_return = true;
            out.info.node_bits.assign(scenario_.node_count(), 0.0);
            const auto leg = forced_return(position_);
            for (const auto& slot : leg) {
                out.info.power_w += slot.first.power_w / static_cast<double>(leg.size());
                for (std::size_t n = 0; n < slot.first.node_bits.size(); ++n)
                    out.info.node_bits[n] += slot.first.node_bits[n];
                commit(slot.first, slot.second);
            }
            done_ = true;
            const double final_fee = acc_.fee_or_zero();
            out.reward = reward_of(0.0, 0.0, true, final_fee / scenario_.reward_fee_unit, scenario_.kappa_f);
        } else {
            const double before = acc_.fee_or_zero();
            SlotRecord slot = service_slot(scenario_, v, position_, next, power, true);
            out.info.power_w = power;
            out.info.node_bits = slot.node_bits;
            commit(std::move(slot), next, &next_battery);
            const double after = acc_.fee_or_zero();
            out.reward = reward_of(before / scenario_.reward_fee_unit, after / scenario_.reward_fee_unit, false, 0.0,
                                   scenario_.kappa_f);
        }
        out.done = done_;
        out.info.prefix_fee = acc_.fee_or_zero();
        out.info.fairness_so_far = acc_.fairness();
        out.next_state = state();
        return out;
    }

    /// Slots flown when the PAP heads straight home from `from` at v_max,
    /// paired with the position each slot ends at. No bits are delivered unless
    /// the scenario enables service during the return.
    std::vector<std::pair<SlotRecord, Position3>> forced_return(const Position3& from) const
    {
        std::vector<std::pair<SlotRecord, Position3>> out;
        for (const auto& rs : return_profile(from, scenario_))
            out.emplace_back(service_slot(scenario_, rs.path.velocity, rs.path.start, rs.path.end, rs.power_w,
                                          scenario_.serve_during_return),
                             rs.path.end);
        return out;
    }

    /// True when the episode ended at the destination without the battery dying.
    bool completed() const { return done_ && !stranded_ && position_ == scenario_.motion.u_final; }

    EpisodeMetrics metrics() const { return summarize(record_, scenario_.motion.delta_t, completed()); }

    std::vector<double> node_se(const Position3& where) const { return node_spectral_efficiencies(scenario_, where); }

private:
    void commit(SlotRecord slot, const Position3& next, const BatteryState* precomputed = nullptr)
    {
        if (precomputed) {
            battery_ = *precomputed;
        } else if (battery_.alive()) {
            battery_ = discharge_step(battery_, slot.power_w, scenario_.motion.delta_t, scenario_.battery);
        }
        if (!battery_.alive())
            stranded_ = true;
        acc_.add_slot(slot.node_bits, slot.power_w, scenario_.motion.delta_t);
        position_ = next;
        record_.slots.push_back(std::move(slot));
        record_.positions.push_back(position_);
        record_.battery_trace.push_back(battery_);
    }

    Scenario scenario_;
    Position3 position_;
    BatteryState battery_;
    FeeAccumulator acc_;
    EpisodeRecord record_;
    std::uint64_t seed_ = 0;
    bool done_ = false;
    bool stranded_ = false;
};

} // namespace pap
