#pragma once

// Scripted reference flights and a replay evaluator for arbitrary plans.

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <vector>

#include "pap/battery.hpp"
#include "pap/common.hpp"
#include "pap/env.hpp"
#include "pap/geometry.hpp"
#include "pap/metrics.hpp"
#include "pap/power.hpp"

namespace pap {

/// One planned slot; `serving` is false on a transit-only return leg.
struct PlanSlot {
    VelocityVector velocity;
    Position3 start;
    Position3 end;
    bool serving = true;
};

struct ScriptedTrajectory {
    std::string label;
    std::vector<PlanSlot> slots;
};

struct TrajectoryEvaluation {
    EpisodeRecord record;
    EpisodeMetrics metrics;
};

/// Replays `plan` through the environment physics. A plan that kills the
/// battery stops at that slot and is reported as not completed.
inline TrajectoryEvaluation evaluate_trajectory(const ScriptedTrajectory& plan, const Scenario& s)
{
    s.validate();
    const double dt = s.motion.delta_t;
    TrajectoryEvaluation ev;
    BatteryState battery = BatteryState::fresh(s.battery);
    Position3 pos = s.motion.u_init;
    ev.record.positions.push_back(pos);
    ev.record.battery_trace.push_back(battery);
    bool alive = true;
    for (const auto& ps : plan.slots) {
        require(distance(ps.start, pos) <= 1e-9 * (1.0 + norm(pos)), "plan slots must be contiguous");
        require(distance(ps.start, ps.end) <= s.motion.max_step() * (1.0 + 1e-12), "plan slot exceeds v_max");
        const double power = total_power(ps.velocity, ps.start.z, s.uav);
        battery = discharge_step(battery, power, dt, s.battery);
        ev.record.slots.push_back(service_slot(s, ps.velocity, ps.start, ps.end, power, ps.serving));
        pos = ps.end;
        ev.record.positions.push_back(pos);
        ev.record.battery_trace.push_back(battery);
        if (!battery.alive()) {
            alive = false;
            break;
        }
    }
    ev.metrics = summarize(ev.record, dt, alive && pos == s.motion.u_final);
    return ev;
}

/// Level-flight speed with the least power at the top of the altitude band.
inline double transit_speed(const Scenario& s) { return min_power_speed(s.motion.z_max, s.motion.v_max, s.uav); }

namespace detail {

/// Builds a plan slot by slot under the environment's rules: a slot is taken
/// only while the return from its end point still passes the safety check,
/// and the flight ends with the same v_max return the environment forces.
struct PlanBuilder {
    const Scenario& s;
    ScriptedTrajectory plan;
    BatteryState battery;
    Position3 pos;
    bool returning = false;

    PlanBuilder(const Scenario& sc, std::string label)
        : s(sc), plan{std::move(label), {}}, battery(BatteryState::fresh(sc.battery)), pos(sc.motion.u_init)
    {
    }

    /// False once the safety check has tripped; the plan is then closed.
    bool step(const VelocityVector& v, const Position3& to)
    {
        if (returning)
            return false;
        const double p = total_power(v, pos.z, s.uav);
        const BatteryState next = discharge_step(battery, p, s.motion.delta_t, s.battery);
        if (!return_is_feasible(to, next, s)) {
            go_home();
            return false;
        }
        plan.slots.push_back({v, pos, to, true});
        battery = next;
        pos = to;
        return true;
    }

    /// Flies to `to` at `speed`; false if the safety check tripped on the way.
    bool fly(const Position3& to, double speed)
    {
        for (const auto& ps : straight_path(pos, to, speed, s.motion.delta_t))
            if (!step(ps.velocity, ps.end))
                return false;
        return true;
    }

    bool hover() { return step(VelocityVector{}, pos); }

    void go_home()
    {
        if (returning)
            return;
        returning = true;
        for (const auto& rs : return_profile(pos, s)) {
            plan.slots.push_back({rs.path.velocity, rs.path.start, rs.path.end, s.serve_during_return});
            if (battery.alive())
                battery = discharge_step(battery, rs.power_w, s.motion.delta_t, s.battery);
            pos = rs.path.end;
        }
    }
};

} // namespace detail

/// Climb to the center of the area at z_max, hover there until the safety
/// check calls the PAP home, then return as the environment would.
inline ScriptedTrajectory hover_plan(const Scenario& s)
{
    s.validate();
    const Position3 center{0.5 * s.area_side, 0.5 * s.area_side, s.motion.z_max};
    detail::PlanBuilder b(s, "hover");
    if (b.fly(center, transit_speed(s)))
        while (b.hover()) {
        }
    b.go_home();
    return b.plan;
}

inline TrajectoryEvaluation hover_baseline(const Scenario& s) { return evaluate_trajectory(hover_plan(s), s); }

// ---- tours over ground-node projections ----

inline double tour_length(const std::vector<Position3>& pts, const std::vector<std::size_t>& order)
{
    if (order.size() < 2)
        return 0.0;
    double len = 0.0;
    for (std::size_t k = 0; k < order.size(); ++k)
        len += horizontal_distance(pts[order[k]], pts[order[(k + 1) % order.size()]]);
    return len;
}

inline std::vector<std::size_t> nearest_neighbor_tour(const std::vector<Position3>& pts, std::size_t start = 0)
{
    require(start < pts.size() || pts.empty(), "tour start index out of range");
    std::vector<std::size_t> order;
    if (pts.empty())
        return order;
    std::vector<bool> used(pts.size(), false);
    order.push_back(start);
    used[start] = true;
    while (order.size() < pts.size()) {
        const Position3& cur = pts[order.back()];
        std::size_t best = pts.size();
        double best_d = 0.0;
        for (std::size_t j = 0; j < pts.size(); ++j) {
            if (used[j])
                continue;
            const double d = horizontal_distance(cur, pts[j]);
            if (best == pts.size() || d < best_d) {
                best = j;
                best_d = d;
            }
        }
        used[best] = true;
        order.push_back(best);
    }
    return order;
}

/// Segment-reversal improvement of a closed tour until no move shortens it.
inline std::vector<std::size_t> two_opt(const std::vector<Position3>& pts, std::vector<std::size_t> order)
{
    const std::size_t n = order.size();
    if (n < 4)
        return order;
    auto d = [&](std::size_t a, std::size_t b) { return horizontal_distance(pts[order[a]], pts[order[b % n]]); };
    bool improved = true;
    while (improved) {
        improved = false;
        for (std::size_t i = 0; i + 2 < n; ++i) {
            for (std::size_t j = i + 2; j < n; ++j) {
                if (i == 0 && j == n - 1)
                    continue;
                const double delta = d(i, j) + d(i + 1, j + 1) - d(i, i + 1) - d(j, j + 1);
                if (delta < -1e-12) {
                    std::reverse(order.begin() + std::ptrdiff_t(i + 1), order.begin() + std::ptrdiff_t(j + 1));
                    improved = true;
                }
            }
        }
    }
    return order;
}

/// Best 2-opt tour over nearest-neighbor starts from every node.
inline std::vector<std::size_t> tsp_tour(const std::vector<Position3>& pts)
{
    std::vector<std::size_t> best;
    double best_len = 0.0;
    for (std::size_t s = 0; s < pts.size(); ++s) {
        auto t = two_opt(pts, nearest_neighbor_tour(pts, s));
        const double len = tour_length(pts, t);
        if (best.empty() || len < best_len - 1e-12) {
            best = std::move(t);
            best_len = len;
        }
    }
    return best;
}

/// Exhaustive optimum with node 0 fixed first; for small N only.
inline std::vector<std::size_t> brute_force_tour(const std::vector<Position3>& pts)
{
    require(pts.size() <= 10, "brute-force tour limited to 10 nodes");
    std::vector<std::size_t> order(pts.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    if (order.size() < 3)
        return order;
    std::vector<std::size_t> best = order;
    double best_len = tour_length(pts, order);
    while (std::next_permutation(order.begin() + 1, order.end())) {
        const double len = tour_length(pts, order);
        if (len < best_len) {
            best_len = len;
            best = order;
        }
    }
    return best;
}

/// Climb to (0.2, 0.2) of the area at z_max, cycle the node tour at z_max
/// until the safety check calls the PAP home, then return.
inline ScriptedTrajectory tsp_plan(const Scenario& s)
{
    s.validate();
    const double v = transit_speed(s);
    const double z = s.motion.z_max;
    const Position3 entry{0.2 * s.area_side, 0.2 * s.area_side, z};
    std::vector<Position3> stops;
    for (const auto& g : s.ground_nodes)
        stops.push_back({g.x, g.y, z});
    auto tour = tsp_tour(stops);
    // Start the cycle at the stop closest to the entry point.
    const auto first = std::min_element(tour.begin(), tour.end(), [&](std::size_t a, std::size_t b) {
        return horizontal_distance(entry, stops[a]) < horizontal_distance(entry, stops[b]);
    });
    std::rotate(tour.begin(), first, tour.end());

    detail::PlanBuilder b(s, "tsp");
    if (b.fly(entry, v)) {
        for (std::size_t k = 0;; ++k) {
            const Position3& target = stops[tour[k % tour.size()]];
            const bool ok = b.pos == target ? b.hover() : b.fly(target, v);
            if (!ok)
                break;
        }
    }
    b.go_home();
    return b.plan;
}

inline TrajectoryEvaluation tsp_baseline(const Scenario& s) { return evaluate_trajectory(tsp_plan(s), s); }

} // namespace pap
