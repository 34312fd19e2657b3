// Level-flight power and Peukert-aware air-time across the speed range,
// next to the estimate that ignores the Peukert effect.

#include <cstdio>
#include <numbers>

#include "pap/battery.hpp"
#include "pap/power.hpp"

int main()
{
    const pap::UavParams uav;
    const pap::BatteryConfig battery;
    const double z = 100.0;

    std::printf("hover: %.2f W, air-time %.0f s\n", pap::hover_power(z, uav),
                pap::estimate_airtime([&](std::size_t) { return pap::hover_power(z, uav); }, battery));
    std::printf("%8s %10s %12s %12s\n", "v [m/s]", "P [W]", "airtime [s]", "naive [s]");
    for (int v = 2; v <= 24; v += 2) {
        const double p = pap::forward_power(v, std::numbers::pi / 2, z, uav);
        const double t = pap::estimate_airtime([p](std::size_t) { return p; }, battery);
        std::printf("%8d %10.2f %12.0f %12.0f\n", v, p, t, pap::naive_airtime(p, battery));
    }
    const double v_star = pap::min_power_speed(z, 24.0, uav);
    std::printf("least-power speed: %.2f m/s\n", v_star);
}
