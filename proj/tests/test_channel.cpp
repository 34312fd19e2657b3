#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "pap/channel.hpp"

using namespace pap;

namespace {
const RadioConfig radio;
const EnvironmentProfile sub = EnvironmentProfile::suburban();
} // namespace

TEST(Radio, NoiseAndTransmitPower)
{
    EXPECT_NEAR(radio.noise_power_w / 1.5924286822139882e-13, 1.0, 1e-12);
    EXPECT_NEAR(radio.tx_power_w / 0.19952623149688797, 1.0, 1e-12);
}

TEST(PathLoss, HundredMetres)
{
    EXPECT_NEAR(path_loss_db(100.0, radio, 0.2), 87.91033205730743, 1e-9);
}

TEST(PathLoss, DoublingAddsSixDb)
{
    for (double d : {10.0, 73.0, 450.0})
        EXPECT_NEAR(path_loss_db(2 * d, radio, 1.0) - path_loss_db(d, radio, 1.0), 20 * std::log10(2.0), 1e-12);
}

TEST(PathLoss, GroupGapIsExcessLossDifference)
{
    EXPECT_NEAR(path_loss_db(300.0, radio, sub.eta_nlos) - path_loss_db(300.0, radio, sub.eta_los), 23.8, 1e-12);
}

TEST(PathLoss, RejectsZeroDistance)
{
    EXPECT_THROW(path_loss_db(0.0, radio, 0.2), model_domain_error);
}

TEST(LosProbability, AtParameterA)
{
    EXPECT_NEAR(los_probability(sub.a, sub), 0.17006802721088435, 1e-15);
}

TEST(LosProbability, ZenithSaturates)
{
    EXPECT_NEAR(los_probability(90.0, sub), 1.0, 1e-9);
    EXPECT_LT(los_probability(90.0, sub), 1.0 + 1e-15);
}

TEST(LosProbability, MonotoneForAllProfiles)
{
    for (const auto& env : {EnvironmentProfile::suburban(), EnvironmentProfile::urban(), EnvironmentProfile::dense_urban()}) {
        double prev = los_probability(0.0, env);
        EXPECT_GT(prev, 0.0);
        for (int k = 1; k <= 900; ++k) {
            const double p = los_probability(k / 10.0, env);
            EXPECT_GE(p, prev);
            EXPECT_LE(p, 1.0);
            prev = p;
        }
    }
}

TEST(Elevation, OverheadIsNinety)
{
    EXPECT_EQ(elevation_deg({5, 5, 40}, {5, 5, 0}), 90.0);
    EXPECT_NEAR(elevation_deg({0, 0, 100}, {100, 0, 0}), 45.0, 1e-12);
}

TEST(SpectralEfficiency, OverheadHundredMetres)
{
    const auto lb = link_budget({0, 0, 100}, {0, 0, 0}, radio, sub);
    EXPECT_NEAR(lb.se_los, 10.986018092502045, 1e-9);
    EXPECT_NEAR(lb.se_nlos, 3.2404631295001964, 1e-9);
    EXPECT_NEAR(lb.expected_se, 10.98601809250204, 1e-9);
    const double snr_db = 10 * std::log10(radio.tx_power_w / (radio.noise_power_w * std::pow(10.0, path_loss_db(100.0, radio, 0.2) / 10.0)));
    EXPECT_NEAR(snr_db, 33.069068, 1e-5);
}

TEST(SpectralEfficiency, ConvexCombinationBounds)
{
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> xy(-800.0, 800.0), z(20.0, 100.0);
    for (const auto& env : {EnvironmentProfile::suburban(), EnvironmentProfile::urban(), EnvironmentProfile::dense_urban()})
        for (int k = 0; k < 2000; ++k) {
            const auto lb = link_budget({xy(rng), xy(rng), z(rng)}, {0, 0, 0}, radio, env);
            EXPECT_LE(lb.se_nlos, lb.expected_se + 1e-12);
            EXPECT_LE(lb.expected_se, lb.se_los + 1e-12);
            EXPECT_GT(lb.los_probability, 0.0);
            EXPECT_LE(lb.los_probability, 1.0);
        }
}

TEST(SpectralEfficiency, NonincreasingWithDistanceAtFixedElevation)
{
    for (const auto& env : {EnvironmentProfile::suburban(), EnvironmentProfile::urban(), EnvironmentProfile::dense_urban()}) {
        double prev = expected_spectral_efficiency({10, 0, 10}, {0, 0, 0}, radio, env);
        for (double s = 2.0; s <= 60.0; s += 1.0) {
            const double se = expected_spectral_efficiency({10 * s, 0, 10 * s}, {0, 0, 0}, radio, env);
            EXPECT_LE(se, prev + 1e-12);
            prev = se;
        }
    }
}

TEST(Profiles, FromName)
{
    EXPECT_EQ(EnvironmentProfile::from_name("urban").a, 9.61);
    EXPECT_EQ(EnvironmentProfile::from_name("dense-urban").eta_nlos, 26.0);
    EXPECT_THROW(EnvironmentProfile::from_name("rural"), contract_error);
}
