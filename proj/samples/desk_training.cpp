// Trains a small agent on the desk preset and compares it with the hover
// baseline on the same layout.

#include <cstdio>
#include <cstdlib>

#include "pap/baselines.hpp"
#include "pap/harness/config.hpp"
#include "pap/td3.hpp"

int main(int argc, char** argv)
{
    const std::size_t episodes = argc > 1 ? std::strtoul(argv[1], nullptr, 10) : 200;
    const std::uint64_t seed = argc > 2 ? std::strtoull(argv[2], nullptr, 10) : 1;
    const pap::RunConfig cfg = pap::desk_preset();
    const pap::Scenario& s = cfg.scenario;

    pap::Td3Trainer trainer(s.observation_dim(), cfg.td3, seed);
    pap::PapEnv env(s);
    const auto before = pap::evaluate_policy(trainer.agent().actor, env).metrics;
    for (std::size_t k = 1; k <= episodes; ++k) {
        trainer.train_episode(env);
        if (k % 20 == 0) {
            const auto m = pap::evaluate_policy(trainer.agent().actor, env).metrics;
            std::printf("episode %4zu  eval FEE %.4g Mbit/J  FI %.3f  %zu slots\n", k, m.fee / 1e6, m.fairness, m.steps);
        }
    }
    const auto after = pap::evaluate_policy(trainer.agent().actor, env).metrics;
    const auto hover = pap::hover_baseline(s).metrics;
    std::printf("untrained %.4g, trained %.4g, hover baseline %.4g Mbit/J\n", before.fee / 1e6, after.fee / 1e6,
                hover.fee / 1e6);
}
