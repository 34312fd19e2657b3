#include <gtest/gtest.h>

#include <random>

#include "pap/harness/config.hpp"
#include "pap/td3.hpp"

using namespace pap;

namespace {

Transition make_transition(double tag, std::size_t dim = 4)
{
    Transition t;
    t.state.assign(dim, tag);
    t.next_state.assign(dim, tag + 0.5);
    t.action = {tag / 100, -tag / 100, 0.0};
    t.reward = tag;
    t.done = int(tag) % 2 == 1;
    return t;
}

// Critic trained to Q(s, a) = -(a0 - 0.3)^2 over inputs [s; a0; a1; a2].
Mlp quadratic_critic(std::mt19937_64& rng)
{
    Mlp critic = Mlp::build(4, {32, 32}, 1, Activation::tanh, Activation::identity, rng);
    AdamState opt(critic, AdamConfig{1e-2});
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int it = 0; it < 3000; ++it) {
        Eigen::MatrixXd x(4, 64);
        Eigen::RowVectorXd y(64);
        for (int c = 0; c < 64; ++c) {
            for (int r = 0; r < 4; ++r)
                x(r, c) = u(rng);
            y(c) = -(x(1, c) - 0.3) * (x(1, c) - 0.3);
        }
        ForwardCache cache;
        const Eigen::MatrixXd q = critic.forward(x, cache);
        opt.step(critic, critic.backward(cache, (2.0 / 64) * (q.row(0) - y)));
    }
    return critic;
}

} // namespace

TEST(ReplayBuffer, RingOverwritesOldest)
{
    ReplayBuffer buf(3);
    for (int k = 0; k < 5; ++k)
        buf.push(make_transition(k));
    ASSERT_EQ(buf.size(), 3u);
    EXPECT_EQ(buf[0].reward, 3.0);
    EXPECT_EQ(buf[1].reward, 4.0);
    EXPECT_EQ(buf[2].reward, 2.0);
}

TEST(ReplayBuffer, SamplingNeedsAFullBatch)
{
    ReplayBuffer buf(10);
    std::mt19937_64 rng(1);
    buf.push(make_transition(0));
    EXPECT_THROW(buf.sample(2, rng), contract_error);
    buf.push(make_transition(1));
    const Batch b = buf.sample(2, rng);
    EXPECT_EQ(b.size(), 2);
    EXPECT_EQ(b.states.rows(), 4);
    EXPECT_EQ(b.actions.rows(), 3);
}

TEST(ReplayBuffer, GatherPreservesFields)
{
    ReplayBuffer buf(10);
    for (int k = 0; k < 4; ++k)
        buf.push(make_transition(k));
    const std::vector<std::size_t> idx{3, 0};
    const Batch b = buf.gather(idx);
    EXPECT_EQ(b.rewards(0), 3.0);
    EXPECT_EQ(b.done(0), 1.0);
    EXPECT_EQ(b.done(1), 0.0);
    EXPECT_EQ(b.next_states(2, 0), 3.5);
    EXPECT_DOUBLE_EQ(b.actions(1, 0), -0.03);
}

TEST(ReplayBuffer, UniformSampling)
{
    ReplayBuffer buf(8);
    for (int k = 0; k < 8; ++k)
        buf.push(make_transition(k));
    std::mt19937_64 rng(2);
    std::vector<int> counts(8, 0);
    for (int it = 0; it < 4000; ++it)
        for (auto i : buf.sample_indices(8, rng))
            ++counts[i];
    for (int c : counts)
        EXPECT_NEAR(c, 4000, 300);
}

TEST(SelectAction, ClipsAndIsDeterministicWithoutNoise)
{
    std::mt19937_64 rng(3);
    const Mlp actor = Mlp::build(4, {8}, 3, Activation::relu, Activation::tanh, rng);
    const std::vector<double> s{0.1, 0.2, -0.3, 0.4};
    std::mt19937_64 a(7), b(8);
    EXPECT_EQ(select_action(actor, s, 0.0, a), select_action(actor, s, 0.0, b));
    for (int k = 0; k < 200; ++k)
        for (double x : select_action(actor, s, 5.0, a))
            EXPECT_TRUE(x >= -1.0 && x <= 1.0);
}

TEST(SmoothedTarget, ZeroClipGivesTargetAction)
{
    std::mt19937_64 rng(4);
    const Mlp actor = Mlp::build(4, {8}, 3, Activation::relu, Activation::tanh, rng);
    const std::vector<double> s{0.5, -0.5, 0.25, 0.0};
    Td3Config cfg;
    cfg.smooth_clip = 0.0;
    const auto mu = actor(s);
    const Action a = smoothed_target_action(actor, s, cfg, rng);
    for (std::size_t k = 0; k < 3; ++k)
        EXPECT_EQ(a[k], mu[k]);
    cfg.smooth_clip = 0.5;
    for (int it = 0; it < 100; ++it) {
        const Action n = smoothed_target_action(actor, s, cfg, rng);
        for (std::size_t k = 0; k < 3; ++k)
            EXPECT_LE(std::abs(n[k] - mu[k]), 0.5 + 1e-15);
    }
}

TEST(Target, DoneGivesReward)
{
    std::mt19937_64 rng(5);
    Td3Config cfg;
    cfg.hidden = {8};
    Td3Agent ag(4, cfg, rng);
    const std::vector<double> s{0.1, 0.2, 0.3, 0.4};
    EXPECT_EQ(compute_target(2.5, true, s, ag.critic1_target, ag.critic2_target, ag.actor_target, cfg, rng), 2.5);
}

TEST(Target, MinimumOfTwins)
{
    Eigen::VectorXd r(2), d(2);
    r << 1.0, 1.0;
    d << 0.0, 1.0;
    // Constant critics: zero weights with bias 5 and 3.
    auto constant = [](double q) {
        DenseLayer L{Eigen::MatrixXd::Zero(1, 7), Eigen::VectorXd::Constant(1, q), Activation::identity};
        return Mlp({L});
    };
    const Mlp c1 = constant(5.0), c2 = constant(3.0);
    const auto y = bootstrap_targets(r, d, Eigen::MatrixXd::Zero(4, 2), Eigen::MatrixXd::Zero(3, 2), c1, c2, 0.9);
    EXPECT_DOUBLE_EQ(y.target(0), 1.0 + 0.9 * 3.0);
    EXPECT_DOUBLE_EQ(y.target(1), 1.0);
    const auto swapped = bootstrap_targets(r, d, Eigen::MatrixXd::Zero(4, 2), Eigen::MatrixXd::Zero(3, 2), c2, c1, 0.9);
    EXPECT_EQ(swapped.target, y.target);
}

TEST(CriticUpdate, ReducesLossOnFixedTargets)
{
    std::mt19937_64 rng(6);
    Mlp c1 = Mlp::build(7, {16}, 1, Activation::relu, Activation::identity, rng);
    Mlp c2 = Mlp::build(7, {16}, 1, Activation::relu, Activation::identity, rng);
    AdamState o1(c1, AdamConfig{1e-2}), o2(c2, AdamConfig{1e-2});
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    Eigen::MatrixXd s(4, 32), a(3, 32);
    for (Eigen::Index c = 0; c < 32; ++c) {
        for (Eigen::Index r = 0; r < 4; ++r)
            s(r, c) = u(rng);
        for (Eigen::Index r = 0; r < 3; ++r)
            a(r, c) = u(rng);
    }
    const Eigen::VectorXd y = (s.row(0) + a.row(2)).transpose();
    const CriticLosses first = critic_update(s, a, y, c1, c2, o1, o2);
    CriticLosses last;
    for (int it = 0; it < 300; ++it)
        last = critic_update(s, a, y, c1, c2, o1, o2);
    EXPECT_LT(last.critic1, 0.1 * first.critic1);
    EXPECT_LT(last.critic2, 0.1 * first.critic2);
}

TEST(ActorUpdate, ConvergesToCriticMaximum)
{
    std::mt19937_64 rng(7);
    const Mlp critic = quadratic_critic(rng);
    Mlp actor = Mlp::build(1, {16}, 3, Activation::relu, Activation::tanh, rng);
    AdamState opt(actor, AdamConfig{1e-2});
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int it = 0; it < 500; ++it) {
        Eigen::MatrixXd s(1, 32);
        for (Eigen::Index c = 0; c < 32; ++c)
            s(0, c) = u(rng);
        actor_update(s, actor, critic, opt);
    }
    Eigen::MatrixXd s(1, 5);
    s << -1.0, -0.5, 0.0, 0.5, 1.0;
    const Eigen::MatrixXd a = actor.forward(s);
    for (Eigen::Index c = 0; c < 5; ++c)
        EXPECT_LT(std::abs(a(0, c) - 0.3), 0.05) << "state " << s(0, c);
}

TEST(ActorUpdate, ConstantCriticLeavesActorUnchanged)
{
    std::mt19937_64 rng(8);
    DenseLayer L{Eigen::MatrixXd::Zero(1, 5), Eigen::VectorXd::Constant(1, 1.0), Activation::identity};
    const Mlp critic({L});
    Mlp actor = Mlp::build(2, {4}, 3, Activation::relu, Activation::tanh, rng);
    const Mlp before = actor;
    AdamState opt(actor, AdamConfig{1e-2});
    actor_update(Eigen::MatrixXd::Ones(2, 8), actor, critic, opt);
    EXPECT_EQ(actor, before);
}

TEST(Agent, DelayedPolicyAndTargetUpdates)
{
    std::mt19937_64 rng(9);
    Td3Config cfg;
    cfg.hidden = {8};
    cfg.policy_delay = 2;
    cfg.tau = 0.5;
    Td3Agent ag(4, cfg, rng);
    ReplayBuffer buf(16);
    for (int k = 0; k < 8; ++k)
        buf.push(make_transition(k));
    const Mlp actor0 = ag.actor, critic_target0 = ag.critic1_target;
    ag.update(buf.sample(4, rng), rng);
    EXPECT_EQ(ag.actor, actor0);
    EXPECT_EQ(ag.critic1_target, critic_target0);
    EXPECT_FALSE(ag.critic1 == critic_target0);
    const Mlp critic_before = ag.critic1;
    const Mlp target_before = ag.critic1_target;
    ag.update(buf.sample(4, rng), rng);
    EXPECT_FALSE(ag.actor == actor0);
    Mlp expected = target_before;
    polyak_update(expected, ag.critic1, 0.5);
    EXPECT_EQ(ag.critic1_target, expected);
    EXPECT_EQ(ag.updates(), 2u);
    (void)critic_before;
}

TEST(Config, Validation)
{
    Td3Config cfg;
    EXPECT_NO_THROW(cfg.validate());
    cfg.gamma = 1.0;
    EXPECT_NO_THROW(cfg.validate());
    cfg.gamma = 0.0;
    EXPECT_THROW(cfg.validate(), contract_error);
    cfg = Td3Config{};
    cfg.tau = 1.0;
    EXPECT_THROW(cfg.validate(), contract_error);
    cfg = Td3Config{};
    cfg.updates_per_step = 0;
    EXPECT_THROW(cfg.validate(), contract_error);
}

TEST(RngStreams, IndependentAndReproducible)
{
    auto a = rng_stream(1, streams::exploration);
    auto b = rng_stream(1, streams::exploration);
    auto c = rng_stream(1, streams::sampling);
    auto d = rng_stream(2, streams::exploration);
    const auto x = a();
    EXPECT_EQ(x, b());
    EXPECT_NE(x, c());
    EXPECT_NE(x, d());
}

TEST(Trainer, ShortDeskRunIsDeterministic)
{
    RunConfig cfg = desk_preset(RunMode::train_offline);
    cfg.td3.warmup_steps = 100;
    auto run = [&] {
        Td3Trainer tr(cfg.scenario.observation_dim(), cfg.td3, 42);
        PapEnv env(cfg.scenario);
        std::vector<double> fees;
        for (int k = 0; k < 3; ++k)
            fees.push_back(tr.train_episode(env).metrics.fee);
        fees.push_back(evaluate_policy(tr.agent().actor, env).metrics.fee);
        return std::pair{fees, tr.buffer().size()};
    };
    const auto first = run();
    const auto second = run();
    EXPECT_EQ(first, second);
    EXPECT_GT(first.second, cfg.td3.batch_size);
}

TEST(Trainer, RejectsMismatchedEnvironment)
{
    RunConfig cfg = desk_preset(RunMode::train_offline);
    Td3Trainer tr(cfg.scenario.observation_dim() + 1, cfg.td3, 1);
    PapEnv env(cfg.scenario);
    EXPECT_THROW(tr.train_episode(env), contract_error);
}
