#pragma once

// Twin-delayed deep deterministic policy gradient.

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <span>
#include <vector>

#include "pap/common.hpp"
#include "pap/env.hpp"
#include "pap/geometry.hpp"
#include "pap/metrics.hpp"
#include "pap/neuralnet.hpp"

namespace pap {

inline constexpr std::size_t kActionDim = 3;

/// Independent generator for one purpose (init, exploration, sampling, ...).
inline std::mt19937_64 rng_stream(std::uint64_t seed, std::uint64_t stream)
{
    std::seed_seq seq{std::uint32_t(seed), std::uint32_t(seed >> 32), std::uint32_t(stream),
                      std::uint32_t(stream >> 32)};
    return std::mt19937_64(seq);
}

namespace streams {
inline constexpr std::uint64_t init = 1;
inline constexpr std::uint64_t exploration = 2;
inline constexpr std::uint64_t sampling = 3;
inline constexpr std::uint64_t smoothing = 4;
inline constexpr std::uint64_t train_layout = 5;
inline constexpr std::uint64_t eval_layout = 6;
inline constexpr std::uint64_t test_layout = 7;
} // namespace streams

struct Transition {
    std::vector<double> state;
    Action action{};
    double reward = 0.0;
    std::vector<double> next_state;
    bool done = false;
};

/// Column-major minibatch.
struct Batch {
    Eigen::MatrixXd states;      // dim x B
    Eigen::MatrixXd actions;     // 3 x B
    Eigen::VectorXd rewards;     // B
    Eigen::MatrixXd next_states; // dim x B
    Eigen::VectorXd done;        // B, 1.0 for terminal

    Eigen::Index size() const { return rewards.size(); }
};

class ReplayBuffer {
public:
    explicit ReplayBuffer(std::size_t capacity) : capacity_(capacity)
    {
        require(capacity > 0, "replay buffer capacity must be positive");
    }

    std::size_t size() const { return data_.size(); }
    std::size_t capacity() const { return capacity_; }
    const Transition& operator[](std::size_t i) const { return data_.at(i); }

    void push(Transition t)
    {
        if (data_.size() < capacity_) {
            data_.push_back(std::move(t));
        } else {
            data_[next_] = std::move(t);
        }
        next_ = (next_ + 1) % capacity_;
    }

    template <typename Rng>
    std::vector<std::size_t> sample_indices(std::size_t batch, Rng& rng) const
    {
        require(batch > 0 && data_.size() >= batch, "replay buffer holds fewer transitions than the batch size");
        std::uniform_int_distribution<std::size_t> pick(0, data_.size() - 1);
        std::vector<std::size_t> idx(batch);
        for (auto& i : idx)
            i = pick(rng);
        return idx;
    }

    template <typename Rng>
    Batch sample(std::size_t batch, Rng& rng) const
    {
        return gather(sample_indices(batch, rng));
    }

    Batch gather(std::span<const std::size_t> idx) const
    {
        require(!idx.empty(), "empty batch");
        const auto dim = Eigen::Index(data_.at(idx[0]).state.size());
        const auto n = Eigen::Index(idx.size());
        Batch b;
        b.states.resize(dim, n);
        b.next_states.resize(dim, n);
        b.actions.resize(Eigen::Index(kActionDim), n);
        b.rewards.resize(n);
        b.done.resize(n);
        for (Eigen::Index c = 0; c < n; ++c) {
            const Transition& t = data_.at(idx[std::size_t(c)]);
            b.states.col(c) = Eigen::Map<const Eigen::VectorXd>(t.state.data(), dim);
            b.next_states.col(c) = Eigen::Map<const Eigen::VectorXd>(t.next_state.data(), dim);
            for (std::size_t k = 0; k < kActionDim; ++k)
                b.actions(Eigen::Index(k), c) = t.action[k];
            b.rewards(c) = t.reward;
            b.done(c) = t.done ? 1.0 : 0.0;
        }
        return b;
    }

private:
    std::vector<Transition> data_;
    std::size_t capacity_;
    std::size_t next_ = 0;
};

enum class CriticActionSource { stored, policy };

struct Td3Config {
    double gamma = 0.99;
    double tau = 0.001;
    int policy_delay = 2;
    double expl_noise_sigma = 0.1;
    double smooth_noise_sigma = 0.2;
    double smooth_clip = 0.5;
    double action_min = -1.0;
    double action_max = 1.0;
    double actor_lr = 1e-4;
    double critic_lr = 1e-3;
    std::size_t batch_size = 64;
    std::size_t buffer_capacity = 200'000;
    std::size_t warmup_steps = 1000;
    std::vector<std::size_t> hidden = {256, 512, 512};
    // Table III lists a rectifier on the critic output; identity by default.
    bool critic_relu_output = false;
    CriticActionSource critic_action = CriticActionSource::stored;
    // Multiplies environment rewards before they enter the buffer.
    double reward_scale = 1.0;
    // Gradient updates per environment step once the buffer holds a batch.
    std::size_t updates_per_step = 1;

    void validate() const
    {
        require(gamma > 0.0 && gamma <= 1.0, "gamma must lie in (0, 1]");
        require(tau > 0.0 && tau < 1.0, "tau must lie in (0, 1)");
        require(policy_delay >= 1, "policy delay must be at least 1");
        require(expl_noise_sigma >= 0.0, "exploration noise must be nonnegative");
        require(smooth_noise_sigma >= 0.0, "smoothing noise must be nonnegative");
        require(smooth_clip >= 0.0, "smoothing clip must be nonnegative");
        require(action_min < action_max, "action bounds are inverted");
        require_positive(actor_lr, "actor learning rate");
        require_positive(critic_lr, "critic learning rate");
        require(batch_size > 0, "batch size must be positive");
        require(buffer_capacity >= batch_size, "replay buffer must hold at least one batch");
        require_positive(reward_scale, "reward scale");
        require(updates_per_step >= 1, "updates per step must be at least 1");
    }
};

inline Action clip_action(Action a, double lo = -1.0, double hi = 1.0)
{
    for (double& x : a)
        x = std::clamp(x, lo, hi);
    return a;
}

inline Eigen::MatrixXd to_column(std::span<const double> x)
{
    return Eigen::Map<const Eigen::VectorXd>(x.data(), Eigen::Index(x.size()));
}

/// Policy action plus Gaussian exploration noise, clipped to [-1, 1]^3.
template <typename Rng>
Action select_action(const Mlp& actor, std::span<const double> state, double sigma, Rng& rng)
{
    const auto mu = actor(state);
    require(mu.size() == kActionDim, "actor must output three action components");
    Action a{mu[0], mu[1], mu[2]};
    if (sigma > 0.0) {
        std::normal_distribution<double> noise(0.0, sigma);
        for (double& x : a)
            x += noise(rng);
    }
    return clip_action(a);
}

/// Target-policy smoothing for a batch of next states.
template <typename Rng>
Eigen::MatrixXd smoothed_target_actions(const Mlp& target_actor, const Eigen::MatrixXd& next_states,
                                        const Td3Config& cfg, Rng& rng)
{
    Eigen::MatrixXd a = target_actor.forward(next_states);
    std::normal_distribution<double> noise(0.0, 1.0);
    for (Eigen::Index c = 0; c < a.cols(); ++c)
        for (Eigen::Index r = 0; r < a.rows(); ++r) {
            const double eps = std::clamp(cfg.smooth_noise_sigma * noise(rng), -cfg.smooth_clip, cfg.smooth_clip);
            a(r, c) = std::clamp(a(r, c) + eps, cfg.action_min, cfg.action_max);
        }
    return a;
}

template <typename Rng>
Action smoothed_target_action(const Mlp& target_actor, std::span<const double> next_state, const Td3Config& cfg,
                              Rng& rng)
{
    const Eigen::MatrixXd a = smoothed_target_actions(target_actor, to_column(next_state), cfg, rng);
    return {a(0, 0), a(1, 0), a(2, 0)};
}

inline Eigen::MatrixXd critic_input(const Eigen::MatrixXd& states, const Eigen::MatrixXd& actions)
{
    Eigen::MatrixXd x(states.rows() + actions.rows(), states.cols());
    x << states, actions;
    return x;
}

struct TwinBootstrap {
    Eigen::VectorXd q1, q2, target;
};

/// Clipped double-Q targets y = r + gamma (1 - d) min(Q1', Q2') at smoothed target actions.
inline TwinBootstrap bootstrap_targets(const Eigen::VectorXd& rewards, const Eigen::VectorXd& done,
                                       const Eigen::MatrixXd& next_states, const Eigen::MatrixXd& target_actions,
                                       const Mlp& critic1_target, const Mlp& critic2_target, double gamma)
{
    const Eigen::MatrixXd x = critic_input(next_states, target_actions);
    TwinBootstrap b;
    b.q1 = critic1_target.forward(x).row(0).transpose();
    b.q2 = critic2_target.forward(x).row(0).transpose();
    b.target = rewards.array() + gamma * (1.0 - done.array()) * b.q1.cwiseMin(b.q2).array();
    return b;
}

template <typename Rng>
double compute_target(double reward, bool done, std::span<const double> next_state, const Mlp& critic1_target,
                      const Mlp& critic2_target, const Mlp& target_actor, const Td3Config& cfg, Rng& rng)
{
    if (done)
        return reward;
    const Eigen::MatrixXd s = to_column(next_state);
    const Eigen::MatrixXd a = smoothed_target_actions(target_actor, s, cfg, rng);
    Eigen::VectorXd r(1), d(1);
    r << reward;
    d << 0.0;
    return bootstrap_targets(r, d, s, a, critic1_target, critic2_target, cfg.gamma).target(0);
}

struct CriticLosses {
    double critic1 = 0.0;
    double critic2 = 0.0;
};

/// One optimizer step per critic on the mean squared error to the shared targets.
inline CriticLosses critic_update(const Eigen::MatrixXd& states, const Eigen::MatrixXd& actions,
                                  const Eigen::VectorXd& targets, Mlp& critic1, Mlp& critic2, AdamState& opt1,
                                  AdamState& opt2)
{
    const Eigen::MatrixXd x = critic_input(states, actions);
    const double inv_b = 1.0 / double(targets.size());
    CriticLosses losses;
    auto one = [&](Mlp& critic, AdamState& opt) {
        ForwardCache cache;
        const Eigen::MatrixXd q = critic.forward(x, cache);
        const Eigen::RowVectorXd err = q.row(0) - targets.transpose();
        const Eigen::MatrixXd dq = 2.0 * inv_b * err;
        opt.step(critic, critic.backward(cache, dq));
        return err.squaredNorm() * inv_b;
    };
    losses.critic1 = one(critic1, opt1);
    losses.critic2 = one(critic2, opt2);
    return losses;
}

inline CriticLosses critic_update(const Batch& batch, const Eigen::VectorXd& targets, Mlp& critic1, Mlp& critic2,
                                  AdamState& opt1, AdamState& opt2)
{
    return critic_update(batch.states, batch.actions, targets, critic1, critic2, opt1, opt2);
}

/// One ascent step on mean Q1(s, mu(s)); the critic is only read. Returns the
/// objective before the step.
inline double actor_update(const Eigen::MatrixXd& states, Mlp& actor, const Mlp& critic1, AdamState& opt)
{
    ForwardCache actor_cache, critic_cache;
    const Eigen::MatrixXd a = actor.forward(states, actor_cache);
    const Eigen::MatrixXd q = critic1.forward(critic_input(states, a), critic_cache);
    const double inv_b = 1.0 / double(states.cols());
    Eigen::MatrixXd dx;
    critic1.backward(critic_cache, Eigen::MatrixXd::Constant(1, states.cols(), -inv_b), &dx, false);
    const Eigen::MatrixXd da = dx.bottomRows(a.rows());
    opt.step(actor, actor.backward(actor_cache, da));
    return q.mean();
}

inline double actor_update(const Batch& batch, Mlp& actor, const Mlp& critic1, AdamState& opt)
{
    return actor_update(batch.states, actor, critic1, opt);
}

inline void soft_update(Mlp& target, const Mlp& online, double tau) { polyak_update(target, online, tau); }

class Td3Agent {
public:
    Td3Agent() = default;

    template <typename Rng>
    Td3Agent(std::size_t state_dim, Td3Config cfg, Rng& init_rng) : cfg_(std::move(cfg))
    {
        cfg_.validate();
        require(state_dim > 0, "state dimension must be positive");
        actor = Mlp::build(state_dim, cfg_.hidden, kActionDim, Activation::relu, Activation::tanh, init_rng);
        const Activation q_out = cfg_.critic_relu_output ? Activation::relu : Activation::identity;
        critic1 = Mlp::build(state_dim + kActionDim, cfg_.hidden, 1, Activation::relu, q_out, init_rng);
        critic2 = Mlp::build(state_dim + kActionDim, cfg_.hidden, 1, Activation::relu, q_out, init_rng);
        actor_target = actor;
        critic1_target = critic1;
        critic2_target = critic2;
        actor_opt = AdamState(actor, AdamConfig{cfg_.actor_lr});
        critic1_opt = AdamState(critic1, AdamConfig{cfg_.critic_lr});
        critic2_opt = AdamState(critic2, AdamConfig{cfg_.critic_lr});
    }

    const Td3Config& config() const { return cfg_; }
    std::size_t updates() const { return updates_; }

    /// One critic step, and every K-th call an actor step plus target blending.
    template <typename Rng>
    CriticLosses update(const Batch& batch, Rng& smoothing_rng)
    {
        const Eigen::MatrixXd a_next = smoothed_target_actions(actor_target, batch.next_states, cfg_, smoothing_rng);
        const TwinBootstrap y = bootstrap_targets(batch.rewards, batch.done, batch.next_states, a_next, critic1_target,
                                                  critic2_target, cfg_.gamma);
        const Eigen::MatrixXd q_actions =
            cfg_.critic_action == CriticActionSource::stored ? batch.actions : actor.forward(batch.states);
        const CriticLosses losses =
            critic_update(batch.states, q_actions, y.target, critic1, critic2, critic1_opt, critic2_opt);
        ++updates_;
        if (updates_ % std::size_t(cfg_.policy_delay) == 0) {
            actor_update(batch.states, actor, critic1, actor_opt);
            soft_update(actor_target, actor, cfg_.tau);
            soft_update(critic1_target, critic1, cfg_.tau);
            soft_update(critic2_target, critic2, cfg_.tau);
        }
        return losses;
    }

    Mlp actor, actor_target;
    Mlp critic1, critic2, critic1_target, critic2_target;
    AdamState actor_opt, critic1_opt, critic2_opt;

private:
    Td3Config cfg_;
    std::size_t updates_ = 0;
};

struct EpisodeResult {
    EpisodeMetrics metrics;
    double total_reward = 0.0;
    std::uint64_t scenario_hash = 0;
};

/// Frozen-policy rollout: no noise, no learning.
inline EpisodeResult evaluate_policy(const Mlp& actor, PapEnv& env)
{
    env.reset();
    EpisodeResult r;
    r.scenario_hash = env.scenario().fingerprint();
    std::mt19937_64 unused;
    while (!env.done()) {
        const auto obs = env.observation();
        r.total_reward += env.step(select_action(actor, obs, 0.0, unused)).reward;
    }
    r.metrics = env.metrics();
    return r;
}

/// Drives Algorithm-2 style training one episode at a time, so callers can
/// interleave frozen-policy evaluations.
class Td3Trainer {
public:
    Td3Trainer(std::size_t state_dim, Td3Config cfg, std::uint64_t seed)
        : init_rng_(rng_stream(seed, streams::init)),
          explore_rng_(rng_stream(seed, streams::exploration)),
          sample_rng_(rng_stream(seed, streams::sampling)),
          smooth_rng_(rng_stream(seed, streams::smoothing)),
          agent_(state_dim, cfg, init_rng_),
          buffer_(cfg.buffer_capacity)
    {
    }

    Td3Agent& agent() { return agent_; }
    const Td3Agent& agent() const { return agent_; }
    const ReplayBuffer& buffer() const { return buffer_; }
    std::size_t env_steps() const { return env_steps_; }

    EpisodeResult train_episode(PapEnv& env)
    {
        const Td3Config& cfg = agent_.config();
        require(env.observation_dim() == agent_.actor.input_dim(), "environment does not match the agent's input size");
        std::uniform_real_distribution<double> uniform(-1.0, 1.0);
        env.reset();
        EpisodeResult r;
        r.scenario_hash = env.scenario().fingerprint();
        while (!env.done()) {
            Transition t;
            t.state = env.observation();
            if (env_steps_ < cfg.warmup_steps)
                t.action = {uniform(explore_rng_), uniform(explore_rng_), uniform(explore_rng_)};
            else
                t.action = select_action(agent_.actor, t.state, cfg.expl_noise_sigma, explore_rng_);
            const StepOutcome out = env.step(t.action);
            r.total_reward += out.reward;
            t.reward = cfg.reward_scale * out.reward;
            t.next_state = out.next_state.observation(env.scenario());
            t.done = out.done;
            buffer_.push(std::move(t));
            ++env_steps_;
            if (buffer_.size() >= cfg.batch_size)
                for (std::size_t u = 0; u < cfg.updates_per_step; ++u)
                    agent_.update(buffer_.sample(cfg.batch_size, sample_rng_), smooth_rng_);
        }
        r.metrics = env.metrics();
        return r;
    }

private:
    std::mt19937_64 init_rng_, explore_rng_, sample_rng_, smooth_rng_;
    Td3Agent agent_;
    ReplayBuffer buffer_;
    std::size_t env_steps_ = 0;
};

struct TrainResult {
    Mlp actor;
    std::vector<EpisodeResult> curve;
};

/// Trains for `episodes` episodes; `env_factory(k)` supplies the environment
/// for training episode k.
inline TrainResult train(const std::function<PapEnv(std::size_t)>& env_factory, const Td3Config& cfg,
                         std::size_t episodes, std::uint64_t seed)
{
    PapEnv probe = env_factory(0);
    Td3Trainer trainer(probe.observation_dim(), cfg, seed);
    TrainResult out;
    for (std::size_t k = 0; k < episodes; ++k) {
        PapEnv env = k == 0 ? std::move(probe) : env_factory(k);
        out.curve.push_back(trainer.train_episode(env));
    }
    out.actor = trainer.agent().actor;
    return out;
}

} // namespace pap
