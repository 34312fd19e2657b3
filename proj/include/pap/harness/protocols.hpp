#pragma once

// Offline and online training protocols, frozen-policy evaluation and the
// baseline comparison, each writing its artifacts to one output directory.

#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <limits>
#include <string>
#include <vector>

#include "pap/baselines.hpp"
#include "pap/env.hpp"
#include "pap/harness/config.hpp"
#include "pap/harness/export.hpp"
#include "pap/neuralnet.hpp"
#include "pap/td3.hpp"

namespace pap {

struct RunArtifacts {
    std::filesystem::path dir;
    std::vector<MetricsRecord> records;
    Mlp best_actor;
    double best_eval_fee = -std::numeric_limits<double>::infinity();
    std::uint64_t best_seed = 0;
    std::size_t best_episode = 0;
};

namespace detail {

struct Recorder {
    MetricsLog log;
    std::vector<MetricsRecord>& out;

    void add(std::size_t episode, Phase phase, const EpisodeResult& r, std::uint64_t seed, std::string label = {})
    {
        add(MetricsRecord{episode, phase, r.metrics, seed, r.scenario_hash, std::move(label)});
    }
    void add(MetricsRecord rec)
    {
        log.append(rec);
        out.push_back(std::move(rec));
    }
};

inline Scenario with_nodes(Scenario s, std::vector<Position3> nodes)
{
    s.ground_nodes = std::move(nodes);
    return s;
}

inline std::vector<Scenario> random_scenarios(const Scenario& base, std::size_t count, std::size_t nodes,
                                              std::mt19937_64 rng)
{
    std::vector<Scenario> out;
    out.reserve(count);
    for (std::size_t k = 0; k < count; ++k)
        out.push_back(with_nodes(base, random_layout(nodes, base.area_side, rng)));
    return out;
}

inline void record_baselines(Recorder& rec, const Scenario& s, std::uint64_t seed, const std::filesystem::path& dir,
                             const std::string& suffix)
{
    for (const auto& [name, plan] : {std::pair{std::string("hover"), hover_plan(s)},
                                     std::pair{std::string("tsp"), tsp_plan(s)}}) {
        const auto ev = evaluate_trajectory(plan, s);
        rec.add(MetricsRecord{0, Phase::baseline, ev.metrics, seed, s.fingerprint(), name + suffix});
        export_trajectory(ev.record, s.motion.delta_t, dir / ("trajectory_" + name + suffix + ".csv"),
                          s.node_count());
    }
}

} // namespace detail

/// Trains on the configured fixed layout for every seed repetition, evaluating
/// the frozen policy before training and every `eval_every` episodes.
inline RunArtifacts run_offline(const RunConfig& cfg, const std::function<void(const std::string&)>& progress = {})
{
    cfg.validate();
    RunArtifacts art;
    art.dir = cfg.out_dir;
    write_config_snapshot(cfg, art.dir);
    detail::Recorder rec{MetricsLog(art.dir / "metrics.jsonl"), art.records};
    const Scenario& s = cfg.scenario;
    detail::record_baselines(rec, s, cfg.seed, art.dir, "");

    for (std::size_t rep = 0; rep < cfg.n_seed; ++rep) {
        const std::uint64_t seed = cfg.seed + rep;
        Td3Trainer trainer(s.observation_dim(), cfg.td3, seed);
        PapEnv env(s);
        auto evaluate = [&](std::size_t episode) {
            const EpisodeResult r = evaluate_policy(trainer.agent().actor, env);
            rec.add(episode, Phase::eval, r, seed);
            if (r.metrics.fee > art.best_eval_fee) {
                art.best_eval_fee = r.metrics.fee;
                art.best_actor = trainer.agent().actor;
                art.best_seed = seed;
                art.best_episode = episode;
            }
        };
        evaluate(0);
        for (std::size_t k = 1; k <= cfg.episodes; ++k) {
            rec.add(k, Phase::train, trainer.train_episode(env), seed);
            if (k % cfg.eval_every == 0 || k == cfg.episodes)
                evaluate(k);
        }
        if (progress)
            progress("seed " + std::to_string(seed) + " done");
    }
    save_checkpoint((art.dir / "actor_best.ckpt").string(), art.best_actor);
    PapEnv env(s);
    evaluate_policy(art.best_actor, env);
    export_trajectory(env.record(), s.motion.delta_t, art.dir / "trajectory_best.csv", s.node_count());
    return art;
}

/// Trains on a fresh random layout each episode; selects the actor with the
/// best mean FEE over the fixed evaluation layouts, then tests it on unseen
/// layouts with learning and exploration disabled.
inline RunArtifacts run_online(const RunConfig& cfg, const std::function<void(const std::string&)>& progress = {})
{
    cfg.validate();
    RunArtifacts art;
    art.dir = cfg.out_dir;
    write_config_snapshot(cfg, art.dir);
    detail::Recorder rec{MetricsLog(art.dir / "metrics.jsonl"), art.records};
    const Scenario& base = cfg.scenario;
    const std::size_t nodes = base.node_count();
    const auto eval_set =
        detail::random_scenarios(base, cfg.n_eval, nodes, rng_stream(cfg.seed, streams::eval_layout));

    for (std::size_t rep = 0; rep < cfg.n_seed; ++rep) {
        const std::uint64_t seed = cfg.seed + rep;
        Td3Trainer trainer(base.observation_dim(), cfg.td3, seed);
        std::mt19937_64 layout_rng = rng_stream(seed, streams::train_layout);
        auto evaluate = [&](std::size_t episode) {
            double sum = 0.0;
            for (std::size_t i = 0; i < eval_set.size(); ++i) {
                PapEnv env(eval_set[i]);
                const EpisodeResult r = evaluate_policy(trainer.agent().actor, env);
                rec.add(episode, Phase::eval, r, seed, "layout " + std::to_string(i));
                sum += r.metrics.fee;
            }
            const double mean = sum / double(eval_set.size());
            if (mean > art.best_eval_fee) {
                art.best_eval_fee = mean;
                art.best_actor = trainer.agent().actor;
                art.best_seed = seed;
                art.best_episode = episode;
            }
        };
        evaluate(0);
        for (std::size_t k = 1; k <= cfg.episodes; ++k) {
            PapEnv env(detail::with_nodes(base, random_layout(nodes, base.area_side, layout_rng)));
            rec.add(k, Phase::train, trainer.train_episode(env), seed);
            if (k % cfg.eval_every == 0 || k == cfg.episodes)
                evaluate(k);
        }
        if (progress)
            progress("seed " + std::to_string(seed) + " done");
    }
    save_checkpoint((art.dir / "actor_best.ckpt").string(), art.best_actor);
    const auto test_set = detail::random_scenarios(base, cfg.n_test, nodes, rng_stream(cfg.seed, streams::test_layout));
    for (std::size_t i = 0; i < test_set.size(); ++i) {
        PapEnv env(test_set[i]);
        rec.add(i, Phase::test, evaluate_policy(art.best_actor, env), art.best_seed);
        if (i == 0)
            export_trajectory(env.record(), base.motion.delta_t, art.dir / "trajectory_test0.csv", nodes);
    }
    return art;
}

/// Frozen-policy evaluation of a saved actor on the fixed layout and on
/// `n_test` random layouts.
inline RunArtifacts run_eval(const RunConfig& cfg)
{
    cfg.validate();
    if (cfg.checkpoint.empty())
        throw config_error("eval mode needs --checkpoint");
    RunArtifacts art;
    art.dir = cfg.out_dir;
    write_config_snapshot(cfg, art.dir);
    art.best_actor = load_checkpoint(cfg.checkpoint);
    const Scenario& s = cfg.scenario;
    if (art.best_actor.input_dim() != s.observation_dim() || art.best_actor.output_dim() != kActionDim)
        throw config_error("checkpoint dimensions do not match the scenario (" + std::to_string(s.observation_dim()) +
                           " inputs, 3 outputs expected)");
    detail::Recorder rec{MetricsLog(art.dir / "metrics.jsonl"), art.records};
    PapEnv env(s);
    const EpisodeResult fixed = evaluate_policy(art.best_actor, env);
    rec.add(0, Phase::eval, fixed, cfg.seed, "fixed layout");
    art.best_eval_fee = fixed.metrics.fee;
    export_trajectory(env.record(), s.motion.delta_t, art.dir / "trajectory_eval.csv", s.node_count());
    const auto test_set =
        detail::random_scenarios(s, cfg.n_test, s.node_count(), rng_stream(cfg.seed, streams::test_layout));
    for (std::size_t i = 0; i < test_set.size(); ++i) {
        PapEnv e(test_set[i]);
        rec.add(i, Phase::test, evaluate_policy(art.best_actor, e), cfg.seed);
    }
    return art;
}

struct BaselineRow {
    std::string baseline;
    EnvironmentProfile profile;
    EpisodeMetrics metrics;
};

/// Both baselines under each of the three environment profiles.
inline std::vector<BaselineRow> run_baselines(const RunConfig& cfg)
{
    cfg.validate();
    const std::filesystem::path dir = cfg.out_dir;
    write_config_snapshot(cfg, dir);
    std::vector<MetricsRecord> records;
    detail::Recorder rec{MetricsLog(dir / "metrics.jsonl"), records};
    std::vector<BaselineRow> rows;
    for (const char* name : {"suburban", "urban", "dense-urban"}) {
        Scenario s = cfg.scenario;
        s.profile = EnvironmentProfile::from_name(name);
        detail::record_baselines(rec, s, cfg.seed, dir, std::string("_") + name);
        for (std::size_t k = records.size() - 2; k < records.size(); ++k)
            rows.push_back({records[k].label.substr(0, records[k].label.find('_')), s.profile, records[k].metrics});
    }
    auto os = detail::open_out(dir / "baselines.csv");
    os << "baseline,profile,a,b,eta_los_db,eta_nlos_db,fee_bits_per_j,fi,ee_bits_per_j,airtime_s,steps,completed\n";
    using detail::shortest;
    for (const auto& r : rows)
        os << r.baseline << ',' << r.profile.name << ',' << shortest(r.profile.a) << ',' << shortest(r.profile.b) << ','
           << shortest(r.profile.eta_los) << ',' << shortest(r.profile.eta_nlos) << ',' << shortest(r.metrics.fee)
           << ',' << shortest(r.metrics.fairness) << ',' << shortest(r.metrics.energy_efficiency) << ','
           << shortest(r.metrics.airtime_s) << ',' << r.metrics.steps << ',' << (r.metrics.completed ? 1 : 0) << '\n';
    return rows;
}

} // namespace pap
