#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "pap/harness/config.hpp"
#include "pap/harness/export.hpp"
#include "pap/harness/protocols.hpp"

using namespace pap;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir(const std::string& name)
{
    const auto dir = fs::temp_directory_path() / ("pap_harness_" + name);
    fs::remove_all(dir);
    return dir;
}

RunConfig tiny_desk(RunMode mode, const fs::path& out)
{
    RunConfig c = desk_preset(mode);
    c.episodes = 3;
    c.eval_every = 2;
    c.n_seed = 2;
    c.n_eval = 2;
    c.n_test = 3;
    c.td3.warmup_steps = 50;
    c.out_dir = out.string();
    return c;
}

} // namespace

TEST(Config, ModeNames)
{
    for (RunMode m : {RunMode::train_offline, RunMode::train_online, RunMode::eval, RunMode::baseline})
        EXPECT_EQ(parse_mode(to_string(m)), m);
    EXPECT_THROW(parse_mode("sideways"), config_error);
}

TEST(Config, Presets)
{
    const RunConfig p = paper_preset();
    EXPECT_EQ(p.scenario.node_count(), 16u);
    EXPECT_EQ(p.td3.hidden, (std::vector<std::size_t>{256, 512, 512}));
    EXPECT_EQ(paper_preset(RunMode::train_online).n_seed, 8u);
    const RunConfig d = desk_preset();
    EXPECT_EQ(d.scenario.node_count(), 4u);
    EXPECT_EQ(d.scenario.area_side, 200.0);
    EXPECT_NO_THROW(d.validate());
    EXPECT_THROW(preset("huge", RunMode::eval), config_error);
}

TEST(Config, SnapshotRoundTrip)
{
    RunConfig c = desk_preset(RunMode::train_online);
    c.scenario.profile = EnvironmentProfile::dense_urban();
    c.td3.tau = 0.0123456789012345;
    c.td3.hidden = {17, 9};
    c.seed = 99;
    c.scenario.serve_during_return = true;
    std::stringstream ss;
    write_config(c, ss);
    const auto path = fs::temp_directory_path() / "pap_config_roundtrip.ini";
    {
        std::ofstream os(path);
        os << ss.str();
    }
    const RunConfig back = load_config(path.string());
    fs::remove(path);
    EXPECT_EQ(back.mode, RunMode::train_online);
    EXPECT_EQ(back.scenario.profile.name, "dense-urban");
    EXPECT_EQ(back.td3.tau, c.td3.tau);
    EXPECT_EQ(back.td3.hidden, c.td3.hidden);
    EXPECT_EQ(back.seed, 99u);
    EXPECT_TRUE(back.scenario.serve_during_return);
    EXPECT_EQ(back.scenario.fingerprint(), c.scenario.fingerprint());
    std::stringstream again;
    write_config(back, again);
    EXPECT_EQ(again.str(), ss.str());
}

TEST(Config, IniOverridesAndErrors)
{
    RunConfig c = paper_preset();
    std::istringstream ini("[scenario]\narea_side = 500\ngrid_per_side = 3\n[td3]\ngamma = 0.9\n[profile]\nname = urban\n");
    apply_ini(c, ini);
    EXPECT_EQ(c.scenario.node_count(), 9u);
    EXPECT_EQ(c.td3.gamma, 0.9);
    EXPECT_EQ(c.scenario.profile.name, "urban");
    std::istringstream bad_value("[td3]\ngamma = fast\n");
    EXPECT_THROW(apply_ini(c, bad_value), config_error);
    std::istringstream bad_profile("[profile]\nname = lunar\n");
    EXPECT_THROW(apply_ini(c, bad_profile), std::exception);
    EXPECT_THROW(load_config("/nonexistent/pap.ini"), config_error);
    c.td3.gamma = 1.5;
    EXPECT_THROW(c.validate(), config_error);
}

TEST(Trajectory, CsvRoundTrip)
{
    const Scenario s = desk_preset().scenario;
    const auto ev = hover_baseline(s);
    const auto dir = scratch_dir("csv");
    export_trajectory(ev.record, s.motion.delta_t, dir / "t.csv", s.node_count());
    const auto rows = read_trajectory(dir / "t.csv");
    EXPECT_EQ(rows, trajectory_rows(ev.record, s.motion.delta_t));
    ASSERT_EQ(rows.size(), ev.record.slots.size());
    EXPECT_EQ(rows.back().cumulative_bits.size(), s.node_count());
    std::ifstream in(dir / "t.csv");
    std::string header;
    std::getline(in, header);
    EXPECT_EQ(std::count(header.begin(), header.end(), ',') + 1, long(12 + s.node_count()));
    fs::remove_all(dir);
}

TEST(Trajectory, EmptyRecordWritesHeaderOnly)
{
    const auto dir = scratch_dir("empty");
    export_trajectory(EpisodeRecord{}, 1.0, dir / "e.csv", 4);
    std::ifstream in(dir / "e.csv");
    std::string line;
    int lines = 0;
    while (std::getline(in, line))
        ++lines;
    EXPECT_EQ(lines, 1);
    EXPECT_TRUE(read_trajectory(dir / "e.csv").empty());
    fs::remove_all(dir);
}

TEST(Trajectory, MalformedInput)
{
    std::istringstream short_header("a,b,c\n");
    EXPECT_THROW(read_trajectory(short_header), std::runtime_error);
    std::istringstream bad_cell("slot,t_s,x,y,z,speed,elevation_rad,azimuth_rad,power_W,voltage_V,remaining_time_s,energy_J\n"
                                "0,0,1,2,3,4,5,6,7,8,nine,10\n");
    EXPECT_THROW(read_trajectory(bad_cell), std::runtime_error);
}

TEST(Metrics, JsonlRoundTrip)
{
    const auto dir = scratch_dir("jsonl");
    std::vector<MetricsRecord> recs;
    for (std::size_t k = 0; k < 3; ++k) {
        MetricsRecord r;
        r.episode = k;
        r.phase = k == 2 ? Phase::eval : Phase::train;
        r.metrics = {3.1e6 + double(k), 0.9, 3.4e6, 145.0, 145, true};
        r.seed = 7;
        r.scenario_hash = 0xfedcba9876543210ull;
        r.label = k == 1 ? "hover" : "";
        recs.push_back(r);
    }
    export_metrics(recs, dir / "m.jsonl");
    const auto back = read_metrics(dir / "m.jsonl");
    ASSERT_EQ(back.size(), 3u);
    for (std::size_t k = 0; k < 3; ++k) {
        EXPECT_EQ(back[k].episode, k);
        EXPECT_EQ(back[k].phase, recs[k].phase);
        EXPECT_EQ(back[k].metrics.fee, recs[k].metrics.fee);
        EXPECT_EQ(back[k].scenario_hash, recs[k].scenario_hash);
        EXPECT_EQ(back[k].label, recs[k].label);
    }
    fs::remove_all(dir);
}

TEST(Protocols, OfflineRunWritesArtifacts)
{
    const auto dir = scratch_dir("offline");
    const RunArtifacts art = run_offline(tiny_desk(RunMode::train_offline, dir));
    for (const char* f : {"config.ini", "metrics.jsonl", "actor_best.ckpt", "trajectory_best.csv", "trajectory_hover.csv",
                          "trajectory_tsp.csv"})
        EXPECT_TRUE(fs::exists(dir / f)) << f;
    const auto recs = read_metrics(dir / "metrics.jsonl");
    EXPECT_EQ(recs.size(), art.records.size());
    // Two baselines, then per seed: eval at 0, 2, 3 and three training episodes.
    EXPECT_EQ(recs.size(), 2u + 2u * (3u + 3u));
    EXPECT_EQ(load_checkpoint((dir / "actor_best.ckpt").string()), art.best_actor);
    fs::remove_all(dir);
}

TEST(Protocols, OnlineRunAndEvalReuseCheckpoint)
{
    const auto dir = scratch_dir("online");
    const RunArtifacts art = run_online(tiny_desk(RunMode::train_online, dir / "train"));
    std::size_t tests = 0;
    for (const auto& r : art.records)
        tests += r.phase == Phase::test;
    EXPECT_EQ(tests, 3u);
    RunConfig ev = tiny_desk(RunMode::eval, dir / "eval");
    ev.checkpoint = (dir / "train" / "actor_best.ckpt").string();
    const RunArtifacts e = run_eval(ev);
    EXPECT_EQ(e.best_actor, art.best_actor);
    EXPECT_TRUE(fs::exists(dir / "eval" / "trajectory_eval.csv"));
    ev.scenario.ground_nodes.pop_back();
    EXPECT_THROW(run_eval(ev), config_error);
    fs::remove_all(dir);
}

TEST(Protocols, BaselinesAcrossProfiles)
{
    const auto dir = scratch_dir("baselines");
    RunConfig c = desk_preset(RunMode::baseline);
    c.out_dir = dir.string();
    const auto rows = run_baselines(c);
    ASSERT_EQ(rows.size(), 6u);
    EXPECT_EQ(rows[0].baseline, "hover");
    EXPECT_EQ(rows[1].baseline, "tsp");
    EXPECT_EQ(rows[4].profile.name, "dense-urban");
    // Harsher propagation lowers throughput for the same flight.
    EXPECT_GT(rows[0].metrics.fee, rows[4].metrics.fee);
    EXPECT_TRUE(fs::exists(dir / "baselines.csv"));
    fs::remove_all(dir);
}
