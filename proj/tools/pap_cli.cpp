// Command-line front end: training protocols, evaluation, baselines and the
// battery slope fit.

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include "pap/harness/config.hpp"
#include "pap/harness/protocols.hpp"

namespace {

struct Flags {
    std::string mode;
    std::string config;
    std::string scale;
    std::string profile;
    std::string out;
    std::string checkpoint;
    std::string input;
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> episodes;
};

pap::RunConfig resolve(const Flags& f)
{
    std::string text;
    boost::property_tree::ptree file;
    if (!f.config.empty()) {
        std::ifstream in(f.config);
        if (!in)
            throw pap::config_error("cannot open config file '" + f.config + "'");
        std::stringstream buf;
        buf << in.rdbuf();
        text = buf.str();
        std::istringstream is(text);
        try {
            boost::property_tree::read_ini(is, file);
        } catch (const boost::property_tree::ini_parser_error& e) {
            throw pap::config_error(f.config + ": " + e.what());
        }
    }
    const pap::RunMode mode = pap::parse_mode(!f.mode.empty() ? f.mode : file.get<std::string>("run.mode", "train-offline"));
    const std::string scale = !f.scale.empty() ? f.scale : file.get<std::string>("run.scale", "paper");
    pap::RunConfig cfg = pap::preset(scale, mode);
    if (!text.empty()) {
        std::istringstream is(text);
        pap::apply_ini(cfg, is);
    }
    if (!f.profile.empty())
        cfg.scenario.profile = pap::EnvironmentProfile::from_name(f.profile);
    if (f.seed)
        cfg.seed = *f.seed;
    if (f.episodes)
        cfg.episodes = *f.episodes;
    if (!f.out.empty())
        cfg.out_dir = f.out;
    if (!f.checkpoint.empty())
        cfg.checkpoint = f.checkpoint;
    cfg.validate();
    return cfg;
}

void print_summary(const pap::RunArtifacts& art)
{
    std::printf("best eval FEE %.6g bits/J (seed %llu, episode %zu)\n", art.best_eval_fee,
                static_cast<unsigned long long>(art.best_seed), art.best_episode);
    std::printf("artifacts in %s\n", art.dir.string().c_str());
}

int fit_slope(const std::string& input)
{
    if (input.empty())
        throw pap::config_error("fit-slope needs --input FILE with 'current slope' rows");
    const auto pts = pap::read_slope_points(input);
    const auto fit = pap::fit_discharge_slope(pts);
    std::printf("slope_coeff = %.10g\nslope_exponent = %.10g\n", fit.coeff, fit.exponent);
    return 0;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Energy-efficient 3D trajectories for a battery-powered aerial access point"};
    Flags f;
    app.add_option("--mode", f.mode, "train-offline | train-online | eval | baseline | fit-slope")
        ->check(CLI::IsMember({"train-offline", "train-online", "eval", "baseline", "fit-slope"}));
    app.add_option("--config", f.config, "INI file; flags override its values")->check(CLI::ExistingFile);
    app.add_option("--scale", f.scale, "parameter preset")->check(CLI::IsMember({"paper", "desk"}));
    app.add_option("--profile", f.profile, "propagation environment")
        ->check(CLI::IsMember({"suburban", "urban", "dense-urban"}));
    app.add_option("--seed", f.seed, "base seed");
    app.add_option("--episodes", f.episodes, "training episodes per seed repetition");
    app.add_option("--out", f.out, "output directory");
    app.add_option("--checkpoint", f.checkpoint, "actor checkpoint for eval mode");
    app.add_option("--input", f.input, "slope data for fit-slope");
    CLI11_PARSE(app, argc, argv);

    try {
        if (f.mode == "fit-slope")
            return fit_slope(f.input);
        const pap::RunConfig cfg = resolve(f);
        auto progress = [](const std::string& msg) { std::fprintf(stderr, "%s\n", msg.c_str()); };
        switch (cfg.mode) {
        case pap::RunMode::train_offline:
            print_summary(pap::run_offline(cfg, progress));
            break;
        case pap::RunMode::train_online:
            print_summary(pap::run_online(cfg, progress));
            break;
        case pap::RunMode::eval:
            print_summary(pap::run_eval(cfg));
            break;
        case pap::RunMode::baseline:
            for (const auto& row : pap::run_baselines(cfg))
                std::printf("%-6s %-12s FEE %.6g bits/J  FI %.4f  EE %.6g bits/J  air-time %.0f s  %s\n",
                            row.baseline.c_str(), row.profile.name.c_str(), row.metrics.fee, row.metrics.fairness,
                            row.metrics.energy_efficiency, row.metrics.airtime_s,
                            row.metrics.completed ? "completed" : "stranded");
            break;
        }
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }
    return 0;
}
