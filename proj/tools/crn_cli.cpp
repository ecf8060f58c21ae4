// crn: train DQN agents, run figure presets and evaluate policies.

#include <chrono>
#include <cstdint>
#include <exception>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "crn/baselines.hpp"
#include "crn/dqn.hpp"
#include "crn/experiment.hpp"

namespace {

std::vector<std::uint64_t> parse_seed_list(const std::string& text) {
    std::vector<std::uint64_t> seeds;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item.empty()) continue;
        std::size_t used = 0;
        const unsigned long long v = std::stoull(item, &used);
        if (used != item.size()) throw std::invalid_argument("bad seed '" + item + "'");
        seeds.push_back(v);
    }
    if (seeds.empty()) throw std::invalid_argument("no seeds given");
    return seeds;
}

void report(const crn::CurveRun& run) {
    std::cerr << "  done " << run.run_id << " seed " << run.seed << "  final mean "
              << crn::tail_mean(run.stats, crn::kSummaryWindow) << '\n';
}

void print_summary(const crn::ExperimentResult& result) {
    for (const auto& row : result.summary) {
        std::cout << row.run_id << " seed=" << row.seed << " final_mean_reward="
                  << crn::format_real(row.final_mean_reward) << '\n';
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Underlay cognitive-radio secrecy simulator with a DQN agent"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir;
    std::uint64_t seed = 0;
    int episodes = 0;

    auto* train = app.add_subcommand("train", "Train a DQN agent (one run per sweep value and seed)");
    train->add_option("--config", config_path, "Experiment config (JSON)")->required();
    auto* train_seed = train->add_option("--seed", seed, "Override the config's seed list");
    auto* train_eps = train->add_option("--episodes", episodes, "Override the episode count");
    auto* train_out = train->add_option("--out", out_dir, "Output directory");

    std::string preset_name;
    std::string seed_list = "1,2,3,4,5";
    auto* preset = app.add_subcommand("preset", "Run a figure preset");
    preset->add_option("--name", preset_name, "fig1..fig7")->required();
    preset->add_option("--seeds", seed_list, "Comma-separated master seeds");
    preset->add_option("--out", out_dir, "Output directory")->required();
    auto* preset_eps = preset->add_option("--episodes", episodes, "Override the episode count");

    std::string policy_name;
    auto* baseline = app.add_subcommand("baseline", "Evaluate a no-learning baseline policy");
    baseline->add_option("--policy", policy_name, "random | harvest_transmit")
        ->required()
        ->check(CLI::IsMember({"random", "harvest_transmit"}));
    baseline->add_option("--config", config_path, "Experiment config (JSON)")->required();
    auto* baseline_eps = baseline->add_option("--episodes", episodes, "Override the episode count");
    auto* baseline_out = baseline->add_option("--out", out_dir, "Also write learning-curve CSVs here");

    std::string checkpoint;
    auto* eval = app.add_subcommand("eval", "Greedy evaluation of a trained checkpoint");
    eval->add_option("--checkpoint", checkpoint, "Parameter snapshot")->required();
    eval->add_option("--config", config_path, "Experiment config (JSON)")->required();
    auto* eval_eps = eval->add_option("--episodes", episodes, "Evaluation episodes");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*train) {
            crn::ExperimentConfig cfg = crn::load_config(config_path);
            if (*train_seed) cfg.seeds = {seed};
            if (*train_eps) cfg.agent.episodes = episodes;
            if (*train_out) cfg.output_dir = out_dir;
            cfg.policy = crn::PolicyKind::dqn;
            cfg.validate();
            const auto curves = crn::expand_curves(cfg);
            crn::RunOptions opts;
            opts.output_dir = cfg.output_dir;
            opts.save_checkpoints = true;
            opts.on_run_done = report;
            print_summary(crn::run_curves(curves, cfg.agent, cfg.seeds, opts));
        } else if (*preset) {
            const auto seeds = parse_seed_list(seed_list);
            std::optional<int> ep;
            if (*preset_eps) ep = episodes;
            const auto start = std::chrono::steady_clock::now();
            const auto result = crn::run_preset(preset_name, seeds, out_dir, ep, report);
            print_summary(result);
            const std::chrono::duration<double> took = std::chrono::steady_clock::now() - start;
            std::cerr << "preset " << preset_name << " finished in " << took.count() << " s\n";
        } else if (*baseline) {
            crn::ExperimentConfig cfg = crn::load_config(config_path);
            if (*baseline_eps) cfg.agent.episodes = episodes;
            cfg.policy = crn::policy_kind_from_string(policy_name);
            cfg.validate();
            const auto curves = crn::expand_curves(cfg);
            crn::RunOptions opts;
            opts.write_files = static_cast<bool>(*baseline_out);
            opts.output_dir = out_dir;
            print_summary(crn::run_curves(curves, cfg.agent, cfg.seeds, opts));
        } else if (*eval) {
            const crn::ExperimentConfig cfg = crn::load_config(config_path);
            const int n = *eval_eps ? episodes : cfg.agent.episodes;
            crn::GreedyPolicy policy(crn::nn::load_params(checkpoint));
            for (std::uint64_t s : cfg.seeds) {
                const double mean = crn::evaluate(policy, cfg.env, n, s);
                std::cout << "seed=" << s << " mean_reward=" << crn::format_real(mean) << '\n';
            }
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
