#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "crn/baselines.hpp"
#include "crn/dqn.hpp"
#include "crn/env.hpp"

namespace crn {

/// Window (episodes) over which a run's final mean reward is taken.
inline constexpr std::size_t kSummaryWindow = 100;

enum class PolicyKind : std::uint8_t { dqn, random, harvest_transmit };

std::string_view to_string(PolicyKind kind);
PolicyKind policy_kind_from_string(std::string_view name);

struct Sweep {
    std::string parameter;
    std::vector<double> values;

    friend bool operator==(const Sweep&, const Sweep&) = default;
};

struct ExperimentConfig {
    std::string preset;  // empty unless built from a preset
    EnvConfig env;
    AgentConfig agent;
    PolicyKind policy = PolicyKind::dqn;
    std::vector<std::uint64_t> seeds{1};
    std::optional<Sweep> sweep;
    std::string output_dir = "results";

    /// Throws ConfigError naming the offending key.
    void validate() const;

    friend bool operator==(const ExperimentConfig&, const ExperimentConfig&) = default;
};

/// Configuration problem. key() names the offending field when there is one.
class ConfigError : public std::runtime_error {
public:
    enum class Kind { missing_file, parse, invalid };

    ConfigError(Kind kind, std::string key, const std::string& message)
        : std::runtime_error(message), kind_(kind), key_(std::move(key)) {}

    [[nodiscard]] Kind kind() const { return kind_; }
    [[nodiscard]] const std::string& key() const { return key_; }

private:
    Kind kind_;
    std::string key_;
};

/// Parameters accepted by sweeps: the scalar EnvConfig fields plus the link
/// shorthands N_m, N_e, d_s, d_se, d_sp, d_pr, d_p, d_j and PL.
bool is_sweep_parameter(std::string_view name);
/// Throws ConfigError for an unknown name.
void apply_parameter(EnvConfig& env, std::string_view name, double value);

ExperimentConfig load_config(const std::filesystem::path& path);
ExperimentConfig parse_config(std::string_view json_text, const std::string& origin = "<string>");
std::string serialize_config(const ExperimentConfig& config);

/// One learning curve: an environment, a policy and the parameter it stands for.
struct Curve {
    std::string id;
    std::string param_name;
    double param_value = 0.0;
    EnvConfig env;
    PolicyKind policy = PolicyKind::dqn;
};

/// One curve per sweep value, or the base config alone without a sweep.
std::vector<Curve> expand_curves(const ExperimentConfig& config);

struct Preset {
    std::string name;
    ExperimentConfig config;
    std::vector<Curve> curves;
};

std::span<const std::string_view> preset_names();
/// Throws ConfigError for an unknown name.
Preset make_preset(std::string_view name);

struct CurveRun {
    std::string run_id;
    std::string param_name;
    double param_value = 0.0;
    PolicyKind policy = PolicyKind::dqn;
    std::uint64_t seed = 0;
    std::vector<EpisodeStats> stats;
    std::optional<nn::Params> params;
};

struct SummaryRow {
    std::string run_id;
    std::uint64_t seed = 0;
    std::string param_name;
    double param_value = 0.0;
    double final_mean_reward = 0.0;
};

struct ExperimentResult {
    std::vector<CurveRun> runs;  // curve-major, then seed
    std::vector<SummaryRow> summary;
};

struct RunOptions {
    std::filesystem::path output_dir;
    bool write_files = true;
    bool save_checkpoints = false;
    std::function<void(const CurveRun&)> on_run_done;
};

/// Per-run random stream: master seed s and curve index k give s * 10007 + k.
std::uint64_t run_seed(std::uint64_t master_seed, std::size_t curve_index);

/// Mean of mean_reward over the last `window` episodes (all of them if fewer).
double tail_mean(std::span<const EpisodeStats> stats, std::size_t window);

/// Runs every (curve, seed) pair, in parallel when OpenMP threads are available.
/// Writes <run_id>_seed<s>.csv per pair and summary.csv into options.output_dir.
ExperimentResult run_curves(std::span<const Curve> curves, const AgentConfig& agent,
                            std::span<const std::uint64_t> seeds, const RunOptions& options);

/// Runs a named preset. episodes overrides the preset's episode count when set.
ExperimentResult run_preset(std::string_view name, std::span<const std::uint64_t> seeds,
                            const std::filesystem::path& output_dir,
                            std::optional<int> episodes = std::nullopt,
                            std::function<void(const CurveRun&)> on_run_done = {});

// CSV -------------------------------------------------------------------------

inline constexpr std::string_view kCurveCsvHeader =
    "run_id,seed,episode,total_reward,mean_reward,epsilon,mean_loss";
inline constexpr std::string_view kSummaryCsvHeader =
    "run_id,seed,param_name,param_value,final_mean_reward";

/// Shortest decimal text that reads back to the same double.
std::string format_real(double v);

void write_csv(std::span<const EpisodeStats> records, std::string_view run_id, std::uint64_t seed,
               const std::filesystem::path& path);
void write_summary_csv(std::span<const SummaryRow> rows, const std::filesystem::path& path);

/// Reads a learning-curve CSV back. Throws std::runtime_error on a schema mismatch.
std::vector<EpisodeStats> read_curve_csv(const std::filesystem::path& path);
std::vector<SummaryRow> read_summary_csv(const std::filesystem::path& path);

}  // namespace crn
