#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "crn/env.hpp"
#include "crn/neural.hpp"

namespace crn {

inline constexpr std::size_t kFeatureCount = 10;

struct AgentConfig {
    double nu = 0.99;           // discount
    double alpha = 0.003;       // SGD learning rate
    double epsilon_max = 1.0;
    double epsilon_min = 0.01;
    double r_d = 0.001;         // exploration decay per environment step
    std::size_t buffer_capacity = 10000;
    std::size_t batch_size = 64;
    std::size_t warmup = 500;
    std::size_t target_sync_period = 100;
    int episodes = 3000;
    nn::NetSpec net{{kFeatureCount, 64, 64, 11}};

    /// Throws std::invalid_argument naming the offending field.
    void validate() const;

    friend bool operator==(const AgentConfig&, const AgentConfig&) = default;
};

/// epsilon_min + (epsilon_max - epsilon_min) exp(-r_d t), t counted in environment steps.
double epsilon(std::uint64_t step, const AgentConfig& config);

/// [D, E_h_prev / E_max, C / C_max, phi(g_s_p), phi(g_s), phi(g_pr), phi(g_sp), phi(g_p),
///  phi(g_j), phi(g_se)] with phi(g) = clamp(log10(g + 1e-12), -12, 2) / 12.
std::array<double, kFeatureCount> featurize(const EnvState& state, const EnvConfig& config);

/// Uniform index with probability eps, otherwise the first maximiser of q.
std::size_t select_action(std::span<const double> q, double eps, Rng& rng);

struct Transition {
    std::vector<double> features;
    std::size_t action = 0;
    double reward = 0.0;
    std::vector<double> next_features;
    bool done = false;
};

/// Fixed-capacity ring of transitions; the oldest entry is overwritten first.
class ReplayBuffer {
public:
    ReplayBuffer(std::size_t capacity, std::size_t feature_dim);

    void push(std::span<const double> features, std::size_t action, double reward,
              std::span<const double> next_features, bool done);
    void push(const Transition& t) { push(t.features, t.action, t.reward, t.next_features, t.done); }

    [[nodiscard]] std::size_t size() const { return size_; }
    [[nodiscard]] std::size_t capacity() const { return capacity_; }
    [[nodiscard]] std::size_t feature_dim() const { return dim_; }
    /// Total pushes since construction.
    [[nodiscard]] std::uint64_t pushed() const { return pushed_; }

    /// i-th stored transition, 0 being the oldest still held.
    [[nodiscard]] Transition at(std::size_t i) const;

    /// Uniform sampling with replacement over the current contents.
    void sample(std::size_t count, Rng& rng, std::vector<std::size_t>& slots) const;

    [[nodiscard]] std::span<const double> features(std::size_t slot) const {
        return {features_.data() + slot * dim_, dim_};
    }
    [[nodiscard]] std::span<const double> next_features(std::size_t slot) const {
        return {next_features_.data() + slot * dim_, dim_};
    }
    [[nodiscard]] std::size_t action(std::size_t slot) const { return actions_[slot]; }
    [[nodiscard]] double reward(std::size_t slot) const { return rewards_[slot]; }
    [[nodiscard]] bool done(std::size_t slot) const { return dones_[slot] != 0; }

private:
    std::size_t capacity_;
    std::size_t dim_;
    std::size_t head_ = 0;  // next slot to write
    std::size_t size_ = 0;
    std::uint64_t pushed_ = 0;
    std::vector<double> features_;
    std::vector<double> next_features_;
    std::vector<std::size_t> actions_;
    std::vector<double> rewards_;
    std::vector<std::uint8_t> dones_;
};

/// r for terminal transitions, r + nu max_a' Q_target(s', a') otherwise.
std::vector<double> td_targets(std::span<const Transition> batch, const nn::Params& target,
                               double nu);

/// Online/target network pair, replay memory and the update rule.
class DqnAgent {
public:
    DqnAgent(AgentConfig config, std::uint64_t seed, nn::Exec exec = nn::Exec::parallel);

    /// Epsilon-greedy choice for the given features.
    std::size_t act(std::span<const double> features, double eps);
    /// Greedy Q-values of the online network.
    std::span<const double> q_values(std::span<const double> features);

    void remember(std::span<const double> features, std::size_t action, double reward,
                  std::span<const double> next_features, bool done);

    /// One SGD step on a uniformly sampled batch. Returns the batch loss before
    /// the update, or nullopt while the buffer holds fewer than warmup entries.
    std::optional<double> train_step();

    [[nodiscard]] const nn::Params& online() const { return online_; }
    [[nodiscard]] const nn::Params& target() const { return target_; }
    void set_online(nn::Params params);
    [[nodiscard]] const ReplayBuffer& buffer() const { return buffer_; }
    [[nodiscard]] std::uint64_t gradient_steps() const { return gradient_steps_; }
    [[nodiscard]] const AgentConfig& config() const { return config_; }
    Rng& rng() { return rng_; }

private:
    AgentConfig config_;
    nn::Exec exec_;
    Rng rng_;
    nn::Params online_;
    nn::Params target_;
    ReplayBuffer buffer_;
    std::uint64_t gradient_steps_ = 0;

    // scratch
    nn::Workspace act_ws_;
    nn::Workspace target_ws_;
    nn::Workspace train_ws_;
    nn::Gradient grad_;
    nn::MaskedBatch batch_;
    std::vector<std::size_t> slots_;
    std::vector<double> next_block_;
};

struct EpisodeStats {
    int episode = 0;  // 1-based
    double total_reward = 0.0;
    double mean_reward = 0.0;
    double epsilon = 0.0;
    double mean_loss = 0.0;

    friend bool operator==(const EpisodeStats&, const EpisodeStats&) = default;
};

struct TrainingResult {
    std::vector<EpisodeStats> episodes;
    nn::Params params;
};

/// Episodic DQN training: one gradient step per environment step once the
/// buffer reaches warmup. Deterministic in seed.
TrainingResult run_training(const EnvConfig& env, const AgentConfig& agent, std::uint64_t seed);

/// Anything that maps an observed state to an action.
class Policy {
public:
    virtual ~Policy() = default;
    virtual Action choose(const EnvState& state, const EnvConfig& config, Rng& rng) = 0;
};

/// Acts greedily (epsilon = 0) on a fixed Q-network.
class GreedyPolicy final : public Policy {
public:
    explicit GreedyPolicy(nn::Params params) : params_(std::move(params)) {}
    Action choose(const EnvState& state, const EnvConfig& config, Rng& rng) override;

private:
    nn::Params params_;
    nn::Workspace ws_;
};

/// Per-episode statistics of a fixed policy (epsilon and loss are reported as 0).
std::vector<EpisodeStats> run_policy(Policy& policy, const EnvConfig& env, int episodes,
                                     std::uint64_t seed);

/// Mean per-slot reward of a fixed policy over episodes x N slots.
double evaluate(Policy& policy, const EnvConfig& env, int episodes, std::uint64_t seed);

/// SplitMix64 finaliser, used to derive independent sub-stream seeds.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream);

}  // namespace crn
