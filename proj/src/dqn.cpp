#include "crn/dqn.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace crn {

void AgentConfig::validate() const {
    auto fail = [](const std::string& key, const std::string& what) {
        throw std::invalid_argument(key + ": " + what);
    };
    if (!(nu >= 0.0 && nu <= 1.0)) fail("nu", "must lie in [0, 1]");
    if (!(alpha > 0.0 && alpha < 1.0)) fail("alpha", "must lie in (0, 1)");
    if (!(epsilon_min >= 0.0 && epsilon_min <= 1.0)) fail("epsilon_min", "must lie in [0, 1]");
    if (!(epsilon_max >= epsilon_min && epsilon_max <= 1.0))
        fail("epsilon_max", "must lie in [epsilon_min, 1]");
    if (!(r_d >= 0.0)) fail("r_d", "must be >= 0");
    if (buffer_capacity < 1) fail("buffer_capacity", "must be >= 1");
    if (batch_size < 1 || batch_size > buffer_capacity)
        fail("batch_size", "must lie in [1, buffer_capacity]");
    if (target_sync_period < 1) fail("target_sync_period", "must be >= 1");
    if (episodes < 0) fail("episodes", "must be >= 0");
    try {
        net.validate();
    } catch (const std::invalid_argument& e) {
        fail("net", e.what());
    }
}

double epsilon(std::uint64_t step, const AgentConfig& config) {
    const double decay = std::exp(-config.r_d * static_cast<double>(step));
    return config.epsilon_min + (config.epsilon_max - config.epsilon_min) * decay;
}

namespace {

double log_gain(double g) { return std::clamp(std::log10(g + 1e-12), -12.0, 2.0) / 12.0; }

}  // namespace

std::array<double, kFeatureCount> featurize(const EnvState& state, const EnvConfig& config) {
    const double harvest = config.E_max > 0.0 ? state.harvested_prev / config.E_max : 0.0;
    const auto& g = state.gains;
    return {
        static_cast<double>(state.pu_active),
        harvest,
        state.battery / config.C_max,
        log_gain(g.s_p),
        log_gain(g.s),
        log_gain(g.pr),
        log_gain(g.sp),
        log_gain(g.p),
        log_gain(g.j),
        log_gain(g.se),
    };
}

std::size_t select_action(std::span<const double> q, double eps, Rng& rng) {
    if (q.empty()) throw std::invalid_argument("select_action: empty value vector");
    if (eps > 0.0 && std::uniform_real_distribution<double>(0.0, 1.0)(rng) < eps) {
        return std::uniform_int_distribution<std::size_t>(0, q.size() - 1)(rng);
    }
    // max_element returns the first of equal maxima.
    return static_cast<std::size_t>(std::max_element(q.begin(), q.end()) - q.begin());
}

ReplayBuffer::ReplayBuffer(std::size_t capacity, std::size_t feature_dim)
    : capacity_(capacity),
      dim_(feature_dim),
      features_(capacity * feature_dim),
      next_features_(capacity * feature_dim),
      actions_(capacity),
      rewards_(capacity),
      dones_(capacity) {
    if (capacity == 0) throw std::invalid_argument("replay buffer capacity must be >= 1");
}

void ReplayBuffer::push(std::span<const double> features, std::size_t action, double reward,
                        std::span<const double> next_features, bool done) {
    if (features.size() != dim_ || next_features.size() != dim_)
        throw std::invalid_argument("replay buffer: feature length mismatch");
    std::copy(features.begin(), features.end(), features_.begin() + head_ * dim_);
    std::copy(next_features.begin(), next_features.end(), next_features_.begin() + head_ * dim_);
    actions_[head_] = action;
    rewards_[head_] = reward;
    dones_[head_] = done ? 1 : 0;
    head_ = (head_ + 1) % capacity_;
    size_ = std::min(size_ + 1, capacity_);
    ++pushed_;
}

Transition ReplayBuffer::at(std::size_t i) const {
    if (i >= size_) throw std::out_of_range("replay buffer index out of range");
    const std::size_t slot = (head_ + capacity_ - size_ + i) % capacity_;
    const auto f = features(slot);
    const auto nf = next_features(slot);
    return {{f.begin(), f.end()}, actions_[slot], rewards_[slot], {nf.begin(), nf.end()},
            dones_[slot] != 0};
}

void ReplayBuffer::sample(std::size_t count, Rng& rng, std::vector<std::size_t>& slots) const {
    if (size_ == 0) throw std::logic_error("replay buffer: sampling from an empty buffer");
    // When full every slot is live; before that the live slots are 0..size-1.
    std::uniform_int_distribution<std::size_t> pick(0, size_ - 1);
    slots.resize(count);
    for (auto& s : slots) s = pick(rng);
}

std::vector<double> td_targets(std::span<const Transition> batch, const nn::Params& target,
                               double nu) {
    std::vector<double> out;
    out.reserve(batch.size());
    for (const auto& t : batch) {
        if (t.done) {
            out.push_back(t.reward);
            continue;
        }
        const auto q = nn::forward(target, t.next_features);
        out.push_back(t.reward + nu * *std::max_element(q.begin(), q.end()));
    }
    return out;
}

DqnAgent::DqnAgent(AgentConfig config, std::uint64_t seed, nn::Exec exec)
    : config_(std::move(config)),
      exec_(exec),
      rng_(seed),
      buffer_(config_.buffer_capacity, config_.net.layer_sizes.front()) {
    config_.validate();
    online_ = nn::init_params(config_.net, rng_);
    target_ = online_;
}

std::span<const double> DqnAgent::q_values(std::span<const double> features) {
    return nn::forward_batch(online_, features, 1, act_ws_, nn::Exec::serial);
}

std::size_t DqnAgent::act(std::span<const double> features, double eps) {
    // Skip the forward pass when the draw says explore; same stream use either way.
    if (eps > 0.0 && std::uniform_real_distribution<double>(0.0, 1.0)(rng_) < eps) {
        return std::uniform_int_distribution<std::size_t>(0, online_.output_size() - 1)(rng_);
    }
    return select_action(q_values(features), 0.0, rng_);
}

void DqnAgent::remember(std::span<const double> features, std::size_t action, double reward,
                        std::span<const double> next_features, bool done) {
    if (action >= online_.output_size()) throw std::out_of_range("remember: action out of range");
    buffer_.push(features, action, reward, next_features, done);
}

void DqnAgent::set_online(nn::Params params) {
    if (!params.same_shape(online_)) throw std::invalid_argument("set_online: shape mismatch");
    online_ = std::move(params);
    target_ = online_;
}

std::optional<double> DqnAgent::train_step() {
    if (buffer_.size() < std::max<std::size_t>(config_.warmup, 1)) return std::nullopt;

    const std::size_t n = config_.batch_size;
    const std::size_t dim = buffer_.feature_dim();
    buffer_.sample(n, rng_, slots_);

    next_block_.resize(n * dim);
    batch_.inputs.resize(n * dim);
    batch_.actions.resize(n);
    batch_.targets.resize(n);
    for (std::size_t b = 0; b < n; ++b) {
        const auto f = buffer_.features(slots_[b]);
        const auto nf = buffer_.next_features(slots_[b]);
        std::copy(f.begin(), f.end(), batch_.inputs.begin() + b * dim);
        std::copy(nf.begin(), nf.end(), next_block_.begin() + b * dim);
        batch_.actions[b] = buffer_.action(slots_[b]);
    }

    const auto next_q = nn::forward_batch(target_, next_block_, n, target_ws_, exec_);
    const std::size_t width = target_.output_size();
    for (std::size_t b = 0; b < n; ++b) {
        const std::size_t s = slots_[b];
        double y = buffer_.reward(s);
        if (!buffer_.done(s)) {
            const auto row = next_q.subspan(b * width, width);
            y += config_.nu * *std::max_element(row.begin(), row.end());
        }
        batch_.targets[b] = y;
    }

    const double loss = nn::masked_loss_grad(online_, batch_, grad_, train_ws_, exec_);
    nn::sgd_update(online_, grad_, config_.alpha);
    ++gradient_steps_;
    if (gradient_steps_ % config_.target_sync_period == 0) target_ = online_;
    return loss;
}

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
    std::uint64_t z = seed + 0x9E3779B97F4A7C15ull * (stream + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

TrainingResult run_training(const EnvConfig& env_config, const AgentConfig& agent_config,
                            std::uint64_t seed) {
    Environment env(env_config, mix_seed(seed, 0));
    DqnAgent agent(agent_config, mix_seed(seed, 1));
    if (agent.online().input_size() != kFeatureCount)
        throw std::invalid_argument("net: input width must be " + std::to_string(kFeatureCount));
    if (agent.online().output_size() != env_config.action_count())
        throw std::invalid_argument("net: output width must equal the action count (" +
                                    std::to_string(env_config.action_count()) + ")");

    TrainingResult result;
    result.episodes.reserve(static_cast<std::size_t>(agent_config.episodes));
    std::uint64_t global_step = 0;
    for (int ep = 1; ep <= agent_config.episodes; ++ep) {
        env.reset();
        auto features = featurize(env.state(), env.config());
        double total = 0.0;
        double loss_sum = 0.0;
        std::size_t loss_count = 0;
        int steps = 0;
        double eps = epsilon(global_step, agent_config);
        bool done = false;
        while (!done) {
            eps = epsilon(global_step, agent_config);
            const std::size_t a = agent.act(features, eps);
            const StepResult r = env.step(Action::from_index(a));
            const auto next = featurize(r.next_state, env.config());
            agent.remember(features, a, r.reward, next, r.done);
            if (const auto loss = agent.train_step()) {
                loss_sum += *loss;
                ++loss_count;
            }
            total += r.reward;
            features = next;
            done = r.done;
            ++steps;
            ++global_step;
        }
        EpisodeStats s;
        s.episode = ep;
        s.total_reward = total;
        s.mean_reward = total / steps;
        s.epsilon = eps;
        s.mean_loss = loss_count > 0 ? loss_sum / static_cast<double>(loss_count) : 0.0;
        result.episodes.push_back(s);
    }
    result.params = agent.online();
    return result;
}

Action GreedyPolicy::choose(const EnvState& state, const EnvConfig& config, Rng& rng) {
    const auto f = featurize(state, config);
    const auto q = nn::forward_batch(params_, f, 1, ws_, nn::Exec::serial);
    return Action::from_index(select_action(q, 0.0, rng));
}

std::vector<EpisodeStats> run_policy(Policy& policy, const EnvConfig& env_config, int episodes,
                                     std::uint64_t seed) {
    Environment env(env_config, mix_seed(seed, 0));
    Rng policy_rng(mix_seed(seed, 1));
    std::vector<EpisodeStats> out;
    out.reserve(static_cast<std::size_t>(std::max(episodes, 0)));
    for (int ep = 1; ep <= episodes; ++ep) {
        env.reset();
        double total = 0.0;
        int steps = 0;
        while (!env.done()) {
            const Action a = policy.choose(env.state(), env.config(), policy_rng);
            total += env.step(a).reward;
            ++steps;
        }
        out.push_back({ep, total, total / steps, 0.0, 0.0});
    }
    return out;
}

double evaluate(Policy& policy, const EnvConfig& env, int episodes, std::uint64_t seed) {
    if (episodes < 1) throw std::invalid_argument("evaluate: episodes must be >= 1");
    const auto stats = run_policy(policy, env, episodes, seed);
    double total = 0.0;
    for (const auto& s : stats) total += s.total_reward;
    return total / (static_cast<double>(episodes) * env.N);
}

}  // namespace crn
