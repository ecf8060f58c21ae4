#include <doctest.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <random>
#include <vector>

#include "crn/baselines.hpp"
#include "crn/dqn.hpp"

using namespace crn;

namespace {

class AlwaysPolicy final : public Policy {
public:
    explicit AlwaysPolicy(Action action) : action_(action) {}
    Action choose(const EnvState&, const EnvConfig&, Rng&) override { return action_; }

private:
    Action action_;
};

AgentConfig small_agent() {
    AgentConfig cfg;
    cfg.episodes = 30;
    cfg.warmup = 50;
    cfg.batch_size = 16;
    cfg.buffer_capacity = 500;
    cfg.net = nn::NetSpec{{kFeatureCount, 16, 11}};
    return cfg;
}

}  // namespace

TEST_CASE("epsilon schedule") {
    const AgentConfig cfg;
    CHECK(epsilon(0, cfg) == doctest::Approx(1.0));
    CHECK(epsilon(1000, cfg) == doctest::Approx(0.01 + 0.99 * std::exp(-1.0)));
    CHECK(epsilon(1000, cfg) == doctest::Approx(0.374201).epsilon(1e-5));
    CHECK(std::abs(epsilon(10000000, cfg) - 0.01) <= 1e-9);
}

TEST_CASE("epsilon is monotone and bounded") {
    Rng rng(1);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::uniform_int_distribution<std::uint64_t> step(0, 100000);
    for (int i = 0; i < 1000; ++i) {
        AgentConfig cfg;
        cfg.epsilon_min = 0.5 * u(rng);
        cfg.epsilon_max = cfg.epsilon_min + (1.0 - cfg.epsilon_min) * u(rng);
        cfg.r_d = 1e-5 + 0.01 * u(rng);
        std::uint64_t a = step(rng);
        std::uint64_t b = step(rng);
        if (a > b) std::swap(a, b);
        const double ea = epsilon(a, cfg);
        const double eb = epsilon(b, cfg);
        CHECK(ea >= eb);
        CHECK(eb >= cfg.epsilon_min);
        CHECK(ea <= cfg.epsilon_max);
    }
}

TEST_CASE("agent config validation") {
    CHECK_NOTHROW(AgentConfig{}.validate());
    AgentConfig c;
    c.nu = 1.5;
    CHECK_THROWS_AS(c.validate(), std::invalid_argument);
    c = AgentConfig{};
    c.alpha = 0.0;
    CHECK_THROWS_AS(c.validate(), std::invalid_argument);
    c = AgentConfig{};
    c.epsilon_min = 0.5;
    c.epsilon_max = 0.4;
    CHECK_THROWS_AS(c.validate(), std::invalid_argument);
    c = AgentConfig{};
    c.batch_size = c.buffer_capacity + 1;
    CHECK_THROWS_AS(c.validate(), std::invalid_argument);
}

TEST_CASE("featurize") {
    EnvConfig cfg;
    EnvState s;
    s.pu_active = 1;
    s.battery = cfg.C_max;
    s.harvested_prev = cfg.E_max / 2;
    s.gains = ChannelGains{1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0};
    const auto f = featurize(s, cfg);
    CHECK(f.size() == 10);
    CHECK(f[0] == 1.0);
    CHECK(f[1] == doctest::Approx(0.5));
    CHECK(f[2] == 1.0);
    for (std::size_t i = 3; i < 10; ++i) CHECK(std::abs(f[i]) < 1e-12);

    s.gains.s = 0.0;
    s.gains.se = 1e6;
    s.gains.sp = 1e-3;
    const auto g = featurize(s, cfg);
    CHECK(g[4] == doctest::Approx(-1.0));
    CHECK(g[9] == doctest::Approx(2.0 / 12.0));
    CHECK(g[6] == doctest::Approx(-3.0 / 12.0));
}

TEST_CASE("select_action") {
    Rng rng(2);
    CHECK(select_action(std::vector<double>{0.1, 0.9, 0.3}, 0.0, rng) == 1);
    CHECK(select_action(std::vector<double>{0.5, 0.5}, 0.0, rng) == 0);

    constexpr int kTrials = 100000;
    std::array<int, 11> counts{};
    const std::vector<double> q(11, 0.0);
    for (int i = 0; i < kTrials; ++i) ++counts.at(select_action(q, 1.0, rng));
    const double p = 1.0 / 11.0;
    const double se = std::sqrt(p * (1.0 - p) / kTrials);
    for (int c : counts) CHECK(std::abs(static_cast<double>(c) / kTrials - p) <= 3.0 * se);
}

TEST_CASE("td_targets") {
    nn::Params target = nn::Params::zeros(nn::NetSpec{{1, 2}});
    target.layers[0].bias = {0.5, 2.0};
    std::vector<Transition> batch = {
        {{0.0}, 0, -1.0, {0.0}, true},
        {{0.0}, 1, 1.0, {0.3}, false},
    };
    const auto y = td_targets(batch, target, 0.99);
    CHECK(y[0] == doctest::Approx(-1.0));
    CHECK(y[1] == doctest::Approx(2.98));
    const auto myopic = td_targets(batch, target, 0.0);
    CHECK(myopic[0] == doctest::Approx(-1.0));
    CHECK(myopic[1] == doctest::Approx(1.0));
}

TEST_CASE("replay buffer evicts the oldest entries first") {
    constexpr std::size_t kCap = 5;
    constexpr std::size_t kExtra = 3;
    ReplayBuffer buf(kCap, 2);
    for (std::size_t i = 0; i < kCap + kExtra; ++i) {
        const std::vector<double> f = {static_cast<double>(i), 0.0};
        buf.push(f, i % 3, static_cast<double>(i), f, false);
        CHECK(buf.size() == std::min(i + 1, kCap));
    }
    CHECK(buf.size() == kCap);
    CHECK(buf.pushed() == kCap + kExtra);
    for (std::size_t i = 0; i < kCap; ++i) {
        const Transition t = buf.at(i);
        CHECK(t.reward == static_cast<double>(i + kExtra));
        CHECK(t.features[0] == t.reward);
        CHECK(t.reward >= static_cast<double>(kExtra));
    }
}

TEST_CASE("replay sampling is uniform over the contents") {
    ReplayBuffer buf(4, 1);
    for (int i = 0; i < 6; ++i) {
        const std::vector<double> f = {static_cast<double>(i)};
        buf.push(f, 0, static_cast<double>(i), f, false);
    }
    Rng rng(3);
    std::vector<std::size_t> slots;
    std::array<int, 6> counts{};
    constexpr int kDraws = 40000;
    buf.sample(kDraws, rng, slots);
    for (std::size_t s : slots) ++counts.at(static_cast<std::size_t>(buf.reward(s)));
    CHECK(counts[0] == 0);
    CHECK(counts[1] == 0);
    const double se = std::sqrt(0.25 * 0.75 / kDraws);
    for (int i = 2; i < 6; ++i) CHECK(std::abs(counts[i] / double(kDraws) - 0.25) <= 3.0 * se);
}

TEST_CASE("train_step waits for warmup") {
    AgentConfig cfg = small_agent();
    DqnAgent agent(cfg, 4);
    const nn::Params before = agent.online();
    const std::vector<double> f(kFeatureCount, 0.1);
    for (std::size_t i = 0; i + 1 < cfg.warmup; ++i) {
        agent.remember(f, 1, 0.5, f, false);
        CHECK_FALSE(agent.train_step().has_value());
    }
    CHECK(agent.online() == before);
    CHECK(agent.gradient_steps() == 0);
    agent.remember(f, 1, 0.5, f, false);
    CHECK(agent.train_step().has_value());
}

TEST_CASE("train_step on a batch already at its targets") {
    AgentConfig cfg = small_agent();
    cfg.warmup = 1;
    DqnAgent agent(cfg, 5);
    agent.set_online(nn::Params::zeros(cfg.net));
    const std::vector<double> f(kFeatureCount, 0.3);
    for (int i = 0; i < 20; ++i) agent.remember(f, static_cast<std::size_t>(i % 11), 0.0, f, i % 2);
    const auto loss = agent.train_step();
    REQUIRE(loss.has_value());
    CHECK(*loss == 0.0);
    CHECK(agent.online() == nn::Params::zeros(cfg.net));
}

TEST_CASE("train_step changes only the online net until the sync period") {
    AgentConfig cfg = small_agent();
    cfg.warmup = 16;
    cfg.target_sync_period = 5;
    DqnAgent agent(cfg, 6);
    Rng rng(7);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int i = 0; i < 40; ++i) {
        std::vector<double> f(kFeatureCount);
        std::vector<double> g(kFeatureCount);
        for (auto& v : f) v = u(rng);
        for (auto& v : g) v = u(rng);
        agent.remember(f, static_cast<std::size_t>(i % 11), u(rng), g, false);
    }
    const nn::Params target0 = agent.target();
    for (int k = 1; k <= 4; ++k) {
        const auto loss = agent.train_step();
        REQUIRE(loss.has_value());
        CHECK(std::isfinite(*loss));
        CHECK(agent.target() == target0);
    }
    CHECK_FALSE(agent.online() == target0);
    agent.train_step();
    CHECK(agent.target() == agent.online());
}

TEST_CASE("identical seeds give identical loss sequences") {
    AgentConfig cfg = small_agent();
    cfg.warmup = 16;
    DqnAgent a(cfg, 8);
    DqnAgent b(cfg, 8);
    Rng rng(9);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int i = 0; i < 200; ++i) {
        std::vector<double> f(kFeatureCount);
        for (auto& v : f) v = u(rng);
        const double r = u(rng);
        const std::size_t act_a = a.act(f, 0.3);
        const std::size_t act_b = b.act(f, 0.3);
        CHECK(act_a == act_b);
        a.remember(f, act_a, r, f, i % 20 == 19);
        b.remember(f, act_b, r, f, i % 20 == 19);
        const auto la = a.train_step();
        const auto lb = b.train_step();
        CHECK(la == lb);
    }
    CHECK(a.online() == b.online());
}

TEST_CASE("run_training bookkeeping and determinism") {
    EnvConfig env;
    AgentConfig cfg = small_agent();
    cfg.episodes = 10;
    const TrainingResult r1 = run_training(env, cfg, 11);
    REQUIRE(r1.episodes.size() == 10);
    for (std::size_t i = 0; i < r1.episodes.size(); ++i) {
        const EpisodeStats& s = r1.episodes[i];
        CHECK(s.episode == static_cast<int>(i) + 1);
        CHECK(s.mean_reward == doctest::Approx(s.total_reward / env.N));
        CHECK(s.epsilon == doctest::Approx(epsilon(static_cast<std::uint64_t>(i + 1) * env.N - 1, cfg)));
    }
    CHECK(r1.params.all_finite());

    const TrainingResult r2 = run_training(env, cfg, 11);
    CHECK(r1.episodes == r2.episodes);
    CHECK(r1.params == r2.params);
    const TrainingResult r3 = run_training(env, cfg, 12);
    CHECK_FALSE(r1.episodes == r3.episodes);

    AgentConfig wrong = cfg;
    wrong.net = nn::NetSpec{{kFeatureCount, 8, 4}};
    CHECK_THROWS_AS(run_training(env, wrong, 1), std::invalid_argument);
}

TEST_CASE("DQN with a linear one-hot network recovers tabular Q-values") {
    // Two states, two actions, deterministic:
    //   s0 --a0--> s0 r=0   s0 --a1--> s1 r=1
    //   s1 --a0--> s0 r=2   s1 --a1--> s1 r=0
    constexpr double kNu = 0.9;
    const int next_state[2][2] = {{0, 1}, {0, 1}};
    const double rewards[2][2] = {{0.0, 1.0}, {2.0, 0.0}};

    double q[2][2] = {};
    for (int it = 0; it < 2000; ++it) {
        double nq[2][2];
        for (int s = 0; s < 2; ++s) {
            for (int a = 0; a < 2; ++a) {
                const int s2 = next_state[s][a];
                nq[s][a] = rewards[s][a] + kNu * std::max(q[s2][0], q[s2][1]);
            }
        }
        std::copy(&nq[0][0], &nq[0][0] + 4, &q[0][0]);
    }

    AgentConfig cfg;
    cfg.nu = kNu;
    cfg.alpha = 0.05;
    cfg.batch_size = 32;
    cfg.buffer_capacity = 2000;
    cfg.warmup = 100;
    cfg.target_sync_period = 20;
    cfg.net = nn::NetSpec{{2, 2}};
    DqnAgent agent(cfg, 13);

    auto one_hot = [](int s) { return std::vector<double>{s == 0 ? 1.0 : 0.0, s == 1 ? 1.0 : 0.0}; };
    int s = 0;
    for (int step = 0; step < 5000; ++step) {
        const auto f = one_hot(s);
        const std::size_t a = agent.act(f, 1.0);
        const int s2 = next_state[s][a];
        agent.remember(f, a, rewards[s][a], one_hot(s2), false);
        agent.train_step();
        s = s2;
    }
    for (int st = 0; st < 2; ++st) {
        const auto qv = agent.q_values(one_hot(st));
        for (int a = 0; a < 2; ++a) {
            CAPTURE(st);
            CAPTURE(a);
            CHECK(std::abs(qv[a] - q[st][a]) <= 0.05);
        }
    }
}

TEST_CASE("evaluate fixed policies") {
    EnvConfig env;
    AlwaysPolicy harvest(Action::harvest());
    CHECK(evaluate(harvest, env, 50, 1) == 0.0);

    EnvConfig strict = env;
    strict.I_th = 0.0;
    AlwaysPolicy loud(Action::transmit(strict.power_levels.size() - 1));
    CHECK(evaluate(loud, strict, 50, 1) == doctest::Approx(-strict.zeta));

    Rng rng(14);
    const nn::Params p = nn::init_params(AgentConfig{}.net, rng);
    GreedyPolicy g1(p);
    GreedyPolicy g2(p);
    CHECK(evaluate(g1, env, 20, 3) == evaluate(g2, env, 20, 3));

    BaselinePolicy random(BaselineKind::random);
    const auto stats = run_policy(random, env, 7, 4);
    REQUIRE(stats.size() == 7);
    for (const auto& st : stats) {
        CHECK(st.epsilon == 0.0);
        CHECK(st.mean_loss == 0.0);
    }
}

TEST_CASE("mix_seed derives distinct streams") {
    CHECK(mix_seed(1, 0) != mix_seed(1, 1));
    CHECK(mix_seed(1, 0) != mix_seed(2, 0));
    CHECK(mix_seed(5, 3) == mix_seed(5, 3));
}
