#include "crn/env.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace crn {

std::string_view to_string(RewardMode mode) {
    return mode == RewardMode::secrecy ? "secrecy" : "throughput";
}

RewardMode reward_mode_from_string(std::string_view name) {
    if (name == "secrecy") return RewardMode::secrecy;
    if (name == "throughput") return RewardMode::throughput;
    throw std::invalid_argument("unknown reward mode '" + std::string(name) + "'");
}

std::vector<double> EnvConfig::default_power_levels() {
    std::vector<double> levels;
    for (int i = 1; i <= 10; ++i) levels.push_back(0.05 * i);
    return levels;
}

std::array<LinkSpec, kLinkRoleCount> EnvConfig::default_links() {
    return {
        LinkSpec{LinkRole::main_s, 1, 15.0, 2.0},
        LinkSpec{LinkRole::wiretap_se, 1, 100.0, 2.0},
        LinkSpec{LinkRole::eh_s_p, 1, 15.0, 2.0},
        LinkSpec{LinkRole::su_to_pu_sp, 1, 500.0, 2.0},
        LinkSpec{LinkRole::pu_to_su_pr, 1, 500.0, 2.0},
        LinkSpec{LinkRole::pu_pu_p, 1, 100.0, 2.0},
        LinkSpec{LinkRole::jam_j, 1, 50.0, 2.0},
    };
}

void EnvConfig::validate() const {
    auto fail = [](const std::string& key, const std::string& what) {
        throw std::invalid_argument(key + ": " + what);
    };
    if (N < 1) fail("N", "must be >= 1");
    if (xi < 0 || xi > N) fail("xi", "must lie in [0, N]");
    if (!(T_s > 0.0)) fail("T_s", "must be > 0");
    if (!(N_0 > 0.0)) fail("N_0", "must be > 0");
    if (!(theta > 0.0 && theta < 1.0)) fail("theta", "must lie in (0, 1)");
    if (!(eta > 0.0 && eta <= 1.0)) fail("eta", "must lie in (0, 1]");
    if (!(E_max >= 0.0)) fail("E_max", "must be >= 0");
    if (!(C_max > 0.0)) fail("C_max", "must be > 0");
    if (!(C_init >= 0.0 && C_init <= C_max)) fail("C_init", "must lie in [0, C_max]");
    if (!(zeta > 0.0)) fail("zeta", "must be > 0");
    if (!(I_th >= 0.0)) fail("I_th", "must be >= 0");
    if (!(P_p_max >= 0.0)) fail("P_p_max", "must be >= 0");
    if (power_levels.empty()) fail("power_levels", "must not be empty");
    for (std::size_t i = 0; i < power_levels.size(); ++i) {
        if (!(power_levels[i] > 0.0)) fail("power_levels", "entries must be > 0");
        if (i > 0 && !(power_levels[i] > power_levels[i - 1]))
            fail("power_levels", "must be strictly ascending");
    }
    for (std::size_t i = 0; i < links.size(); ++i) {
        if (links[i].role != kAllLinkRoles[i])
            fail("links", "entry " + std::to_string(i) + " has the wrong role");
        try {
            links[i].validate();
        } catch (const std::invalid_argument& e) {
            fail("links", e.what());
        }
    }
}

ChannelGains draw_gains(const EnvConfig& config, Rng& rng) {
    ChannelGains g;
    g.s_p = sample_gain(config.link(LinkRole::eh_s_p), rng);
    g.s = sample_gain(config.link(LinkRole::main_s), rng);
    g.pr = sample_gain(config.link(LinkRole::pu_to_su_pr), rng);
    g.sp = sample_gain(config.link(LinkRole::su_to_pu_sp), rng);
    g.p = sample_gain(config.link(LinkRole::pu_pu_p), rng);
    g.j = sample_gain(config.link(LinkRole::jam_j), rng);
    g.se = sample_gain(config.link(LinkRole::wiretap_se), rng);
    return g;
}

double jamming_power(double theta, double p_s, double g_s_p, double eta) {
    return theta * p_s * g_s_p * eta;
}

double sinr_main(double theta, double p_s, double g_s, int pu_active, double p_p, double g_pr,
                 double n0) {
    const double interference = pu_active != 0 ? p_p * g_pr : 0.0;
    return (1.0 - theta) * p_s * g_s / (interference + n0);
}

double sinr_eve(double p_s, double g_se, double p_j, double g_j, double n0) {
    return p_s * g_se / (p_j * g_j + n0);
}

SecrecyRate secrecy_rate(double gamma_s, double gamma_e) {
    const double signed_rate = std::log2((1.0 + gamma_s) / (1.0 + gamma_e));
    return {signed_rate, std::max(signed_rate, 0.0)};
}

double throughput(double gamma_s) { return std::log2(1.0 + gamma_s); }

double battery_update(double battery, bool harvesting, double harvested, double p_s, double t_s,
                      double c_max) {
    const double next = harvesting ? battery + harvested : battery - p_s * t_s;
    return std::clamp(next, 0.0, c_max);
}

double harvest_draw(double e_max, Rng& rng) {
    if (e_max <= 0.0) return 0.0;
    return std::uniform_real_distribution<double>(0.0, e_max)(rng);
}

bool interference_ok(double p_s, double g_sp, double i_th) { return p_s * g_sp <= i_th; }

double reward(const EnvConfig& config, const EnvState& state, Action action,
              const SlotQuantities& slot) {
    if (action.harvests()) return 0.0;
    if (!slot.interference_ok || !slot.battery_ok) return -config.zeta;
    // gamma_s already carries the PU term when D_t = 1, so one formula serves both rows.
    (void)state;
    if (config.mode == RewardMode::throughput) return throughput(slot.gamma_s);
    return secrecy_rate(slot.gamma_s, slot.gamma_e).signed_rate;
}

EnvState reset(const EnvConfig& config, Rng& rng) {
    EnvState s;
    s.t = 1;
    s.pu_active = config.xi >= 1 ? 1 : 0;
    s.harvested_prev = 0.0;
    s.battery = config.C_init;
    s.gains = draw_gains(config, rng);
    return s;
}

StepResult step(const EnvState& state, Action action, const EnvConfig& config, Rng& rng) {
    if (state.t > config.N) throw std::logic_error("step: episode already finished");
    if (action.index() >= config.action_count())
        throw std::out_of_range("step: action index " + std::to_string(action.index()) +
                                " out of range");

    StepResult out;
    StepInfo& info = out.info;
    double next_battery = state.battery;
    double harvested = 0.0;
    SlotQuantities slot;

    if (action.harvests()) {
        harvested = harvest_draw(config.E_max, rng);
        next_battery = battery_update(state.battery, true, harvested, 0.0, config.T_s, config.C_max);
    } else {
        const double p_s = config.power_levels[action.level()];
        const double p_p = state.pu_active != 0
                               ? std::uniform_real_distribution<double>(0.0, config.P_p_max)(rng)
                               : 0.0;
        const auto& g = state.gains;
        info.jamming_power = jamming_power(config.theta, p_s, g.s_p, config.eta);
        slot.gamma_s = sinr_main(config.theta, p_s, g.s, state.pu_active, p_p, g.pr, config.N_0);
        slot.gamma_e = sinr_eve(p_s, g.se, info.jamming_power, g.j, config.N_0);
        slot.interference_ok = interference_ok(p_s, g.sp, config.I_th);
        slot.battery_ok = p_s * config.T_s <= state.battery;

        const SecrecyRate sec = secrecy_rate(slot.gamma_s, slot.gamma_e);
        info.gamma_s = slot.gamma_s;
        info.gamma_e = slot.gamma_e;
        info.secrecy_signed = sec.signed_rate;
        info.secrecy_clamped = sec.clamped;
        info.throughput = throughput(slot.gamma_s);
        info.interference_violation = !slot.interference_ok;
        info.battery_violation = !slot.battery_ok;

        // An infeasible transmission is aborted: nothing is sent, nothing is spent.
        if (slot.interference_ok && slot.battery_ok) {
            next_battery =
                battery_update(state.battery, false, 0.0, p_s, config.T_s, config.C_max);
            info.energy_consumed = p_s * config.T_s;
        }
    }
    info.harvested = harvested;
    out.reward = reward(config, state, action, slot);

    EnvState& next = out.next_state;
    next.t = state.t + 1;
    next.pu_active = next.t <= config.xi ? 1 : 0;
    next.harvested_prev = harvested;
    next.battery = next_battery;
    next.gains = draw_gains(config, rng);
    out.done = state.t == config.N;
    return out;
}

Environment::Environment(EnvConfig config, std::uint64_t seed)
    : config_(std::move(config)), rng_(seed) {
    config_.validate();
    state_ = crn::reset(config_, rng_);
}

const EnvState& Environment::reset() {
    state_ = crn::reset(config_, rng_);
    return state_;
}

StepResult Environment::step(Action action) {
    StepResult r = crn::step(state_, action, config_, rng_);
    state_ = r.next_state;
    return r;
}

}  // namespace crn
