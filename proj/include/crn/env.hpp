#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <string_view>
#include <vector>

#include "crn/fading.hpp"

namespace crn {

enum class RewardMode : std::uint8_t { secrecy, throughput };

std::string_view to_string(RewardMode mode);
RewardMode reward_mode_from_string(std::string_view name);

/// Every scalar of the slotted underlay model. Powers in W, energies in J, times in s.
struct EnvConfig {
    int N = 20;              // slots per episode
    int xi = 2;              // PU-Tx active for slots 1..xi
    double T_s = 1.0;
    double N_0 = 1.0;
    double theta = 0.9;      // power-splitting factor at SU-Rx
    double eta = 0.9;        // energy-conversion efficiency
    double E_max = 0.2;      // ambient harvest per slot ~ U[0, E_max]
    double C_max = 0.5;
    double C_init = 0.25;
    double zeta = 1.0;       // penalty magnitude
    double I_th = 0.01;
    double P_p_max = 1.0;
    std::vector<double> power_levels = default_power_levels();
    std::array<LinkSpec, kLinkRoleCount> links = default_links();
    RewardMode mode = RewardMode::secrecy;

    /// {0.05, 0.10, ..., 0.50} W.
    static std::vector<double> default_power_levels();
    /// N_m = N_e = 1, d_s = 15 m, d_se = 100 m, d_sp = d_pr = 500 m, d_p = 100 m, d_j = 50 m, PL = 2.
    static std::array<LinkSpec, kLinkRoleCount> default_links();

    [[nodiscard]] const LinkSpec& link(LinkRole role) const {
        return links[static_cast<std::size_t>(role)];
    }
    LinkSpec& link(LinkRole role) { return links[static_cast<std::size_t>(role)]; }

    /// Harvest plus one transmit action per power level.
    [[nodiscard]] std::size_t action_count() const { return power_levels.size() + 1; }

    /// Throws std::invalid_argument naming the offending field.
    void validate() const;

    friend bool operator==(const EnvConfig&, const EnvConfig&) = default;
};

struct ChannelGains {
    double s_p = 0.0;  // EH link SU-Tx -> SU-Rx
    double s = 0.0;    // main link
    double pr = 0.0;   // PU-Tx -> SU-Rx
    double sp = 0.0;   // SU-Tx -> PU-Rx
    double p = 0.0;    // PU-Tx -> PU-Rx
    double j = 0.0;    // jamming link SU-Rx -> Eve
    double se = 0.0;   // wiretap link

    friend bool operator==(const ChannelGains&, const ChannelGains&) = default;
};

ChannelGains draw_gains(const EnvConfig& config, Rng& rng);

/// Observable MDP state at the start of slot t.
struct EnvState {
    int t = 1;
    int pu_active = 0;             // D_t
    double harvested_prev = 0.0;   // energy harvested in slot t-1, J
    double battery = 0.0;          // C_t, J
    ChannelGains gains;

    friend bool operator==(const EnvState&, const EnvState&) = default;
};

/// Harvest (mu_t = 1) or transmit at power_levels[level] (mu_t = 0).
/// Flat index: 0 is harvest, level + 1 is a transmission.
class Action {
public:
    static constexpr Action harvest() { return Action(0); }
    static constexpr Action transmit(std::size_t level) { return Action(level + 1); }
    static constexpr Action from_index(std::size_t index) { return Action(index); }

    [[nodiscard]] constexpr bool harvests() const { return index_ == 0; }
    /// Only meaningful for transmissions.
    [[nodiscard]] constexpr std::size_t level() const { return index_ - 1; }
    [[nodiscard]] constexpr std::size_t index() const { return index_; }

    friend constexpr bool operator==(Action, Action) = default;

private:
    constexpr explicit Action(std::size_t index) : index_(index) {}
    std::size_t index_;
};

struct StepInfo {
    double gamma_s = 0.0;
    double gamma_e = 0.0;
    double secrecy_signed = 0.0;
    double secrecy_clamped = 0.0;
    double throughput = 0.0;
    double jamming_power = 0.0;
    bool interference_violation = false;
    bool battery_violation = false;
    double energy_consumed = 0.0;
    double harvested = 0.0;
};

struct StepResult {
    double reward = 0.0;
    EnvState next_state;
    bool done = false;
    StepInfo info;
};

// Per-slot physics -----------------------------------------------------------

/// P_j = theta P_s g_s_p eta.
double jamming_power(double theta, double p_s, double g_s_p, double eta);

/// (1 - theta) P_s g_s / (D P_p g_pr + N_0).
double sinr_main(double theta, double p_s, double g_s, int pu_active, double p_p, double g_pr,
                 double n0);

/// P_s g_se / (P_j g_j + N_0).
double sinr_eve(double p_s, double g_se, double p_j, double g_j, double n0);

struct SecrecyRate {
    double signed_rate = 0.0;
    double clamped = 0.0;
};

/// log2((1 + gamma_s) / (1 + gamma_e)) and its positive part.
SecrecyRate secrecy_rate(double gamma_s, double gamma_e);

/// log2(1 + gamma_s).
double throughput(double gamma_s);

/// min(C + mu E_h - (1 - mu) P_s T_s, C_max), floored at 0.
double battery_update(double battery, bool harvesting, double harvested, double p_s, double t_s,
                      double c_max);

/// E_h ~ U[0, E_max].
double harvest_draw(double e_max, Rng& rng);

/// P_s g_sp <= I_th.
bool interference_ok(double p_s, double g_sp, double i_th);

/// Quantities of one slot that decide the reward.
struct SlotQuantities {
    double gamma_s = 0.0;
    double gamma_e = 0.0;
    bool interference_ok = true;
    bool battery_ok = true;
};

/// Harvest earns 0. A transmission satisfying both the interference and battery
/// constraints earns the signed secrecy rate (or the main-link rate in throughput
/// mode); every other transmission earns -zeta.
double reward(const EnvConfig& config, const EnvState& state, Action action,
              const SlotQuantities& slot);

// Episode dynamics -----------------------------------------------------------

EnvState reset(const EnvConfig& config, Rng& rng);

/// Advance one slot. Throws std::logic_error when the episode is already over
/// (state.t > N) and std::out_of_range for an invalid action.
StepResult step(const EnvState& state, Action action, const EnvConfig& config, Rng& rng);

/// Owns a validated configuration, its random stream and the current state.
class Environment {
public:
    Environment(EnvConfig config, std::uint64_t seed);

    const EnvState& reset();
    StepResult step(Action action);

    [[nodiscard]] const EnvState& state() const { return state_; }
    [[nodiscard]] const EnvConfig& config() const { return config_; }
    [[nodiscard]] bool done() const { return state_.t > config_.N; }
    Rng& rng() { return rng_; }

private:
    EnvConfig config_;
    Rng rng_;
    EnvState state_;
};

}  // namespace crn
