#include "crn/baselines.hpp"

#include <stdexcept>
#include <string>

namespace crn {

std::string_view to_string(BaselineKind kind) {
    return kind == BaselineKind::random ? "random" : "harvest_transmit";
}

BaselineKind baseline_kind_from_string(std::string_view name) {
    if (name == "random") return BaselineKind::random;
    if (name == "harvest_transmit") return BaselineKind::harvest_transmit;
    throw std::invalid_argument("unknown baseline policy '" + std::string(name) + "'");
}

Action random_policy(std::size_t action_count, Rng& rng) {
    if (action_count < 1) throw std::invalid_argument("random_policy: empty action set");
    return Action::from_index(std::uniform_int_distribution<std::size_t>(0, action_count - 1)(rng));
}

Action harvest_transmit_policy(int t, int xi, std::size_t level_count, Rng& rng) {
    if (t <= xi) return Action::harvest();
    if (level_count < 1) throw std::invalid_argument("harvest_transmit_policy: no power levels");
    return Action::transmit(std::uniform_int_distribution<std::size_t>(0, level_count - 1)(rng));
}

Action BaselinePolicy::choose(const EnvState& state, const EnvConfig& config, Rng& rng) {
    if (kind_ == BaselineKind::random) return random_policy(config.action_count(), rng);
    return harvest_transmit_policy(state.t, config.xi, config.power_levels.size(), rng);
}

}  // namespace crn
