#pragma once

#include <cstdint>
#include <string_view>

#include "crn/dqn.hpp"
#include "crn/env.hpp"

namespace crn {

enum class BaselineKind : std::uint8_t { random, harvest_transmit };

std::string_view to_string(BaselineKind kind);
BaselineKind baseline_kind_from_string(std::string_view name);

/// Uniform over harvest and every power level.
Action random_policy(std::size_t action_count, Rng& rng);

/// Harvest while the PU is active (t <= xi), then transmit at a uniformly random level.
Action harvest_transmit_policy(int t, int xi, std::size_t level_count, Rng& rng);

/// No-learning comparison policy. The kind is fixed at construction.
class BaselinePolicy final : public Policy {
public:
    explicit BaselinePolicy(BaselineKind kind) : kind_(kind) {}

    Action choose(const EnvState& state, const EnvConfig& config, Rng& rng) override;
    [[nodiscard]] BaselineKind kind() const { return kind_; }

private:
    BaselineKind kind_;
};

}  // namespace crn
