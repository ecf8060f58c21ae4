#pragma once

#include <array>
#include <cstdint>
#include <random>
#include <string_view>

namespace crn {

/// Random stream used across the simulator. One stream per run, never shared between threads.
using Rng = std::mt19937_64;

enum class LinkRole : std::uint8_t {
    main_s,       // SU-Tx -> SU-Rx
    wiretap_se,   // SU-Tx -> Eve
    eh_s_p,       // SU-Tx -> SU-Rx wake-up / energy-harvesting link
    su_to_pu_sp,  // SU-Tx -> PU-Rx
    pu_to_su_pr,  // PU-Tx -> SU-Rx
    pu_pu_p,      // PU-Tx -> PU-Rx
    jam_j,        // SU-Rx -> Eve
};

inline constexpr std::size_t kLinkRoleCount = 7;
inline constexpr std::array<LinkRole, kLinkRoleCount> kAllLinkRoles = {
    LinkRole::main_s,      LinkRole::wiretap_se, LinkRole::eh_s_p, LinkRole::su_to_pu_sp,
    LinkRole::pu_to_su_pr, LinkRole::pu_pu_p,    LinkRole::jam_j,
};

std::string_view to_string(LinkRole role);
/// Throws std::invalid_argument for an unknown name.
LinkRole link_role_from_string(std::string_view name);

/// Mean power gain is distance^(-PL); a cascade of N_u Rayleigh hops splits
/// that scale equally, sigma_j^2 = (sigma^2)^(1/N_u).
struct LinkSpec {
    LinkRole role = LinkRole::main_s;
    int cascade_level = 1;
    double distance = 1.0;
    double path_loss_exponent = 2.0;

    /// sigma^2 = distance^(-PL).
    [[nodiscard]] double total_scale() const;
    /// sigma_j^2 for each of the cascade_level hops.
    [[nodiscard]] double component_scale() const;
    /// Throws std::invalid_argument on cascade_level < 1, distance <= 0 or PL < 0.
    void validate() const;

    friend bool operator==(const LinkSpec&, const LinkSpec&) = default;
};

/// Parameters of the transformed Nakagami-m approximation of a cascaded Rayleigh power gain.
struct CascadeParams {
    double m = 0.0;
    double omega = 0.0;
    double beta = 0.0;
    double sigma2 = 0.0;
};

/// Scale sigma^2 = d^(-PL). Throws std::invalid_argument for d <= 0 or PL < 0.
double link_scale(double distance, double path_loss_exponent);

/// m = 0.6102 N + 0.4263, Omega = 0.8808 N^-0.9661 + 1.12, and the matching
/// density normalisation beta for the total scale sigma2.
CascadeParams cascade_params(int cascade_level, double sigma2 = 1.0);

/// Draw g = (prod_j x_j)^2 with x_j ~ Rayleigh(sigma_j^2). Exact product sampling.
double sample_gain(const LinkSpec& spec, Rng& rng);

/// Analytic gain density. Exponential with rate 1/(2 sigma^2) for a single hop,
/// the transformed Nakagami-m approximation otherwise.
/// Throws std::invalid_argument for y < 0.
double gain_pdf(const CascadeParams& params, int cascade_level, double y);

}  // namespace crn
