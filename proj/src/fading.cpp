#include "crn/fading.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace crn {

namespace {

constexpr std::array<std::string_view, kLinkRoleCount> kRoleNames = {
    "main_s", "wiretap_se", "eh_s_p", "su_to_pu_sp", "pu_to_su_pr", "pu_pu_p", "jam_j",
};

}  // namespace

std::string_view to_string(LinkRole role) {
    return kRoleNames[static_cast<std::size_t>(role)];
}

LinkRole link_role_from_string(std::string_view name) {
    for (std::size_t i = 0; i < kRoleNames.size(); ++i) {
        if (kRoleNames[i] == name) return kAllLinkRoles[i];
    }
    throw std::invalid_argument("unknown link role '" + std::string(name) + "'");
}

double LinkSpec::total_scale() const { return link_scale(distance, path_loss_exponent); }

double LinkSpec::component_scale() const {
    return std::pow(total_scale(), 1.0 / static_cast<double>(cascade_level));
}

void LinkSpec::validate() const {
    const std::string name(to_string(role));
    if (cascade_level < 1) throw std::invalid_argument(name + ": cascade_level must be >= 1");
    if (!(distance > 0.0)) throw std::invalid_argument(name + ": distance must be > 0");
    if (!(path_loss_exponent >= 0.0))
        throw std::invalid_argument(name + ": path_loss_exponent must be >= 0");
}

double link_scale(double distance, double path_loss_exponent) {
    if (!(distance > 0.0)) throw std::invalid_argument("link_scale: distance must be > 0");
    if (!(path_loss_exponent >= 0.0))
        throw std::invalid_argument("link_scale: path-loss exponent must be >= 0");
    return std::pow(distance, -path_loss_exponent);
}

CascadeParams cascade_params(int cascade_level, double sigma2) {
    if (cascade_level < 1) throw std::invalid_argument("cascade_params: cascade level must be >= 1");
    if (!(sigma2 > 0.0)) throw std::invalid_argument("cascade_params: sigma2 must be > 0");
    const double n = cascade_level;
    CascadeParams p;
    p.m = 0.6102 * n + 0.4263;
    p.omega = 0.8808 * std::pow(n, -0.9661) + 1.12;
    p.sigma2 = sigma2;
    // beta = 2 (m/Omega)^m / (N Gamma(m) sigma^(2m/N)), assembled in log space.
    const double log_beta = std::log(2.0) + p.m * std::log(p.m / p.omega) - std::log(n) -
                            std::lgamma(p.m) - (p.m / n) * std::log(sigma2);
    p.beta = std::exp(log_beta);
    return p;
}

double sample_gain(const LinkSpec& spec, Rng& rng) {
    const double sigma_j = std::sqrt(spec.component_scale());
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    double amplitude = 1.0;
    for (int j = 0; j < spec.cascade_level; ++j) {
        // Inverse CDF of Rayleigh: x = sigma sqrt(-2 ln(1 - u)), u in [0, 1).
        const double u = unit(rng);
        amplitude *= sigma_j * std::sqrt(-2.0 * std::log1p(-u));
    }
    return amplitude * amplitude;
}

double gain_pdf(const CascadeParams& params, int cascade_level, double y) {
    if (y < 0.0 || std::isnan(y)) throw std::invalid_argument("gain_pdf: y must be >= 0");
    if (cascade_level < 1) throw std::invalid_argument("gain_pdf: cascade level must be >= 1");
    if (cascade_level == 1) {
        const double lambda = 1.0 / (2.0 * params.sigma2);
        return lambda * std::exp(-lambda * y);
    }
    const double n = cascade_level;
    const double shape = params.m / n - 1.0;
    if (y == 0.0) {
        if (shape < 0.0) return std::numeric_limits<double>::infinity();
        return shape == 0.0 ? params.beta / 2.0 : 0.0;
    }
    const double rate = params.m / (params.omega * std::pow(params.sigma2, 1.0 / n));
    const double log_f =
        std::log(params.beta / 2.0) + shape * std::log(y) - rate * std::pow(y, 1.0 / n);
    return std::exp(log_f);
}

}  // namespace crn
