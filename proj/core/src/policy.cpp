#include "hestopt/policy.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace hestopt {

namespace {

using specfun::KummerArgs;

void check_point(const EvaluationPoint& point, const Utility& utility) {
    if (!(point.v > 0.0)) throw std::domain_error("evaluation point: v > 0 required");
    if (!(point.x > 0.0)) throw std::domain_error("evaluation point: x > 0 required");
    if (point.tau() < 0.0) throw std::domain_error("evaluation point: t <= T required");
    if (std::holds_alternative<PowerUtility>(utility) && !(point.w > 0.0)) {
        throw std::domain_error("evaluation point: w > 0 required under power utility");
    }
}

double control_prefactor(const EvaluationPoint& point, const Utility& utility) {
    if (const auto* pw = std::get_if<PowerUtility>(&utility)) {
        return point.w / (point.x * (1.0 - pw->gamma));
    }
    return 1.0 / (std::get<ExponentialUtility>(utility).c * point.x);
}

} // namespace

double log_value_factor_psi(const DerivedConstants& c, double psi) {
    if (!(psi > 0.0)) throw std::domain_error("log_value_factor_psi: require psi > 0");
    const double a = c.eta - c.lambda + 0.5;
    const double b = 1.0 + 2.0 * c.eta;
    return specfun::log_gamma(a) - specfun::log_gamma(b) +
           (c.lambda + c.eta + 0.5) * std::log(psi) - psi +
           specfun::log_kummer_m(KummerArgs{a, b, psi});
}

double value_factor(const DerivedConstants& constants, const HestonParams& params,
                    double v, double tau) {
    return std::exp(log_value_factor_psi(constants, compute_psi(params, v, tau)));
}

double log_derivative_ratio(const DerivedConstants& c, double v, double psi) {
    if (!(v > 0.0)) throw std::domain_error("log_derivative_ratio: require v > 0");
    if (!(psi > 0.0)) throw std::domain_error("log_derivative_ratio: require psi > 0");
    const double a = c.eta - c.lambda + 0.5;
    const double b = 1.0 + 2.0 * c.eta;
    return (c.eta + c.lambda + 0.5) / v * specfun::kummer_ratio_shifted(a, b, psi);
}

double bellman(const EvaluationPoint& point, const Utility& utility,
               const DerivedConstants& constants, const HestonParams& params) {
    check_point(point, utility);
    const double tau = point.tau();
    const double log_f = tau == 0.0 ? 0.0
                                    : log_value_factor_psi(constants, compute_psi(params, point.v, tau));
    const double f_pow = std::exp(log_f / constants.delta);
    if (const auto* pw = std::get_if<PowerUtility>(&utility)) {
        return std::pow(point.w, pw->gamma) / pw->gamma * f_pow;
    }
    const double c = std::get<ExponentialUtility>(utility).c;
    return 1.0 - std::exp(-c * point.w) / c * f_pow;
}

PolicyOutput optimal_control(const EvaluationPoint& point, const Utility& utility,
                             const DerivedConstants& constants, const HestonParams& params) {
    check_point(point, utility);
    PolicyOutput out{};
    const double tau = point.tau();
    const double prefactor = control_prefactor(point, utility);

    if (tau == 0.0) {
        // Psi -> infinity limit: f -> 1, the Kummer ratio -> 0
        out.f = 1.0;
        out.fv_over_f = 0.0;
        out.psi = std::numeric_limits<double>::infinity();
        out.bellman = utility_value(utility, point.w);
        out.myopic_term = prefactor * params.mu / point.v;
        out.hedging_term = 0.0;
        out.control = out.myopic_term;
        return out;
    }

    const double psi = compute_psi(params, point.v, tau);
    out.psi = psi;
    out.f = std::exp(log_value_factor_psi(constants, psi));
    out.fv_over_f = log_derivative_ratio(constants, point.v, psi);
    out.bellman = bellman(point, utility, constants, params);
    out.myopic_term = prefactor * params.mu / point.v;
    // assembled from the v-scaled ratio so both terms carry the same 1/v
    out.hedging_term = prefactor * (params.rho * params.sigma / constants.delta) * out.fv_over_f;
    out.control = out.myopic_term + out.hedging_term;
    return out;
}

double asymptotic_value_factor(const DerivedConstants& c, double psi, PsiRegime regime,
                               const AsymptoticBands& bands) {
    if (!(psi > 0.0)) throw std::domain_error("asymptotic_value_factor: require psi > 0");
    switch (regime) {
        case PsiRegime::Large:
            if (psi < bands.large_min) {
                throw std::domain_error("asymptotic_value_factor: psi = " + std::to_string(psi) +
                                        " below the large-regime band");
            }
            return 1.0;
        case PsiRegime::Small: {
            if (psi > bands.small_max) {
                throw std::domain_error("asymptotic_value_factor: psi = " + std::to_string(psi) +
                                        " above the small-regime band");
            }
            const double a = c.eta - c.lambda + 0.5;
            const double b = 1.0 + 2.0 * c.eta;
            const double log_lead = specfun::log_gamma(a) - specfun::log_gamma(b) +
                                    (c.eta + c.lambda + 0.5) * std::log(psi);
            return std::exp(log_lead);
        }
    }
    throw std::domain_error("asymptotic_value_factor: unknown regime");
}

double small_volvol_control(const EvaluationPoint& point, const Utility& utility,
                            const HestonParams& params) {
    check_point(point, utility);
    const DerivedConstants c = derive_constants(params, utility);
    const double prefactor = control_prefactor(point, utility);
    const double tau = point.tau();
    const double hedge_ratio = c.big_c / (params.k * point.v * point.v) * std::exp(params.k * tau);
    return prefactor * (params.mu / point.v +
                        params.rho * params.sigma / c.delta * hedge_ratio);
}

} // namespace hestopt
