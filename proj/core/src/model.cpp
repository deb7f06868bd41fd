#include "hestopt/model.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace hestopt {

namespace {

std::string fmt(double x) {
    std::ostringstream os;
    os << x;
    return os.str();
}

} // namespace

std::vector<std::string> validate(const HestonParams& p, const Utility& utility) {
    std::vector<std::string> violations;
    auto require = [&](bool ok, const std::string& msg) {
        if (!ok) violations.push_back(msg);
    };

    require(std::isfinite(p.mu), "mu must be finite, got " + fmt(p.mu));
    require(std::isfinite(p.k) && p.k > 0.0, "k > 0 required, got " + fmt(p.k));
    require(std::isfinite(p.theta) && p.theta > 0.0, "theta > 0 required, got " + fmt(p.theta));
    require(std::isfinite(p.sigma) && p.sigma > 0.0, "sigma > 0 required, got " + fmt(p.sigma));
    require(std::isfinite(p.rho) && std::abs(p.rho) < 1.0, "|rho| < 1 required, got " + fmt(p.rho));
    if (p.k > 0.0 && p.theta > 0.0 && p.sigma > 0.0) {
        require(2.0 * p.k * p.theta > p.sigma * p.sigma,
                "Feller condition 2*k*theta > sigma^2 violated: 2*" + fmt(p.k) + "*" +
                    fmt(p.theta) + " = " + fmt(2.0 * p.k * p.theta) + " <= " +
                    fmt(p.sigma * p.sigma));
    }

    if (const auto* pw = std::get_if<PowerUtility>(&utility)) {
        if (pw->gamma == 0.0) {
            violations.push_back(
                "gamma = 0 is the logarithmic limit and is not covered; use the "
                "myopic control directly for log utility");
        } else if (!(std::isfinite(pw->gamma) && pw->gamma < 0.0)) {
            violations.push_back("gamma < 0 required for power utility, got " + fmt(pw->gamma));
        }
    } else {
        const auto& ex = std::get<ExponentialUtility>(utility);
        if (!(std::isfinite(ex.c) && ex.c > 0.0)) {
            violations.push_back("c > 0 required for exponential utility, got " + fmt(ex.c));
        }
    }
    return violations;
}

DerivedConstants derive_constants(const HestonParams& p, const Utility& utility) {
    const auto violations = validate(p, utility);
    if (!violations.empty()) {
        std::string all = "invalid model inputs:";
        for (const auto& v : violations) all += " [" + v + "]";
        throw std::domain_error(all);
    }

    DerivedConstants c{};
    const double sigma2 = p.sigma * p.sigma;
    if (const auto* pw = std::get_if<PowerUtility>(&utility)) {
        // gamma < 0, so g = gamma/(1-gamma) is in (-1, 0)
        const double g = pw->gamma / (1.0 - pw->gamma);
        c.delta = 1.0 + p.rho * p.rho * g;
        c.big_c = -g * (p.mu * p.mu / 2.0) * c.delta;
        c.lambda = -p.k * p.theta / sigma2 - g * p.rho * p.mu / p.sigma;
    } else {
        c.delta = 1.0 - p.rho * p.rho;
        c.big_c = (p.mu * p.mu / 2.0) * c.delta;
        c.lambda = -p.k * p.theta / sigma2 + p.rho * p.mu / p.sigma;
    }
    const double half = c.lambda + 0.5;
    c.eta = std::sqrt(half * half + 2.0 * c.big_c / sigma2);

    if (!(c.big_c > 0.0)) {
        throw std::domain_error("degenerate constants: C = " + fmt(c.big_c) +
                                " (mu = 0 is not admissible)");
    }
    // C > 0 makes eta > |lambda + 1/2|; both Gamma arguments of the closed
    // form are then strictly positive
    if (!(c.eta - c.lambda + 0.5 > 0.0) || !(c.eta + c.lambda + 0.5 > 0.0)) {
        throw std::domain_error("degenerate constants: eta = " + fmt(c.eta) +
                                ", lambda = " + fmt(c.lambda));
    }
    return c;
}

double compute_psi(const HestonParams& p, double v, double tau) {
    if (!(std::isfinite(v) && v > 0.0)) {
        throw std::domain_error("compute_psi: require v > 0, got " + fmt(v));
    }
    if (!(std::isfinite(tau) && tau > 0.0)) {
        throw std::domain_error("compute_psi: require tau > 0, got " + fmt(tau));
    }
    return 2.0 * p.k * v / (p.sigma * p.sigma * std::expm1(p.k * tau));
}

double utility_value(const Utility& utility, double w) {
    if (const auto* pw = std::get_if<PowerUtility>(&utility)) {
        if (!(w > 0.0)) {
            throw std::domain_error("power utility requires w > 0, got " + fmt(w));
        }
        return std::pow(w, pw->gamma) / pw->gamma;
    }
    const auto& ex = std::get<ExponentialUtility>(utility);
    return 1.0 - std::exp(-ex.c * w) / ex.c;
}

} // namespace hestopt
