#include "hestopt/verify_mc.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <stdexcept>

#include "hestopt/parallel.hpp"
#include "hestopt/policy.hpp"
#include "hestopt/rng.hpp"

namespace hestopt {

double gamma_draw(CounterRng& rng, double shape) {
    if (shape < 1.0) {
        const double u = rng.uniform();
        return gamma_draw(rng, shape + 1.0) * std::pow(u, 1.0 / shape);
    }
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / (3.0 * std::sqrt(d));
    for (;;) {
        double z = rng.normal();
        const double t = 1.0 + c * z;
        if (t <= 0.0) continue;
        const double v = t * t * t;
        const double u = rng.uniform();
        if (u < 1.0 - 0.0331 * z * z * z * z) return d * v;
        if (std::log(u) < 0.5 * z * z + d * (1.0 - v + std::log(v))) return d * v;
    }
}

namespace {

struct PathDraws {
    CounterRng rng;
    double sign;  // -1 for the antithetic mirror

    double normal() { return sign * rng.normal(); }
    double uniform() { return rng.uniform(); }  // not mirrored (used by rejection samplers)
};

// With antithetic pairing, path p and p + n/2 share stream p with flipped
// normal draws.
PathDraws draws_for_path(const McConfig& cfg, std::int64_t path) {
    if (cfg.antithetic) {
        const std::int64_t half = cfg.n_paths / 2;
        if (path >= half) {
            return {CounterRng::for_path(cfg.seed, static_cast<std::uint64_t>(path - half)), -1.0};
        }
    }
    return {CounterRng::for_path(cfg.seed, static_cast<std::uint64_t>(path)), 1.0};
}

// Exact CIR transition over dt: c * noncentral-chi-square(d, ncp) with
// d = 4 k theta / sigma^2. Requires d > 1 so the chi-square splits into a
// squared normal plus a chi-square with d-1 degrees of freedom.
double cir_exact_step(PathDraws& pd, double v, double k, double theta, double sigma, double dt) {
    const double e = std::exp(-k * dt);
    const double c = sigma * sigma * (1.0 - e) / (4.0 * k);
    const double d = 4.0 * k * theta / (sigma * sigma);
    const double ncp = v * e / c;
    const double z = pd.normal();
    const double zshift = z + std::sqrt(ncp);
    const double chi = 2.0 * gamma_draw(pd.rng, 0.5 * (d - 1.0));
    return c * (zshift * zshift + chi);
}

double cir_euler_step(PathDraws& pd, double v, double k, double theta, double sigma, double dt) {
    const double vp = std::max(v, 0.0);
    return v + k * (theta - vp) * dt + sigma * std::sqrt(vp * dt) * pd.normal();
}

void require_valid(const HestonParams& params, const Utility& utility) {
    const auto violations = validate(params, utility);
    if (!violations.empty()) {
        std::string msg = "invalid inputs:";
        for (const auto& v : violations) msg += " [" + v + "]";
        throw std::domain_error(msg);
    }
}

void require_valid_params(const HestonParams& params) {
    // utility-independent checks only
    require_valid(params, Utility{ExponentialUtility{1.0}});
}

} // namespace

void check_mc_config(const McConfig& cfg) {
    if (cfg.n_paths < 1000) {
        throw std::domain_error("mc config: n_paths >= 1000 required, got " +
                                std::to_string(cfg.n_paths));
    }
    if (cfg.n_steps < 50) {
        throw std::domain_error("mc config: n_steps >= 50 required, got " +
                                std::to_string(cfg.n_steps));
    }
    if (cfg.antithetic && cfg.n_paths % 2 != 0) {
        throw std::domain_error("mc config: antithetic pairing needs an even n_paths");
    }
}

McEstimate estimate_mean(std::span<const double> samples, bool antithetic) {
    if (samples.empty()) throw std::domain_error("estimate_mean: no samples");
    std::vector<double> units;
    if (antithetic) {
        const std::size_t half = samples.size() / 2;
        units.resize(half);
        for (std::size_t i = 0; i < half; ++i) {
            units[i] = 0.5 * (samples[i] + samples[i + half]);
        }
    } else {
        units.assign(samples.begin(), samples.end());
    }
    const auto n = static_cast<std::int64_t>(units.size());
    const double mean = pairwise_sum(units) / static_cast<double>(n);
    std::vector<double> sq(units.size());
    for (std::size_t i = 0; i < units.size(); ++i) {
        const double d = units[i] - mean;
        sq[i] = d * d;
    }
    const double var = n > 1 ? pairwise_sum(sq) / static_cast<double>(n - 1) : 0.0;
    return {mean, std::sqrt(var / static_cast<double>(n)), n};
}

std::vector<double> simulate_cir(const HestonParams& params, double v0, double tau,
                                 const McConfig& cfg, int threads) {
    check_mc_config(cfg);
    require_valid_params(params);
    if (!(v0 > 0.0) || !(tau > 0.0)) {
        throw std::domain_error("simulate_cir: require v0 > 0 and tau > 0");
    }
    const double dt = tau / cfg.n_steps;
    std::vector<double> terminal(static_cast<std::size_t>(cfg.n_paths));
    parallel_for(cfg.n_paths, threads, [&](std::int64_t p) {
        PathDraws pd = draws_for_path(cfg, p);
        double v = v0;
        for (int s = 0; s < cfg.n_steps; ++s) {
            v = cfg.scheme == CirScheme::ExactCir
                    ? cir_exact_step(pd, v, params.k, params.theta, params.sigma, dt)
                    : cir_euler_step(pd, v, params.k, params.theta, params.sigma, dt);
        }
        terminal[static_cast<std::size_t>(p)] = std::max(v, 0.0);
    });
    return terminal;
}

HestonEnsemble simulate_heston(const HestonParams& params, double x0, double v0, double tau,
                               const McConfig& cfg, int threads) {
    check_mc_config(cfg);
    require_valid_params(params);
    if (!(x0 > 0.0) || !(v0 > 0.0) || !(tau > 0.0)) {
        throw std::domain_error("simulate_heston: require x0 > 0, v0 > 0, tau > 0");
    }
    const double dt = tau / cfg.n_steps;
    const double rho = params.rho;
    const double rho_perp = std::sqrt(1.0 - rho * rho);
    HestonEnsemble ens;
    ens.x_terminal.resize(static_cast<std::size_t>(cfg.n_paths));
    ens.v_terminal.resize(static_cast<std::size_t>(cfg.n_paths));
    parallel_for(cfg.n_paths, threads, [&](std::int64_t p) {
        PathDraws pd = draws_for_path(cfg, p);
        double v = v0;
        double lx = std::log(x0);
        for (int s = 0; s < cfg.n_steps; ++s) {
            const double vp = std::max(v, 0.0);
            double zv;
            double v_next;
            if (cfg.scheme == CirScheme::ExactCir) {
                v_next = cir_exact_step(pd, v, params.k, params.theta, params.sigma, dt);
                // Brownian increment implied by the variance SDE over the step
                const double denom = params.sigma * std::sqrt(std::max(vp, 1e-12) * dt);
                zv = (v_next - v - params.k * (params.theta - vp) * dt) / denom;
            } else {
                zv = pd.normal();
                v_next = v + params.k * (params.theta - vp) * dt +
                         params.sigma * std::sqrt(vp * dt) * zv;
            }
            const double zp = pd.normal();
            const double zx = rho * zv + rho_perp * zp;
            lx += (params.mu - 0.5 * vp) * dt + std::sqrt(vp * dt) * zx;
            v = v_next;
        }
        ens.x_terminal[static_cast<std::size_t>(p)] = std::exp(lx);
        ens.v_terminal[static_cast<std::size_t>(p)] = std::max(v, 0.0);
    });
    return ens;
}

std::vector<double> bond_discount_samples(const HestonParams& params,
                                          const DerivedConstants& constants,
                                          double v, double tau, const McConfig& cfg,
                                          int threads) {
    check_mc_config(cfg);
    require_valid_params(params);
    if (!(v > 0.0) || !(tau > 0.0)) {
        throw std::domain_error("bond_discount_samples: require v > 0 and tau > 0");
    }
    if (std::abs(1.0 + constants.lambda) <= 1e-12 * std::max(1.0, std::abs(constants.lambda))) {
        throw std::domain_error("bond_discount_samples: 1 + lambda = 0 makes the 3/2-model "
                                "coefficients degenerate; this case is rejected");
    }
    // r = C / v maps the f-equation onto the 3/2 short-rate bond; simulating
    // the reciprocal keeps the diffusion square-root instead of 3/2-power.
    // The drift-adjusted level is theta~ = -sigma^2 lambda / k.
    const double theta_mod = -params.sigma * params.sigma * constants.lambda / params.k;
    if (!(theta_mod > 0.0)) {
        throw std::domain_error("bond_discount_samples: drift-adjusted level is not positive "
                                "(lambda = " + std::to_string(constants.lambda) + ")");
    }
    const double dt = tau / cfg.n_steps;
    const double d_mod = 4.0 * params.k * theta_mod / (params.sigma * params.sigma);
    if (cfg.scheme == CirScheme::ExactCir && d_mod <= 1.0) {
        throw std::domain_error("bond_discount_samples: exact scheme needs 4 k theta~/sigma^2 > 1");
    }
    constexpr double kVarFloor = 1e-14;
    std::vector<double> discount(static_cast<std::size_t>(cfg.n_paths));
    parallel_for(cfg.n_paths, threads, [&](std::int64_t p) {
        PathDraws pd = draws_for_path(cfg, p);
        double vs = v;
        double integral = 0.0;
        double prev_rate = constants.big_c / std::max(vs, kVarFloor);
        for (int s = 0; s < cfg.n_steps; ++s) {
            vs = cfg.scheme == CirScheme::ExactCir
                     ? cir_exact_step(pd, vs, params.k, theta_mod, params.sigma, dt)
                     : cir_euler_step(pd, vs, params.k, theta_mod, params.sigma, dt);
            const double rate = constants.big_c / std::max(vs, kVarFloor);
            integral += 0.5 * (prev_rate + rate) * dt;
            prev_rate = rate;
        }
        discount[static_cast<std::size_t>(p)] = std::exp(-integral);
    });
    return discount;
}

BondCheckResult bond_check(const HestonParams& params, const Utility& utility, double v,
                           double tau, const McConfig& cfg, int threads) {
    require_valid(params, utility);
    const DerivedConstants constants = derive_constants(params, utility);
    const auto samples = bond_discount_samples(params, constants, v, tau, cfg, threads);
    BondCheckResult result{};
    result.estimate = estimate_mean(samples, cfg.antithetic);
    result.closed_form = value_factor(constants, params, v, tau);
    result.deviation_in_se = std::abs(result.estimate.mean - result.closed_form) /
                             result.estimate.std_error;
    return result;
}

namespace {

// Tabulated ln(ratio) against ln(psi) with monotone-grid cubic Hermite
// interpolation; exact asymptotic tail above the table, exact limit 1 below.
class RatioTable {
public:
    RatioTable(const DerivedConstants& c, double psi_lo, double psi_hi, int n) {
        a_ = c.eta - c.lambda + 0.5;
        b_ = 1.0 + 2.0 * c.eta;
        u0_ = std::log(psi_lo);
        u1_ = std::log(psi_hi);
        n_ = n;
        du_ = (u1_ - u0_) / (n - 1);
        g_.resize(n);
        slope_.resize(n);
        for (int i = 0; i < n; ++i) {
            const double psi = std::exp(u0_ + du_ * i);
            g_[i] = std::log(specfun::kummer_ratio_shifted(a_, b_, psi));
        }
        for (int i = 0; i < n; ++i) {
            if (i == 0) {
                slope_[i] = (g_[1] - g_[0]) / du_;
            } else if (i == n - 1) {
                slope_[i] = (g_[n - 1] - g_[n - 2]) / du_;
            } else {
                slope_[i] = (g_[i + 1] - g_[i - 1]) / (2.0 * du_);
            }
        }
    }

    double operator()(double psi) const {
        const double u = std::log(psi);
        if (u <= u0_) return std::exp(g_.front());
        if (u >= u1_) {
            return specfun::kummer_ratio_shifted(a_, b_, psi);
        }
        const double s = (u - u0_) / du_;
        const int i = std::min(n_ - 2, static_cast<int>(s));
        const double t = s - i;
        const double h00 = (1.0 + 2.0 * t) * (1.0 - t) * (1.0 - t);
        const double h10 = t * (1.0 - t) * (1.0 - t);
        const double h01 = t * t * (3.0 - 2.0 * t);
        const double h11 = t * t * (t - 1.0);
        const double g = h00 * g_[i] + h10 * du_ * slope_[i] + h01 * g_[i + 1] +
                         h11 * du_ * slope_[i + 1];
        return std::exp(g);
    }

private:
    double a_, b_, u0_, u1_, du_;
    int n_;
    std::vector<double> g_;
    std::vector<double> slope_;
};

} // namespace

UtilityCheckResult utility_check(const EvaluationPoint& point, const Utility& utility,
                                 const HestonParams& params, const McConfig& cfg,
                                 std::span<const double> control_scalings, int threads,
                                 const UtilityCheckOptions& options) {
    check_mc_config(cfg);
    require_valid(params, utility);
    const double tau = point.tau();
    if (!(tau > 0.0)) throw std::domain_error("utility_check: require tau > 0");
    if (control_scalings.empty()) throw std::domain_error("utility_check: no scalings");

    const DerivedConstants constants = derive_constants(params, utility);
    const double dt = tau / cfg.n_steps;
    const double rho = params.rho;
    const double rho_perp = std::sqrt(1.0 - rho * rho);
    const double ratio_coeff = constants.eta + constants.lambda + 0.5;
    const double a = constants.eta - constants.lambda + 0.5;
    const double b = 1.0 + 2.0 * constants.eta;
    const bool power = std::holds_alternative<PowerUtility>(utility);
    const double gamma = power ? std::get<PowerUtility>(utility).gamma : 0.0;
    const double cexp = power ? 0.0 : std::get<ExponentialUtility>(utility).c;
    constexpr double kVarFloor = 1e-14;

    // psi along a path spans a few decades around the start value; pad wide
    // and fall back to exact evaluation outside
    std::unique_ptr<RatioTable> table;
    if (options.tabulate_ratio) {
        const double psi_start = compute_psi(params, point.v, tau);
        const double lo = psi_start * 1e-6;
        const double hi = std::max(compute_psi(params, 20.0 * std::max(point.v, params.theta), dt),
                                   psi_start * 1e6);
        table = std::make_unique<RatioTable>(constants, lo, hi, 4096);
    }
    auto ratio_at = [&](double psi) {
        return table ? (*table)(psi) : specfun::kummer_ratio_shifted(a, b, psi);
    };

    UtilityCheckResult result{};
    result.bellman_value = bellman(point, utility, constants, params);

    const std::size_t n_paths = static_cast<std::size_t>(cfg.n_paths);
    std::vector<std::vector<double>> utilities(control_scalings.size());
    std::vector<std::int64_t> flags(control_scalings.size(), 0);

    for (std::size_t si = 0; si < control_scalings.size(); ++si) {
        utilities[si].resize(n_paths);
        std::vector<std::int64_t> path_flag(n_paths, 0);
        const double scaling = control_scalings[si];
        parallel_for(cfg.n_paths, threads, [&](std::int64_t p) {
            PathDraws pd = draws_for_path(cfg, p);
            double v = point.v;
            double lw = 0.0;       // power: ln(W / w0)
            double w = point.w;    // exponential: additive wealth
            bool flagged = false;
            for (int s = 0; s < cfg.n_steps; ++s) {
                const double vp = std::max(v, kVarFloor);
                const double remaining = tau - dt * s;
                const double psi = compute_psi(params, vp, remaining);
                const double fv_over_f = ratio_coeff / vp * ratio_at(psi);
                const double bracket =
                    params.mu / vp + scaling * rho * params.sigma / constants.delta * fv_over_f;

                const double zv = pd.normal();
                const double zp = pd.normal();
                const double zx = rho * zv + rho_perp * zp;

                if (power) {
                    // fraction of wealth in the asset; pi = alpha X / W
                    const double pi = bracket / (1.0 - gamma);
                    lw += pi * (params.mu * dt + std::sqrt(vp * dt) * zx) -
                          0.5 * pi * pi * vp * dt;
                } else {
                    // alpha X = bracket / c, the dollar position; dW = alpha dX
                    const double dlx = (params.mu - 0.5 * vp) * dt + std::sqrt(vp * dt) * zx;
                    w += bracket / cexp * std::expm1(dlx);
                }
                v = v + params.k * (params.theta - std::max(v, 0.0)) * dt +
                    params.sigma * std::sqrt(std::max(v, 0.0) * dt) * zv;
                if (!std::isfinite(v) || (power ? !std::isfinite(lw) : !std::isfinite(w))) {
                    flagged = true;
                    break;
                }
            }
            double u;
            if (flagged) {
                u = 0.0;
            } else if (power) {
                u = std::pow(point.w * std::exp(lw), gamma) / gamma;
                if (!std::isfinite(u)) flagged = true;
            } else {
                u = 1.0 - std::exp(-cexp * w) / cexp;
                if (!std::isfinite(u)) flagged = true;
            }
            utilities[si][static_cast<std::size_t>(p)] = flagged ? 0.0 : u;
            path_flag[static_cast<std::size_t>(p)] = flagged ? 1 : 0;
        });
        std::int64_t flagged_total = 0;
        for (auto fl : path_flag) flagged_total += fl;
        flags[si] = flagged_total;
        if (static_cast<double>(flagged_total) > 0.001 * static_cast<double>(cfg.n_paths)) {
            throw std::runtime_error("utility_check: " + std::to_string(flagged_total) +
                                     " flagged paths exceed 0.1% of " +
                                     std::to_string(cfg.n_paths));
        }
    }

    std::ptrdiff_t base_idx = -1;
    for (std::size_t si = 0; si < control_scalings.size(); ++si) {
        if (control_scalings[si] == 1.0) base_idx = static_cast<std::ptrdiff_t>(si);
    }

    for (std::size_t si = 0; si < control_scalings.size(); ++si) {
        UtilityCheckRow row{};
        row.scaling = control_scalings[si];
        row.utility = estimate_mean(utilities[si], cfg.antithetic);
        row.flagged_paths = flags[si];
        result.rows.push_back(row);

        if (base_idx >= 0) {
            std::vector<double> diff(n_paths);
            for (std::size_t p = 0; p < n_paths; ++p) {
                diff[p] = utilities[si][p] - utilities[static_cast<std::size_t>(base_idx)][p];
            }
            const McEstimate d = estimate_mean(diff, cfg.antithetic);
            result.diff_mean.push_back(d.mean);
            result.diff_std_error.push_back(d.std_error);
        } else {
            result.diff_mean.push_back(0.0);
            result.diff_std_error.push_back(0.0);
        }
    }
    return result;
}

} // namespace hestopt
