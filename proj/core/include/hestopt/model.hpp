#pragma once

#include <string>
#include <variant>
#include <vector>

namespace hestopt {

// Coefficients of the Heston dynamics
//   dX/X = mu dt + sqrt(V) dB1
//   dV   = k (theta - V) dt + sigma sqrt(V) dB2,   <B1,B2>_t = rho t.
// All rates are per year, times are in years. There is no financing term:
// the wealth equation is dW = alpha dX.
struct HestonParams {
    double mu;     // asset drift
    double k;      // variance mean-reversion speed
    double theta;  // long-run variance level
    double sigma;  // volatility of volatility
    double rho;    // Brownian correlation
};

struct PowerUtility {
    double gamma;  // U(w) = w^gamma / gamma, gamma < 0
};

struct ExponentialUtility {
    double c;      // U(w) = 1 - e^{-c w} / c, c > 0
};

using Utility = std::variant<PowerUtility, ExponentialUtility>;

// Solution constants computed from (params, utility).
// eta = sqrt((lambda + 1/2)^2 + 2 C / sigma^2) > |lambda + 1/2|, so both
// Gamma arguments eta - lambda + 1/2 and eta + lambda + 1/2 stay positive.
struct DerivedConstants {
    double delta;
    double big_c;
    double lambda;
    double eta;
};

// State at which value and control are requested.
struct EvaluationPoint {
    double w;  // wealth (must be > 0 under power utility)
    double x;  // asset price, > 0
    double v;  // instantaneous variance, > 0
    double t;  // current time
    double T;  // horizon, t <= T

    double tau() const { return T - t; }
};

// Returns every violated invariant with the offending value; empty = valid.
std::vector<std::string> validate(const HestonParams& params, const Utility& utility);

// delta, C, lambda, eta per utility family; lambda is assembled from the
// per-utility closed forms so rho = 0 needs no division by rho. Throws
// std::domain_error on validation failure or degenerate constants
// (mu = 0 gives C = 0 and is rejected).
DerivedConstants derive_constants(const HestonParams& params, const Utility& utility);

// Psi(v, t) = 2 k v / (sigma^2 (e^{k tau} - 1)) with tau = T - t > 0.
// The denominator uses expm1, so k * tau near zero stays stable.
double compute_psi(const HestonParams& params, double v, double tau);

// U(w) for either utility family.
double utility_value(const Utility& utility, double w);

} // namespace hestopt
