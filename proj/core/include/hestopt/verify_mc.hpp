#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "hestopt/model.hpp"

namespace hestopt {

enum class CirScheme { FullTruncationEuler, ExactCir };

struct McConfig {
    std::int64_t n_paths = 100000;
    int n_steps = 256;        // per simulation horizon
    std::uint64_t seed = 0;
    CirScheme scheme = CirScheme::FullTruncationEuler;
    bool antithetic = true;   // pairs path 2j+1 with the sign-flipped draws of 2j
};

// Mean with its standard error; n_effective counts independent units
// (antithetic pairs collapse to one unit).
struct McEstimate {
    double mean;
    double std_error;
    std::int64_t n_effective;
};

void check_mc_config(const McConfig& cfg);  // throws std::domain_error

// Estimate over terminal samples; with antithetic on, consecutive pairs are
// averaged into units first. Deterministic pairwise accumulation.
McEstimate estimate_mean(std::span<const double> samples, bool antithetic);

// Terminal variance samples of the CIR process dV = k(theta - V)dt + sigma sqrt(V) dB.
// Full truncation uses max(V,0) in drift and diffusion; the exact scheme
// samples the noncentral chi-square transition.
std::vector<double> simulate_cir(const HestonParams& params, double v0, double tau,
                                 const McConfig& cfg, int threads = 1);

struct HestonEnsemble {
    std::vector<double> x_terminal;
    std::vector<double> v_terminal;
};

// Joint price/variance paths; B1 = rho B2 + sqrt(1-rho^2) Bperp, log-Euler
// update for X.
HestonEnsemble simulate_heston(const HestonParams& params, double x0, double v0,
                               double tau, const McConfig& cfg, int threads = 1);

// Discount-factor samples exp(-int_0^tau C / v_s ds) where v follows the
// drift-adjusted CIR dv = (-sigma^2 lambda - k v) dt + sigma sqrt(v) dB
// starting at v. By the r = C/v substitution this is the 3/2-model bond.
// Throws std::domain_error when 1 + lambda = 0 (degenerate 3/2 coefficients).
std::vector<double> bond_discount_samples(const HestonParams& params,
                                          const DerivedConstants& constants,
                                          double v, double tau, const McConfig& cfg,
                                          int threads = 1);

struct BondCheckResult {
    McEstimate estimate;    // Monte Carlo bond value
    double closed_form;     // f(v, tau)
    double deviation_in_se; // |mean - closed_form| / std_error
};

BondCheckResult bond_check(const HestonParams& params, const Utility& utility,
                           double v, double tau, const McConfig& cfg, int threads = 1);

struct UtilityCheckRow {
    double scaling;             // multiplier on the hedging term; 1 = optimal
    McEstimate utility;         // E U(W_T)
    std::int64_t flagged_paths; // non-finite wealth updates (fails run above 0.1%)
};

struct UtilityCheckResult {
    std::vector<UtilityCheckRow> rows;    // one per requested scaling
    double bellman_value;                 // closed-form J at the start point
    // paired-seed difference of each row against scaling 1.0
    std::vector<double> diff_mean;
    std::vector<double> diff_std_error;
};

struct UtilityCheckOptions {
    // Tabulate the Kummer ratio as a function of Psi before the path loop;
    // exact per-step evaluation is available for cross-checks.
    bool tabulate_ratio = true;
};

// Simulates wealth under the feedback control re-evaluated every step, the
// hedging term scaled by each factor in control_scalings, and compares
// E U(W_T) with the closed-form Bellman value. Power-utility wealth is
// updated multiplicatively through the fractional allocation alpha X / W.
UtilityCheckResult utility_check(const EvaluationPoint& point, const Utility& utility,
                                 const HestonParams& params, const McConfig& cfg,
                                 std::span<const double> control_scalings,
                                 int threads = 1, const UtilityCheckOptions& options = {});

} // namespace hestopt
