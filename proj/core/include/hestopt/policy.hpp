#pragma once

#include "hestopt/model.hpp"
#include "hestopt/specfun.hpp"

namespace hestopt {

// Everything the closed form yields at one evaluation point. The control
// decomposition is exact: control == myopic_term + hedging_term.
struct PolicyOutput {
    double f;             // value factor f(v,t) > 0
    double fv_over_f;     // d/dv ln f, per unit v
    double bellman;       // J at the point
    double control;       // alpha*, in asset shares
    double myopic_term;   // prefactor * mu / v
    double hedging_term;  // prefactor * (rho sigma / delta) * fv_over_f
    double psi;           // diagnostic (infinite at tau = 0)
};

enum class PsiRegime { Small, Large };

// Validity bands for the limiting formulas; chosen so full formula and
// asymptote overlap within 1% at the band edges for moderate constants.
struct AsymptoticBands {
    double small_max = 1e-2;
    double large_min = 1e2;
};

// ln f as a function of Psi alone:
//   ln f = lnGamma(eta-lambda+1/2) - lnGamma(2 eta + 1)
//        + (lambda + eta + 1/2) ln Psi - Psi + ln 1F1(eta-lambda+1/2; 1+2 eta; Psi),
// the prefactor e^{-Psi/2} and the e^{-Psi/2} inside M combined analytically.
double log_value_factor_psi(const DerivedConstants& constants, double psi);

// f(v, tau), tau > 0. Finite and positive for the whole parameter domain.
double value_factor(const DerivedConstants& constants, const HestonParams& params,
                    double v, double tau);

// f_v / f = ((eta + lambda + 1/2) / v) * M_{1+lambda,eta}(Psi) / M_{lambda,eta}(Psi).
double log_derivative_ratio(const DerivedConstants& constants, double v, double psi);

// J_P = (w^gamma / gamma) f^{1/delta},  J_E = 1 - (e^{-c w} / c) f^{1/delta}.
// tau = 0 returns U(w) exactly.
double bellman(const EvaluationPoint& point, const Utility& utility,
               const DerivedConstants& constants, const HestonParams& params);

// Optimal feedback control with its myopic/hedging split. At tau = 0 the
// hedging term takes its large-Psi limit (zero) and f = 1.
PolicyOutput optimal_control(const EvaluationPoint& point, const Utility& utility,
                             const DerivedConstants& constants, const HestonParams& params);

// Limiting forms of f: Psi -> 0 leading term
//   Gamma(eta-lambda+1/2)/Gamma(2 eta + 1) * Psi^{eta+lambda+1/2},
// Psi -> infinity gives 1. Throws std::domain_error outside the band.
double asymptotic_value_factor(const DerivedConstants& constants, double psi,
                               PsiRegime regime, const AsymptoticBands& bands = {});

// Small vol-of-vol approximation of the control:
//   prefactor * (mu / v + (rho sigma / delta) * (C / (k v^2)) e^{k tau}).
double small_volvol_control(const EvaluationPoint& point, const Utility& utility,
                            const HestonParams& params);

} // namespace hestopt
