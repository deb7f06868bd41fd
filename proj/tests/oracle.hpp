#pragma once

// Test-only oracles kept independent of the library implementation:
//  - a direct long-double ascending series for 1F1, summed to a 1e-20 term
//    ratio with no scaling tricks and no asymptotic branch
//  - reference values frozen from 50-digit arithmetic
#include <cmath>

namespace oracle {

inline long double kummer_1f1(long double a, long double b, long double z) {
    long double sum = 1.0L;
    long double term = 1.0L;
    for (long n = 0; n < 2000000L; ++n) {
        term *= z * (a + n) / ((b + n) * (n + 1));
        sum += term;
        if (std::fabs(term) < 1e-20L * std::fabs(sum)) break;
    }
    return sum;
}

// M_{lam,eta}(z) by direct composition; safe for moderate z only
inline long double whittaker_m(long double lam, long double eta, long double z) {
    return std::exp(-z / 2.0L) * std::pow(z, eta + 0.5L) *
           kummer_1f1(eta - lam + 0.5L, 1.0L + 2.0L * eta, z);
}

// --- frozen references ---

// specfun spot values
inline constexpr double kLn24 = 3.1780538303479456196;
inline constexpr double kLnSqrtPi = 0.57236494292470008707;
inline constexpr double kLn1F1_175_2_3 = 2.7413808462782575375;
inline constexpr double kLn1F1_175_2_4 = 3.6874382803007569707;
inline constexpr double k1F1_075_2_4 = 8.5754868180492363172;
inline constexpr double kRatio_175_2_4 = 0.2146963623733020017;
inline constexpr double kRatio_175_2_2 = 0.40940712665608786116;
inline constexpr double kLnWhitM_m075_05_4 = 3.0737326414206475896;
inline constexpr double kRatio_175_2_1e4 = 7.5003750421966436322e-5;
inline constexpr double kLn1F1_175_2_600 = 598.48485607684491246;
inline constexpr double kOneMinusInvE = 0.6321205588285576784;

// policy values for constants (lambda = -0.75, eta = 0.5)
inline constexpr double kF_psi4 = 0.95085923008276251202;
inline constexpr double kF_psi2 = 0.90161750529990485953;
inline constexpr double kFvf_v016_psi4 = 0.33546306620828437766;
inline constexpr double kF_psi1em4 = 0.091905103880663233497;
inline constexpr double kFSmallLead_1em4 = 0.091906252684888323385;

// exponential example: mu=0.2 k=1 theta=0.16 sigma=0.4 rho=0.5, c=1,
// point (w=2, x=1, v=0.16, tau=ln 2) so Psi = 2
inline constexpr double kJ_exp_point = 0.88211981293126247284;
inline constexpr double kFvf_exp_point = 0.63969863540013728307;
inline constexpr double kAlpha_exp_point = 1.4205863027733699422;
inline constexpr double kHedging_exp_point = 0.17058630277336994215;

// power example: same params, gamma=-1, same point
inline constexpr double kF_pow_point = 0.9454558748331412674;
inline constexpr double kJ_pow_point = -0.46895530141877768229;
inline constexpr double kAlpha_pow_point = 1.3252283316641223564;

// model constants: power gamma=-2, rho=0.3, mu=0.15, sigma=0.5, k=2, theta=0.2
inline constexpr double kDelta_pow2 = 0.94;
inline constexpr double kC_pow2 = 0.00705;
inline constexpr double kLambda_pow2 = -1.54;
inline constexpr double kEta_pow2 = 1.0667708282475669572;

// Psi at k=1.5, sigma=0.3, v=0.09, tau=0.7
inline constexpr double kPsiSpot = 1.6149426395672613605;

} // namespace oracle
