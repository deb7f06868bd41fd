#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace hestopt::specfun {

// Controls for the confluent hypergeometric series. The switch point is
// exposed so branch continuity can be probed from tests.
struct SeriesConfig {
    double tail_tol = 1e-16;           // stop once next term < tail_tol * running sum
    std::size_t max_terms = 100000;    // hard cap for the ascending series
    double asymptotic_switch = 500.0;  // minimum z for the large-z expansion
};

// Raised when a series does not converge within its term budget.
class EvaluationError : public std::runtime_error {
public:
    EvaluationError(const std::string& what, std::size_t terms_used)
        : std::runtime_error(what), terms_used_(terms_used) {}
    std::size_t terms_used() const noexcept { return terms_used_; }

private:
    std::size_t terms_used_;
};

// Arguments of the Kummer confluent hypergeometric function 1F1(a; b; z).
// Valid when a > 0, b > 0, z >= 0; every series term is then positive.
struct KummerArgs {
    double a;
    double b;
    double z;
};

// ln Gamma(x), x > 0. Relative accuracy ~1e-14 on (0, 170], including the
// zeros at x = 1 and x = 2 which are handled by a local series.
double log_gamma(double x);

// ln 1F1(a; b; z). Scaled accumulation keeps the sum finite for any z in
// double range; beyond the switch point the e^z z^(a-b) expansion with an
// optimally truncated correction series is used.
double log_kummer_m(const KummerArgs& args, const SeriesConfig& cfg = {});

// ln M_{lambda,eta}(z), Whittaker function of the first kind, in log scale:
//   ln M = -z/2 + (eta + 1/2) ln z + ln 1F1(eta - lambda + 1/2; 1 + 2 eta; z).
// Requires eta > 0, z > 0, eta - lambda + 1/2 > 0.
double log_whittaker_m(double lambda, double eta, double z, const SeriesConfig& cfg = {});

// 1F1(a-1; b; z) / 1F1(a; b; z). After the shared exponential and power
// factors cancel this equals M_{1+lambda,eta}(z) / M_{lambda,eta}(z) with
// a = eta - lambda + 1/2. Requires a - 1 >= 0, b > 0, z >= 0; the result
// lies in (0, 1] and is non-increasing in z.
double kummer_ratio_shifted(double a, double b, double z, const SeriesConfig& cfg = {});

} // namespace hestopt::specfun
