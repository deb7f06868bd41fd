#include <cmath>
#include <random>
#include <stdexcept>

#include <doctest.h>

#include "hestopt/model.hpp"
#include "hestopt/model_json.hpp"
#include "oracle.hpp"
#include "test_util.hpp"

using namespace hestopt;

namespace {

const HestonParams kBase{0.2, 1.0, 0.16, 0.4, 0.5};

bool mentions(const std::vector<std::string>& violations, const char* needle) {
    for (const auto& v : violations) {
        if (v.find(needle) != std::string::npos) return true;
    }
    return false;
}

} // namespace

TEST_SUITE_BEGIN("model");

TEST_CASE("validate accepts the baseline and reports each violation") {
    CHECK(validate(kBase, ExponentialUtility{1.0}).empty());
    CHECK(validate(kBase, PowerUtility{-1.0}).empty());

    HestonParams p = kBase;
    p.theta = 0.02;  // 2*1*0.02 = 0.04 < 0.16
    CHECK(mentions(validate(p, ExponentialUtility{1.0}), "Feller"));

    p = kBase;
    p.rho = 1.0;
    CHECK(mentions(validate(p, ExponentialUtility{1.0}), "rho"));
    p.rho = -1.5;
    CHECK(mentions(validate(p, ExponentialUtility{1.0}), "rho"));

    p = kBase;
    p.k = -1.0;
    CHECK(mentions(validate(p, ExponentialUtility{1.0}), "k > 0"));
    p = kBase;
    p.sigma = 0.0;
    CHECK(mentions(validate(p, ExponentialUtility{1.0}), "sigma"));

    CHECK(mentions(validate(kBase, PowerUtility{0.5}), "gamma"));
    CHECK(mentions(validate(kBase, PowerUtility{0.0}), "logarithmic"));
    CHECK(mentions(validate(kBase, ExponentialUtility{-2.0}), "c > 0"));

    // several violations at once are all reported
    p = kBase;
    p.theta = 0.02;
    p.rho = 2.0;
    CHECK(validate(p, PowerUtility{1.0}).size() >= 3);
}

TEST_CASE("derive_constants exponential example") {
    const auto c = derive_constants(kBase, ExponentialUtility{1.0});
    CHECK_REL(c.delta, 0.75, 1e-15);
    CHECK_REL(c.big_c, 0.015, 1e-14);
    CHECK_REL(c.lambda, -0.75, 1e-14);
    CHECK_REL(c.eta, 0.5, 1e-14);
}

TEST_CASE("derive_constants power with rho = 0 drops the correlation term") {
    HestonParams p = kBase;
    p.rho = 0.0;
    p.mu = 0.1;
    const auto c = derive_constants(p, PowerUtility{-1.0});
    CHECK_REL(c.delta, 1.0, 1e-15);
    CHECK_REL(c.big_c, 0.0025, 1e-14);
    CHECK_REL(c.lambda, -p.k * p.theta / (p.sigma * p.sigma), 1e-14);
}

TEST_CASE("derive_constants power oracle transcription") {
    const HestonParams p{0.15, 2.0, 0.2, 0.5, 0.3};
    const auto c = derive_constants(p, PowerUtility{-2.0});
    CHECK_REL(c.delta, oracle::kDelta_pow2, 1e-14);
    CHECK_REL(c.big_c, oracle::kC_pow2, 1e-14);
    CHECK_REL(c.lambda, oracle::kLambda_pow2, 1e-14);
    CHECK_REL(c.eta, oracle::kEta_pow2, 1e-14);
}

TEST_CASE("derive_constants rejects invalid inputs and mu = 0") {
    HestonParams p = kBase;
    p.theta = 0.02;
    CHECK_THROWS_AS(derive_constants(p, ExponentialUtility{1.0}), std::domain_error);
    p = kBase;
    p.mu = 0.0;
    CHECK_THROWS_AS(derive_constants(p, ExponentialUtility{1.0}), std::domain_error);
}

TEST_CASE("derived constants keep both Gamma arguments positive") {
    std::mt19937_64 gen(23);
    std::uniform_real_distribution<double> uk(0.2, 3.0), uth(0.02, 0.5), us(0.2, 0.95),
        ur(-0.95, 0.95), umu(-0.5, 0.5), ug(-8.0, -0.05), uc(0.2, 5.0);
    for (int i = 0; i < 2000; ++i) {
        HestonParams p;
        p.k = uk(gen);
        p.theta = uth(gen);
        p.sigma = us(gen) * std::sqrt(2.0 * p.k * p.theta);
        p.rho = ur(gen);
        p.mu = umu(gen);
        if (p.mu == 0.0) p.mu = 0.1;
        const Utility utility = (i % 2 == 0) ? Utility{PowerUtility{ug(gen)}}
                                             : Utility{ExponentialUtility{uc(gen)}};
        const auto c = derive_constants(p, utility);
        CHECK(c.delta > 0.0);
        CHECK(c.delta <= 1.0 + 1e-15);
        CHECK(c.big_c > 0.0);
        CHECK(c.eta > std::abs(c.lambda + 0.5));
        CHECK(c.eta - c.lambda + 0.5 > 0.0);
        CHECK(c.eta + c.lambda + 0.5 > 0.0);
    }
}

TEST_CASE("power constants converge to exponential constants as gamma -> -inf") {
    const auto ce = derive_constants(kBase, ExponentialUtility{1.0});
    const auto cp = derive_constants(kBase, PowerUtility{-1e6});
    CHECK_REL(cp.delta, ce.delta, 1e-5);
    CHECK_REL(cp.big_c, ce.big_c, 1e-5);
    CHECK_REL(cp.lambda, ce.lambda, 1e-5);
    CHECK_REL(cp.eta, ce.eta, 1e-5);
}

TEST_CASE("compute_psi substitution and scaling") {
    // k=1, sigma=0.4, v=0.16, tau=ln 2: e^{k tau} - 1 = 1
    CHECK_REL(compute_psi(kBase, 0.16, std::log(2.0)), 2.0, 1e-14);
    // linear in v
    CHECK_REL(compute_psi(kBase, 0.32, std::log(2.0)), 4.0, 1e-14);
    const HestonParams p{0.0, 1.5, 0.1, 0.3, 0.0};
    CHECK_REL(compute_psi(p, 0.09, 0.7), oracle::kPsiSpot, 1e-14);
}

TEST_CASE("compute_psi is stable for tiny k tau and errors on tau <= 0") {
    HestonParams p = kBase;
    p.k = 1e-10;
    // as k -> 0 the denominator tends to sigma^2 k tau, so Psi -> 2 v / (sigma^2 tau)
    CHECK_REL(compute_psi(p, 0.16, 0.5), 2.0 * 0.16 / (0.16 * 0.5), 1e-6);
    CHECK_THROWS_AS(compute_psi(kBase, 0.16, 0.0), std::domain_error);
    CHECK_THROWS_AS(compute_psi(kBase, 0.16, -1.0), std::domain_error);
    CHECK_THROWS_AS(compute_psi(kBase, 0.0, 0.5), std::domain_error);
}

TEST_CASE("psi is decreasing in tau, increasing in v, with the right limits") {
    double prev = compute_psi(kBase, 0.16, 1e-6);
    CHECK(prev > 1e5);  // tau -> 0+ blows up
    for (double tau : {0.1, 0.5, 1.0, 2.0, 5.0, 20.0}) {
        const double psi = compute_psi(kBase, 0.16, tau);
        CHECK(psi < prev);
        prev = psi;
    }
    CHECK(prev < 1e-7);  // tau -> infinity decays
    double prev_v = 0.0;
    for (double v : {0.01, 0.1, 0.2, 0.5}) {
        const double psi = compute_psi(kBase, v, 0.5);
        CHECK(psi > prev_v);
        prev_v = psi;
    }
}

TEST_CASE("utility_value") {
    CHECK_REL(utility_value(PowerUtility{-1.0}, 2.0), -0.5, 1e-15);
    CHECK_REL(utility_value(ExponentialUtility{1.0}, 0.0), 0.0, 1e-15);
    CHECK_THROWS_AS(utility_value(PowerUtility{-1.0}, 0.0), std::domain_error);
}

TEST_CASE("model JSON parsing honors exact field names") {
    const char* good = R"({"mu":0.2,"k":1.0,"theta":0.16,"sigma":0.4,"rho":0.5,
                           "utility":{"type":"exponential","c":1.0}})";
    const auto inputs = parse_model_inputs(good);
    CHECK(inputs.params.mu == 0.2);
    CHECK(inputs.params.theta == 0.16);
    CHECK(std::holds_alternative<ExponentialUtility>(inputs.utility));

    const char* pow = R"({"mu":0.1,"k":1.0,"theta":0.2,"sigma":0.3,"rho":-0.4,
                          "utility":{"type":"power","gamma":-2.0}})";
    CHECK(std::get<PowerUtility>(parse_model_inputs(pow).utility).gamma == -2.0);
}

TEST_CASE("model JSON rejects unknown, missing and mistyped fields") {
    CHECK_THROWS_WITH_AS(
        parse_model_inputs(R"({"mu":0.2,"k":1,"theta":0.16,"sigma":0.4,"rho":0.5,"kappa":2,
                               "utility":{"type":"exponential","c":1}})"),
        doctest::Contains("kappa"), std::invalid_argument);
    CHECK_THROWS_WITH_AS(
        parse_model_inputs(R"({"mu":0.2,"k":1,"theta":0.16,"sigma":0.4,"rho":0.5,
                               "utility":{"type":"exponential","c":1,"gamma":-1}})"),
        doctest::Contains("gamma"), std::invalid_argument);
    CHECK_THROWS_WITH_AS(
        parse_model_inputs(R"({"mu":0.2,"k":1,"theta":0.16,"sigma":0.4,
                               "utility":{"type":"exponential","c":1}})"),
        doctest::Contains("rho"), std::invalid_argument);
    CHECK_THROWS_AS(
        parse_model_inputs(R"({"mu":"x","k":1,"theta":0.16,"sigma":0.4,"rho":0.5,
                               "utility":{"type":"exponential","c":1}})"),
        std::invalid_argument);
    CHECK_THROWS_AS(
        parse_model_inputs(R"({"mu":0.2,"k":1,"theta":0.16,"sigma":0.4,"rho":0.5,
                               "utility":{"type":"log"}})"),
        std::invalid_argument);
    CHECK_THROWS_AS(parse_model_inputs("not json"), std::invalid_argument);
}

TEST_SUITE_END();
