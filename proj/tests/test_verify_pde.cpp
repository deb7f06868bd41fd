#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include <doctest.h>

#include "hestopt/policy.hpp"
#include "hestopt/verify_pde.hpp"
#include "test_util.hpp"

using namespace hestopt;

namespace {

const HestonParams kBase{0.2, 1.0, 0.16, 0.4, 0.5};
const Utility kExp = ExponentialUtility{1.0};

} // namespace

TEST_SUITE_BEGIN("verify_pde");

TEST_CASE("the rho-free drift coefficient equals the textbook product form") {
    // k theta - ((1-delta)/rho) mu sigma - k v  ==  -sigma^2 lambda - k v
    for (double rho : {-0.7, -0.2, 0.3, 0.5}) {
        HestonParams p = kBase;
        p.rho = rho;
        for (const Utility& utility : {kExp, Utility{PowerUtility{-2.0}}}) {
            const auto c = derive_constants(p, utility);
            const double product_form =
                p.k * p.theta - (1.0 - c.delta) / rho * p.mu * p.sigma;
            const double rho_free = -p.sigma * p.sigma * c.lambda;
            CHECK_REL(rho_free, product_form, 1e-13);
        }
    }
}

TEST_CASE("constant evaluator isolates the zeroth-order term") {
    const auto c = derive_constants(kBase, kExp);
    auto one = [](double, double) { return 1.0; };
    for (double v : {0.08, 0.16, 0.4}) {
        const double r = pde_residual(one, kBase, c, v, 0.5, 1e-4 * v, 1e-4);
        CHECK(r == -c.big_c / v);  // differences of equal values vanish exactly
    }
}

TEST_CASE("closed form satisfies the PDE to stencil accuracy") {
    for (const Utility& utility : {kExp, Utility{PowerUtility{-1.0}}}) {
        const auto c = derive_constants(kBase, utility);
        auto f = [&](double v, double tau) { return value_factor(c, kBase, v, tau); };
        const double h_v = 1e-4 * default_grid(kBase).v_max;
        const double h_tau = 1e-4;
        std::vector<double> ratios;
        for (double v : {0.1, 0.16, 0.3}) {
            for (double tau : {0.3, 0.8}) {
                // residual at the criterion steps, and the shrink across the
                // two halvings that end there
                const double r1 = pde_residual(f, kBase, c, v, tau, h_v, h_tau);
                const double r2 = pde_residual(f, kBase, c, v, tau, 2 * h_v, 2 * h_tau);
                const double r4 = pde_residual(f, kBase, c, v, tau, 4 * h_v, 4 * h_tau);
                CHECK_MESSAGE(std::abs(r1) <= 1e-6, "v=" << v << " tau=" << tau << " r=" << r1);
                ratios.push_back(std::abs(r4 / r2));
                ratios.push_back(std::abs(r2 / r1));
            }
        }
        std::sort(ratios.begin(), ratios.end());
        const double med = ratios[ratios.size() / 2];
        CHECK_MESSAGE(med > 3.0, "median halving ratio " << med);
        CHECK_MESSAGE(med < 5.0, "median halving ratio " << med);
    }
}

TEST_CASE("residual_report carries the Richardson order") {
    const auto c = derive_constants(kBase, kExp);
    auto f = [&](double v, double tau) { return value_factor(c, kBase, v, tau); };
    std::vector<std::pair<double, double>> points;
    for (double v : {0.1, 0.16, 0.25}) {
        for (double tau : {0.3, 0.6, 1.0}) points.emplace_back(v, tau);
    }
    const double h_v = 1e-4 * default_grid(kBase).v_max;
    const auto report = residual_report(f, kBase, c, points, h_v, 1e-4);
    CHECK(report.max_abs_residual <= 1e-6);
    CHECK(report.l2_residual <= report.max_abs_residual);
    CHECK(report.richardson_order >= 1.5);
    CHECK(report.richardson_order <= 2.5);
    CHECK(report.worst_v > 0.0);
}

TEST_CASE("stencil domain violations throw") {
    const auto c = derive_constants(kBase, kExp);
    auto one = [](double, double) { return 1.0; };
    CHECK_THROWS_AS(pde_residual(one, kBase, c, 0.16, 0.5e-5, 1e-4 * 0.16, 1e-4),
                    std::domain_error);
    CHECK_THROWS_AS(pde_residual(one, kBase, c, 1e-5, 0.5, 1e-4, 1e-4), std::domain_error);
    CHECK_THROWS_AS(pde_residual(one, kBase, c, 0.16, 0.5, 0.0, 1e-4), std::domain_error);
}

TEST_CASE("cn_solve terminal slice is identically one") {
    const auto c = derive_constants(kBase, kExp);
    const auto surface = cn_solve(kBase, c, default_grid(kBase, 0.5, 32, 16));
    for (std::size_t i = 0; i < surface.v.size(); ++i) {
        CHECK(surface.at(0, i) == 1.0);
    }
    CHECK(surface.tau[0] == 0.0);
}

TEST_CASE("cn_solve with C = 0 stays identically one") {
    // C = 0 removes the zeroth-order term, so f = 1 solves the PDE exactly;
    // constants are injected directly since derive_constants forbids C = 0
    auto c = derive_constants(kBase, kExp);
    c.big_c = 0.0;
    const auto surface = cn_solve(kBase, c, default_grid(kBase, 1.0, 64, 32));
    for (std::size_t m = 0; m < surface.tau.size(); ++m) {
        for (std::size_t i = 0; i < surface.v.size(); ++i) {
            CHECK_MESSAGE(std::abs(surface.at(m, i) - 1.0) <= 1e-12,
                          "m=" << m << " i=" << i << " f=" << surface.at(m, i));
        }
    }
}

TEST_CASE("cn_solve respects the discrete maximum principle proxy") {
    for (double rho : {-0.7, 0.0, 0.5}) {
        HestonParams p = kBase;
        p.rho = rho;
        const auto c = derive_constants(p, kExp);
        const auto surface = cn_solve(p, c, default_grid(p, 1.0, 128, 128));
        for (std::size_t m = 1; m < surface.tau.size(); ++m) {
            for (std::size_t i = 0; i < surface.v.size(); ++i) {
                const double f = surface.at(m, i);
                CHECK(f > 0.0);
                CHECK(f <= 1.0 + 1e-8);
            }
        }
    }
}

TEST_CASE("cn_solve converges at second order toward the closed form") {
    const auto c = derive_constants(kBase, kExp);
    auto closed = [&](double v, double tau) { return value_factor(c, kBase, v, tau); };
    std::vector<double> errs;
    for (int n : {128, 256}) {
        const GridSpec g = default_grid(kBase, 1.0, n, n);
        const auto surface = cn_solve(kBase, c, g);
        const auto cmp =
            compare_cn_closed_form(surface, closed, default_interior_band(kBase, g));
        errs.push_back(cmp.max_rel_error);
    }
    const double order = std::log2(errs[0] / errs[1]);
    CHECK_MESSAGE(order >= 1.8, "order=" << order);
    CHECK_MESSAGE(order <= 2.2, "order=" << order);
}

TEST_CASE("cn_solve rejects bad grids and reports non-finite marches") {
    const auto c = derive_constants(kBase, kExp);
    GridSpec g = default_grid(kBase);
    g.n_v = 4;
    CHECK_THROWS_AS(cn_solve(kBase, c, g), std::domain_error);
    g = default_grid(kBase);
    g.v_min = -0.1;
    CHECK_THROWS_AS(cn_solve(kBase, c, g), std::domain_error);

    auto broken = c;
    broken.lambda = std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS_AS(cn_solve(kBase, broken, default_grid(kBase, 0.5, 32, 16)),
                    std::runtime_error);
}

TEST_CASE("surface CSV is headed, 17-digit, and round-trips") {
    const auto c = derive_constants(kBase, kExp);
    auto closed = [&](double v, double tau) { return value_factor(c, kBase, v, tau); };
    GridSpec g = default_grid(kBase, 0.5, 16, 16);
    const auto surface = cn_solve(kBase, c, g);
    std::ostringstream os;
    write_surface_csv(os, surface, closed);
    std::istringstream in(os.str());
    std::string header;
    std::getline(in, header);
    CHECK(header == "v,tau,f_numeric,f_closed_form,rel_error");
    std::string line;
    std::size_t rows = 0;
    std::getline(in, line);  // first row: tau = 0, v = v_min
    {
        double v, tau, fn, fc, rel;
        CHECK(std::sscanf(line.c_str(), "%lf,%lf,%lf,%lf,%lf", &v, &tau, &fn, &fc, &rel) == 5);
        CHECK(v == surface.v[0]);  // 17 significant digits round-trip the double
        CHECK(tau == 0.0);
        CHECK(fn == 1.0);
    }
    rows = 1;
    while (std::getline(in, line)) {
        if (!line.empty()) ++rows;
    }
    CHECK(rows == surface.v.size() * surface.tau.size());
}

TEST_CASE("grid nodes: stretching produces monotone nodes hitting both ends") {
    GridSpec g = default_grid(kBase, 1.0, 64, 32);
    for (auto s : {Stretching::None, Stretching::Geometric}) {
        g.stretching = s;
        const auto v = grid_v_nodes(g);
        CHECK(v.front() == g.v_min);
        CHECK(v.back() == g.v_max);
        for (std::size_t i = 1; i < v.size(); ++i) CHECK(v[i] > v[i - 1]);
    }
}

TEST_SUITE_END();
