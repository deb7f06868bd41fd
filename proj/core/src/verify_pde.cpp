#include "hestopt/verify_pde.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <span>
#include <stdexcept>

namespace hestopt {

namespace {

// Finite-difference weights on arbitrary nodes (Fornberg's recursion).
// Returns weights for the m-th derivative at x0 over the given nodes.
std::vector<double> fd_weights(double x0, std::span<const double> nodes, int m) {
    const int n = static_cast<int>(nodes.size());
    std::vector<double> c(static_cast<std::size_t>(n) * (m + 1), 0.0);
    auto at = [&](int i, int j) -> double& { return c[static_cast<std::size_t>(i) * (m + 1) + j]; };
    double c1 = 1.0;
    double c4 = nodes[0] - x0;
    at(0, 0) = 1.0;
    for (int i = 1; i < n; ++i) {
        const int mn = std::min(i, m);
        double c2 = 1.0;
        const double c5 = c4;
        c4 = nodes[i] - x0;
        for (int j = 0; j < i; ++j) {
            const double c3 = nodes[i] - nodes[j];
            c2 *= c3;
            if (j == i - 1) {
                for (int s = mn; s >= 1; --s) {
                    at(i, s) = c1 * (s * at(i - 1, s - 1) - c5 * at(i - 1, s)) / c2;
                }
                at(i, 0) = -c1 * c5 * at(i - 1, 0) / c2;
            }
            for (int s = mn; s >= 1; --s) {
                at(j, s) = (c4 * at(j, s) - s * at(j, s - 1)) / c3;
            }
            at(j, 0) = c4 * at(j, 0) / c3;
        }
        c1 = c2;
    }
    std::vector<double> w(n);
    for (int i = 0; i < n; ++i) w[i] = at(i, m);
    return w;
}

// Banded matrix with fixed bandwidth (kl = ku = 3 covers the one-sided
// boundary rows). Stored row-major over the band.
struct Banded {
    int n = 0;
    static constexpr int kBand = 3;
    std::vector<double> a;  // n rows x (2*kBand+1) diagonals

    explicit Banded(int size) : n(size), a(static_cast<std::size_t>(size) * (2 * kBand + 1), 0.0) {}

    double& at(int i, int j) { return a[static_cast<std::size_t>(i) * (2 * kBand + 1) + (j - i + kBand)]; }
    double get(int i, int j) const {
        const int d = j - i + kBand;
        if (d < 0 || d > 2 * kBand) return 0.0;
        return a[static_cast<std::size_t>(i) * (2 * kBand + 1) + d];
    }

    // In-place LU without pivoting (rows here are strongly diagonally
    // dominant); throws on a vanishing pivot.
    void factor() {
        for (int k = 0; k < n - 1; ++k) {
            const double piv = at(k, k);
            if (piv == 0.0 || !std::isfinite(piv)) {
                throw std::runtime_error("cn_solve: singular banded factorization at row " +
                                         std::to_string(k));
            }
            const int iend = std::min(n - 1, k + kBand);
            const int jend = std::min(n - 1, k + kBand);
            for (int i = k + 1; i <= iend; ++i) {
                const double m = get(i, k) / piv;
                if (m == 0.0) continue;
                at(i, k) = m;
                for (int j = k + 1; j <= jend; ++j) {
                    at(i, j) -= m * get(k, j);
                }
            }
        }
    }

    void solve(std::vector<double>& rhs) const {
        for (int i = 1; i < n; ++i) {
            const int j0 = std::max(0, i - kBand);
            double s = rhs[i];
            for (int j = j0; j < i; ++j) s -= get(i, j) * rhs[j];
            rhs[i] = s;
        }
        for (int i = n - 1; i >= 0; --i) {
            const int j1 = std::min(n - 1, i + kBand);
            double s = rhs[i];
            for (int j = i + 1; j <= j1; ++j) s -= get(i, j) * rhs[j];
            rhs[i] = s / get(i, i);
        }
    }
};

// Spatial operator L f = a(v) f_vv + b(v) f_v + c(v) f as per-row stencils.
struct Operator {
    std::vector<int> first;              // first node index of each row stencil
    std::vector<std::vector<double>> w;  // stencil weights per row

    void apply(std::span<const double> f, std::vector<double>& out) const {
        const int n = static_cast<int>(first.size());
        for (int i = 0; i < n; ++i) {
            double s = 0.0;
            for (std::size_t j = 0; j < w[i].size(); ++j) {
                s += w[i][j] * f[static_cast<std::size_t>(first[i]) + j];
            }
            out[i] = s;
        }
    }
};

// Interior rows and the v_max row discretize the spatial operator
//   L f = (sigma^2 v / 2) f_vv + (-sigma^2 lambda - k v) f_v - (C / v) f,
// the v_max row one-sidedly. The v_min row instead pins the regular local
// behavior: the operator's indicial equation at v = 0 has the positive root
// s = eta + lambda + 1/2, so the solution obeys v f_v - s f -> 0 there; the
// row is that homogeneous constraint, discretized one-sidedly. No artificial
// Dirichlet data enters either boundary.
struct Discretization {
    Operator op;                  // rows 1 .. n-1 (row 0 unused)
    std::vector<double> robin;    // constraint weights for row 0 (3 nodes)
};

Discretization build_discretization(const std::vector<double>& v, const HestonParams& p,
                                    const DerivedConstants& c) {
    const int n = static_cast<int>(v.size());
    const double sigma2 = p.sigma * p.sigma;
    Discretization d;
    d.op.first.resize(n);
    d.op.w.resize(n);
    for (int i = 1; i < n; ++i) {
        const double av = 0.5 * sigma2 * v[i];
        const double bv = -sigma2 * c.lambda - p.k * v[i];
        const double cv = -c.big_c / v[i];
        int lo;
        int len;
        if (i == n - 1) {
            lo = n - 4;
            len = 4;  // one-sided, second order for f_vv
        } else {
            lo = i - 1;
            len = 3;
        }
        std::span<const double> nodes(v.data() + lo, static_cast<std::size_t>(len));
        const auto w1 = fd_weights(v[i], nodes, 1);
        const auto w2 = fd_weights(v[i], nodes, 2);
        std::vector<double> row(static_cast<std::size_t>(len), 0.0);
        for (int j = 0; j < len; ++j) {
            row[j] = av * w2[j] + bv * w1[j];
        }
        row[i - lo] += cv;
        d.op.first[i] = lo;
        d.op.w[i] = std::move(row);
    }
    d.op.first[0] = 0;
    d.op.w[0] = {};  // row 0 is the constraint below

    // positive indicial root from the coefficients themselves, so the
    // degenerate C = 0 case correctly selects s = 0 (f flat at the boundary)
    const double half = c.lambda + 0.5;
    const double s_regular = half + std::sqrt(half * half + 2.0 * c.big_c / sigma2);
    std::span<const double> nodes(v.data(), 3);
    const auto w1 = fd_weights(v[0], nodes, 1);
    d.robin = {v[0] * w1[0] - s_regular, v[0] * w1[1], v[0] * w1[2]};
    return d;
}

} // namespace

std::vector<double> grid_v_nodes(const GridSpec& grid) {
    check_grid(grid);
    const int n = grid.n_v;
    std::vector<double> v(n);
    if (grid.stretching == Stretching::None) {
        const double h = (grid.v_max - grid.v_min) / (n - 1);
        for (int i = 0; i < n; ++i) v[i] = grid.v_min + h * i;
        v[n - 1] = grid.v_max;
        return v;
    }
    // log-spaced nodes: the solution behaves like a power of v near v_min,
    // so uniform resolution per decade keeps the relative error flat
    const double lr = std::log(grid.v_max / grid.v_min);
    for (int i = 0; i < n; ++i) {
        v[i] = grid.v_min * std::exp(lr * static_cast<double>(i) / (n - 1));
    }
    v[n - 1] = grid.v_max;
    return v;
}

GridSpec default_grid(const HestonParams& params, double tau_max, int n_v, int n_tau) {
    GridSpec grid{};
    grid.v_min = 1e-4 * params.theta;
    grid.v_max = params.theta +
                 10.0 * params.sigma * std::sqrt(params.theta / (2.0 * params.k));
    grid.n_v = n_v;
    grid.tau_max = tau_max;
    grid.n_tau = n_tau;
    grid.stretching = Stretching::Geometric;
    return grid;
}

void check_grid(const GridSpec& grid) {
    if (!(grid.v_min > 0.0)) throw std::domain_error("grid: v_min > 0 required");
    if (!(grid.v_max > grid.v_min)) throw std::domain_error("grid: v_max > v_min required");
    if (grid.n_v < 16) throw std::domain_error("grid: n_v >= 16 required");
    if (grid.n_tau < 16) throw std::domain_error("grid: n_tau >= 16 required");
    if (!(grid.tau_max > 0.0)) throw std::domain_error("grid: tau_max > 0 required");
}

double pde_residual(const ValueFn& f, const HestonParams& p, const DerivedConstants& c,
                    double v, double tau, double h_v, double h_tau) {
    if (!(h_v > 0.0) || !(h_tau > 0.0)) {
        throw std::domain_error("pde_residual: step sizes must be positive");
    }
    if (v - h_v <= 0.0 || tau - h_tau <= 0.0) {
        throw std::domain_error("pde_residual: stencil leaves the domain");
    }
    const double f0 = f(v, tau);
    const double fp = f(v + h_v, tau);
    const double fm = f(v - h_v, tau);
    const double ft_p = f(v, tau + h_tau);
    const double ft_m = f(v, tau - h_tau);

    const double f_vv = (fp - 2.0 * f0 + fm) / (h_v * h_v);
    const double f_v = (fp - fm) / (2.0 * h_v);
    const double f_tau = (ft_p - ft_m) / (2.0 * h_tau);

    const double sigma2 = p.sigma * p.sigma;
    const double drift = -sigma2 * c.lambda - p.k * v;
    // f_t = -f_tau
    return 0.5 * sigma2 * v * f_vv + drift * f_v - c.big_c / v * f0 - f_tau;
}

ResidualReport residual_report(const ValueFn& f, const HestonParams& p,
                               const DerivedConstants& c,
                               const std::vector<std::pair<double, double>>& points,
                               double h_v, double h_tau) {
    if (points.empty()) throw std::domain_error("residual_report: no points");
    ResidualReport report{};
    report.h_v = h_v;
    report.h_tau = h_tau;
    double sum_sq = 0.0;
    std::vector<double> orders;
    orders.reserve(points.size());
    for (const auto& [v, tau] : points) {
        const double r1 = pde_residual(f, p, c, v, tau, h_v, h_tau);
        const double mag = std::abs(r1);
        sum_sq += mag * mag;
        if (mag > report.max_abs_residual) {
            report.max_abs_residual = mag;
            report.worst_v = v;
            report.worst_tau = tau;
        }
        // the shrink order is read off one octave up, where truncation still
        // dominates the finite-difference rounding noise
        const double r2 = pde_residual(f, p, c, v, tau, 2.0 * h_v, 2.0 * h_tau);
        const double r4 = pde_residual(f, p, c, v, tau, 4.0 * h_v, 4.0 * h_tau);
        if (r2 != 0.0) orders.push_back(std::log2(std::abs(r4 / r2)));
    }
    report.l2_residual = std::sqrt(sum_sq / points.size());
    if (!orders.empty()) {
        std::nth_element(orders.begin(), orders.begin() + orders.size() / 2, orders.end());
        report.richardson_order = orders[orders.size() / 2];
    }
    return report;
}

PdeSurface cn_solve(const HestonParams& p, const DerivedConstants& c, const GridSpec& grid) {
    check_grid(grid);
    const int n = grid.n_v;
    PdeSurface surface;
    surface.v = grid_v_nodes(grid);
    surface.tau.resize(grid.n_tau + 1);
    surface.f.assign(static_cast<std::size_t>(grid.n_tau + 1) * n, 1.0);

    const Discretization disc = build_discretization(surface.v, p, c);
    const Operator& op = disc.op;
    // quadratically graded time levels: the flat terminal data meets the
    // singular C/v coefficient at tau = 0, and small early steps resolve
    // that corner layer
    for (int m = 0; m <= grid.n_tau; ++m) {
        const double s = static_cast<double>(m) / grid.n_tau;
        surface.tau[m] = grid.tau_max * s * s;
    }

    auto assemble = [&](double theta_dt) {
        Banded mat(n);
        for (int j = 0; j < 3; ++j) mat.at(0, j) = disc.robin[j];
        for (int i = 1; i < n; ++i) {
            mat.at(i, i) = 1.0;
            for (std::size_t j = 0; j < op.w[i].size(); ++j) {
                mat.at(i, op.first[i] + static_cast<int>(j)) -= theta_dt * op.w[i][j];
            }
        }
        mat.factor();
        return mat;
    };

    std::vector<double> f(surface.f.begin(), surface.f.begin() + n);
    std::vector<double> lf(n);
    std::vector<double> rhs(n);

    for (int m = 1; m <= grid.n_tau; ++m) {
        const double dt = surface.tau[m] - surface.tau[m - 1];
        // (I - dt/2 L) serves implicit Euler on half steps and CN on the full step
        const Banded lhs = assemble(0.5 * dt);
        if (m == 1) {
            // Rannacher startup: two implicit-Euler half steps
            for (int half = 0; half < 2; ++half) {
                rhs = f;
                rhs[0] = 0.0;  // the boundary constraint row has no time term
                lhs.solve(rhs);
                f = rhs;
            }
        } else {
            op.apply(f, lf);
            for (int i = 1; i < n; ++i) rhs[i] = f[i] + 0.5 * dt * lf[i];
            rhs[0] = 0.0;
            lhs.solve(rhs);
            f = rhs;
        }
        for (int i = 0; i < n; ++i) {
            if (!std::isfinite(f[i])) {
                throw std::runtime_error(
                    "cn_solve: non-finite value during march at tau = " +
                    std::to_string(surface.tau[m]) + ", node " + std::to_string(i) +
                    " (dt = " + std::to_string(surface.tau[m] - surface.tau[m - 1]) + ", n_v = " + std::to_string(n) + ")");
            }
            surface.f[static_cast<std::size_t>(m) * n + i] = f[i];
        }
    }
    return surface;
}

InteriorBand default_interior_band(const HestonParams& params, const GridSpec& grid) {
    return {std::max(grid.v_min, 0.05 * params.theta), 0.8 * grid.v_max,
            0.05 * grid.tau_max};
}

CnComparison compare_cn_closed_form(const PdeSurface& surface, const ValueFn& closed_form,
                                    const InteriorBand& band) {
    CnComparison cmp{};
    for (std::size_t m = 1; m < surface.tau.size(); ++m) {
        if (surface.tau[m] < band.tau_min) continue;
        for (std::size_t i = 0; i < surface.v.size(); ++i) {
            if (surface.v[i] < band.v_lo || surface.v[i] > band.v_hi) continue;
            const double fc = closed_form(surface.v[i], surface.tau[m]);
            const double rel = std::abs(surface.at(m, i) - fc) / std::abs(fc);
            ++cmp.n_compared;
            if (rel > cmp.max_rel_error) {
                cmp.max_rel_error = rel;
                cmp.worst_v = surface.v[i];
                cmp.worst_tau = surface.tau[m];
            }
        }
    }
    return cmp;
}

void write_surface_csv(std::ostream& os, const PdeSurface& surface, const ValueFn& closed_form) {
    os << "v,tau,f_numeric,f_closed_form,rel_error\n";
    char buf[512];
    for (std::size_t m = 0; m < surface.tau.size(); ++m) {
        for (std::size_t i = 0; i < surface.v.size(); ++i) {
            const double fn = surface.at(m, i);
            const double fc = surface.tau[m] == 0.0 ? 1.0 : closed_form(surface.v[i], surface.tau[m]);
            const double rel = std::abs(fn - fc) / std::abs(fc);
            std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%.17g,%.17g,%.17g\n", surface.v[i],
                          surface.tau[m], fn, fc, rel);
            os << buf;
        }
    }
}

} // namespace hestopt
