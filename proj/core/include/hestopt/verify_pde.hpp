#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <utility>
#include <vector>

#include "hestopt/model.hpp"

namespace hestopt {

enum class Stretching { None, Geometric };

struct GridSpec {
    double v_min;    // > 0; the C/v term is singular at v = 0
    double v_max;    // > v_min
    int n_v;         // >= 16 nodes
    double tau_max;  // > 0
    int n_tau;       // >= 16 time steps
    Stretching stretching = Stretching::Geometric;
};

// Default grid for a parameter set: v_max spans ten stationary standard
// deviations of the CIR process, v_min = 1e-4 * theta.
GridSpec default_grid(const HestonParams& params, double tau_max = 1.0,
                      int n_v = 512, int n_tau = 512);

void check_grid(const GridSpec& grid);  // throws std::domain_error

// The v nodes a grid spec resolves to (uniform, or log-spaced for the
// geometric stretching).
std::vector<double> grid_v_nodes(const GridSpec& grid);

// f(v, tau) evaluator fed to the residual stencil.
using ValueFn = std::function<double(double v, double tau)>;

// Centered second-order finite-difference evaluation of
//   (sigma^2 v / 2) f_vv + (k theta - ((1-delta)/rho) mu sigma - k v) f_v
//   - (C / v) f + f_t
// at (v, tau). The drift coefficient is computed as -sigma^2 lambda - k v,
// the same per-utility product written without rho in a denominator.
// Throws std::domain_error when the stencil leaves the domain.
double pde_residual(const ValueFn& f, const HestonParams& params,
                    const DerivedConstants& constants,
                    double v, double tau, double h_v, double h_tau);

struct ResidualReport {
    double max_abs_residual;
    double l2_residual;
    double worst_v;
    double worst_tau;
    double h_v;                // steps used
    double h_tau;
    double richardson_order;   // median observed shrink order under halving
};

// Residuals over a set of (v, tau) points at fixed steps; the Richardson
// order compares steps h and h/2 per point. Steps should sit at the
// problem's coordinate scale (say 1e-4 * v_max) so truncation, not rounding
// noise, is what the halving measures.
ResidualReport residual_report(const ValueFn& f, const HestonParams& params,
                               const DerivedConstants& constants,
                               const std::vector<std::pair<double, double>>& points,
                               double h_v, double h_tau);

struct PdeSurface {
    std::vector<double> v;    // n_v nodes
    std::vector<double> tau;  // n_tau + 1 levels, tau[0] = 0
    std::vector<double> f;    // [tau_level * n_v + v_index]

    double at(std::size_t tau_idx, std::size_t v_idx) const {
        return f[tau_idx * v.size() + v_idx];
    }
};

// Crank-Nicolson march of the terminal condition f(., tau=0) = 1 with a
// Rannacher start (two implicit half-steps) on quadratically graded time
// levels. The v_max row discretizes the PDE one-sidedly; the v_min row pins
// the regular local solution branch via the operator's indicial exponent.
// No artificial Dirichlet data enters either boundary. Throws a runtime
// error with step diagnostics if the march goes non-finite.
PdeSurface cn_solve(const HestonParams& params, const DerivedConstants& constants,
                    const GridSpec& grid);

// CSV export with columns v,tau,f_numeric,f_closed_form,rel_error,
// 17 significant digits.
void write_surface_csv(std::ostream& os, const PdeSurface& surface,
                       const ValueFn& closed_form);

struct CnComparison {
    double max_rel_error = 0.0;
    double worst_v = 0.0;
    double worst_tau = 0.0;
    std::int64_t n_compared = 0;
};

// Region over which the numerical surface is compared against the closed
// form: away from the truncated v boundaries and the initial corner layer.
struct InteriorBand {
    double v_lo;
    double v_hi;
    double tau_min;
};

// Default comparison region: v in [0.05 theta, 0.8 v_max] (where the
// variance process lives; the decades below 0.05 theta exist on the grid to
// resolve the singular layer, not to be read off), tau past the first 5%.
InteriorBand default_interior_band(const HestonParams& params, const GridSpec& grid);

CnComparison compare_cn_closed_form(const PdeSurface& surface, const ValueFn& closed_form,
                                    const InteriorBand& band);

} // namespace hestopt
