// hestopt: evaluate the closed-form optimal investment policy under the
// Heston model, sweep surfaces to CSV, and run the PDE / Monte Carlo
// verification suites.
//
// Conventions: all rates are per year, times in years. The wealth equation
// is dW = alpha dX with no financing term (no risk-free rate).

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "hestopt/model.hpp"
#include "hestopt/model_json.hpp"
#include "hestopt/policy.hpp"
#include "hestopt/verify_mc.hpp"
#include "hestopt/verify_pde.hpp"
#include "hestopt/version.hpp"
#include "manifest.hpp"

namespace {

using nlohmann::ordered_json;
using namespace hestopt;

struct CommonArgs {
    std::string config_path;
    int threads = 1;

    std::optional<double> mu, k, theta, sigma, rho;
    std::optional<std::string> utility_type;
    std::optional<double> gamma, c;
};

ordered_json load_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::invalid_argument("cannot open config file: " + path);
    ordered_json cfg;
    try {
        cfg = ordered_json::parse(in);
    } catch (const nlohmann::json::parse_error& err) {
        throw std::invalid_argument("config does not parse: " + std::string(err.what()));
    }
    if (!cfg.is_object()) throw std::invalid_argument("config must be a JSON object");
    for (const auto& item : cfg.items()) {
        const std::string& key = item.key();
        if (key != "model" && key != "utility" && key != "grid" && key != "mc") {
            throw std::invalid_argument("unknown config section \"" + key + "\"");
        }
    }
    return cfg;
}

// Composes the model-module document {mu,...,utility:{...}} from the config
// sections plus flag overrides, parses and validates it.
ModelInputs resolve_model(const ordered_json& cfg, const CommonArgs& args,
                          ordered_json& resolved) {
    ordered_json doc = cfg.contains("model") ? cfg.at("model") : ordered_json::object();
    if (!doc.is_object()) throw std::invalid_argument("\"model\" section must be an object");
    if (cfg.contains("utility")) doc["utility"] = cfg.at("utility");

    auto set = [&](const char* name, const std::optional<double>& v) {
        if (v) doc[name] = *v;
    };
    set("mu", args.mu);
    set("k", args.k);
    set("theta", args.theta);
    set("sigma", args.sigma);
    set("rho", args.rho);
    if (args.utility_type) {
        doc["utility"] = ordered_json::object();
        doc["utility"]["type"] = *args.utility_type;
    }
    if (args.gamma) doc["utility"]["gamma"] = *args.gamma;
    if (args.c) doc["utility"]["c"] = *args.c;

    ModelInputs inputs = parse_model_inputs(doc.dump());
    const auto violations = validate(inputs.params, inputs.utility);
    if (!violations.empty()) {
        std::string msg = "model validation failed:";
        for (const auto& v : violations) msg += "\n  - " + v;
        throw std::domain_error(msg);
    }
    resolved["model"] = {{"mu", inputs.params.mu},   {"k", inputs.params.k},
                         {"theta", inputs.params.theta}, {"sigma", inputs.params.sigma},
                         {"rho", inputs.params.rho}};
    resolved["utility"] = doc["utility"];
    return inputs;
}

struct GridArgs {
    std::optional<double> v_min, v_max, tau_max;
    std::optional<int> n_v, n_tau;
    std::optional<std::string> stretching;
};

GridSpec resolve_grid(const ordered_json& cfg, const GridArgs& args, const HestonParams& params,
                      ordered_json& resolved) {
    GridSpec grid = default_grid(params);
    if (cfg.contains("grid")) {
        const auto& g = cfg.at("grid");
        if (!g.is_object()) throw std::invalid_argument("\"grid\" section must be an object");
        for (const auto& item : g.items()) {
            const std::string& key = item.key();
            if (key == "v_min") grid.v_min = item.value().get<double>();
            else if (key == "v_max") grid.v_max = item.value().get<double>();
            else if (key == "n_v") grid.n_v = item.value().get<int>();
            else if (key == "tau_max") grid.tau_max = item.value().get<double>();
            else if (key == "n_tau") grid.n_tau = item.value().get<int>();
            else if (key == "stretching") {
                const auto s = item.value().get<std::string>();
                if (s == "none") grid.stretching = Stretching::None;
                else if (s == "geometric") grid.stretching = Stretching::Geometric;
                else throw std::invalid_argument("grid.stretching must be \"none\" or \"geometric\"");
            } else {
                throw std::invalid_argument("unknown field \"" + key + "\" in grid section");
            }
        }
    }
    if (args.v_min) grid.v_min = *args.v_min;
    if (args.v_max) grid.v_max = *args.v_max;
    if (args.n_v) grid.n_v = *args.n_v;
    if (args.tau_max) grid.tau_max = *args.tau_max;
    if (args.n_tau) grid.n_tau = *args.n_tau;
    if (args.stretching) {
        if (*args.stretching == "none") grid.stretching = Stretching::None;
        else if (*args.stretching == "geometric") grid.stretching = Stretching::Geometric;
        else throw std::invalid_argument("--stretching must be \"none\" or \"geometric\"");
    }
    try {
        check_grid(grid);
    } catch (const std::domain_error& err) {
        throw std::domain_error(std::string("grid validation failed: ") + err.what());
    }
    resolved["grid"] = {{"v_min", grid.v_min},     {"v_max", grid.v_max},
                        {"n_v", grid.n_v},         {"tau_max", grid.tau_max},
                        {"n_tau", grid.n_tau},
                        {"stretching", grid.stretching == Stretching::None ? "none" : "geometric"}};
    return grid;
}

struct McArgs {
    std::optional<std::int64_t> n_paths;
    std::optional<int> n_steps;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> scheme;
    std::optional<bool> antithetic;
};

McConfig resolve_mc(const ordered_json& cfg, const McArgs& args, ordered_json& resolved) {
    McConfig mc{};
    bool have_seed = false;
    if (cfg.contains("mc")) {
        const auto& m = cfg.at("mc");
        if (!m.is_object()) throw std::invalid_argument("\"mc\" section must be an object");
        for (const auto& item : m.items()) {
            const std::string& key = item.key();
            if (key == "n_paths") mc.n_paths = item.value().get<std::int64_t>();
            else if (key == "n_steps") mc.n_steps = item.value().get<int>();
            else if (key == "seed") { mc.seed = item.value().get<std::uint64_t>(); have_seed = true; }
            else if (key == "scheme") {
                const auto s = item.value().get<std::string>();
                if (s == "full-truncation-euler") mc.scheme = CirScheme::FullTruncationEuler;
                else if (s == "exact-cir") mc.scheme = CirScheme::ExactCir;
                else throw std::invalid_argument(
                    "mc.scheme must be \"full-truncation-euler\" or \"exact-cir\"");
            } else if (key == "antithetic") mc.antithetic = item.value().get<bool>();
            else throw std::invalid_argument("unknown field \"" + key + "\" in mc section");
        }
    }
    if (args.n_paths) mc.n_paths = *args.n_paths;
    if (args.n_steps) mc.n_steps = *args.n_steps;
    if (args.seed) { mc.seed = *args.seed; have_seed = true; }
    if (args.scheme) {
        if (*args.scheme == "full-truncation-euler") mc.scheme = CirScheme::FullTruncationEuler;
        else if (*args.scheme == "exact-cir") mc.scheme = CirScheme::ExactCir;
        else throw std::invalid_argument("--scheme must be \"full-truncation-euler\" or \"exact-cir\"");
    }
    if (args.antithetic) mc.antithetic = *args.antithetic;
    if (!have_seed) {
        throw std::domain_error("mc runs require an explicit seed (mc.seed in the config "
                                "or --seed); time-derived defaults are not provided");
    }
    try {
        check_mc_config(mc);
    } catch (const std::domain_error& err) {
        throw std::domain_error(std::string("mc validation failed: ") + err.what());
    }
    resolved["mc"] = {{"n_paths", mc.n_paths},
                      {"n_steps", mc.n_steps},
                      {"seed", mc.seed},
                      {"scheme", mc.scheme == CirScheme::ExactCir ? "exact-cir"
                                                                  : "full-truncation-euler"},
                      {"antithetic", mc.antithetic}};
    return mc;
}

void write_text_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << text;
}

// ---------------------------------------------------------------------------

int cmd_evaluate(const CommonArgs& common, const EvaluationPoint& point,
                 const std::string& out_path) {
    const ordered_json cfg = load_config(common.config_path);
    ordered_json resolved;
    const ModelInputs inputs = resolve_model(cfg, common, resolved);
    const DerivedConstants constants = derive_constants(inputs.params, inputs.utility);
    const PolicyOutput out = optimal_control(point, inputs.utility, constants, inputs.params);

    ordered_json doc;
    doc["command"] = "evaluate";
    doc["point"] = {{"w", point.w}, {"x", point.x}, {"v", point.v},
                    {"t", point.t}, {"T", point.T}, {"tau", point.tau()}};
    doc["constants"] = {{"delta", constants.delta},
                        {"big_c", constants.big_c},
                        {"lambda", constants.lambda},
                        {"eta", constants.eta}};
    doc["result"] = {{"f", out.f},
                     {"fv_over_f", out.fv_over_f},
                     {"bellman", out.bellman},
                     {"control", out.control},
                     {"myopic_term", out.myopic_term},
                     {"hedging_term", out.hedging_term},
                     {"psi", out.psi}};
    const std::string text = doc.dump(2) + "\n";
    std::cout << text;
    if (!out_path.empty()) {
        write_text_file(out_path, text);
        resolved["point"] = doc["point"];
        cli::write_manifest("evaluate", resolved, {common.config_path}, {out_path});
    }
    return 0;
}

int cmd_surface(const CommonArgs& common, const GridArgs& grid_args, double w, double x,
                const std::string& out_path) {
    const ordered_json cfg = load_config(common.config_path);
    ordered_json resolved;
    const ModelInputs inputs = resolve_model(cfg, common, resolved);
    const DerivedConstants constants = derive_constants(inputs.params, inputs.utility);
    const GridSpec grid = resolve_grid(cfg, grid_args, inputs.params, resolved);

    // the same node layout the PDE verification uses
    const std::vector<double> v_nodes = grid_v_nodes(grid);

    std::ostringstream os;
    os << "v,tau,f,fv_over_f,control_myopic,control_hedging,control_total\n";
    char buf[512];
    for (double vi : v_nodes) {
        for (int j = 0; j <= grid.n_tau; ++j) {
            const double tau = grid.tau_max * j / grid.n_tau;
            EvaluationPoint point{w, x, vi, 0.0, tau};
            const PolicyOutput p = optimal_control(point, inputs.utility, constants, inputs.params);
            std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n", vi,
                          tau, p.f, p.fv_over_f, p.myopic_term, p.hedging_term, p.control);
            os << buf;
        }
    }
    write_text_file(out_path, os.str());
    resolved["point_context"] = {{"w", w}, {"x", x}};
    cli::write_manifest("surface", resolved, {common.config_path}, {out_path});
    std::cout << "surface written to " << out_path << " (" << v_nodes.size() << " x "
              << (grid.n_tau + 1) << " rows)\n";
    return 0;
}

struct Check {
    std::string name;
    double tolerance;
    double observed;
    bool pass;
    // present on the statistical checks
    std::optional<double> estimate;
    std::optional<double> std_error;
    std::optional<double> reference;
};

void add_check(std::vector<Check>& checks, std::string name, double tol, double observed,
               bool pass) {
    checks.push_back({std::move(name), tol, observed, pass, {}, {}, {}});
}

void add_mc_check(std::vector<Check>& checks, std::string name, const McEstimate& est,
                  double reference) {
    const double dev = std::abs(est.mean - reference) / est.std_error;
    checks.push_back({std::move(name), 3.0, dev, dev <= 3.0, est.mean, est.std_error, reference});
}

void run_pde_checks(const ModelInputs& inputs, const DerivedConstants& constants,
                    const GridSpec& grid, const std::string& surface_csv,
                    std::vector<Check>& checks) {
    const auto closed_form = [&](double v, double tau) {
        return value_factor(constants, inputs.params, v, tau);
    };

    // residual of the closed form on a deterministic interior point set
    std::vector<std::pair<double, double>> points;
    for (int i = 1; i <= 4; ++i) {
        for (int j = 1; j <= 4; ++j) {
            const double v = inputs.params.theta * (0.5 + 0.5 * i);
            const double tau = grid.tau_max * (0.15 + 0.2 * j);
            points.emplace_back(v, tau);
        }
    }
    const ResidualReport report = residual_report(closed_form, inputs.params, constants, points,
                                                  1e-4 * grid.v_max, 1e-4);
    add_check(checks, "pde_residual_max", 1e-6, report.max_abs_residual,
              report.max_abs_residual <= 1e-6);
    add_check(checks, "pde_residual_order", 2.0, report.richardson_order,
              report.richardson_order >= 1.5 && report.richardson_order <= 2.5);

    const PdeSurface surface = cn_solve(inputs.params, constants, grid);
    const CnComparison cmp = compare_cn_closed_form(
        surface, closed_form, default_interior_band(inputs.params, grid));
    add_check(checks, "cn_vs_closed_form", 5e-4, cmp.max_rel_error, cmp.max_rel_error <= 5e-4);

    if (!surface_csv.empty()) {
        std::ofstream out(surface_csv, std::ios::binary);
        if (!out) throw std::runtime_error("cannot write " + surface_csv);
        write_surface_csv(out, surface, closed_form);
    }
}

void run_mc_checks(const ModelInputs& inputs, const McConfig& mc, int threads,
                   const std::string& samples_csv, std::vector<Check>& checks) {
    const HestonParams& p = inputs.params;
    const double v0 = p.theta;
    const double tau = 0.5;

    // CIR terminal mean against the exact expectation
    const auto vT = simulate_cir(p, v0, tau, mc, threads);
    const double exact_mean = p.theta + (v0 - p.theta) * std::exp(-p.k * tau);
    add_mc_check(checks, "cir_terminal_mean_3se", estimate_mean(vT, mc.antithetic), exact_mean);

    // terminal price moment E X_T = x0 e^{mu tau}
    const auto heston = simulate_heston(p, 1.0, v0, tau, mc, threads);
    add_mc_check(checks, "price_terminal_mean_3se", estimate_mean(heston.x_terminal, mc.antithetic),
                 std::exp(p.mu * tau));

    // Feynman-Kac bond against the closed form
    const BondCheckResult bond = bond_check(p, inputs.utility, v0, tau, mc, threads);
    checks.push_back({"bond_feynman_kac_3se", 3.0, bond.deviation_in_se,
                      bond.deviation_in_se <= 3.0, bond.estimate.mean, bond.estimate.std_error,
                      bond.closed_form});

    // policy optimality probe
    const EvaluationPoint point{1.0, 1.0, v0, 0.0, tau};
    const std::vector<double> scalings{0.0, 0.5, 1.0, 2.0};
    const UtilityCheckResult uc = utility_check(point, inputs.utility, p, mc, scalings, threads);
    double worst_dom = -1e300;
    for (std::size_t i = 0; i < uc.rows.size(); ++i) {
        if (uc.rows[i].scaling == 1.0) {
            checks.push_back({"policy_bellman_match_3se", 3.0,
                              std::abs(uc.rows[i].utility.mean - uc.bellman_value) /
                                  uc.rows[i].utility.std_error,
                              std::abs(uc.rows[i].utility.mean - uc.bellman_value) <=
                                  3.0 * uc.rows[i].utility.std_error,
                              uc.rows[i].utility.mean, uc.rows[i].utility.std_error,
                              uc.bellman_value});
        } else {
            // positive means the perturbed control beat the optimum
            const double dom = uc.diff_std_error[i] > 0.0
                                   ? uc.diff_mean[i] / uc.diff_std_error[i]
                                   : (uc.diff_mean[i] > 0.0 ? 1e300 : 0.0);
            worst_dom = std::max(worst_dom, dom);
        }
    }
    add_check(checks, "policy_not_dominated_3se", 3.0, worst_dom, worst_dom <= 3.0);

    if (!samples_csv.empty()) {
        std::ofstream out(samples_csv, std::ios::binary);
        if (!out) throw std::runtime_error("cannot write " + samples_csv);
        out << "kind,index,value\n";
        char buf[128];
        auto dump = [&](const char* kind, const std::vector<double>& xs) {
            for (std::size_t i = 0; i < xs.size(); ++i) {
                std::snprintf(buf, sizeof(buf), "%s,%zu,%.17g\n", kind, i, xs[i]);
                out << buf;
            }
        };
        dump("cir_v_terminal", vT);
        dump("heston_x_terminal", heston.x_terminal);
    }
}

int cmd_verify(const CommonArgs& common, const GridArgs& grid_args, const McArgs& mc_args,
               const std::string& which, const std::string& report_path,
               const std::string& surface_csv, const std::string& samples_csv) {
    const ordered_json cfg = load_config(common.config_path);
    ordered_json resolved;
    const ModelInputs inputs = resolve_model(cfg, common, resolved);
    const DerivedConstants constants = derive_constants(inputs.params, inputs.utility);

    std::vector<Check> checks;
    if (which == "pde" || which == "all") {
        const GridSpec grid = resolve_grid(cfg, grid_args, inputs.params, resolved);
        run_pde_checks(inputs, constants, grid, surface_csv, checks);
    }
    if (which == "mc" || which == "all") {
        const McConfig mc = resolve_mc(cfg, mc_args, resolved);
        run_mc_checks(inputs, mc, common.threads, samples_csv, checks);
    }

    ordered_json report;
    report["command"] = "verify";
    report["which"] = which;
    for (const auto& section : {"model", "utility", "grid", "mc"}) {
        if (resolved.contains(section)) report[section] = resolved[section];
    }
    auto& arr = report["checks"] = ordered_json::array();
    bool all_pass = true;
    for (const auto& check : checks) {
        ordered_json entry = {{"name", check.name},
                              {"tolerance", check.tolerance},
                              {"observed", check.observed},
                              {"pass", check.pass}};
        if (check.estimate) {
            entry["estimate"] = *check.estimate;
            entry["std_error"] = *check.std_error;
            entry["reference"] = *check.reference;
        }
        arr.push_back(entry);
        all_pass = all_pass && check.pass;
    }
    report["all_pass"] = all_pass;

    const std::string text = report.dump(2) + "\n";
    std::cout << text;
    std::vector<std::string> outputs;
    if (!report_path.empty()) {
        write_text_file(report_path, text);
        outputs.push_back(report_path);
    }
    if (!surface_csv.empty()) outputs.push_back(surface_csv);
    if (!samples_csv.empty()) outputs.push_back(samples_csv);
    if (!outputs.empty()) {
        cli::write_manifest("verify", resolved, {common.config_path}, outputs);
    }
    return all_pass ? 0 : 1;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{
        "hestopt " + std::string(kVersion) +
        " - closed-form optimal investment under the Heston model.\n"
        "Rates are per year, times in years; the wealth equation dW = alpha dX\n"
        "carries no financing term."};
    app.require_subcommand(1);

    CommonArgs common;
    GridArgs grid_args;
    McArgs mc_args;
    EvaluationPoint point{1.0, 1.0, 0.0, 0.0, 0.0};
    std::string out_path;
    std::string report_path;
    std::string which = "all";
    double surface_w = 1.0, surface_x = 1.0;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", common.config_path, "JSON config with sections model/utility/grid/mc")
            ->required();
        sub->add_option("--threads", common.threads, "worker threads (never affects results)")
            ->check(CLI::PositiveNumber);
        sub->add_option("--mu", common.mu, "override model.mu");
        sub->add_option("--k", common.k, "override model.k");
        sub->add_option("--theta", common.theta, "override model.theta");
        sub->add_option("--sigma", common.sigma, "override model.sigma");
        sub->add_option("--rho", common.rho, "override model.rho");
        sub->add_option("--utility", common.utility_type, "override utility.type (power|exponential)");
        sub->add_option("--gamma", common.gamma, "override utility.gamma");
        sub->add_option("--c", common.c, "override utility.c");
    };
    auto add_grid = [&](CLI::App* sub) {
        sub->add_option("--v-min", grid_args.v_min, "override grid.v_min");
        sub->add_option("--v-max", grid_args.v_max, "override grid.v_max");
        sub->add_option("--n-v", grid_args.n_v, "override grid.n_v");
        sub->add_option("--tau-max", grid_args.tau_max, "override grid.tau_max");
        sub->add_option("--n-tau", grid_args.n_tau, "override grid.n_tau");
        sub->add_option("--stretching", grid_args.stretching, "override grid.stretching");
    };

    CLI::App* evaluate = app.add_subcommand("evaluate", "value, control and constants at a point");
    add_common(evaluate);
    evaluate->add_option("--w", point.w, "wealth")->capture_default_str();
    evaluate->add_option("--x", point.x, "asset price")->capture_default_str();
    evaluate->add_option("--v", point.v, "instantaneous variance")->required();
    evaluate->add_option("--t", point.t, "current time")->capture_default_str();
    evaluate->add_option("--T", point.T, "horizon")->required();
    evaluate->add_option("--out", out_path, "also write the JSON to a file (with manifest)");

    CLI::App* surface = app.add_subcommand("surface", "sweep f and the control over a (v,tau) grid");
    add_common(surface);
    add_grid(surface);
    surface->add_option("--w", surface_w, "wealth context for the control columns")
        ->capture_default_str();
    surface->add_option("--x", surface_x, "price context for the control columns")
        ->capture_default_str();
    surface->add_option("--out", out_path, "output CSV path")->required();

    CLI::App* verify = app.add_subcommand("verify", "run the PDE / Monte Carlo verification suites");
    std::string surface_csv;
    std::string samples_csv;
    add_common(verify);
    add_grid(verify);
    verify->add_option("--which", which, "pde | mc | all")
        ->check(CLI::IsMember({"pde", "mc", "all"}))
        ->capture_default_str();
    verify->add_option("--report", report_path, "write the JSON report to a file (with manifest)");
    verify->add_option("--surface-csv", surface_csv,
                       "export the Crank-Nicolson surface vs the closed form as CSV");
    verify->add_option("--samples-csv", samples_csv, "dump terminal ensemble samples as CSV");
    verify->add_option("--n-paths", mc_args.n_paths, "override mc.n_paths");
    verify->add_option("--n-steps", mc_args.n_steps, "override mc.n_steps");
    verify->add_option("--seed", mc_args.seed, "override mc.seed");
    verify->add_option("--scheme", mc_args.scheme, "override mc.scheme");
    verify->add_option("--antithetic", mc_args.antithetic, "override mc.antithetic");

    try {
        app.parse(argc, argv);
        if (evaluate->parsed()) return cmd_evaluate(common, point, out_path);
        if (surface->parsed()) return cmd_surface(common, grid_args, surface_w, surface_x, out_path);
        if (verify->parsed())
            return cmd_verify(common, grid_args, mc_args, which, report_path, surface_csv,
                              samples_csv);
        return 0;
    } catch (const CLI::ParseError& err) {
        return app.exit(err);
    } catch (const std::invalid_argument& err) {
        std::cerr << "configuration error: " << err.what() << "\n";
        return 2;
    } catch (const std::domain_error& err) {
        std::cerr << "validation error: " << err.what() << "\n";
        return 2;
    } catch (const std::exception& err) {
        std::cerr << "numerical error: " << err.what() << "\n";
        return 3;
    }
}
