#pragma once

// Command-line front end: wires configs to the library and emits
// reproducible JSON/CSV artifacts.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "critpeak/asymptotics.hpp"
#include "critpeak/pohozaev.hpp"
#include "critpeak/radial_solver.hpp"
#include "critpeak/reduced_system.hpp"

namespace critpeak::cli {

struct RunConfig {
    std::string command;  // constants | lemma-check | reduced | branch | pohozaev | uniqueness
    int N = 4;
    double s = 1.0;
    std::vector<double> eps_list;          // --eps (repeatable)
    std::optional<std::pair<double, double>> eps_range;  // --eps-range lo:hi (hi < lo run order)
    std::string q_family = "paraboloid";   // "paraboloid" | "constant"
    double q0 = 1.0;
    double q_curvature = 1.0;              // paraboloid: Q = q0 - curv r^2
    double R = 0.9;                        // ball radius
    int M = 1600;                          // grid nodes
    double grade = 5.0;                    // grid grading exponent
    double d = 0.25;                       // ball radius for pohozaev / lemma cutoff
    int steps_per_decade = 8;
    std::string out;                       // output path ("" = stdout)
    std::string config_file;
    long seed = 0;

    void validate() const {
        if (command.empty()) throw InvalidArgument("config: no command");
        if (N < 3) throw InvalidArgument("config: N must be >= 3");
        if (!(s >= 1.0 && s < (N + 2.0) / (N - 2.0)))
            throw InvalidArgument("config: s outside [1, 2*-1)");
        if (q_family != "paraboloid" && q_family != "constant")
            throw InvalidArgument("config: Q family must be 'paraboloid' or 'constant'");
        if (!(q0 > 0.0)) throw InvalidArgument("config: Q0 must be > 0");
        if (!(R > 0.0)) throw InvalidArgument("config: R must be > 0");
        if (M < 16) throw InvalidArgument("config: M too small");
        if (!(d > 0.0)) throw InvalidArgument("config: d must be > 0");
    }
};

namespace detail {

inline void write_artifact(const RunConfig& cfg, const std::string& text) {
    if (cfg.out.empty()) {
        std::cout << text;
        return;
    }
    std::ofstream f(cfg.out, std::ios::binary);
    if (!f) throw InvalidArgument("config: cannot open output path " + cfg.out);
    f << text;
}

inline std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17e", v);
    return buf;
}

inline radial::RadialProblem make_radial_problem(const RunConfig& cfg) {
    const double curv = cfg.q_family == "constant" ? 0.0 : cfg.q_curvature;
    auto p = radial::RadialProblem::paraboloid(cfg.N, cfg.s, cfg.R, cfg.q0, curv, cfg.M,
                                               cfg.grade);
    if (curv == 0.0) p.deltaQ0 = 0.0;
    return p;
}

inline reduced::ReducedProblem make_reduced_problem(const RunConfig& cfg, double eps) {
    reduced::ReducedProblem rp;
    rp.N = cfg.N;
    rp.s = cfg.s;
    rp.eps = eps;
    reduced::PeakData pk;
    pk.location = Eigen::VectorXd::Zero(cfg.N);
    pk.q_value = cfg.q0;
    pk.gradient = Eigen::VectorXd::Zero(cfg.N);
    const double curv = cfg.q_family == "constant" ? 0.0 : cfg.q_curvature;
    if (curv <= 0.0)
        throw InvalidArgument("reduced: requires a paraboloid weight with Delta Q < 0");
    pk.laplacian = -2.0 * curv * cfg.N;
    pk.hessian = -2.0 * curv * Eigen::MatrixXd::Identity(cfg.N, cfg.N);
    rp.peaks.push_back(std::move(pk));
    return rp;
}

inline int run_constants(const RunConfig& cfg) {
    auto t = asymptotics::compute_constants(cfg.N, cfg.s);
    nlohmann::json j{{"N", t.N}, {"s", t.s},           {"A", t.A},
                     {"B", t.B}, {"omega_N", t.omega_N}, {"S", t.S},
                     {"seed", cfg.seed}};
    write_artifact(cfg, j.dump(2) + "\n");
    return 0;
}

inline int run_lemma_check(const RunConfig& cfg) {
    const std::vector<double> ladder = {100.0, 200.0, 400.0, 800.0, 1600.0};
    std::ostringstream csv;
    csv << "kind,lambda,value,leading,ratio\n";
    const double curv = cfg.q_family == "constant" ? 0.0 : cfg.q_curvature;
    WeightSpec Q = WeightSpec::paraboloid(
        cfg.N, cfg.q0, -2.0 * curv * Eigen::MatrixXd::Identity(cfg.N, cfg.N),
        Eigen::VectorXd::Zero(cfg.N));
    auto emit = [&](const std::string& kind, double lam, asymptotics::ValueWithLeading v) {
        csv << kind << ',' << fmt(lam) << ',' << fmt(v.value) << ',' << fmt(v.leading) << ','
            << fmt(v.leading != 0.0 ? v.value / v.leading : 0.0) << "\n";
    };
    for (double lam : ladder) {
        kernel::Bubble b(Eigen::VectorXd::Zero(cfg.N), lam, cfg.N);
        emit("mass_dilation", lam, asymptotics::weighted_mass_dilation(b, Q, cfg.d));
        emit("power_mass", lam, asymptotics::bubble_power_mass(b, cfg.s, cfg.d));
        emit("dilation_weighted", lam, asymptotics::dilation_weighted(b, Q, cfg.d));
        emit("subcritical_dilation", lam, asymptotics::subcritical_dilation(b, cfg.s, cfg.d));
        kernel::Bubble boff(Eigen::VectorXd::Unit(cfg.N, 0) * (0.1 / lam), lam, cfg.N);
        emit("translation_weighted", lam, asymptotics::translation_weighted(boff, Q, cfg.d));
    }
    write_artifact(cfg, csv.str());
    return 0;
}

inline int run_reduced(const RunConfig& cfg) {
    if (cfg.eps_list.empty()) throw InvalidArgument("reduced: --eps required");
    nlohmann::json out = nlohmann::json::array();
    for (double eps : cfg.eps_list) {
        auto rp = make_reduced_problem(cfg, eps);
        nlohmann::json j{{"N", cfg.N}, {"s", cfg.s}, {"eps", eps}};
        auto sol = reduced::solve_reduced(rp);
        j["regime"] = reduced::regime_name(sol.regime);
        if (sol.regime == reduced::Regime::NoSolution) {
            j["certificate"] = {{"box_lo", sol.certificate_box_lo},
                                {"box_hi", sol.certificate_box_hi},
                                {"residual_sign", sol.certificate_sign}};
        } else {
            nlohmann::json peaks = nlohmann::json::array();
            for (std::size_t k = 0; k < sol.heights.size(); ++k) {
                std::vector<double> c(sol.centers[k].data(),
                                      sol.centers[k].data() + sol.centers[k].size());
                peaks.push_back({{"center", c},
                                 {"height", sol.heights[k]},
                                 {"log_height", sol.log_heights[k]},
                                 {"prefactor", sol.prefactors[k]},
                                 {"peak_lambda", sol.peak_lambdas[k]}});
            }
            j["peaks"] = peaks;
        }
        out.push_back(j);
    }
    write_artifact(cfg, out.dump(2) + "\n");
    return 0;
}

inline int run_branch(const RunConfig& cfg) {
    if (!cfg.eps_range) throw InvalidArgument("branch: --eps-range lo:hi required");
    auto p = make_radial_problem(cfg);
    const auto t = asymptotics::compute_constants(cfg.N, std::max(cfg.s, 1.0));
    const double e_hi = std::max(cfg.eps_range->first, cfg.eps_range->second);
    const double e_lo = std::min(cfg.eps_range->first, cfg.eps_range->second);
    auto br = radial::continue_branch(p, e_hi, e_lo, cfg.steps_per_decade,
                                      [&](radial::BranchPoint& bp) {
                                          pohozaev::RadialField f(p.N, p.grid,
                                                                  bp.solution.values, p.R);
                                          auto Q = pohozaev::RadialWeight::paraboloid(
                                              cfg.q0,
                                              cfg.q_family == "constant" ? 0.0
                                                                         : cfg.q_curvature);
                                          auto rep = pohozaev::eval_dilation_identity(
                                              f, Q, bp.eps, p.s,
                                              Eigen::VectorXd::Zero(p.N), 0.5 * p.R);
                                          bp.pohozaev_residual = rep.relative_residual();
                                      });
    (void)t;
    std::ostringstream body;
    body << radial::branch_csv(br);
    body << "# stop_reason=" << radial::stop_reason_name(br.stop) << " stop_eps=" << fmt(br.stop_eps)
         << " fitted_slope=" << fmt(br.fitted_rate) << " slope_ci=" << fmt(br.fitted_rate_ci)
         << "\n";
    write_artifact(cfg, body.str());
    return 0;
}

inline int run_pohozaev(const RunConfig& cfg) {
    if (cfg.eps_list.empty()) throw InvalidArgument("pohozaev: --eps required");
    auto p = make_radial_problem(cfg);
    const double eps = cfg.eps_list.front();
    const auto t = asymptotics::compute_constants(cfg.N, std::max(cfg.s, 1.0));
    radial::detail::Discretization disc(p);
    auto guess = radial::bubble_guess(p, radial::predicted_bubble_height(p, t, eps));
    auto sol = radial::detail::solve_at_eps(disc, guess, eps);
    if (!sol.converged) throw SolveFailed("pohozaev: radial solve failed");
    pohozaev::RadialField f(p.N, p.grid, sol.u, p.R);
    auto Q = pohozaev::RadialWeight::paraboloid(cfg.q0,
                                                cfg.q_family == "constant" ? 0.0 : cfg.q_curvature);
    Eigen::VectorXd origin = Eigen::VectorXd::Zero(p.N);
    nlohmann::json out = nlohmann::json::array();
    out.push_back(
        pohozaev::eval_translation_identity(f, Q, eps, p.s, origin, cfg.d, 0).to_json());
    out.push_back(pohozaev::eval_dilation_identity(f, Q, eps, p.s, origin, cfg.d).to_json());
    write_artifact(cfg, out.dump(2) + "\n");
    return 0;
}

inline int run_uniqueness(const RunConfig& cfg) {
    if (cfg.eps_list.empty()) throw InvalidArgument("uniqueness: --eps required");
    auto p = make_radial_problem(cfg);
    const double eps = cfg.eps_list.front();
    const auto t = asymptotics::compute_constants(cfg.N, std::max(cfg.s, 1.0));
    const double lam = radial::predicted_bubble_height(p, t, eps);
    auto res = radial::uniqueness_probe(p, eps, lam, 2.0 * lam);
    nlohmann::json j{{"same", res.same}, {"sup_distance_rel", res.sup_distance_rel}};
    if (res.xi) j["linearized_residual"] = res.xi->linearized_residual;
    write_artifact(cfg, j.dump(2) + "\n");
    return 0;
}

inline void apply_json_config(RunConfig& cfg, const nlohmann::json& j,
                              const std::vector<std::string>& set_flags) {
    auto unset = [&](const std::string& name) {
        for (const auto& f : set_flags)
            if (f == name) return false;
        return true;
    };
    if (j.contains("N") && unset("N")) cfg.N = j["N"];
    if (j.contains("s") && unset("s")) cfg.s = j["s"];
    if (j.contains("eps") && unset("eps")) cfg.eps_list = j["eps"].get<std::vector<double>>();
    if (j.contains("eps-range") && unset("eps-range")) {
        auto v = j["eps-range"].get<std::vector<double>>();
        cfg.eps_range = {v.at(0), v.at(1)};
    }
    if (j.contains("Q") && unset("Q")) cfg.q_family = j["Q"];
    if (j.contains("Q0") && unset("Q0")) cfg.q0 = j["Q0"];
    if (j.contains("curvature") && unset("curvature")) cfg.q_curvature = j["curvature"];
    if (j.contains("R") && unset("R")) cfg.R = j["R"];
    if (j.contains("M") && unset("M")) cfg.M = j["M"];
    if (j.contains("grade") && unset("grade")) cfg.grade = j["grade"];
    if (j.contains("d") && unset("d")) cfg.d = j["d"];
    if (j.contains("steps-per-decade") && unset("steps-per-decade"))
        cfg.steps_per_decade = j["steps-per-decade"];
    if (j.contains("out") && unset("out")) cfg.out = j["out"];
    if (j.contains("seed") && unset("seed")) cfg.seed = j["seed"];
}

}  // namespace detail

/// Dispatch a validated config. Returns the process exit status:
/// 0 success, 2 validation error, 3 numerical failure.
inline int run(const RunConfig& cfg) {
    try {
        cfg.validate();
        if (cfg.command == "constants") return detail::run_constants(cfg);
        if (cfg.command == "lemma-check") return detail::run_lemma_check(cfg);
        if (cfg.command == "reduced") return detail::run_reduced(cfg);
        if (cfg.command == "branch") return detail::run_branch(cfg);
        if (cfg.command == "pohozaev") return detail::run_pohozaev(cfg);
        if (cfg.command == "uniqueness") return detail::run_uniqueness(cfg);
        throw InvalidArgument("unknown command: " + cfg.command);
    } catch (const InvalidArgument& e) {
        std::cerr << "validation error: " << e.what() << "\n";
        return 2;
    } catch (const NumericalError& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 3;
    }
}

/// Parse argv (CLI11) with JSON config-file merge: flags given on the
/// command line override config-file values.
inline int main(int argc, char** argv) {
    RunConfig cfg;
    CLI::App app{"critpeak: concentration analysis for the critical problem "
                 "-Laplace u = Q u^{2*-1} + eps u^s"};
    app.require_subcommand(1);
    std::vector<std::string> set_flags;
    std::string eps_range_str;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--N", cfg.N, "space dimension");
        sub->add_option("--s", cfg.s, "subcritical exponent in [1, 2*-1)");
        sub->add_option("--eps", cfg.eps_list, "epsilon value(s)");
        sub->add_option("--eps-range", eps_range_str, "epsilon range lo:hi");
        sub->add_option("--Q", cfg.q_family, "weight family: paraboloid | constant");
        sub->add_option("--Q0", cfg.q0, "weight value at the peak");
        sub->add_option("--curvature", cfg.q_curvature, "paraboloid curvature: Q = Q0 - c r^2");
        sub->add_option("--R", cfg.R, "ball radius");
        sub->add_option("--M", cfg.M, "grid nodes");
        sub->add_option("--grade", cfg.grade, "grid grading exponent");
        sub->add_option("--d", cfg.d, "concentration ball radius");
        sub->add_option("--steps-per-decade", cfg.steps_per_decade, "branch steps per eps decade");
        sub->add_option("--out", cfg.out, "output path (default stdout)");
        sub->add_option("--config", cfg.config_file, "JSON config file");
        sub->add_option("--seed", cfg.seed, "seed for randomized sampling");
    };
    for (const char* name :
         {"constants", "lemma-check", "reduced", "branch", "pohozaev", "uniqueness"})
        add_common(app.add_subcommand(name));

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);  // --help
        std::cerr << "validation error: " << e.what() << "\n";
        return 2;
    }
    CLI::App* sub = app.get_subcommands().front();
    cfg.command = sub->get_name();
    for (const auto* opt : sub->get_options())
        if (opt->count() > 0) set_flags.push_back(opt->get_name(false, true).substr(2));

    if (!cfg.config_file.empty()) {
        std::ifstream f(cfg.config_file);
        if (!f) {
            std::cerr << "validation error: cannot read config " << cfg.config_file << "\n";
            return 2;
        }
        nlohmann::json j;
        try {
            f >> j;
        } catch (const std::exception& e) {
            std::cerr << "validation error: bad JSON config: " << e.what() << "\n";
            return 2;
        }
        detail::apply_json_config(cfg, j, set_flags);
    }
    if (!eps_range_str.empty()) {
        const auto pos = eps_range_str.find(':');
        if (pos == std::string::npos) {
            std::cerr << "validation error: --eps-range expects lo:hi\n";
            return 2;
        }
        try {
            cfg.eps_range = {std::stod(eps_range_str.substr(0, pos)),
                             std::stod(eps_range_str.substr(pos + 1))};
        } catch (const std::exception&) {
            std::cerr << "validation error: --eps-range expects numbers lo:hi\n";
            return 2;
        }
    }
    return run(cfg);
}

}  // namespace critpeak::cli
