#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "spinchain/errors.hpp"
#include "spinchain/experiment.hpp"

using namespace spinchain;

namespace {

struct CommonArgs {
    std::string config_path;
    std::string out_path;
    std::optional<long long> seed;
    std::optional<int> threads;
    std::optional<int> dephase_samples;
    std::optional<std::string> method;
    std::optional<std::string> displace;
    std::optional<double> chain_spacing_nm;
    std::optional<double> t2_us;
};

void add_common(CLI::App* cmd, CommonArgs& args, bool config_required = true) {
    auto* opt = cmd->add_option("--config", args.config_path, "experiment config JSON");
    if (config_required) opt->required();
    cmd->add_option("--out", args.out_path, "output path (default: stdout)");
    cmd->add_option("--seed", args.seed, "override the master seed");
    cmd->add_option("--threads", args.threads, "worker threads (0 = hardware)");
    cmd->add_option("--dephase-samples", args.dephase_samples,
                    "timing-offset samples for averaged populations (1 = single shot)");
    cmd->add_option("--method", args.method, "exact or two_level")
        ->check(CLI::IsMember({"exact", "two_level"}));
    cmd->add_option("--displace", args.displace, "fixed displacement site:v, e.g. 4:-0.05");
    cmd->add_option("--chain-spacing-nm", args.chain_spacing_nm,
                    "enable inter-chain pulse corrections at this spacing");
    cmd->add_option("--t2-us", args.t2_us, "transverse relaxation time for lmax");
}

ExperimentConfig resolve(const CommonArgs& args) {
    ExperimentConfig cfg =
        args.config_path.empty() ? ExperimentConfig{} : load_experiment_config(args.config_path);
    if (args.seed) cfg.noise.seed = static_cast<std::uint64_t>(*args.seed);
    if (args.threads) cfg.threads = *args.threads;
    if (args.dephase_samples) {
        if (*args.dephase_samples < 1) throw config_error("--dephase-samples: must be >= 1");
        cfg.dephase_samples = *args.dephase_samples;
    }
    if (args.method) cfg.method = *args.method == "exact" ? Method::exact : Method::two_level;
    if (args.displace) {
        const auto colon = args.displace->find(':');
        if (colon == std::string::npos)
            throw config_error("--displace: expected site:v, e.g. 4:-0.05");
        FixedDisplacement d;
        try {
            d.site = std::stoi(args.displace->substr(0, colon));
            d.v = std::stod(args.displace->substr(colon + 1));
        } catch (const std::exception&) {
            throw config_error("--displace: expected site:v, e.g. 4:-0.05");
        }
        cfg.displace = d;
    }
    if (args.chain_spacing_nm) cfg.chain_spacing_nm = *args.chain_spacing_nm;
    if (args.t2_us) cfg.t2_us = *args.t2_us;
    return cfg;
}

void emit(const std::string& text, const std::string& out_path) {
    if (out_path.empty()) {
        std::cout << text;
        return;
    }
    std::ofstream out(out_path, std::ios::binary);
    if (!out) throw config_error("cannot open output file " + out_path);
    out << text;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"entanglement protocol toolkit for dipole-coupled spin chains"};
    app.require_subcommand(1);

    CommonArgs pulses_args, run_args, sweep_args, ensemble_args, estimate_args, lmax_args, fit_args;
    auto* pulses = app.add_subcommand("pulses", "write the protocol pulse schedule CSV");
    add_common(pulses, pulses_args);
    auto* run = app.add_subcommand("run", "run one chain through the protocol (JSON result)");
    add_common(run, run_args);
    auto* sweep = app.add_subcommand("sweep", "simulate single chains across a sweep (CSV)");
    add_common(sweep, sweep_args);
    auto* ensemble = app.add_subcommand("ensemble", "Monte Carlo chain ensembles across a sweep (CSV)");
    add_common(ensemble, ensemble_args);
    auto* estimate = app.add_subcommand("estimate", "evaluate the analytic error budget (CSV)");
    add_common(estimate, estimate_args);
    auto* lmax = app.add_subcommand("lmax", "T2-limited chain length budget (JSON)");
    add_common(lmax, lmax_args);

    std::string fit_in, fit_x, fit_y, fit_model = "power_law";
    auto* fit = app.add_subcommand("fit", "fit scaling laws to a sweep CSV (JSON)");
    add_common(fit, fit_args, false);
    fit->add_option("--in", fit_in, "input CSV produced by sweep/ensemble/estimate")->required();
    fit->add_option("--x", fit_x, "x column name")->required();
    fit->add_option("--y", fit_y, "y column name")->required();
    fit->add_option("--model", fit_model, "linear or power_law")
        ->check(CLI::IsMember({"linear", "power_law"}));

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_name() == "CallForHelp" || e.get_name() == "CallForAllHelp")
            return app.exit(e);
        app.exit(e);
        return 2;
    }

    try {
        if (pulses->parsed()) {
            emit(cmd_pulses(resolve(pulses_args)), pulses_args.out_path);
        } else if (run->parsed()) {
            emit(cmd_run(resolve(run_args)), run_args.out_path);
        } else if (sweep->parsed()) {
            emit(cmd_sweep(resolve(sweep_args)), sweep_args.out_path);
        } else if (ensemble->parsed()) {
            emit(cmd_ensemble(resolve(ensemble_args)), ensemble_args.out_path);
        } else if (estimate->parsed()) {
            emit(cmd_estimate(resolve(estimate_args)), estimate_args.out_path);
        } else if (lmax->parsed()) {
            emit(cmd_lmax(resolve(lmax_args)), lmax_args.out_path);
        } else if (fit->parsed()) {
            std::ifstream in(fit_in);
            if (!in) throw config_error("fit: cannot open input file " + fit_in);
            std::ostringstream os;
            os << in.rdbuf();
            const FitModel model = fit_model == "linear" ? FitModel::linear : FitModel::power_law;
            emit(cmd_fit(resolve(fit_args), os.str(), model, fit_x, fit_y), fit_args.out_path);
        }
    } catch (const config_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const resource_limit_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
