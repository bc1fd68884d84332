#include "spinchain/experiment.hpp"

#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <mutex>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "spinchain/dynamics.hpp"
#include "spinchain/estimators.hpp"
#include "spinchain/protocol.hpp"

namespace spinchain {

namespace {

using nlohmann::json;

double num_field(const json& j, const std::string& where, const std::string& key, double fallback,
                 bool required = false) {
    if (!j.contains(key)) {
        if (required) throw config_error(where + "." + key + ": required field is missing");
        return fallback;
    }
    if (!j[key].is_number()) throw config_error(where + "." + key + ": expected a number");
    return j[key].get<double>();
}

int int_field(const json& j, const std::string& where, const std::string& key, int fallback,
              bool required = false) {
    if (!j.contains(key)) {
        if (required) throw config_error(where + "." + key + ": required field is missing");
        return fallback;
    }
    if (!j[key].is_number_integer()) throw config_error(where + "." + key + ": expected an integer");
    return j[key].get<int>();
}

std::string fmt(double x) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.16e", x);
    return buf;
}

void run_indexed(long total, int threads, const std::function<void(long)>& work) {
    int n = threads > 0 ? threads : static_cast<int>(std::thread::hardware_concurrency());
    if (n < 1) n = 1;
    if (n == 1 || total <= 1) {
        for (long w = 0; w < total; ++w) work(w);
        return;
    }
    std::atomic<long> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    std::vector<std::thread> pool;
    for (int t = 0; t < n; ++t)
        pool.emplace_back([&]() {
            try {
                for (long w = next.fetch_add(1); w < total; w = next.fetch_add(1)) work(w);
            } catch (...) {
                std::lock_guard<std::mutex> lock(failure_mutex);
                if (!failure) failure = std::current_exception();
                next.store(total);
            }
        });
    for (auto& th : pool) th.join();
    if (failure) std::rethrow_exception(failure);
}

const std::vector<std::string> kSweepVariables = {"alpha", "inv_alpha", "L", "v_bar", "xi"};

PulseSequence build_sequence(const ExperimentConfig& cfg, const ChainConfig& chain) {
    if (cfg.chain_spacing_nm && std::isfinite(*cfg.chain_spacing_nm)) {
        const ChainGeometry geom = ChainGeometry::make(chain, *cfg.chain_spacing_nm);
        return entanglement_protocol(chain, geom);
    }
    return entanglement_protocol(chain);
}

SpinSystem build_system(const ExperimentConfig& cfg, const ChainConfig& chain) {
    SpinSystem sys = SpinSystem::ideal_chain(chain);
    if (cfg.displace) {
        if (cfg.displace->site < 0 || cfg.displace->site >= chain.n_qubits)
            throw config_error("displace.site: out of range for the configured chain");
        const double v = cfg.displace->v;
        sys = sys.displaced(cfg.displace->site, v, v * chain.delta_omega);
    }
    return sys;
}

}  // namespace

ChainConfig ChainParams::to_internal() const {
    ChainConfig c;
    c.n_qubits = n_qubits;
    c.omega0 = mhz_to_rad_us(omega0_mhz);
    c.delta_omega = mhz_to_rad_us(delta_omega_mhz);
    c.coupling = mhz_to_rad_us(coupling_mhz);
    c.spacing = spacing_nm;
    c.suppression_k = suppression_k;
    c.omega_hadamard = mhz_to_rad_us(omega_hadamard_mhz);
    c.field_angle = theta_rad;
    c.validate();
    return c;
}

ExperimentConfig parse_experiment_config(const std::string& json_text) {
    json root;
    try {
        root = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw config_error(std::string("config: JSON parse error at byte ") +
                           std::to_string(e.byte) + ": " + e.what());
    }
    if (!root.is_object()) throw config_error("config: top level must be a JSON object");

    ExperimentConfig cfg;
    if (!root.contains("chain") || !root["chain"].is_object())
        throw config_error("config.chain: required object is missing");
    {
        const json& c = root["chain"];
        cfg.chain.n_qubits = int_field(c, "config.chain", "L", 2, true);
        cfg.chain.omega0_mhz = num_field(c, "config.chain", "omega0_MHz", cfg.chain.omega0_mhz);
        cfg.chain.delta_omega_mhz =
            num_field(c, "config.chain", "delta_omega_MHz", cfg.chain.delta_omega_mhz);
        cfg.chain.coupling_mhz = num_field(c, "config.chain", "J_MHz", cfg.chain.coupling_mhz);
        cfg.chain.spacing_nm = num_field(c, "config.chain", "A_nm", cfg.chain.spacing_nm);
        cfg.chain.suppression_k = int_field(c, "config.chain", "K", cfg.chain.suppression_k);
        cfg.chain.omega_hadamard_mhz =
            num_field(c, "config.chain", "omega_H_MHz", cfg.chain.omega_hadamard_mhz);
        cfg.chain.theta_rad = num_field(c, "config.chain", "theta_rad", cfg.chain.theta_rad);
        if (cfg.chain.n_qubits < 1) throw config_error("config.chain.L: must be >= 1");
        if (cfg.chain.spacing_nm <= 0.0) throw config_error("config.chain.A_nm: must be > 0");
        if (cfg.chain.suppression_k < 1) throw config_error("config.chain.K: must be >= 1");
        if (cfg.chain.delta_omega_mhz == 0.0)
            throw config_error("config.chain.delta_omega_MHz: must be nonzero");
    }
    if (root.contains("noise")) {
        if (!root["noise"].is_object()) throw config_error("config.noise: expected an object");
        const json& n = root["noise"];
        cfg.noise.xi = num_field(n, "config.noise", "xi", 0.0);
        cfg.noise.v = num_field(n, "config.noise", "v", 0.0);
        cfg.noise.v_bar = num_field(n, "config.noise", "v_bar", 0.0);
        if (cfg.noise.xi < 0.0 || cfg.noise.xi > 1.0)
            throw config_error("config.noise.xi: must be in [0, 1]");
        if (cfg.noise.v < 0.0) throw config_error("config.noise.v: must be >= 0");
        if (cfg.noise.v_bar < 0.0) throw config_error("config.noise.v_bar: must be >= 0");
    }
    if (root.contains("sweep")) {
        if (!root["sweep"].is_object()) throw config_error("config.sweep: expected an object");
        const json& s = root["sweep"];
        SweepSpec sweep;
        if (!s.contains("variable") || !s["variable"].is_string())
            throw config_error("config.sweep.variable: required string is missing");
        sweep.variable = s["variable"].get<std::string>();
        bool known = false;
        for (const auto& v : kSweepVariables) known = known || v == sweep.variable;
        if (!known)
            throw config_error("config.sweep.variable: must be one of alpha, inv_alpha, L, v_bar, xi");
        if (s.contains("values")) {
            if (!s["values"].is_array() || s["values"].empty())
                throw config_error("config.sweep.values: expected a nonempty array of numbers");
            for (const auto& v : s["values"]) {
                if (!v.is_number()) throw config_error("config.sweep.values: expected numbers");
                sweep.values.push_back(v.get<double>());
            }
        } else {
            const double from = num_field(s, "config.sweep", "from", 0.0, true);
            const double to = num_field(s, "config.sweep", "to", 0.0, true);
            const int count = int_field(s, "config.sweep", "count", 0, true);
            if (count < 2) throw config_error("config.sweep.count: must be >= 2");
            std::string scale = "linear";
            if (s.contains("scale")) {
                if (!s["scale"].is_string()) throw config_error("config.sweep.scale: expected a string");
                scale = s["scale"].get<std::string>();
            }
            if (scale == "linear") {
                for (int i = 0; i < count; ++i)
                    sweep.values.push_back(from + (to - from) * i / (count - 1));
            } else if (scale == "log") {
                if (from <= 0.0 || to <= 0.0)
                    throw config_error("config.sweep: log scale requires positive endpoints");
                const double lf = std::log(from), lt = std::log(to);
                for (int i = 0; i < count; ++i)
                    sweep.values.push_back(std::exp(lf + (lt - lf) * i / (count - 1)));
            } else {
                throw config_error("config.sweep.scale: must be linear or log");
            }
        }
        cfg.sweep = std::move(sweep);
    }
    if (root.contains("method")) {
        if (!root["method"].is_string()) throw config_error("config.method: expected a string");
        const std::string m = root["method"].get<std::string>();
        if (m == "exact")
            cfg.method = Method::exact;
        else if (m == "two_level")
            cfg.method = Method::two_level;
        else
            throw config_error("config.method: must be exact or two_level");
    }
    if (root.contains("ensemble")) {
        if (!root["ensemble"].is_object()) throw config_error("config.ensemble: expected an object");
        const json& e = root["ensemble"];
        cfg.ensemble_chains = int_field(e, "config.ensemble", "chains", 1);
        cfg.ensemble_realizations = int_field(e, "config.ensemble", "realizations", 1);
        if (cfg.ensemble_chains < 1) throw config_error("config.ensemble.chains: must be >= 1");
        if (cfg.ensemble_realizations < 1)
            throw config_error("config.ensemble.realizations: must be >= 1");
    }
    if (root.contains("seed")) {
        if (!root["seed"].is_number_integer()) throw config_error("config.seed: expected an integer");
        cfg.noise.seed = root["seed"].get<std::uint64_t>();
    }
    if (root.contains("threads")) {
        cfg.threads = int_field(root, "config", "threads", 1);
        if (cfg.threads < 0) throw config_error("config.threads: must be >= 0");
    }
    if (root.contains("dephase_samples")) {
        cfg.dephase_samples = int_field(root, "config", "dephase_samples", 16);
        if (cfg.dephase_samples < 1) throw config_error("config.dephase_samples: must be >= 1");
    }
    if (root.contains("displace")) {
        if (!root["displace"].is_object()) throw config_error("config.displace: expected an object");
        FixedDisplacement d;
        d.site = int_field(root["displace"], "config.displace", "site", 0, true);
        d.v = num_field(root["displace"], "config.displace", "v", 0.0, true);
        cfg.displace = d;
    }
    if (root.contains("chain_spacing_nm")) {
        if (!root["chain_spacing_nm"].is_number())
            throw config_error("config.chain_spacing_nm: expected a number");
        cfg.chain_spacing_nm = root["chain_spacing_nm"].get<double>();
        if (*cfg.chain_spacing_nm <= 0.0)
            throw config_error("config.chain_spacing_nm: must be > 0");
    }
    if (root.contains("T2_us")) {
        if (!root["T2_us"].is_number()) throw config_error("config.T2_us: expected a number");
        cfg.t2_us = root["T2_us"].get<double>();
        if (*cfg.t2_us <= 0.0) throw config_error("config.T2_us: must be > 0");
    }
    if (root.contains("rng")) {
        if (!root["rng"].is_string() || root["rng"].get<std::string>() != "splitmix64")
            throw config_error("config.rng: only splitmix64 is supported");
    }
    if (root.contains("fluctuation_model")) {
        if (!root["fluctuation_model"].is_string() ||
            root["fluctuation_model"].get<std::string>() != "common")
            throw config_error(
                "config.fluctuation_model: only the common-mode model is implemented "
                "(gradient-proportional is reserved)");
    }
    return cfg;
}

ExperimentConfig load_experiment_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw config_error("config: cannot open file " + path);
    std::ostringstream os;
    os << in.rdbuf();
    return parse_experiment_config(os.str());
}

std::string resolved_config_json(const ExperimentConfig& cfg) {
    json root;
    root["chain"] = {{"L", cfg.chain.n_qubits},
                     {"omega0_MHz", cfg.chain.omega0_mhz},
                     {"delta_omega_MHz", cfg.chain.delta_omega_mhz},
                     {"J_MHz", cfg.chain.coupling_mhz},
                     {"A_nm", cfg.chain.spacing_nm},
                     {"K", cfg.chain.suppression_k},
                     {"omega_H_MHz", cfg.chain.omega_hadamard_mhz},
                     {"theta_rad", cfg.chain.theta_rad}};
    root["noise"] = {{"xi", cfg.noise.xi}, {"v", cfg.noise.v}, {"v_bar", cfg.noise.v_bar}};
    if (cfg.sweep) root["sweep"] = {{"variable", cfg.sweep->variable}, {"values", cfg.sweep->values}};
    root["method"] = cfg.method == Method::exact ? "exact" : "two_level";
    root["ensemble"] = {{"chains", cfg.ensemble_chains},
                        {"realizations", cfg.ensemble_realizations}};
    root["seed"] = cfg.noise.seed;
    root["dephase_samples"] = cfg.dephase_samples;
    // threads and output path are execution details: results do not depend on
    // them, and embedding them would break byte-identity across runners
    if (cfg.displace) root["displace"] = {{"site", cfg.displace->site}, {"v", cfg.displace->v}};
    if (cfg.chain_spacing_nm && std::isfinite(*cfg.chain_spacing_nm))
        root["chain_spacing_nm"] = *cfg.chain_spacing_nm;
    if (cfg.t2_us) root["T2_us"] = *cfg.t2_us;
    root["rng"] = "splitmix64";
    root["fluctuation_model"] = "common";
    return root.dump();
}

ChainConfig chain_at(const ExperimentConfig& cfg, const std::string& variable, double value) {
    ChainConfig chain = cfg.chain.to_internal();
    if (variable == "alpha" || variable == "inv_alpha") {
        const double target = variable == "alpha" ? value : 1.0 / value;
        if (target <= 0.0) throw config_error("config.sweep: alpha values must be > 0");
        const double mag = delta_omega_for_alpha(target, chain);
        chain.delta_omega = chain.delta_omega < 0.0 ? -mag : mag;
    } else if (variable == "L") {
        const int l = static_cast<int>(std::lround(value));
        if (l < 1 || std::abs(value - l) > 1e-9)
            throw config_error("config.sweep: L values must be positive integers");
        chain.n_qubits = l;
    }
    return chain;
}

NoiseModel noise_at(const ExperimentConfig& cfg, const std::string& variable, double value) {
    NoiseModel noise = cfg.noise;
    if (variable == "v_bar") {
        if (value < 0.0) throw config_error("config.sweep: v_bar values must be >= 0");
        noise.v_bar = value;
    } else if (variable == "xi") {
        if (value < 0.0 || value > 1.0) throw config_error("config.sweep: xi values must be in [0, 1]");
        noise.xi = value;
    }
    return noise;
}

std::string cmd_pulses(const ExperimentConfig& cfg) {
    const ChainConfig chain = cfg.chain.to_internal();
    const PulseSequence seq = build_sequence(cfg, chain);
    std::string out = "# config " + resolved_config_json(cfg) + "\n";
    out += pulse_schedule_csv(seq);
    return out;
}

std::string cmd_run(const ExperimentConfig& cfg) {
    if (cfg.noise.xi > 0.0 || cfg.noise.v_bar > 0.0)
        throw config_error(
            "config.noise: run is deterministic; use the ensemble command for random noise");
    const ChainConfig chain = cfg.chain.to_internal();
    const PulseSequence seq = build_sequence(cfg, chain);
    const SpinSystem sys = build_system(cfg, chain);
    RunOptions opts;
    opts.method = cfg.method;
    const RunResult res = cfg.dephase_samples > 1
                              ? run_protocol_dephased(sys, seq, opts, cfg.dephase_samples)
                              : run_protocol(sys, seq, opts);
    json j = json::parse(run_result_json(res));
    j["config"] = json::parse(resolved_config_json(cfg));
    return j.dump() + "\n";
}

std::string cmd_sweep(const ExperimentConfig& cfg) {
    if (!cfg.sweep) throw config_error("config.sweep: the sweep command needs a sweep block");
    const std::string& var = cfg.sweep->variable;
    if (var == "v_bar" || var == "xi")
        throw config_error("config.sweep: " + var + " sweeps need the ensemble command");
    if (cfg.noise.xi > 0.0 || cfg.noise.v_bar > 0.0)
        throw config_error(
            "config.noise: sweep is deterministic; use the ensemble command for random noise");

    const std::size_t n = cfg.sweep->values.size();
    std::vector<std::string> rows(n);
    run_indexed(static_cast<long>(n), cfg.threads, [&](long w) {
        const double value = cfg.sweep->values[static_cast<std::size_t>(w)];
        const ChainConfig chain = chain_at(cfg, var, value);
        const PulseSequence seq = build_sequence(cfg, chain);
        const SpinSystem sys = build_system(cfg, chain);
        RunOptions opts;
        opts.method = cfg.method;
        const RunResult res = cfg.dephase_samples > 1
                                  ? run_protocol_dephased(sys, seq, opts, cfg.dephase_samples)
                                  : run_protocol(sys, seq, opts);
        std::string row = var + "," + fmt(value) + "," + std::to_string(chain.n_qubits) + "," +
                          fmt(alpha(chain)) + "," + fmt(rad_us_to_mhz(chain.delta_omega)) + "," +
                          fmt(res.p) + "," + fmt(res.m) + "," + fmt(res.phase) + "," +
                          fmt(res.total_time) + "\n";
        rows[static_cast<std::size_t>(w)] = std::move(row);
    });

    std::string out = "# config " + resolved_config_json(cfg) + "\n";
    out += "variable,value,L,alpha,delta_omega_MHz,P,M,phase_rad,total_time_us\n";
    for (const auto& r : rows) out += r;
    return out;
}

std::string cmd_ensemble(const ExperimentConfig& cfg) {
    if (!cfg.sweep) throw config_error("config.sweep: the ensemble command needs a sweep block");
    const std::string& var = cfg.sweep->variable;
    if (cfg.displace)
        throw config_error("config.displace: fixed displacements apply to run/sweep only");

    std::string out = "# config " + resolved_config_json(cfg) + "\n";
    out += "sweep_var_name,sweep_value,M_mean,M_stderr,P_mean,P_stderr,n_real,seed\n";
    for (const double value : cfg.sweep->values) {
        const ChainConfig chain = chain_at(cfg, var, value);
        const NoiseModel noise = noise_at(cfg, var, value);
        const EnsembleResult res =
            run_ensemble(chain, noise, cfg.ensemble_chains, cfg.ensemble_realizations, cfg.method,
                         cfg.threads, cfg.dephase_samples);
        out += var + "," + fmt(value) + "," + fmt(res.m_mean) + "," + fmt(res.m_stderr) + "," +
               fmt(res.p_mean) + "," + fmt(res.p_stderr) + "," + std::to_string(res.realizations) +
               "," + std::to_string(cfg.noise.seed) + "\n";
    }
    return out;
}

std::string cmd_estimate(const ExperimentConfig& cfg) {
    if (!cfg.sweep) throw config_error("config.sweep: the estimate command needs a sweep block");
    const std::string& var = cfg.sweep->variable;

    std::string out = "# config " + resolved_config_json(cfg) + "\n";
    out +=
        "variable,value,L,alpha,inv_alpha,delta_omega_MHz,P_nr,M_nr,P_d,P_d_prime_plus,"
        "P_d_prime_minus,P_d_dprime,M_d_mean,M_total,P_total_displaced,P_int,sqrt_P_int_bound,"
        "P_osc_total,P_total_osc,M_osc,M_total_osc,alpha_opt\n";
    std::vector<std::string> warnings;
    for (const double value : cfg.sweep->values) {
        const ChainConfig chain = chain_at(cfg, var, value);
        const NoiseModel noise = noise_at(cfg, var, value);
        const int site = cfg.displace ? cfg.displace->site : -1;
        const double v = cfg.displace ? std::abs(cfg.displace->v) : noise.v;
        const double chi = cfg.chain_spacing_nm && std::isfinite(*cfg.chain_spacing_nm)
                               ? chain.spacing / *cfg.chain_spacing_nm
                               : 0.0;
        const ErrorBudget b = error_budget(chain, noise.xi, v, noise.v_bar, site, chi);
        for (const auto& w : b.warnings) {
            const std::string tagged = var + "=" + fmt(value) + ": " + w;
            warnings.push_back(tagged);
        }
        out += var + "," + fmt(value) + "," + std::to_string(chain.n_qubits) + "," + fmt(b.alpha) +
               "," + fmt(1.0 / b.alpha) + "," + fmt(rad_us_to_mhz(chain.delta_omega)) + "," +
               fmt(b.p_nr) + "," + fmt(b.m_nr) + "," + fmt(b.displacement.p_d) + "," +
               fmt(b.displacement.p_d_prime_plus) + "," + fmt(b.displacement.p_d_prime_minus) +
               "," + fmt(b.displacement.p_d_dprime) + "," + fmt(b.m_d_mean) + "," +
               fmt(b.m_total) + "," + fmt(b.p_total_displaced) + "," + fmt(b.p_int) + "," +
               fmt(b.sqrt_p_int_bound) + "," + fmt(b.p_osc_total) + "," + fmt(b.p_total_osc) +
               "," + fmt(b.m_osc) + "," + fmt(b.m_total_osc) + "," + fmt(b.alpha_opt) + "\n";
    }
    for (const auto& w : warnings) out += "# warning " + w + "\n";
    return out;
}

std::string cmd_lmax(const ExperimentConfig& cfg) {
    if (!cfg.t2_us) throw config_error("config.T2_us: the lmax command needs T2_us");
    const ChainConfig chain = cfg.chain.to_internal();
    const LmaxResult res = max_chain_length(*cfg.t2_us, chain);
    json j;
    j["rhs"] = res.rhs;
    j["L_max"] = res.l_max;
    j["L_max_zeta_estimate"] = res.l_max_zeta;
    j["lhs_exact"] = res.lhs_exact;
    j["lhs_zeta"] = res.lhs_zeta;
    j["config"] = json::parse(resolved_config_json(cfg));
    return j.dump() + "\n";
}

std::string cmd_fit(const ExperimentConfig& cfg, const std::string& csv_text, FitModel model,
                    const std::string& x_column, const std::string& y_column) {
    std::istringstream in(csv_text);
    std::string line;
    std::vector<std::string> header;
    std::vector<std::pair<double, double>> points;
    int xi = -1, yi = -1;
    double y_sign = 1.0;
    bool have_negative = false, have_positive = false;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::vector<std::string> cells;
        std::istringstream ls(line);
        std::string cell;
        while (std::getline(ls, cell, ',')) cells.push_back(cell);
        if (header.empty()) {
            header = cells;
            for (std::size_t i = 0; i < header.size(); ++i) {
                if (header[i] == x_column) xi = static_cast<int>(i);
                if (header[i] == y_column) yi = static_cast<int>(i);
            }
            if (xi < 0) throw config_error("fit: column " + x_column + " not found in input");
            if (yi < 0) throw config_error("fit: column " + y_column + " not found in input");
            continue;
        }
        if (static_cast<int>(cells.size()) <= std::max(xi, yi)) continue;
        try {
            const double x = std::stod(cells[static_cast<std::size_t>(xi)]);
            const double y = std::stod(cells[static_cast<std::size_t>(yi)]);
            have_negative = have_negative || y < 0.0;
            have_positive = have_positive || y > 0.0;
            points.emplace_back(x, y);
        } catch (const std::exception&) {
            throw config_error("fit: non-numeric cell in input row: " + line);
        }
    }
    if (model == FitModel::power_law && have_negative) {
        if (have_positive) throw config_error("fit: power-law input mixes signs");
        y_sign = -1.0;
        for (auto& [x, y] : points) y = -y;
    }
    const FitResult fit = model == FitModel::linear ? fit_linear(points) : fit_power_law(points);
    json j = json::parse(fit_result_json(fit));
    j["x_column"] = x_column;
    j["y_column"] = y_column;
    j["n_points"] = points.size();
    j["y_sign"] = y_sign;
    j["config"] = json::parse(resolved_config_json(cfg));
    return j.dump() + "\n";
}

std::string config_json_from_csv_header(const std::string& csv_text) {
    std::istringstream in(csv_text);
    std::string line;
    while (std::getline(in, line)) {
        if (line.rfind("# config ", 0) == 0) return line.substr(9);
    }
    throw config_error("no embedded config header found");
}

}  // namespace spinchain
