#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "spinchain/ensemble.hpp"
#include "spinchain/fitting.hpp"
#include "spinchain/model.hpp"

namespace spinchain {

// Configuration problem (bad JSON, bad field, missing file): CLI exit code 2.
struct config_error : std::invalid_argument {
    explicit config_error(const std::string& msg) : std::invalid_argument(msg) {}
};

// Chain parameters as they appear at the I/O boundary: ordinary frequencies
// in MHz, converted to angular rad/us on ingestion.
struct ChainParams {
    int n_qubits = 2;
    double omega0_mhz = 500.0;
    double delta_omega_mhz = 141.0;
    double coupling_mhz = -52.0;  // J/(2 pi); negative for the perpendicular field geometry
    double spacing_nm = 2.2;
    int suppression_k = 1;
    double omega_hadamard_mhz = 0.0;  // 0 picks alpha * |delta_omega|
    double theta_rad = kPi / 2.0;

    ChainConfig to_internal() const;
};

struct SweepSpec {
    std::string variable;  // alpha | inv_alpha | L | v_bar | xi
    std::vector<double> values;
};

struct FixedDisplacement {
    int site = 0;
    double v = 0.0;  // signed step in units of the spacing
};

struct ExperimentConfig {
    ChainParams chain;
    NoiseModel noise;
    std::optional<SweepSpec> sweep;
    Method method = Method::exact;
    int ensemble_chains = 1;
    int ensemble_realizations = 1;
    int threads = 1;
    // timing-offset samples for the population-averaged measurement; 1 runs
    // the protocol as a single shot (phase-sensitive at first order in alpha)
    int dephase_samples = 16;
    std::optional<FixedDisplacement> displace;
    std::optional<double> chain_spacing_nm;
    std::optional<double> t2_us;
};

// Parse and validate a JSON config; messages name the offending field.
ExperimentConfig parse_experiment_config(const std::string& json_text);
ExperimentConfig load_experiment_config(const std::string& path);

// Canonical one-line JSON of the fully resolved config; re-running any
// command from this string reproduces its output byte for byte.
std::string resolved_config_json(const ExperimentConfig& cfg);

// Chain and noise model at one sweep point.
ChainConfig chain_at(const ExperimentConfig& cfg, const std::string& variable, double value);
NoiseModel noise_at(const ExperimentConfig& cfg, const std::string& variable, double value);

// Commands; each returns the full output file content.
std::string cmd_pulses(const ExperimentConfig& cfg);
std::string cmd_run(const ExperimentConfig& cfg);       // RunResult JSON
std::string cmd_sweep(const ExperimentConfig& cfg);     // single-chain CSV
std::string cmd_ensemble(const ExperimentConfig& cfg);  // Monte Carlo CSV
std::string cmd_estimate(const ExperimentConfig& cfg);  // analytic-budget CSV
std::string cmd_lmax(const ExperimentConfig& cfg);      // JSON
std::string cmd_fit(const ExperimentConfig& cfg, const std::string& csv_text, FitModel model,
                    const std::string& x_column, const std::string& y_column);  // JSON

// Extract the embedded config line from a CSV produced by the commands above.
std::string config_json_from_csv_header(const std::string& csv_text);

}  // namespace spinchain
